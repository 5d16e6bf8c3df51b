//! Worked examples checked against independent oracles or Monte Carlo.

use nalgebra::DMatrix;
use rayon::prelude::*;

use wavecig::fourier::{fourier_ts_glasso, smoothed_spectral_matrix, FourierConfig};
use wavecig::harness::forecast::fit_gnar;
use wavecig::harness::metrics::edge_rates;
use wavecig::simulate::{
    block_varma, block_varma_graph, erdos_renyi, noise_precision_var, oracle_cig, ring, ring_var,
    GnarModel, VarmaModel,
};
use wavecig::spectral::{
    bias_correct, time_averaged_periodogram, RawPeriodogram, SpectrumKind, WaveletSpectrum,
};
use wavecig::surrogate::{
    bootstrap_average_periodogram, simulate_mvlsw, surrogate_spectrum, RngSeedPlan, SurrogateSpec,
};
use wavecig::wavelet::{autocorrelation_inner_product, build_filters, FilterBank, WaveletFamily};
use wavecig::Graph;

fn haar_bank(levels: usize) -> FilterBank<f64> {
    FilterBank::new(
        &build_filters::<f64>(WaveletFamily::Haar, levels).unwrap(),
        1 << levels,
    )
    .unwrap()
}

fn white(len: usize, p: usize, seed: u64) -> DMatrix<f64> {
    VarmaModel::var(Vec::new(), DMatrix::identity(p, p))
        .simulate(len, seed)
        .unwrap()
}

fn mean_matrix(ms: &[DMatrix<f64>]) -> DMatrix<f64> {
    ms.iter()
        .fold(DMatrix::zeros(ms[0].nrows(), ms[0].ncols()), |a, m| a + m)
        / ms.len() as f64
}

/// Lower-triangular roots that vanish beyond scale 5, so that every active
/// filter is much shorter than the series.
fn test_roots(p: usize, levels: usize) -> Vec<DMatrix<f64>> {
    roots_with(p, levels, 1.0, 0.5)
}

fn roots_with(p: usize, levels: usize, diag: f64, lower: f64) -> Vec<DMatrix<f64>> {
    (1..=levels)
        .map(|j| {
            if j > 5 {
                return DMatrix::zeros(p, p);
            }
            let s = 1.0 / j as f64;
            DMatrix::from_fn(p, p, |a, b| match a.cmp(&b) {
                std::cmp::Ordering::Equal if a == 0 => s,
                std::cmp::Ordering::Equal => diag * s,
                std::cmp::Ordering::Greater => lower * s,
                std::cmp::Ordering::Less => 0.0,
            })
        })
        .collect()
}

#[test]
fn white_noise_periodogram_is_flat() {
    // Unit-norm filters give E d^2 = 1 at every scale.
    let bank = haar_bank(12);
    let per_seed: Vec<Vec<f64>> = (0..10u64)
        .map(|seed| {
            let coeffs = bank.coefficients(&white(4096, 1, seed)).unwrap();
            let avg = time_averaged_periodogram(&RawPeriodogram::new(&coeffs));
            (1..=3).map(|j| avg.scale(j)[(0, 0)]).collect()
        })
        .collect();
    for j in 0..3 {
        let mean = per_seed.iter().map(|v| v[j]).sum::<f64>() / 10.0;
        assert!((mean - 1.0).abs() < 3.0 / 64.0, "scale {}: {mean}", j + 1);
    }
}

#[test]
fn scale_one_spectrum_gives_negative_half_lag_one_autocovariance() {
    let levels = 13;
    let bank = haar_bank(levels);
    let mut roots = vec![DMatrix::zeros(1, 1); levels];
    roots[0] = DMatrix::identity(1, 1);
    let spec = SurrogateSpec::from_roots(roots);
    let acov: Vec<f64> = (0..10u64)
        .map(|seed| {
            let y = simulate_mvlsw(&spec, &bank, seed).unwrap();
            let n = y.nrows();
            (0..n - 1).map(|t| y[(t, 0)] * y[(t + 1, 0)]).sum::<f64>() / n as f64
        })
        .collect();
    let mean = acov.iter().sum::<f64>() / acov.len() as f64;
    assert!((mean + 0.5).abs() < 0.05, "lag-1 autocovariance {mean}");
}

/// Monte Carlo draws of the bias-corrected spectrum at scales 1-5, with and
/// without eigenvalue clipping, for a known spectrum at `J = 8`.
fn known_spectrum_draws(seeds: u64) -> (Vec<DMatrix<f64>>, Vec<[DMatrix<f64>; 2]>) {
    let levels = 8;
    let bank = haar_bank(levels);
    let inner =
        autocorrelation_inner_product(&build_filters::<f64>(WaveletFamily::Haar, levels).unwrap())
            .unwrap();
    // Strongly coherent channels keep the relative error of the cross term
    // comparable to the diagonal.
    let roots = roots_with(2, levels, 0.5, 1.0);
    let truth: Vec<DMatrix<f64>> = roots.iter().take(5).map(|v| v * v.transpose()).collect();
    let spec = SurrogateSpec::from_roots(roots);
    let draws = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let y = simulate_mvlsw(&spec, &bank, 100 + seed).unwrap();
            let avg =
                time_averaged_periodogram(&RawPeriodogram::new(&bank.coefficients(&y).unwrap()));
            let raw = avg.mix(inner.c_inv(), SpectrumKind::SHatX).unwrap();
            let clipped = bias_correct(&avg, inner.c_inv(), 1e-6).unwrap();
            (1..=5)
                .map(|j| [raw.scale(j).clone(), clipped.scale(j).clone()])
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let per_scale = (0..5)
        .map(|j| {
            let raw: Vec<_> = draws.iter().map(|d| d[j][0].clone()).collect();
            let clipped: Vec<_> = draws.iter().map(|d| d[j][1].clone()).collect();
            [stack(&raw), stack(&clipped)]
        })
        .collect();
    (truth, per_scale)
}

/// Entrywise mean and standard error, packed as a 2P x P matrix.
fn stack(ms: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = ms.len() as f64;
    let mean = mean_matrix(ms);
    let var = ms
        .iter()
        .fold(DMatrix::zeros(mean.nrows(), mean.ncols()), |a, m| {
            a + (m - &mean).map(|v| v * v)
        })
        / (n - 1.0);
    let se = var.map(|v| (v / n).sqrt());
    let p = mean.nrows();
    DMatrix::from_fn(
        2 * p,
        p,
        |r, c| if r < p { mean[(r, c)] } else { se[(r - p, c)] },
    )
}

#[test]
fn bias_correction_is_unbiased_for_a_known_spectrum() {
    let (truth, stats) = known_spectrum_draws(400);
    for (j, (tru, [raw, _])) in truth.iter().zip(&stats).enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let (mean, se) = (raw[(a, b)], raw[(a + 2, b)]);
                assert!(
                    (mean - tru[(a, b)]).abs() <= 3.0 * se,
                    "scale {}: {mean} vs {} (se {se})",
                    j + 1,
                    tru[(a, b)]
                );
            }
        }
    }
}

#[test]
fn clipped_spectrum_is_close_to_a_known_spectrum_at_fine_scales() {
    // Clipping lifts negative eigenvalues, which biases the coarser scales of
    // a short series upward; scales 1-3 stay within 10%.
    let (truth, stats) = known_spectrum_draws(2000);
    for (j, (tru, [_, clipped])) in truth.iter().zip(&stats).enumerate().take(3) {
        for a in 0..2 {
            for b in 0..2 {
                let mean = clipped[(a, b)];
                let t = tru[(a, b)];
                assert!(
                    (mean - t).abs() <= 0.1 * t.abs(),
                    "scale {}: {mean} vs {t}",
                    j + 1
                );
            }
        }
    }
}

#[test]
fn white_noise_spectrum_has_vanishing_cross_terms() {
    let levels = 10;
    let bank = haar_bank(levels);
    let inner =
        autocorrelation_inner_product(&build_filters::<f64>(WaveletFamily::Haar, levels).unwrap())
            .unwrap();
    let off: Vec<Vec<f64>> = (0..20u64)
        .map(|seed| {
            let coeffs = bank.coefficients(&white(1024, 2, 300 + seed)).unwrap();
            let avg = time_averaged_periodogram(&RawPeriodogram::new(&coeffs));
            let raw = avg.mix(inner.c_inv(), SpectrumKind::SHatX).unwrap();
            (1..=4).map(|j| raw.scale(j)[(0, 1)]).collect()
        })
        .collect();
    for j in 0..4 {
        let vals: Vec<f64> = off.iter().map(|v| v[j]).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(
            mean.abs() <= 3.0 * sd / n.sqrt(),
            "scale {}: mean {mean}, sd {sd}",
            j + 1
        );
    }
}

#[test]
fn bootstrap_average_tracks_the_observed_spectrum() {
    let levels = 12;
    let bank = haar_bank(levels);
    let inner =
        autocorrelation_inner_product(&build_filters::<f64>(WaveletFamily::Haar, levels).unwrap())
            .unwrap();
    let s_y = test_roots(3, levels);
    let s_y = WaveletSpectrum::new(
        SpectrumKind::SHatY,
        s_y.iter().map(|v| v * v.transpose()).collect(),
    );
    let s_x = s_y.mix(inner.c(), SpectrumKind::SHatX).unwrap();
    let spec = surrogate_spectrum(&s_x, inner.c_inv(), 1e-12).unwrap();
    let avg = bootstrap_average_periodogram(&spec, &bank, 50, RngSeedPlan::new(11)).unwrap();
    for j in 1..=5 {
        for (est, tru) in avg.scale(j).iter().zip(s_x.scale(j).iter()) {
            if tru.abs() >= 0.1 {
                assert!(
                    (est - tru).abs() <= 0.1 * tru.abs(),
                    "scale {j}: {est} vs {tru}"
                );
            }
        }
    }
}

#[test]
fn smoothed_white_noise_density_is_the_identity() {
    let (p, len, seeds) = (3, 1024, 10);
    let densities: Vec<_> = (0..seeds as u64)
        .map(|s| smoothed_spectral_matrix(&white(len, p, 500 + s), 16).unwrap())
        .collect();
    let l = densities[0].window_len as f64;
    let tol = 4.0 / (l * seeds as f64).sqrt();
    for w in 0..densities[0].windows() {
        for a in 0..p {
            for b in 0..p {
                let mean = densities
                    .iter()
                    .map(|d| d.matrices[w][(a, b)])
                    .sum::<num_complex::Complex<f64>>()
                    / seeds as f64;
                let target = if a == b { 1.0 } else { 0.0 };
                let err = ((mean.re - target).powi(2) + mean.im.powi(2)).sqrt();
                assert!(err <= tol, "window {w} ({a},{b}): {mean} (tol {tol})");
            }
        }
    }
}

#[test]
fn fourier_recovers_a_var_chain() {
    let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.3, 0.0, 0.0, 0.5, 0.3, 0.0, 0.0, 0.5]);
    let model = VarmaModel::var(vec![a], DMatrix::identity(3, 3));
    let truth = oracle_cig(&model).unwrap();
    assert!(truth.edge_count() > 0);
    let tpr: f64 = (0..10u64)
        .map(|seed| {
            let x = model.simulate(1024, 600 + seed).unwrap();
            let g = fourier_ts_glasso(&x, &FourierConfig::default())
                .unwrap()
                .graph;
            edge_rates(&g, &truth).unwrap().tpr
        })
        .sum::<f64>()
        / 10.0;
    assert!(tpr >= 0.8, "mean TPR {tpr}");
}

#[test]
fn erdos_renyi_edge_counts_are_binomial() {
    // Central 99% interval of Binomial(45, 0.4) from the exact pmf.
    let n = 45;
    let pmf: Vec<f64> = (0..=n)
        .map(|k| {
            let log_choose: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
            (log_choose + k as f64 * 0.4f64.ln() + (n - k) as f64 * 0.6f64.ln()).exp()
        })
        .collect();
    let mut cdf = 0.0;
    let (mut lo, mut hi) = (0, n);
    for (k, p) in pmf.iter().enumerate() {
        let before = cdf;
        cdf += p;
        if before < 0.005 && cdf >= 0.005 {
            lo = k;
        }
        if before < 0.995 && cdf >= 0.995 {
            hi = k;
        }
    }
    let inside = (0..100u64)
        .filter(|&s| (lo..=hi).contains(&erdos_renyi(10, 0.4, s).edge_count()))
        .count();
    assert!(inside >= 95, "{inside}/100 inside [{lo}, {hi}]");
}

#[test]
fn two_node_gnar_matches_yule_walker() {
    let (alpha, beta) = (0.3, 0.4);
    let g = Graph::from_edges(2, [(0, 1)]).unwrap();
    let model = GnarModel::global(g, &[alpha], vec![vec![beta]]).unwrap();
    // Gamma0 = A Gamma0 A' + I with A = [[a, b], [b, a]]; solve the 4x4 vec system.
    let a = DMatrix::from_row_slice(2, 2, &[alpha, beta, beta, alpha]);
    let kron = a.kronecker(&a);
    let lhs = DMatrix::<f64>::identity(4, 4) - kron;
    let vec_i = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
    let g0 = lhs.lu().solve(&vec_i).unwrap();
    let gamma0 = DMatrix::from_column_slice(2, 2, g0.as_slice());
    let gamma1 = &a * &gamma0;
    let samples: Vec<DMatrix<f64>> = (0..20u64)
        .map(|seed| {
            let x = model.simulate(4096, 700 + seed).unwrap();
            let n = x.nrows();
            let mut acc = DMatrix::zeros(2, 2);
            for t in 1..n {
                acc += x.row(t).transpose() * x.row(t - 1);
            }
            acc / n as f64
        })
        .collect();
    let mean = mean_matrix(&samples);
    assert!((&mean - &gamma1).amax() < 0.05, "{mean} vs {gamma1}");
}

#[test]
fn equal_coefficient_ring_var_is_the_gnar_ring() {
    let var = ring_var(&[0.7; 10]);
    let gnar = GnarModel::global(ring(10), &[0.0], vec![vec![0.7]])
        .unwrap()
        .to_var();
    assert!((&var.ar[0] - &gnar.ar[0]).amax() < 1e-15);
}

#[test]
fn oracle_graphs_of_the_var_designs() {
    assert_eq!(oracle_cig(&block_varma()).unwrap(), block_varma_graph());

    let two = VarmaModel::var(
        vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.3, 0.0, 0.5])],
        DMatrix::identity(2, 2),
    );
    assert!(oracle_cig(&two).unwrap().has_edge(0, 1));

    for seed in 0..5 {
        let var = noise_precision_var(8, seed);
        let omega = var.sigma.clone().try_inverse().unwrap();
        let expected = Graph::from_edges(
            8,
            (0..8)
                .flat_map(|a| (a + 1..8).map(move |b| (a, b)))
                .filter(|&(a, b)| omega[(a, b)].abs() > 1e-9),
        )
        .unwrap();
        assert_eq!(oracle_cig(&var).unwrap(), expected);
    }
}

#[test]
fn least_squares_recovers_the_network_coefficient() {
    let model = GnarModel::global(ring(10), &[0.2], vec![vec![0.5]]).unwrap();
    for seed in 0..10u64 {
        let x = model.simulate(4096, 800 + seed).unwrap();
        let fit = fit_gnar(&x, &ring(10), 0.0).unwrap();
        let b = fit.beta.unwrap();
        assert!((b - 0.5).abs() < 0.05, "seed {seed}: {b}");
    }
}
