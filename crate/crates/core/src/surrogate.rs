//! Surrogate-process construction and the bootstrap-averaged periodogram.
//!
//! The surrogate `Y` is simulated so that the expectation of its raw wavelet
//! periodogram equals the bias-corrected spectrum of the observed series.
//! Averaging the periodograms of `R` independent surrogate draws yields the
//! input to the per-scale graphical lasso.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, symmetrize};
use crate::scalar::{cast, from_usize, Real};
use crate::spectral::{
    regularize_pd, time_averaged_periodogram, RawPeriodogram, SpectrumKind, WaveletSpectrum,
};
use crate::wavelet::FilterBank;

/// SplitMix64 finalizer, a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-replicate seeds derived from one base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeedPlan {
    pub base_seed: u64,
}

impl RngSeedPlan {
    pub fn new(base_seed: u64) -> Self {
        RngSeedPlan { base_seed }
    }

    /// Seed for replicate `r`. Distinct replicates map to distinct seeds
    /// because both the odd-stride offset and the finalizer are bijections.
    pub fn derive(&self, r: u64) -> u64 {
        splitmix64(
            self.base_seed
                .wrapping_add(r.wrapping_mul(0xD1B5_4A32_D192_ED03)),
        )
    }

    /// Sub-plan for an independent stream (e.g. one benchmark replicate).
    pub fn child(&self, stream: u64) -> RngSeedPlan {
        RngSeedPlan::new(splitmix64(self.derive(stream) ^ 0xA076_1D64_78BD_642F))
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Surrogate spectrum together with lower-triangular transfer roots
/// `V_j V_j^T = S_j`.
#[derive(Debug, Clone)]
pub struct SurrogateSpec<T: Real> {
    pub spectrum: WaveletSpectrum<T>,
    pub roots: Vec<DMatrix<T>>,
}

impl<T: Real> SurrogateSpec<T> {
    /// Regularizes every scale to positive definiteness and stores its
    /// Cholesky root.
    pub fn from_spectrum(spectrum: WaveletSpectrum<T>, eps_rel: T) -> Result<Self> {
        let mut scales = Vec::with_capacity(spectrum.levels());
        let mut roots = Vec::with_capacity(spectrum.levels());
        for (idx, m) in spectrum.scales.iter().enumerate() {
            let reg = regularize_pd(m, eps_rel);
            let root = cholesky_lower(&reg).ok_or_else(|| Error::NotPositiveDefinite {
                context: format!("surrogate spectrum at scale {}", idx + 1),
            })?;
            scales.push(reg);
            roots.push(root);
        }
        Ok(SurrogateSpec {
            spectrum: WaveletSpectrum::new(spectrum.kind, scales),
            roots,
        })
    }

    /// Builds a spec directly from transfer matrices; the spectrum is
    /// `V_j V_j^T`. Zero matrices are allowed.
    pub fn from_roots(roots: Vec<DMatrix<T>>) -> Self {
        let scales = roots
            .iter()
            .map(|v| symmetrize(&(v * v.transpose())))
            .collect();
        SurrogateSpec {
            spectrum: WaveletSpectrum::new(SpectrumKind::SHatY, scales),
            roots,
        }
    }

    pub fn levels(&self) -> usize {
        self.roots.len()
    }

    pub fn channels(&self) -> usize {
        self.roots.first().map_or(0, DMatrix::nrows)
    }
}

/// `S^(Y)_j = sum_l (C^-1)_{jl} S^(X)_l`, regularized, with Cholesky roots.
pub fn surrogate_spectrum<T: Real>(
    s_hat_x: &WaveletSpectrum<T>,
    c_inv: &DMatrix<T>,
    eps_rel: T,
) -> Result<SurrogateSpec<T>> {
    let mixed = s_hat_x.mix(c_inv, SpectrumKind::SHatY)?;
    SurrogateSpec::from_spectrum(mixed, eps_rel)
}

/// Draws `Y_t = sum_j sum_k V_j psi_{j,t-k} eps_{j,k}` with iid standard
/// normal innovations and circular convolution in `k`.
pub fn simulate_mvlsw<T: Real>(
    spec: &SurrogateSpec<T>,
    bank: &FilterBank<T>,
    seed: u64,
) -> Result<DMatrix<T>> {
    if spec.levels() != bank.levels() {
        return Err(Error::config(format!(
            "surrogate spectrum has {} scales but a series of length {} has {}",
            spec.levels(),
            bank.len(),
            bank.levels()
        )));
    }
    let len = bank.len();
    let p = spec.channels();
    let mut rng = rng_from_seed(seed);
    let mut y = DMatrix::<T>::zeros(len, p);
    for (idx, root) in spec.roots.iter().enumerate() {
        // Innovations are drawn for every scale, even degenerate ones, so the
        // random stream does not depend on the spectrum values.
        let eps = DMatrix::from_fn(len, p, |_, _| cast::<T>(standard_normal(&mut rng)));
        if root.iter().all(|v| *v == T::zero()) {
            continue;
        }
        let z = eps * root.transpose();
        for c in 0..p {
            let col = bank.synthesize(idx + 1, z.column(c).as_slice());
            for (t, v) in col.into_iter().enumerate() {
                y[(t, c)] += v;
            }
        }
    }
    Ok(y)
}

/// Averages the time-averaged periodograms of `replicates` surrogate draws.
pub fn bootstrap_average_periodogram<T: Real>(
    spec: &SurrogateSpec<T>,
    bank: &FilterBank<T>,
    replicates: usize,
    seeds: RngSeedPlan,
) -> Result<WaveletSpectrum<T>> {
    let seed_list: Vec<u64> = (1..=replicates as u64).map(|r| seeds.derive(r)).collect();
    average_over_seeds(spec, bank, &seed_list)
}

/// Replicate average for an explicit list of seeds. The reduction runs in
/// list order so the result does not depend on the thread schedule.
pub fn average_over_seeds<T: Real>(
    spec: &SurrogateSpec<T>,
    bank: &FilterBank<T>,
    seeds: &[u64],
) -> Result<WaveletSpectrum<T>> {
    if seeds.is_empty() {
        return Err(Error::config(
            "the number of bootstrap replicates must be at least 1",
        ));
    }
    let per_replicate: Vec<WaveletSpectrum<T>> = seeds
        .par_iter()
        .map(|&seed| {
            let y = simulate_mvlsw(spec, bank, seed)?;
            let coeffs = bank.coefficients(&y)?;
            Ok(time_averaged_periodogram(&RawPeriodogram::new(&coeffs)))
        })
        .collect::<Result<_>>()?;
    let inv = T::one() / from_usize::<T>(seeds.len());
    let levels = spec.levels();
    let p = spec.channels();
    let scales = (0..levels)
        .map(|j| {
            let mut acc = DMatrix::zeros(p, p);
            for rep in &per_replicate {
                acc += &rep.scales[j];
            }
            acc * inv
        })
        .collect();
    Ok(WaveletSpectrum::new(
        SpectrumKind::AveragedPeriodogram,
        scales,
    ))
}
