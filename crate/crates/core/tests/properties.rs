use nalgebra::DMatrix;
use proptest::prelude::*;

use wavecig::cig::{similarity, similarity_table, support};
use wavecig::discovery::{cluster_edges, EdgeValueSet};
use wavecig::fourier::{fourier_ts_glasso, FourierConfig};
use wavecig::glasso::{select_lambda, Criterion};
use wavecig::harness::metrics::edge_rates;
use wavecig::spectral::{bias_correct, regularize_pd, SpectrumKind, WaveletSpectrum};
use wavecig::surrogate::{average_over_seeds, SurrogateSpec};
use wavecig::wavelet::{
    autocorrelation_inner_product, build_filters, ndwt_coefficients, FilterBank, WaveletFamily,
};
use wavecig::Graph;

fn family() -> impl Strategy<Value = WaveletFamily> {
    prop_oneof![
        Just(WaveletFamily::Haar),
        (2usize..=4).prop_map(WaveletFamily::Daubechies)
    ]
}

fn graph_of(p: usize) -> impl Strategy<Value = Graph> {
    proptest::collection::vec(any::<bool>(), p * (p - 1) / 2).prop_map(move |bits| {
        let pairs = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b)));
        Graph::from_edges(p, pairs.zip(bits).filter(|(_, on)| *on).map(|(e, _)| e)).unwrap()
    })
}

fn spd(p: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, p * p).prop_map(move |v| {
        let a = DMatrix::from_vec(p, p, v);
        &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * 0.2
    })
}

fn permutation(p: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..p).collect::<Vec<_>>()).prop_shuffle()
}

fn permute_matrix(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    // New index perm[i] holds old index i.
    let p = m.nrows();
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ndwt_is_linear(fam in family(), a in proptest::collection::vec(-5.0f64..5.0, 64), b in proptest::collection::vec(-5.0f64..5.0, 64)) {
        let filters = build_filters::<f64>(fam, 5).unwrap();
        let xa = DMatrix::from_vec(32, 2, a);
        let xb = DMatrix::from_vec(32, 2, b);
        let da = ndwt_coefficients(&xa, &filters).unwrap();
        let db = ndwt_coefficients(&xb, &filters).unwrap();
        let ds = ndwt_coefficients(&(&xa + &xb), &filters).unwrap();
        for j in 1..=5 {
            let diff = (ds.scale(j) - da.scale(j) - db.scale(j)).amax();
            prop_assert!(diff < 1e-12, "scale {j}: {diff}");
        }
    }

    #[test]
    fn bias_correction_inverts_beta_mixing(fam in family(), mats in proptest::collection::vec(spd(3), 5)) {
        let inner = autocorrelation_inner_product(&build_filters::<f64>(fam, 5).unwrap()).unwrap();
        let truth = WaveletSpectrum::new(SpectrumKind::SHatX, mats);
        let beta = truth.mix(inner.c(), SpectrumKind::Beta).unwrap();
        let back = bias_correct(&beta, inner.c_inv(), 1e-6).unwrap();
        for j in 1..=5 {
            let diff = (back.scale(j) - truth.scale(j)).amax();
            prop_assert!(diff < 1e-10, "scale {j}: {diff}");
        }
    }

    #[test]
    fn regularization_is_idempotent(v in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let a = DMatrix::from_vec(4, 4, v);
        let m = (&a + a.transpose()) * 0.5;
        let once = regularize_pd(&m, 1e-6);
        let twice = regularize_pd(&once, 1e-6);
        prop_assert!((&once - &twice).amax() < 1e-12);
        prop_assert!(once.clone().cholesky().is_some());
    }

    #[test]
    fn replicate_order_does_not_change_the_average(seeds in proptest::collection::vec(any::<u64>(), 2..5)) {
        let spec = SurrogateSpec::from_roots(vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.7]); 4]);
        let bank = FilterBank::new(&build_filters::<f64>(WaveletFamily::Haar, 4).unwrap(), 16).unwrap();
        let forward = average_over_seeds(&spec, &bank, &seeds).unwrap();
        let mut rev = seeds.clone();
        rev.reverse();
        let backward = average_over_seeds(&spec, &bank, &rev).unwrap();
        for j in 1..=4 {
            prop_assert!((forward.scale(j) - backward.scale(j)).amax() < 1e-12);
        }
    }

    #[test]
    fn similarity_is_a_symmetric_unit_score(pair in (2usize..8).prop_flat_map(|p| (graph_of(p), graph_of(p)))) {
        let (a, b) = pair;
        let (d_ab, s_ab) = similarity(&a, &b).unwrap();
        let (d_ba, s_ba) = similarity(&b, &a).unwrap();
        prop_assert_eq!(d_ab, d_ba);
        prop_assert_eq!(s_ab, s_ba);
        prop_assert!((0.0..=1.0).contains(&s_ab));
        let (_, self_score) = similarity(&a, &a).unwrap();
        if a.edge_count() > 0 {
            prop_assert!((self_score - 1.0).abs() < 1e-12);
        }
        let table = similarity_table(&[a.clone(), b.clone()]).unwrap();
        prop_assert_eq!(table[(0, 1)], table[(1, 0)]);
    }

    #[test]
    fn clustering_is_scale_invariant_and_never_adds_edges(values in proptest::collection::vec(1e-4f64..10.0, 0..20), factor in 1e-3f64..1e3) {
        let set = EdgeValueSet {
            scale: 1,
            node_count: 25,
            values: values.iter().enumerate().map(|(i, &v)| ((i, 24), v)).collect(),
        };
        let scaled = EdgeValueSet {
            values: set.values.iter().map(|&(e, v)| (e, v * factor)).collect(),
            ..set.clone()
        };
        let g = cluster_edges(&set);
        prop_assert_eq!(&g, &cluster_edges(&scaled));
        prop_assert!(g.edges().all(|e| set.values.iter().any(|(f, _)| *f == e)));
        prop_assert_eq!(&g, &cluster_edges(&set));
    }

    #[test]
    fn edge_rates_swap_roles(pair in (3usize..9).prop_flat_map(|p| (graph_of(p), graph_of(p)))) {
        let (a, b) = pair;
        let ab = edge_rates(&a, &b).unwrap();
        let ba = edge_rates(&b, &a).unwrap();
        if a.edge_count() > 0 && b.edge_count() > 0 {
            prop_assert!((ab.tpr - ba.tdr).abs() < 1e-12);
            prop_assert!((ab.tdr - ba.tpr).abs() < 1e-12);
        }
        for r in [ab, ba] {
            for v in [r.tpr, r.fpr, r.tdr] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selected_support_is_permutation_equivariant(s in spd(6), perm in permutation(6)) {
        let a = select_lambda(&s, 512, Criterion::Bic, 0.0).unwrap().estimate;
        let b = select_lambda(&permute_matrix(&s, &perm), 512, Criterion::Bic, 0.0).unwrap().estimate;
        prop_assert_eq!(support(&a).permute(&perm), support(&b));
        let adj = support(&a).adjacency();
        prop_assert_eq!(adj.transpose(), adj.clone());
        prop_assert!((0..6).all(|i| adj[(i, i)] == 0));
    }

    #[test]
    fn fourier_graph_is_permutation_equivariant(seed in any::<u64>(), perm in permutation(4)) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::<f64>::from_fn(256, 4, |_, _| StandardNormal.sample(&mut rng));
        for t in 1..256 {
            let prev = x[(t - 1, 0)];
            x[(t, 1)] += 0.8 * prev;
        }
        let permuted = DMatrix::from_fn(256, 4, |t, c| x[(t, perm.iter().position(|&n| n == c).unwrap())]);
        let a = fourier_ts_glasso(&x, &FourierConfig::default()).unwrap().graph;
        let b = fourier_ts_glasso(&permuted, &FourierConfig::default()).unwrap().graph;
        prop_assert_eq!(a.permute(&perm), b);
    }
}
