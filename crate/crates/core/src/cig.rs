//! Conditional independence graph estimation in the wavelet domain.
//!
//! Every scale gets its own sparse precision estimate of the surrogate
//! spectrum. Two (or three) scales with the most similar supports are then
//! picked and the union of their supports is the estimated graph.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glasso::{select_lambda, Criterion, PrecisionEstimate, Selection};
use crate::graph::{Graph, GraphMeta};
use crate::scalar::{cast, to_f64, Real};
use crate::spectral::{
    bias_correct, regularize_pd, symmetric_pad, time_averaged_periodogram, RawPeriodogram,
    WaveletSpectrum, DEFAULT_EPS_REL,
};
use crate::surrogate::{bootstrap_average_periodogram, surrogate_spectrum, RngSeedPlan};
use crate::wavelet::{autocorrelation_inner_product, build_filters, FilterBank, WaveletFamily};

const SIMILARITY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WavTsGlassoConfig {
    pub family: WaveletFamily,
    /// Number of surrogate replicates `R`.
    pub bootstrap_replicates: usize,
    pub criterion: Criterion,
    pub gamma: f64,
    pub exclude_coarsest: bool,
    /// 2 for the pairwise similarity, 3 for triples.
    pub arity: usize,
    pub seed: u64,
    pub eps_rel: f64,
}

impl Default for WavTsGlassoConfig {
    fn default() -> Self {
        WavTsGlassoConfig {
            family: WaveletFamily::Haar,
            bootstrap_replicates: 50,
            criterion: Criterion::Ebic,
            gamma: 0.5,
            exclude_coarsest: true,
            arity: 2,
            seed: 0,
            eps_rel: DEFAULT_EPS_REL,
        }
    }
}

impl WavTsGlassoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bootstrap_replicates == 0 {
            return Err(Error::config(
                "the number of bootstrap replicates must be at least 1",
            ));
        }
        if !(2..=3).contains(&self.arity) {
            return Err(Error::config(format!(
                "similarity arity must be 2 or 3, got {}",
                self.arity
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config(format!(
                "eBIC gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.eps_rel > 0.0) {
            return Err(Error::config("eps_rel must be positive"));
        }
        Ok(())
    }
}

/// Per-scale output of the estimation pipeline.
#[derive(Debug, Clone)]
pub struct ScaleEstimates<T: Real> {
    /// Length after padding; also the `T` used for penalties and criteria.
    pub padded_len: usize,
    pub original_len: usize,
    /// Bias-corrected spectrum of the data.
    pub s_hat_x: WaveletSpectrum<T>,
    /// Bootstrap-averaged surrogate periodogram.
    pub averaged: WaveletSpectrum<T>,
    /// One tuned selection per scale, finest first.
    pub selections: Vec<Selection<T>>,
}

impl<T: Real> ScaleEstimates<T> {
    pub fn levels(&self) -> usize {
        self.selections.len()
    }

    pub fn estimate(&self, j: usize) -> &PrecisionEstimate<T> {
        &self.selections[j - 1].estimate
    }

    pub fn estimates(&self) -> Vec<PrecisionEstimate<T>> {
        self.selections.iter().map(|s| s.estimate.clone()).collect()
    }
}

/// Pads, transforms, bias-corrects, bootstraps the surrogate and tunes a
/// sparse precision at every scale. `x` has one row per time point.
pub fn estimate_scale_precisions<T: Real>(
    x: &DMatrix<T>,
    config: &WavTsGlassoConfig,
) -> Result<ScaleEstimates<T>> {
    config.validate()?;
    if x.ncols() == 0 {
        return Err(Error::data("series has no channels"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("series contains non-finite values"));
    }
    let padded = symmetric_pad(x)?;
    let n = padded.data.nrows();
    let levels = n.trailing_zeros() as usize;
    let eps = cast::<T>(config.eps_rel);

    let filters = build_filters::<T>(config.family, levels)?;
    let bank = FilterBank::new(&filters, n)?;
    let inner = autocorrelation_inner_product(&filters)?;
    let coeffs = bank.coefficients(&padded.data)?;
    let averaged_x = time_averaged_periodogram(&RawPeriodogram::new(&coeffs));
    let s_hat_x = bias_correct(&averaged_x, inner.c_inv(), eps)?;
    let spec_y = surrogate_spectrum(&s_hat_x, inner.c_inv(), eps)?;
    let averaged = bootstrap_average_periodogram(
        &spec_y,
        &bank,
        config.bootstrap_replicates,
        RngSeedPlan::new(config.seed),
    )?;

    let gamma = cast::<T>(config.gamma);
    let selections = (1..=levels)
        .into_par_iter()
        .map(|j| {
            let s_bar = regularize_pd(averaged.scale(j), eps);
            select_lambda(&s_bar, n, config.criterion, gamma)
                .map(|mut sel| {
                    sel.estimate.scale = j;
                    sel
                })
                .map_err(|e| e.at_scale(j))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScaleEstimates {
        padded_len: n,
        original_len: padded.original_len,
        s_hat_x,
        averaged,
        selections,
    })
}

/// Thresholded support of a precision estimate as a graph.
pub fn support<T: Real>(estimate: &PrecisionEstimate<T>) -> Graph {
    Graph::from_edges(estimate.dim(), estimate.edges()).expect("support edges are valid")
}

/// Cross-scale similarity of two supports, counted over ordered positions.
///
/// Returns `(delta, delta_s)` with `delta_s = delta / sqrt(E_a E_b)` and
/// `delta_s = 0` when either support is empty.
pub fn similarity(a: &Graph, b: &Graph) -> Result<(usize, f64)> {
    similarity_of(&[a, b])
}

/// Three-way analogue: positions nonzero in all three supports, scaled by
/// the cube root of the product of the edge counts.
pub fn similarity3(a: &Graph, b: &Graph, c: &Graph) -> Result<(usize, f64)> {
    similarity_of(&[a, b, c])
}

fn similarity_of(graphs: &[&Graph]) -> Result<(usize, f64)> {
    let p = graphs[0].node_count();
    if graphs.iter().any(|g| g.node_count() != p) {
        return Err(Error::data("supports have different dimensions"));
    }
    let common = graphs[0]
        .edges()
        .filter(|&(a, b)| graphs[1..].iter().all(|g| g.has_edge(a, b)))
        .count();
    let delta = 2 * common;
    if graphs.iter().any(|g| g.edge_count() == 0) {
        return Ok((delta, 0.0));
    }
    let log_denominator: f64 = graphs
        .iter()
        .map(|g| ((2 * g.edge_count()) as f64).ln())
        .sum();
    let delta_s = delta as f64 / (log_denominator / graphs.len() as f64).exp();
    Ok((delta, delta_s.min(1.0)))
}

/// The chosen scales (1-based, increasing) and how they were found.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSelection {
    pub scales: Vec<usize>,
    pub similarity: f64,
    /// Every candidate had zero similarity, so the finest eligible scales
    /// were used.
    pub fallback: bool,
}

/// Picks the `arity` scales with the largest scaled similarity. Ties go to
/// the finer combination: smaller sum of indices, then lexicographically
/// smaller.
pub fn select_scales(
    supports: &[Graph],
    exclude_coarsest: bool,
    arity: usize,
) -> Result<ScaleSelection> {
    if !(2..=3).contains(&arity) {
        return Err(Error::config(format!(
            "similarity arity must be 2 or 3, got {arity}"
        )));
    }
    let levels = supports.len();
    if levels == 0 {
        return Err(Error::data("no scales to choose from"));
    }
    let mut eligible: Vec<usize> = (1..=levels).collect();
    if exclude_coarsest && levels > arity {
        eligible.pop();
    }
    if eligible.len() < arity {
        return Ok(ScaleSelection {
            scales: eligible,
            similarity: 0.0,
            fallback: true,
        });
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in combinations(&eligible, arity) {
        let graphs: Vec<&Graph> = combo.iter().map(|&j| &supports[j - 1]).collect();
        let (_, ds) = similarity_of(&graphs)?;
        let replace = match &best {
            None => true,
            Some((b, bc)) => {
                ds > b + SIMILARITY_TIE || ((ds - b).abs() <= SIMILARITY_TIE && finer(&combo, bc))
            }
        };
        if replace {
            best = Some((ds, combo));
        }
    }
    let (ds, combo) = best.expect("at least one combination");
    if ds <= 0.0 {
        return Ok(ScaleSelection {
            scales: eligible[..arity].to_vec(),
            similarity: 0.0,
            fallback: true,
        });
    }
    Ok(ScaleSelection {
        scales: combo,
        similarity: ds,
        fallback: false,
    })
}

/// Pairwise choice among `(j, j')`; see [`select_scales`].
pub fn select_scale_pair(supports: &[Graph], exclude_coarsest: bool) -> Result<ScaleSelection> {
    select_scales(supports, exclude_coarsest, 2)
}

fn finer(a: &[usize], b: &[usize]) -> bool {
    let (sa, sb): (usize, usize) = (a.iter().sum(), b.iter().sum());
    sa < sb || (sa == sb && a < b)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Scaled similarity for every pair of scales, `J x J`.
pub fn similarity_table(supports: &[Graph]) -> Result<DMatrix<f64>> {
    let j = supports.len();
    let mut table = DMatrix::zeros(j, j);
    for a in 0..j {
        for b in a..j {
            let (_, ds) = similarity(&supports[a], &supports[b])?;
            table[(a, b)] = ds;
            table[(b, a)] = ds;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct CigDiagnostics {
    /// Selected penalty per scale, finest first.
    pub lambda_per_scale: Vec<f64>,
    pub edges_per_scale: Vec<usize>,
    pub similarity: DMatrix<f64>,
    pub selection: ScaleSelection,
}

impl CigDiagnostics {
    pub fn meta(&self, method: &str) -> GraphMeta {
        GraphMeta {
            method: method.to_string(),
            scales_selected: self.selection.scales.clone(),
            lambda_per_scale: self
                .lambda_per_scale
                .iter()
                .enumerate()
                .map(|(i, l)| ((i + 1).to_string(), *l))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CigEstimate<T: Real> {
    pub graph: Graph,
    pub scales: ScaleEstimates<T>,
    pub diagnostics: CigDiagnostics,
}

/// Combines per-scale estimates into a graph: union of the supports of the
/// most similar scales.
pub fn combine_scales<T: Real>(
    estimates: &[PrecisionEstimate<T>],
    config: &WavTsGlassoConfig,
) -> Result<(Graph, CigDiagnostics)> {
    let supports: Vec<Graph> = estimates.iter().map(support).collect();
    let selection = select_scales(&supports, config.exclude_coarsest, config.arity)?;
    let p = estimates[0].dim();
    let graph = selection
        .scales
        .iter()
        .fold(Graph::empty(p), |acc, &j| acc.union(&supports[j - 1]));
    let diagnostics = CigDiagnostics {
        lambda_per_scale: estimates.iter().map(|e| to_f64(e.lambda)).collect(),
        edges_per_scale: estimates.iter().map(|e| e.edge_count).collect(),
        similarity: similarity_table(&supports)?,
        selection,
    };
    Ok((graph, diagnostics))
}

/// Full wavelet-domain estimator. Non-dyadic series are padded.
pub fn wav_ts_glasso<T: Real>(
    x: &DMatrix<T>,
    config: &WavTsGlassoConfig,
) -> Result<CigEstimate<T>> {
    let scales = estimate_scale_precisions(x, config)?;
    let (graph, diagnostics) = combine_scales(&scales.estimates(), config)?;
    Ok(CigEstimate {
        graph,
        scales,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(p, edges.iter().copied()).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let a = g(4, &[(0, 1), (0, 2)]);
        let b = g(4, &[(0, 1)]);
        let (d, ds) = similarity(&a, &b).unwrap();
        assert_eq!(d, 2);
        assert!((ds - 2.0 / (4f64.sqrt() * 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(similarity(&a, &a).unwrap().1, 1.0);
        assert_eq!(similarity(&a, &g(4, &[(2, 3)])).unwrap(), (0, 0.0));
        assert_eq!(similarity(&a, &g(4, &[])).unwrap().1, 0.0);
        assert!(similarity(&a, &g(5, &[])).is_err());
    }

    #[test]
    fn tie_breaks_toward_finer_pair() {
        // Delta_S(1,2) = Delta_S(1,3) = 1, Delta_S(2,3) = 1 as well; finest wins.
        let s = g(3, &[(0, 1)]);
        let sel = select_scales(&[s.clone(), s.clone(), s.clone(), g(3, &[])], true, 2).unwrap();
        assert_eq!(sel.scales, vec![1, 2]);
        assert!(!sel.fallback);
    }

    #[test]
    fn empty_supports_fall_back() {
        let e = g(3, &[]);
        let sel = select_scales(&[e.clone(), e.clone(), e.clone()], true, 2).unwrap();
        assert_eq!(sel.scales, vec![1, 2]);
        assert!(sel.fallback);
    }

    #[test]
    fn coarsest_excluded() {
        let a = g(3, &[(0, 1)]);
        let b = g(3, &[(1, 2)]);
        let sel = select_scales(&[a.clone(), b.clone(), a.clone()], true, 2).unwrap();
        // (1,3) would be identical but scale 3 is the coarsest.
        assert!(sel.fallback);
        let sel = select_scales(&[a.clone(), b, a], false, 2).unwrap();
        assert_eq!(sel.scales, vec![1, 3]);
    }

    #[test]
    fn triples() {
        let a = g(4, &[(0, 1), (2, 3)]);
        let sel = select_scales(
            &[a.clone(), g(4, &[(0, 2)]), a.clone(), a.clone(), a],
            true,
            3,
        )
        .unwrap();
        assert_eq!(sel.scales, vec![1, 3, 4]);
        assert!(
            (similarity3(&g(4, &[(0, 1)]), &g(4, &[(0, 1)]), &g(4, &[(0, 1)]))
                .unwrap()
                .1
                - 1.0)
                .abs()
                < 1e-12
        );
    }
}
