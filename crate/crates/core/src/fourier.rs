//! Fourier-domain baseline: smoothed spectral density matrices, a sparse
//! precision per frequency window and entrywise-l1 aggregation.
//!
//! Each Hermitian problem is solved through the real symmetric embedding
//! `[[Re, -Im], [Im, Re]]`, which doubles log-determinants and traces and
//! maps the Hermitian precision back as `Re Q = (T11 + T22) / 2`,
//! `Im Q = (T21 - T12) / 2`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::glasso::{
    log_grid, solve, Criterion, GlassoConfig, PathPoint, GRID_POINTS, SUPPORT_THRESHOLD,
};
use crate::graph::{Graph, GraphMeta};
use crate::linalg::{log_det_spd, max_offdiag_abs};
use crate::scalar::{cast, from_usize, to_f64, Real};
use crate::spectral::{regularize_pd, DEFAULT_EPS_REL};

pub type CMatrix<T> = DMatrix<Complex<T>>;

/// `floor(sqrt(T) / 2)`, so that the window length is about `sqrt(T)`.
pub fn default_half_window(len: usize) -> usize {
    ((len as f64).sqrt() / 2.0).floor() as usize
}

/// Smoothed periodogram matrices on `M` disjoint windows of `L = 2 m_t + 1`
/// Fourier frequencies.
#[derive(Debug, Clone)]
pub struct SmoothedSpectralDensity<T: Real> {
    /// Window centres `((l - 1) L + m_t + 1) / T`, in cycles per sample.
    pub frequencies: Vec<T>,
    pub matrices: Vec<CMatrix<T>>,
    pub half_window: usize,
    pub window_len: usize,
}

impl<T: Real> SmoothedSpectralDensity<T> {
    pub fn windows(&self) -> usize {
        self.matrices.len()
    }

    pub fn channels(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }
}

/// Number of windows `M = floor((T/2 - m_t - 1) / L)`, or `None` when it is
/// not positive.
pub fn window_count(len: usize, half_window: usize) -> Option<usize> {
    let l = 2 * half_window + 1;
    let avail = (len / 2).checked_sub(half_window + 1)?;
    let m = avail / l;
    (m >= 1).then_some(m)
}

/// `f(w_l) = (1/L) sum_k d(w_{l,k}) d(w_{l,k})^H` with
/// `d(w_n) = T^{-1/2} sum_t X_t exp(-i 2 pi n t / T)`.
pub fn smoothed_spectral_matrix<T: Real>(
    x: &DMatrix<T>,
    half_window: usize,
) -> Result<SmoothedSpectralDensity<T>> {
    let (len, p) = x.shape();
    if len % 2 != 0 {
        return Err(Error::data(format!(
            "Fourier estimator needs an even length, got {len}"
        )));
    }
    if half_window < 1 {
        return Err(Error::config("half-window m_t must be at least 1"));
    }
    if p == 0 {
        return Err(Error::data("series has no channels"));
    }
    let windows = window_count(len, half_window).ok_or_else(|| {
        Error::config(format!(
            "half-window {half_window} leaves no frequency windows for T = {len}; use a smaller m_t"
        ))
    })?;
    let window_len = 2 * half_window + 1;

    let fft = FftPlanner::<T>::new().plan_fft_forward(len);
    let norm = T::one() / from_usize::<T>(len).sqrt();
    let spectra: Vec<Vec<Complex<T>>> = (0..p)
        .map(|c| {
            let mut buf: Vec<Complex<T>> = x
                .column(c)
                .iter()
                .map(|&v| Complex::new(v, T::zero()))
                .collect();
            fft.process(&mut buf);
            buf.into_iter().map(|z| z * norm).collect()
        })
        .collect();

    let inv_l = T::one() / from_usize::<T>(window_len);
    let mut frequencies = Vec::with_capacity(windows);
    let mut matrices = Vec::with_capacity(windows);
    for l in 1..=windows {
        let centre = (l - 1) * window_len + half_window + 1;
        frequencies.push(from_usize::<T>(centre) / from_usize::<T>(len));
        let mut f = CMatrix::<T>::zeros(p, p);
        for n in centre - half_window..=centre + half_window {
            for a in 0..p {
                for b in 0..p {
                    f[(a, b)] += spectra[a][n] * spectra[b][n].conj();
                }
            }
        }
        f *= Complex::new(inv_l, T::zero());
        matrices.push(hermitize(&f));
    }
    Ok(SmoothedSpectralDensity {
        frequencies,
        matrices,
        half_window,
        window_len,
    })
}

fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::new(cast::<T>(0.5), T::zero());
    (m + m.adjoint()) * half
}

/// Real symmetric `2P x 2P` embedding of a Hermitian matrix.
pub fn embed<T: Real>(h: &CMatrix<T>) -> DMatrix<T> {
    let p = h.nrows();
    DMatrix::from_fn(2 * p, 2 * p, |r, c| {
        let z = h[(r % p, c % p)];
        match (r < p, c < p) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed`], averaging the redundant blocks.
pub fn extract<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    let p = m.nrows() / 2;
    let half = cast::<T>(0.5);
    CMatrix::from_fn(p, p, |a, b| {
        let re = (m[(a, b)] + m[(a + p, b + p)]) * half;
        let im = (m[(a + p, b)] - m[(a, b + p)]) * half;
        Complex::new(re, im)
    })
}

/// Hermitian precision estimates for every window at one penalty.
#[derive(Debug, Clone)]
pub struct FrequencyPrecisionSet<T: Real> {
    pub lambda: T,
    pub precisions: Vec<CMatrix<T>>,
    /// `log det Q - tr(f Q)` per window.
    pub log_likelihoods: Vec<T>,
    /// Unordered off-diagonal pairs with `|Q_pq| >= c`, per window.
    pub edge_counts: Vec<usize>,
    /// `(1/M) sum_l |Q_pq(w_l)|`.
    pub q_bar: DMatrix<T>,
}

fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

fn complex_edge_count<T: Real>(q: &CMatrix<T>) -> usize {
    let p = q.nrows();
    let c = cast::<T>(SUPPORT_THRESHOLD);
    (0..p)
        .flat_map(|a| (a + 1..p).map(move |b| (a, b)))
        .filter(|&(a, b)| modulus(q[(a, b)]) >= c)
        .count()
}

/// Solves the embedded problem at per-window penalty `lambda` (on the
/// embedded scale) for every window.
pub fn complex_glasso_per_frequency<T: Real>(
    density: &SmoothedSpectralDensity<T>,
    lambda: T,
    eps_rel: T,
) -> Result<FrequencyPrecisionSet<T>> {
    let solved: Vec<Result<(CMatrix<T>, T)>> = density
        .matrices
        .par_iter()
        .enumerate()
        .map(|(l, f)| {
            let s = regularize_pd(&embed(f), eps_rel);
            let theta = solve(&s, &GlassoConfig::with_penalty(lambda))
                .map_err(|e| Error::numerical(format!("window {}: {e}", l + 1)))?
                .theta;
            let ld = log_det_spd(&theta)
                .ok_or_else(|| Error::numerical("precision lost definiteness"))?;
            let tr: T = (&s * &theta).trace();
            let half = cast::<T>(0.5);
            Ok((extract(&theta), (ld - tr) * half))
        })
        .collect();
    let mut precisions = Vec::with_capacity(solved.len());
    let mut log_likelihoods = Vec::with_capacity(solved.len());
    for r in solved {
        let (q, ll) = r?;
        precisions.push(q);
        log_likelihoods.push(ll);
    }
    let p = density.channels();
    let inv_m = T::one() / from_usize::<T>(precisions.len());
    let q_bar = DMatrix::from_fn(p, p, |a, b| {
        precisions.iter().map(|q| modulus(q[(a, b)])).sum::<T>() * inv_m
    });
    let edge_counts = precisions.iter().map(complex_edge_count).collect();
    Ok(FrequencyPrecisionSet {
        lambda,
        precisions,
        log_likelihoods,
        edge_counts,
        q_bar,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierConfig {
    /// Half-window `m_t`; `None` uses [`default_half_window`].
    pub half_window: Option<usize>,
    pub criterion: Criterion,
    pub gamma: f64,
    pub eps_rel: f64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            half_window: None,
            criterion: Criterion::Bic,
            gamma: 0.5,
            eps_rel: DEFAULT_EPS_REL,
        }
    }
}

/// Summed criterion over windows:
/// `-2L sum_l L_l + k sum_l E_l` with `k = log(2LM)` (BIC), `2LM` (AIC) or
/// `log(2LM) + 4 gamma log P` (eBIC).
pub fn fourier_criterion<T: Real>(
    criterion: Criterion,
    set: &FrequencyPrecisionSet<T>,
    window_len: usize,
    dim: usize,
    gamma: T,
) -> T {
    let l = from_usize::<T>(window_len);
    let m = from_usize::<T>(set.precisions.len());
    let two = cast::<T>(2.0);
    let fit = -two * l * set.log_likelihoods.iter().copied().sum::<T>();
    let edges = from_usize::<T>(set.edge_counts.iter().sum());
    let per_edge = match criterion {
        Criterion::Aic => two * l * m,
        Criterion::Bic => (two * l * m).ln(),
        Criterion::Ebic => (two * l * m).ln() + cast::<T>(4.0) * gamma * from_usize::<T>(dim).ln(),
    };
    fit + per_edge * edges
}

#[derive(Debug, Clone)]
pub struct FourierEstimate<T: Real> {
    pub graph: Graph,
    pub density: SmoothedSpectralDensity<T>,
    pub selected: FrequencyPrecisionSet<T>,
    pub path: Vec<PathPoint<T>>,
    pub failures: Vec<(T, String)>,
}

impl<T: Real> FourierEstimate<T> {
    pub fn meta(&self) -> GraphMeta {
        GraphMeta {
            method: "fourier".into(),
            scales_selected: Vec::new(),
            lambda_per_scale: [("all".to_string(), to_f64(self.selected.lambda))]
                .into_iter()
                .collect(),
        }
    }
}

/// Edges where `q_bar_pq >= c`.
pub fn threshold_graph<T: Real>(q_bar: &DMatrix<T>) -> Graph {
    let p = q_bar.nrows();
    let c = cast::<T>(SUPPORT_THRESHOLD);
    let mut g = Graph::empty(p);
    for a in 0..p {
        for b in a + 1..p {
            if q_bar[(a, b)] >= c || q_bar[(b, a)] >= c {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Penalty grid for the embedded problems: 20 log-spaced values from the
/// full-shrinkage level (largest embedded off-diagonal over all windows)
/// down to a thirtieth of it.
pub fn fourier_lambda_grid<T: Real>(density: &SmoothedSpectralDensity<T>) -> Vec<T> {
    let top = density
        .matrices
        .iter()
        .map(|f| max_offdiag_abs(&embed(f)))
        .fold(T::zero(), |a, b| a.max(b));
    if !(top > T::zero()) {
        return Vec::new();
    }
    log_grid(top / cast(30.0), top, GRID_POINTS)
}

/// Full Fourier baseline with one penalty shared across windows.
pub fn fourier_ts_glasso<T: Real>(
    x: &DMatrix<T>,
    config: &FourierConfig,
) -> Result<FourierEstimate<T>> {
    let half_window = config
        .half_window
        .unwrap_or_else(|| default_half_window(x.nrows()));
    let density = smoothed_spectral_matrix(x, half_window)?;
    let eps = cast::<T>(config.eps_rel);
    let gamma = cast::<T>(config.gamma);
    let p = density.channels();

    let mut grid = fourier_lambda_grid(&density);
    if grid.is_empty() {
        grid.push(T::zero());
    }
    let mut path = Vec::new();
    let mut failures = Vec::new();
    let mut best: Option<(T, FrequencyPrecisionSet<T>)> = None;
    let mut first_error = None;
    for &lambda in &grid {
        match complex_glasso_per_frequency(&density, lambda, eps) {
            Ok(set) => {
                let score = fourier_criterion(config.criterion, &set, density.window_len, p, gamma);
                path.push(PathPoint {
                    lambda,
                    edges: threshold_graph(&set.q_bar).edge_count(),
                    score,
                });
                if best.as_ref().is_none_or(|(b, _)| score < *b) {
                    best = Some((score, set));
                }
            }
            Err(e) => {
                failures.push((lambda, e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    let (_, selected) = match best {
        Some(b) => b,
        None => return Err(first_error.unwrap_or_else(|| Error::numerical("empty penalty grid"))),
    };
    Ok(FourierEstimate {
        graph: threshold_graph(&selected.q_bar),
        density,
        selected,
        path,
        failures,
    })
}
