//! Graph generators, GNAR/VAR/VARMA samplers and spectral oracles for the
//! conditional independence graph of a simulated process.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fourier::CMatrix;
use crate::graph::Graph;
use crate::linalg::{cholesky_lower, inverse_spd, symmetrize};
use crate::spectral::{regularize_pd, SpectrumKind, WaveletSpectrum, DEFAULT_EPS_REL};
use crate::surrogate::{rng_from_seed, standard_normal};
use crate::wavelet::AutocorrInnerProduct;

pub const BURN_IN: usize = 500;
pub const ORACLE_GRID: usize = 512;
pub const ORACLE_TOL: f64 = 1e-8;

/// Each unordered pair is an edge independently with probability `rho`.
pub fn erdos_renyi(p: usize, rho: f64, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::empty(p);
    for a in 0..p {
        for b in a + 1..p {
            if rng.random::<f64>() < rho {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Cycle `0 - 1 - ... - (p-1) - 0`.
pub fn ring(p: usize) -> Graph {
    let mut g = Graph::empty(p);
    if p >= 2 {
        for a in 0..p {
            let b = (a + 1) % p;
            if a != b {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Row-normalised weights over `r`-stage neighbours (shortest-path distance
/// exactly `r`). Nodes without such neighbours get a zero row.
pub fn stage_weights(graph: &Graph, r: usize) -> DMatrix<f64> {
    let p = graph.node_count();
    let mut w = DMatrix::zeros(p, p);
    for i in 0..p {
        let dist = graph.bfs_distances(i);
        let hood: Vec<usize> = (0..p).filter(|&j| dist[j] == Some(r)).collect();
        for &j in &hood {
            w[(i, j)] = 1.0 / hood.len() as f64;
        }
    }
    w
}

/// `X_t = sum_l A_l X_{t-l} + e_t + sum_m B_m e_{t-m}`, `e_t ~ N(0, sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarmaModel {
    pub ar: Vec<DMatrix<f64>>,
    pub ma: Vec<DMatrix<f64>>,
    pub sigma: DMatrix<f64>,
}

pub type VarModel = VarmaModel;

impl VarmaModel {
    pub fn var(ar: Vec<DMatrix<f64>>, sigma: DMatrix<f64>) -> Self {
        VarmaModel {
            ar,
            ma: Vec::new(),
            sigma,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Largest eigenvalue modulus of the autoregressive companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        companion_radius(&self.ar, self.dim())
    }

    pub fn check(&self) -> Result<()> {
        let p = self.dim();
        if self.ar.iter().chain(&self.ma).any(|m| m.shape() != (p, p)) {
            return Err(Error::config("coefficient matrices must all be P x P"));
        }
        if cholesky_lower(&self.sigma).is_none() {
            return Err(Error::config("noise covariance is not positive definite"));
        }
        let rho = self.spectral_radius();
        if !(rho < 1.0) {
            return Err(Error::config(format!(
                "model is not stationary: spectral radius {rho:.4}"
            )));
        }
        Ok(())
    }

    /// `len` observations after a burn-in of [`BURN_IN`].
    pub fn simulate(&self, len: usize, seed: u64) -> Result<DMatrix<f64>> {
        self.simulate_with_burn_in(len, BURN_IN, seed)
    }

    pub fn simulate_with_burn_in(
        &self,
        len: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<DMatrix<f64>> {
        self.check()?;
        let p = self.dim();
        let chol = cholesky_lower(&self.sigma).expect("checked above");
        let total = len + burn_in;
        let mut rng = rng_from_seed(seed);
        let mut x: Vec<DVector<f64>> = Vec::with_capacity(total);
        let mut e: Vec<DVector<f64>> = Vec::with_capacity(total);
        for t in 0..total {
            let z = DVector::from_fn(p, |_, _| standard_normal(&mut rng));
            let eps = &chol * z;
            let mut xt = eps.clone();
            for (l, a) in self.ar.iter().enumerate() {
                if t > l {
                    xt += a * &x[t - l - 1];
                }
            }
            for (m, b) in self.ma.iter().enumerate() {
                if t > m {
                    xt += b * &e[t - m - 1];
                }
            }
            x.push(xt);
            e.push(eps);
        }
        Ok(DMatrix::from_fn(len, p, |t, c| x[burn_in + t][c]))
    }

    /// `H(w) Sigma H(w)^H` with `H(w) = A(z)^-1 B(z)`, `z = exp(-i 2 pi w)`.
    pub fn spectral_density(&self, omega: f64) -> Result<CMatrix<f64>> {
        let p = self.dim();
        let z = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * omega);
        let poly = |coeffs: &[DMatrix<f64>], sign: f64| {
            let mut m = CMatrix::<f64>::identity(p, p);
            let mut zk = Complex::new(1.0, 0.0);
            for c in coeffs {
                zk *= z;
                m += c.map(|v| Complex::new(sign * v, 0.0)) * zk;
            }
            m
        };
        let a_inv = poly(&self.ar, -1.0).try_inverse().ok_or_else(|| {
            Error::numerical(format!(
                "transfer function is singular at frequency {omega}"
            ))
        })?;
        let h = a_inv * poly(&self.ma, 1.0);
        let sigma = self.sigma.map(|v| Complex::new(v, 0.0));
        Ok(&h * sigma * h.adjoint())
    }
}

fn companion_radius(ar: &[DMatrix<f64>], p: usize) -> f64 {
    let order = ar.len();
    if order == 0 {
        return 0.0;
    }
    let n = order * p;
    let mut comp = DMatrix::zeros(n, n);
    for (l, a) in ar.iter().enumerate() {
        comp.view_mut((0, l * p), (p, p)).copy_from(a);
    }
    for i in p..n {
        comp[(i, i - p)] = 1.0;
    }
    comp.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// GNAR(p, [s]) model: `A_l = diag(alpha_l) + sum_{r <= s_l} beta_{l,r} W^(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnarModel {
    pub graph: Graph,
    /// `alpha[l][i]` for lag `l + 1` and node `i`.
    pub alpha: Vec<Vec<f64>>,
    /// `beta[l][r - 1]`; the stage count of lag `l + 1` is `beta[l].len()`.
    pub beta: Vec<Vec<f64>>,
}

impl GnarModel {
    /// Same `alpha_l` at every node.
    pub fn global(graph: Graph, alpha: &[f64], beta: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::config("alpha and beta must have one entry per lag"));
        }
        let p = graph.node_count();
        Ok(GnarModel {
            alpha: alpha.iter().map(|&a| vec![a; p]).collect(),
            graph,
            beta,
        })
    }

    pub fn lag_order(&self) -> usize {
        self.beta.len()
    }

    pub fn stages(&self) -> Vec<usize> {
        self.beta.iter().map(Vec::len).collect()
    }

    pub fn coefficient_matrices(&self) -> Vec<DMatrix<f64>> {
        let max_stage = self.stages().into_iter().max().unwrap_or(0);
        let weights: Vec<DMatrix<f64>> = (1..=max_stage)
            .map(|r| stage_weights(&self.graph, r))
            .collect();
        self.beta
            .iter()
            .zip(&self.alpha)
            .map(|(betas, alpha)| {
                let mut a = DMatrix::from_diagonal(&DVector::from_column_slice(alpha));
                for (r, b) in betas.iter().enumerate() {
                    a += &weights[r] * *b;
                }
                a
            })
            .collect()
    }

    pub fn to_var(&self) -> VarModel {
        let p = self.graph.node_count();
        VarModel::var(self.coefficient_matrices(), DMatrix::identity(p, p))
    }

    pub fn simulate(&self, len: usize, seed: u64) -> Result<DMatrix<f64>> {
        self.to_var().simulate(len, seed)
    }

    pub fn true_cig(&self) -> Graph {
        true_cig_gnar(&self.graph, &self.stages())
    }
}

/// Pairs at shortest-path distance at most twice the largest stage.
pub fn true_cig_gnar(graph: &Graph, stages: &[usize]) -> Graph {
    let reach = 2 * stages.iter().copied().max().unwrap_or(0);
    let p = graph.node_count();
    let mut g = Graph::empty(p);
    for a in 0..p {
        let dist = graph.bfs_distances(a);
        for (b, d) in dist.iter().enumerate().skip(a + 1) {
            if matches!(d, Some(d) if *d <= reach) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// VAR(1) on a ring with node-specific coefficients: row `i` has `b_i / 2`
/// at both ring neighbours, so equal `b_i = b` gives the GNAR(1,[1]) ring.
pub fn ring_var(betas: &[f64]) -> VarModel {
    let p = betas.len();
    let g = ring(p);
    let mut a = DMatrix::zeros(p, p);
    for (i, &b) in betas.iter().enumerate() {
        let hood = g.neighbours(i);
        for &j in &hood {
            a[(i, j)] = b / hood.len() as f64;
        }
    }
    VarModel::var(vec![a], DMatrix::identity(p, p))
}

/// [`ring_var`] with coefficients drawn uniformly from `(lo, hi)`.
pub fn random_ring_var(p: usize, lo: f64, hi: f64, seed: u64) -> VarModel {
    let mut rng = rng_from_seed(seed);
    let betas: Vec<f64> = (0..p).map(|_| rng.random_range(lo..hi)).collect();
    ring_var(&betas)
}

/// `A = 0.5 I` and a sparse noise precision whose off-diagonals are 0 or
/// 0.5 with equal probability, shifted to be positive definite.
pub fn noise_precision_var(p: usize, seed: u64) -> VarModel {
    let mut rng = rng_from_seed(seed);
    let mut o = DMatrix::<f64>::zeros(p, p);
    for a in 0..p {
        for b in a + 1..p {
            if rng.random::<f64>() < 0.5 {
                o[(a, b)] = 0.5;
                o[(b, a)] = 0.5;
            }
        }
    }
    let lambda_min = o.clone().symmetric_eigen().eigenvalues.min();
    let omega = &o + DMatrix::identity(p, p) * (lambda_min.abs() + 0.1);
    let sigma = symmetrize(&inverse_spd(&omega).expect("shifted precision is positive definite"));
    VarModel::var(vec![DMatrix::identity(p, p) * 0.5], sigma)
}

/// The 20-dimensional VARMA(2,2) with diagonal AR parts and block-diagonal
/// MA parts built from `I_5 + J_5`.
pub fn block_varma() -> VarmaModel {
    let p = 20;
    let block = DMatrix::<f64>::identity(5, 5) + DMatrix::from_element(5, 5, 1.0);
    let mut b1 = DMatrix::zeros(p, p);
    let mut b2 = DMatrix::zeros(p, p);
    for k in 0..4 {
        b1.view_mut((5 * k, 5 * k), (5, 5))
            .copy_from(&(&block * 1.5));
        b2.view_mut((5 * k, 5 * k), (5, 5))
            .copy_from(&(&block * 0.75));
    }
    VarmaModel {
        ar: vec![DMatrix::identity(p, p) * 0.4, DMatrix::identity(p, p) * 0.2],
        ma: vec![b1, b2],
        sigma: DMatrix::identity(p, p),
    }
}

/// Four disjoint 5-cliques.
pub fn block_varma_graph() -> Graph {
    let mut g = Graph::empty(20);
    for k in 0..4 {
        for a in 0..5 {
            for b in a + 1..5 {
                g.add_edge(5 * k + a, 5 * k + b);
            }
        }
    }
    g
}

/// Spectral density and its inverse on `w_n = n / grid`, `n = 0..grid`.
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    pub frequencies: Vec<f64>,
    pub densities: Vec<CMatrix<f64>>,
    /// `max_w |f^-1(w)_pq|`.
    pub inverse_max: DMatrix<f64>,
    /// Pairs whose inverse spectrum is not identically zero.
    pub graph: Graph,
}

pub fn spectral_oracle(model: &VarmaModel, grid: usize) -> Result<SpectralOracle> {
    model.check()?;
    let p = model.dim();
    let frequencies: Vec<f64> = (0..grid).map(|n| n as f64 / grid as f64).collect();
    let pairs: Vec<(CMatrix<f64>, CMatrix<f64>)> = frequencies
        .par_iter()
        .map(|&w| {
            let f = model.spectral_density(w)?;
            let inv = f.clone().try_inverse().ok_or_else(|| {
                Error::numerical(format!("spectral density is singular at frequency {w}"))
            })?;
            Ok((f, inv))
        })
        .collect::<Result<_>>()?;
    let mut inverse_max = DMatrix::zeros(p, p);
    for (_, inv) in &pairs {
        for a in 0..p {
            for b in 0..p {
                inverse_max[(a, b)] = f64::max(inverse_max[(a, b)], inv[(a, b)].norm());
            }
        }
    }
    let mut graph = Graph::empty(p);
    for a in 0..p {
        for b in a + 1..p {
            if inverse_max[(a, b)].max(inverse_max[(b, a)]) >= ORACLE_TOL {
                graph.add_edge(a, b);
            }
        }
    }
    Ok(SpectralOracle {
        frequencies,
        densities: pairs.into_iter().map(|(f, _)| f).collect(),
        inverse_max,
        graph,
    })
}

/// Zero pattern of the inverse spectrum on the default 512-point grid.
pub fn oracle_cig(model: &VarmaModel) -> Result<Graph> {
    Ok(spectral_oracle(model, ORACLE_GRID)?.graph)
}

/// Autocovariances `Gamma(tau) = E[X_{t+tau} X_t^T]`, `tau = 0..=max_lag`,
/// from the spectral density on a fine grid of `grid` points.
pub fn autocovariances(
    model: &VarmaModel,
    max_lag: usize,
    grid: usize,
) -> Result<Vec<DMatrix<f64>>> {
    let p = model.dim();
    let densities: Vec<CMatrix<f64>> = (0..grid)
        .into_par_iter()
        .map(|n| model.spectral_density(n as f64 / grid as f64))
        .collect::<Result<_>>()?;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(grid);
    let mut gamma = vec![DMatrix::zeros(p, p); max_lag + 1];
    for a in 0..p {
        for b in 0..p {
            let mut buf: Vec<Complex<f64>> = densities.iter().map(|f| f[(a, b)]).collect();
            ifft.process(&mut buf);
            for (tau, g) in gamma.iter_mut().enumerate() {
                g[(a, b)] = buf[tau % grid].re / grid as f64;
            }
        }
    }
    Ok(gamma)
}

/// Wavelet spectrum of a stationary model: `beta_j = sum_tau Psi_j(tau)
/// Gamma(tau)` and `S = C^-1 beta`, tagged [`SpectrumKind::SHatX`].
pub fn wavelet_spectrum_oracle(
    model: &VarmaModel,
    inner: &AutocorrInnerProduct<f64>,
    len: usize,
) -> Result<WaveletSpectrum<f64>> {
    let levels = inner.levels();
    let max_lag = inner.max_lag(levels);
    let grid = (4 * len)
        .max(8192)
        .max(4 * (max_lag + 1))
        .next_power_of_two();
    let gamma = autocovariances(model, max_lag, grid)?;
    let beta: Vec<DMatrix<f64>> = (1..=levels)
        .map(|j| {
            let mut b = gamma[0].clone() * inner.psi(j, 0);
            for tau in 1..=inner.max_lag(j) {
                let w = inner.psi(j, tau as isize);
                if w != 0.0 {
                    b += (&gamma[tau] + gamma[tau].transpose()) * w;
                }
            }
            symmetrize(&b)
        })
        .collect();
    WaveletSpectrum::new(SpectrumKind::Beta, beta).mix(inner.c_inv(), SpectrumKind::SHatX)
}

/// Per-scale precisions `S_j^-1` of the oracle wavelet spectrum, regularised
/// like the estimator's inputs.
pub fn wavelet_precision_oracle(
    model: &VarmaModel,
    inner: &AutocorrInnerProduct<f64>,
    len: usize,
) -> Result<Vec<DMatrix<f64>>> {
    let s = wavelet_spectrum_oracle(model, inner, len)?;
    s.scales
        .iter()
        .enumerate()
        .map(|(i, m)| {
            inverse_spd(&regularize_pd(m, DEFAULT_EPS_REL)).ok_or_else(|| {
                Error::NotPositiveDefinite {
                    context: format!("oracle wavelet spectrum at scale {}", i + 1),
                }
            })
        })
        .collect()
}
