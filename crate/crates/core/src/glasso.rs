//! l1-penalized Gaussian precision estimation (graphical lasso) with an
//! unpenalized diagonal, the lambda-range heuristic and information-criterion
//! tuning.
//!
//! The solver is block coordinate descent on the covariance estimate `W`,
//! one column at a time, with each column update solved as a lasso
//! regression by coordinate descent. The problem solved is
//!
//! ```text
//! minimize  -log det(Theta) + tr(S Theta) + lambda' * sum_{p != q} |Theta_pq|
//! ```
//!
//! with `lambda' = lambda / T`. Internally `S` is rescaled by its mean
//! diagonal so tolerances do not depend on the units of the input.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_lower, inverse_spd, log_det_spd, max_asymmetry, symmetrize, trace_product,
};
use crate::scalar::{cast, from_usize, to_f64, Real};

/// Off-diagonal entries with `|Theta_pq| < SUPPORT_THRESHOLD` count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-5;
pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const GRID_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlassoConfig<T> {
    /// Penalty on the likelihood scale, `lambda = T * lambda'`.
    pub lambda: T,
    /// Sample length `T` used to convert `lambda` into `lambda'`.
    pub sample_len: usize,
    pub max_iter: usize,
    /// Tolerance on the mean absolute change of `W` per sweep; also the
    /// KKT tolerance the returned solution is certified against.
    pub tol: T,
}

impl<T: Real> GlassoConfig<T> {
    pub fn new(lambda: T, sample_len: usize) -> Self {
        GlassoConfig {
            lambda,
            sample_len,
            max_iter: DEFAULT_MAX_ITER,
            tol: cast(DEFAULT_TOL),
        }
    }

    /// Config whose `lambda` is already on the per-observation scale.
    pub fn with_penalty(penalty: T) -> Self {
        Self::new(penalty, 1)
    }

    /// `lambda' = lambda / T`.
    pub fn penalty(&self) -> T {
        self.lambda / from_usize::<T>(self.sample_len.max(1))
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::config("glasso tolerance must be positive"));
        }
        if !(self.lambda >= T::zero()) {
            return Err(Error::config("glasso penalty must be nonnegative"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("glasso max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// A sparse precision estimate at one wavelet scale (or frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionEstimate<T: Real> {
    pub theta: DMatrix<T>,
    pub lambda: T,
    /// Scale index `j` (1-based); 0 when the estimate is not tied to a scale.
    pub scale: usize,
    /// Unordered off-diagonal pairs in the thresholded support.
    pub edge_count: usize,
    /// `log det(Theta) - tr(S Theta)`.
    pub log_likelihood: T,
}

impl<T: Real> PrecisionEstimate<T> {
    pub fn dim(&self) -> usize {
        self.theta.nrows()
    }

    pub fn is_edge(&self, p: usize, q: usize) -> bool {
        p != q && self.theta[(p, q)].abs() >= cast(SUPPORT_THRESHOLD)
    }

    /// Unordered support pairs `(p, q)` with `p < q`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                if self.is_edge(p, q) {
                    out.push((p, q));
                }
            }
        }
        out
    }
}

/// Count of unordered off-diagonal pairs with `|m_pq| >= SUPPORT_THRESHOLD`.
pub fn count_edges<T: Real>(m: &DMatrix<T>) -> usize {
    let n = m.nrows();
    let c = cast::<T>(SUPPORT_THRESHOLD);
    (0..n)
        .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
        .filter(|&(p, q)| m[(p, q)].abs() >= c || m[(q, p)].abs() >= c)
        .count()
}

/// Full solver output, including diagnostics used by tests.
#[derive(Debug, Clone)]
pub struct GlassoSolution<T: Real> {
    pub theta: DMatrix<T>,
    pub sweeps: usize,
    /// `-log det W` after each sweep (the negated dual objective).
    pub dual_trace: Vec<T>,
    pub kkt_violation: T,
}

/// Largest violation of the optimality conditions of the problem at
/// penalty `penalty`, measured on `W = Theta^-1`.
pub fn kkt_violation<T: Real>(s: &DMatrix<T>, theta: &DMatrix<T>, penalty: T) -> Option<T> {
    let w = inverse_spd(theta)?;
    let n = s.nrows();
    let c = cast::<T>(SUPPORT_THRESHOLD);
    let mut worst = T::zero();
    for p in 0..n {
        for q in 0..n {
            let grad = s[(p, q)] - w[(p, q)];
            let v = if p == q {
                grad.abs()
            } else if theta[(p, q)].abs() < c {
                (grad.abs() - penalty).max(T::zero())
            } else {
                let sign = if theta[(p, q)] > T::zero() {
                    T::one()
                } else {
                    -T::one()
                };
                (grad + penalty * sign).abs()
            };
            worst = worst.max(v);
        }
    }
    Some(worst)
}

/// Solves the graphical lasso at per-observation penalty `config.penalty()`.
pub fn solve<T: Real>(s: &DMatrix<T>, config: &GlassoConfig<T>) -> Result<GlassoSolution<T>> {
    config.validate()?;
    let n = s.nrows();
    if n == 0 || s.ncols() != n {
        return Err(Error::data(format!(
            "covariance must be square and nonempty, got {}x{}",
            n,
            s.ncols()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("covariance contains non-finite values"));
    }
    let tol = config.tol;
    if max_asymmetry(s) > cast::<T>(1e-8) * s.amax().max(T::one()) {
        return Err(Error::data("covariance is not symmetric"));
    }
    if cholesky_lower(s).is_none() {
        return Err(Error::NotPositiveDefinite {
            context: "graphical lasso input".into(),
        });
    }

    let scale = s.diagonal().mean();
    let sn = symmetrize(s) / scale;
    let penalty = config.penalty() / scale;
    let kkt_target = tol / scale.max(T::one());

    if n == 1 {
        let theta = DMatrix::from_element(1, 1, T::one() / s[(0, 0)]);
        return Ok(GlassoSolution {
            theta,
            sweeps: 0,
            dual_trace: vec![],
            kkt_violation: T::zero(),
        });
    }

    let mut w = sn.clone();
    let mut betas = DMatrix::<T>::zeros(n - 1, n);
    let mut dual_trace = Vec::new();
    let inner_tol = tol * cast::<T>(1e-3);
    let mut last_change = T::zero();
    let mut last_kkt = T::zero();
    let mut inner_tol_now = inner_tol;

    for sweep in 1..=config.max_iter {
        let w_before = w.clone();
        for j in 0..n {
            let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            let v = DMatrix::from_fn(n - 1, n - 1, |a, b| w[(others[a], others[b])]);
            let b: Vec<T> = others.iter().map(|&i| sn[(i, j)]).collect();
            let mut beta: Vec<T> = betas.column(j).iter().copied().collect();
            lasso_cd(&v, &b, penalty, &mut beta, inner_tol_now);
            for (a, &i) in others.iter().enumerate() {
                let w12: T = (0..n - 1).map(|c| v[(a, c)] * beta[c]).sum();
                w[(i, j)] = w12;
                w[(j, i)] = w12;
            }
            for (a, val) in beta.into_iter().enumerate() {
                betas[(a, j)] = val;
            }
        }
        if let Some(ld) = log_det_spd(&w) {
            dual_trace.push(-ld);
        }
        last_change = (&w - &w_before).abs().mean();
        if last_change < tol {
            let theta = precision_from_betas(&w, &betas);
            if let Some(kkt) = kkt_violation(&sn, &theta, penalty) {
                last_kkt = kkt;
                if kkt <= kkt_target {
                    let theta = theta / scale;
                    return Ok(GlassoSolution {
                        theta,
                        sweeps: sweep,
                        dual_trace,
                        kkt_violation: kkt * scale,
                    });
                }
            }
            // The sweep converged but the certificate is not there yet:
            // solve the column problems more tightly.
            inner_tol_now = (inner_tol_now * cast::<T>(0.1)).max(cast(1e-15));
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iter,
        last_change: to_f64(last_change),
        kkt_violation: to_f64(last_kkt * scale),
    })
}

/// Coordinate descent for `min 1/2 b'Vb - rhs'b + penalty * |b|_1`,
/// warm-started from `beta`.
fn lasso_cd<T: Real>(v: &DMatrix<T>, rhs: &[T], penalty: T, beta: &mut [T], tol: T) {
    let m = rhs.len();
    let mut grad: Vec<T> = (0..m)
        .map(|i| (0..m).map(|k| v[(i, k)] * beta[k]).sum())
        .collect();
    for _ in 0..10_000 {
        let mut max_delta = T::zero();
        for k in 0..m {
            let vkk = v[(k, k)];
            let r = rhs[k] - (grad[k] - vkk * beta[k]);
            let updated = soft_threshold(r, penalty) / vkk;
            let delta = updated - beta[k];
            if delta != T::zero() {
                for i in 0..m {
                    grad[i] += v[(i, k)] * delta;
                }
                beta[k] = updated;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < tol {
            break;
        }
    }
}

fn soft_threshold<T: Real>(x: T, t: T) -> T {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        T::zero()
    }
}

fn precision_from_betas<T: Real>(w: &DMatrix<T>, betas: &DMatrix<T>) -> DMatrix<T> {
    let n = w.nrows();
    let mut theta = DMatrix::zeros(n, n);
    for j in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        let w12_beta: T = others
            .iter()
            .enumerate()
            .map(|(a, &i)| w[(i, j)] * betas[(a, j)])
            .sum();
        let diag = T::one() / (w[(j, j)] - w12_beta);
        theta[(j, j)] = diag;
        for (a, &i) in others.iter().enumerate() {
            theta[(i, j)] = -betas[(a, j)] * diag;
        }
    }
    symmetrize(&theta)
}

/// Graphical lasso returning a [`PrecisionEstimate`].
pub fn graphical_lasso<T: Real>(
    s_bar: &DMatrix<T>,
    config: &GlassoConfig<T>,
) -> Result<PrecisionEstimate<T>> {
    let solution = solve(s_bar, config)?;
    Ok(estimate_from_theta(s_bar, solution.theta, config.lambda, 0))
}

fn estimate_from_theta<T: Real>(
    s: &DMatrix<T>,
    theta: DMatrix<T>,
    lambda: T,
    scale: usize,
) -> PrecisionEstimate<T> {
    let log_likelihood =
        log_det_spd(&theta).unwrap_or_else(|| -T::max_value().unwrap()) - trace_product(s, &theta);
    PrecisionEstimate {
        edge_count: count_edges(&theta),
        theta,
        lambda,
        scale,
        log_likelihood,
    }
}

/// Candidate penalties for one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRange<T> {
    /// Smallest penalty giving an edge-free estimate.
    pub lambda_sm: T,
    pub lower: T,
    pub upper: T,
    /// Log-spaced candidates in `[lower, upper]`, decreasing.
    pub grid: Vec<T>,
    /// All off-diagonals vanish: the estimate is diagonal for any penalty.
    pub degenerate: bool,
}

/// `lambda_sm = T max_{p != q} |S_pq|`, `lambda_u = lambda_sm / 3`,
/// `lambda_l = lambda_u / 10`, with a 20-point log grid in between.
pub fn lambda_range<T: Real>(s_bar: &DMatrix<T>, sample_len: usize) -> LambdaRange<T> {
    let max_off = crate::linalg::max_offdiag_abs(s_bar);
    let lambda_sm = from_usize::<T>(sample_len) * max_off;
    if !(lambda_sm > T::zero()) {
        return LambdaRange {
            lambda_sm: T::zero(),
            lower: T::zero(),
            upper: T::zero(),
            grid: Vec::new(),
            degenerate: true,
        };
    }
    let upper = lambda_sm / cast(3.0);
    let lower = upper / cast(10.0);
    LambdaRange {
        lambda_sm,
        lower,
        upper,
        grid: log_grid(lower, upper, GRID_POINTS),
        degenerate: false,
    }
}

/// `points` log-spaced values from `upper` down to `lower`, endpoints included.
pub fn log_grid<T: Real>(lower: T, upper: T, points: usize) -> Vec<T> {
    if points == 1 {
        return vec![upper];
    }
    let (lo, hi) = (lower.ln(), upper.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                upper
            } else if i == points - 1 {
                lower
            } else {
                let frac = from_usize::<T>(i) / from_usize::<T>(points - 1);
                (hi - (hi - lo) * frac).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Criterion {
    Aic,
    Bic,
    #[default]
    Ebic,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
            Criterion::Ebic => "ebic",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            "ebic" => Ok(Criterion::Ebic),
            other => Err(Error::config(format!("unknown criterion '{other}'"))),
        }
    }
}

/// Scale-wise information criterion with `L = T [log det Theta - tr(S Theta)]`
/// and `E* = T E`.
pub fn information_criterion<T: Real>(
    criterion: Criterion,
    log_likelihood: T,
    edges: usize,
    sample_len: usize,
    dim: usize,
    gamma: T,
) -> T {
    let t = from_usize::<T>(sample_len);
    let e_star = t * from_usize::<T>(edges);
    let fit = cast::<T>(-2.0) * t * log_likelihood;
    let per_edge = match criterion {
        Criterion::Aic => cast(2.0),
        Criterion::Bic => t.ln(),
        Criterion::Ebic => t.ln() + cast::<T>(4.0) * gamma * from_usize::<T>(dim).ln(),
    };
    fit + per_edge * e_star
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint<T> {
    pub lambda: T,
    pub edges: usize,
    pub score: T,
}

/// Result of tuning one scale.
#[derive(Debug, Clone)]
pub struct Selection<T: Real> {
    pub estimate: PrecisionEstimate<T>,
    pub range: LambdaRange<T>,
    /// Successful grid points in decreasing-lambda order.
    pub path: Vec<PathPoint<T>>,
    /// Grid points whose solve failed, with the reason.
    pub failures: Vec<(T, String)>,
}

/// Solves over the lambda grid and keeps the minimizer of the criterion.
/// Ties go to the larger penalty.
pub fn select_lambda<T: Real>(
    s_bar: &DMatrix<T>,
    sample_len: usize,
    criterion: Criterion,
    gamma: T,
) -> Result<Selection<T>> {
    select_lambda_with(
        s_bar,
        sample_len,
        criterion,
        gamma,
        &GlassoConfig::new(T::zero(), sample_len),
    )
}

/// [`select_lambda`] with explicit solver settings (tolerance, iterations).
pub fn select_lambda_with<T: Real>(
    s_bar: &DMatrix<T>,
    sample_len: usize,
    criterion: Criterion,
    gamma: T,
    settings: &GlassoConfig<T>,
) -> Result<Selection<T>> {
    let dim = s_bar.nrows();
    let range = lambda_range(s_bar, sample_len);
    if range.degenerate {
        if cholesky_lower(s_bar).is_none() {
            return Err(Error::NotPositiveDefinite {
                context: "diagonal covariance".into(),
            });
        }
        let theta = DMatrix::from_fn(dim, dim, |p, q| {
            if p == q {
                T::one() / s_bar[(p, p)]
            } else {
                T::zero()
            }
        });
        let estimate = estimate_from_theta(s_bar, theta, T::zero(), 0);
        return Ok(Selection {
            estimate,
            range,
            path: Vec::new(),
            failures: Vec::new(),
        });
    }

    let solved: Vec<(T, Result<PrecisionEstimate<T>>)> = range
        .grid
        .par_iter()
        .map(|&lambda| {
            let config = GlassoConfig {
                lambda,
                sample_len,
                ..*settings
            };
            (lambda, graphical_lasso(s_bar, &config))
        })
        .collect();

    let mut path = Vec::new();
    let mut failures = Vec::new();
    let mut best: Option<(T, PrecisionEstimate<T>)> = None;
    let mut first_error = None;
    for (lambda, outcome) in solved {
        match outcome {
            Ok(est) => {
                let score = information_criterion(
                    criterion,
                    est.log_likelihood,
                    est.edge_count,
                    sample_len,
                    dim,
                    gamma,
                );
                path.push(PathPoint {
                    lambda,
                    edges: est.edge_count,
                    score,
                });
                // Grid is in decreasing lambda, so a strict improvement is
                // needed to move toward smaller penalties.
                let better = best.as_ref().is_none_or(|(b, _)| score < *b);
                if better {
                    best = Some((score, est));
                }
            }
            Err(e) => {
                failures.push((lambda, e.to_string()));
                first_error.get_or_insert(e);
            }
        }
    }
    match best {
        Some((_, estimate)) => Ok(Selection {
            estimate,
            range,
            path,
            failures,
        }),
        None => Err(first_error.unwrap_or_else(|| Error::numerical("empty lambda grid"))),
    }
}
