//! GNAR(1,[1]) least-squares fitting and multi-step forecasting.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::simulate::stage_weights;

/// Fitted `X_t = diag(alpha) X_{t-1} + beta W X_{t-1} + e_t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnarFit {
    pub alpha: Vec<f64>,
    /// `None` when the network has no edges (per-node AR(1)).
    pub beta: Option<f64>,
    #[serde(skip)]
    pub weights: DMatrix<f64>,
}

impl GnarFit {
    pub fn coefficient_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::from_diagonal(&DVector::from_column_slice(&self.alpha));
        if let Some(b) = self.beta {
            a += &self.weights * b;
        }
        a
    }
}

/// Ordinary least squares on the stacked node regressions, with an optional
/// ridge term added to the normal equations.
pub fn fit_gnar(x: &DMatrix<f64>, graph: &Graph, ridge: f64) -> Result<GnarFit> {
    let (len, p) = x.shape();
    if graph.node_count() != p {
        return Err(Error::data(format!(
            "graph has {} nodes but the series has {p} columns",
            graph.node_count()
        )));
    }
    if len < 3 {
        return Err(Error::data("need at least 3 observations to fit"));
    }
    let weights = stage_weights(graph, 1);
    let with_beta = graph.edge_count() > 0;
    let k = p + usize::from(with_beta);
    let lagged = x.rows(0, len - 1).into_owned();
    let neigh = &lagged * weights.transpose();

    let mut xtx = DMatrix::<f64>::zeros(k, k);
    let mut xty = DVector::<f64>::zeros(k);
    for t in 1..len {
        for i in 0..p {
            let own = lagged[(t - 1, i)];
            let nb = neigh[(t - 1, i)];
            let y = x[(t, i)];
            xtx[(i, i)] += own * own;
            xty[i] += own * y;
            if with_beta {
                xtx[(i, p)] += own * nb;
                xtx[(p, i)] += own * nb;
                xtx[(p, p)] += nb * nb;
                xty[p] += nb * y;
            }
        }
    }
    for d in 0..k {
        xtx[(d, d)] += ridge;
    }
    let eig = xtx.clone().symmetric_eigen();
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > hi * 1e-12) {
        return Err(Error::numerical(
            "GNAR design matrix is rank deficient; retry with a ridge penalty (--ridge)",
        ));
    }
    let coef = xtx.cholesky().map(|c| c.solve(&xty)).ok_or_else(|| {
        Error::numerical("GNAR normal equations are not positive definite; retry with --ridge")
    })?;
    Ok(GnarFit {
        alpha: coef.iter().take(p).copied().collect(),
        beta: with_beta.then(|| coef[p]),
        weights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastReport {
    pub horizons: Vec<usize>,
    /// Mean over nodes of the squared forecast error, per horizon.
    pub mspe: Vec<f64>,
    pub fit: GnarFit,
}

impl ForecastReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("horizon,mspe\n");
        for (h, m) in self.horizons.iter().zip(&self.mspe) {
            out.push_str(&format!("{h},{m:.8}\n"));
        }
        out
    }
}

/// Fits on the first `T - H` observations and forecasts `1..=H` steps ahead
/// from that single origin.
pub fn fit_gnar_forecast(
    x: &DMatrix<f64>,
    graph: &Graph,
    horizon: usize,
    ridge: f64,
) -> Result<ForecastReport> {
    let (len, p) = x.shape();
    if horizon == 0 {
        return Err(Error::config("forecast horizon must be at least 1"));
    }
    if len <= horizon || len - horizon <= p + 2 {
        return Err(Error::data(format!(
            "{len} observations leave too few for fitting {p} nodes at horizon {horizon}"
        )));
    }
    let train = len - horizon;
    let fit = fit_gnar(&x.rows(0, train).into_owned(), graph, ridge)?;
    let a = fit.coefficient_matrix();
    let mut state = x.row(train - 1).transpose();
    let mut mspe = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        state = &a * state;
        let actual = x.row(train - 1 + h).transpose();
        mspe.push((&state - actual).map(|e| e * e).sum() / p as f64);
    }
    Ok(ForecastReport {
        horizons: (1..=horizon).collect(),
        mspe,
        fit,
    })
}
