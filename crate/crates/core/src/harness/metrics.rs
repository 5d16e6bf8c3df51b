//! Edge-detection rates of an estimated graph against the truth.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeRates {
    pub tpr: f64,
    pub fpr: f64,
    pub tdr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion(estimated: &Graph, truth: &Graph) -> Result<Confusion> {
    if estimated.node_count() != truth.node_count() {
        return Err(Error::data(format!(
            "estimated graph has {} nodes, truth has {}",
            estimated.node_count(),
            truth.node_count()
        )));
    }
    let tp = estimated
        .edges()
        .filter(|&(p, q)| truth.has_edge(p, q))
        .count();
    let fp = estimated.edge_count() - tp;
    let fn_ = truth.edge_count() - tp;
    let tn = truth.pair_count() - tp - fp - fn_;
    Ok(Confusion { tp, fp, fn_, tn })
}

/// Rates over unordered pairs.
///
/// Empty denominators: TPR is 1 when the truth has no edges, FPR is 0 when
/// every pair is an edge, and TDR is 1 when nothing was predicted.
pub fn edge_rates(estimated: &Graph, truth: &Graph) -> Result<EdgeRates> {
    let c = confusion(estimated, truth)?;
    let ratio = |num: usize, den: usize, empty: f64| {
        if den == 0 {
            empty
        } else {
            num as f64 / den as f64
        }
    };
    Ok(EdgeRates {
        tpr: ratio(c.tp, c.tp + c.fn_, 1.0),
        fpr: ratio(c.fp, c.fp + c.tn, 0.0),
        tdr: ratio(c.tp, c.tp + c.fp, 1.0),
    })
}
