//! Recovering the underlying network from one scale's precision values by
//! splitting edge magnitudes into a signal and a noise cluster.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::glasso::PrecisionEstimate;
use crate::graph::Graph;
use crate::scalar::{to_f64, Real};

const MAX_LLOYD_ITER: usize = 100;

/// Edges of one scale's support with their absolute precision values.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeValueSet {
    pub scale: usize,
    pub node_count: usize,
    pub values: Vec<((usize, usize), f64)>,
}

impl EdgeValueSet {
    pub fn from_estimate<T: Real>(estimate: &PrecisionEstimate<T>) -> Self {
        EdgeValueSet {
            scale: estimate.scale,
            node_count: estimate.dim(),
            values: estimate
                .edges()
                .into_iter()
                .map(|(p, q)| ((p, q), to_f64(estimate.theta[(p, q)].abs())))
                .collect(),
        }
    }
}

/// Two-means on the real line, initialised at `(min, max)`. Returns the
/// membership of each value in the upper cluster.
///
/// A value equidistant from both centres joins the lower one.
pub fn two_means(values: &[f64]) -> Vec<bool> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![true; values.len()];
    }
    let mut upper: Vec<bool> = vec![false; values.len()];
    for iter in 0..MAX_LLOYD_ITER {
        let next: Vec<bool> = values
            .iter()
            .map(|&v| (v - hi).abs() < (v - lo).abs())
            .collect();
        if iter > 0 && next == upper {
            break;
        }
        upper = next;
        let mean = |flag: bool| {
            let (sum, n) = values
                .iter()
                .zip(&upper)
                .filter(|(_, &u)| u == flag)
                .fold((0.0, 0usize), |(s, n), (&v, _)| (s + v, n + 1));
            (n > 0).then(|| sum / n as f64)
        };
        lo = mean(false).unwrap_or(lo);
        hi = mean(true).unwrap_or(hi);
    }
    upper
}

/// Keeps the edges in the cluster whose centre is farther from zero.
pub fn cluster_edges(set: &EdgeValueSet) -> Graph {
    let keep: Vec<bool> = match set.values.len() {
        0 => Vec::new(),
        1 => vec![true],
        _ => two_means(&set.values.iter().map(|(_, v)| v.abs()).collect::<Vec<_>>()),
    };
    let edges = set
        .values
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((e, _), _)| *e);
    Graph::from_edges(set.node_count, edges).expect("edge values come from a valid support")
}

/// Which scale the network is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleHint {
    #[default]
    Finest,
    /// `floor(J / 2)`.
    Middle,
    Explicit(usize),
}

impl ScaleHint {
    pub fn resolve(self, levels: usize) -> Result<usize> {
        match self {
            ScaleHint::Finest => Ok(1),
            ScaleHint::Middle => Ok((levels / 2).max(1)),
            ScaleHint::Explicit(j) if (1..=levels).contains(&j) => Ok(j),
            ScaleHint::Explicit(j) => {
                Err(Error::config(format!("scale {j} is outside 1..={levels}")))
            }
        }
    }
}

impl fmt::Display for ScaleHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleHint::Finest => f.write_str("finest"),
            ScaleHint::Middle => f.write_str("middle"),
            ScaleHint::Explicit(j) => write!(f, "{j}"),
        }
    }
}

impl FromStr for ScaleHint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "finest" => Ok(ScaleHint::Finest),
            "middle" => Ok(ScaleHint::Middle),
            other => other
                .parse::<usize>()
                .map(ScaleHint::Explicit)
                .map_err(|_| {
                    Error::config(format!(
                        "scale must be finest, middle or an integer, got '{s}'"
                    ))
                }),
        }
    }
}

/// Network estimate from the hinted scale. `estimates[j - 1]` is scale `j`.
pub fn discover_network<T: Real>(
    estimates: &[PrecisionEstimate<T>],
    hint: ScaleHint,
) -> Result<Graph> {
    if estimates.is_empty() {
        return Err(Error::data("no scale estimates to discover a network from"));
    }
    let j = hint.resolve(estimates.len())?;
    Ok(cluster_edges(&EdgeValueSet::from_estimate(
        &estimates[j - 1],
    )))
}
