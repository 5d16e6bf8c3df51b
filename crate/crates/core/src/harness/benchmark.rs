//! Replicated simulation studies: simulate, estimate, compare with the true
//! graph, and tabulate edge rates as CSV.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cig::{wav_ts_glasso, WavTsGlassoConfig};
use crate::discovery::{discover_network, ScaleHint};
use crate::error::{Error, Result};
use crate::fourier::{fourier_ts_glasso, FourierConfig};
use crate::glasso::Criterion;
use crate::graph::Graph;
use crate::harness::metrics::{edge_rates, EdgeRates};
use crate::simulate::{
    block_varma, erdos_renyi, noise_precision_var, oracle_cig, random_ring_var, ring, GnarModel,
    VarmaModel,
};
use crate::surrogate::RngSeedPlan;
use crate::wavelet::WaveletFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Wavelet,
    Fourier,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wavelet" | "wavelet_l1" => Ok(Method::Wavelet),
            "fourier" | "fourier_l1" => Ok(Method::Fourier),
            other => Err(Error::config(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Wavelet => "wavelet",
            Method::Fourier => "fourier",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    ErdosRenyi { nodes: usize, rho: f64 },
    Ring { nodes: usize },
}

impl GraphSpec {
    pub fn sample(&self, seed: u64) -> Graph {
        match *self {
            GraphSpec::ErdosRenyi { nodes, rho } => erdos_renyi(nodes, rho, seed),
            GraphSpec::Ring { nodes } => ring(nodes),
        }
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = Error;
    /// `ring:P` or `er:P:rho`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::config(format!("graph must be ring:P or er:P:rho, got '{s}'"));
        match parts.as_slice() {
            ["ring", p] => Ok(GraphSpec::Ring {
                nodes: p.parse().map_err(|_| bad())?,
            }),
            ["er", p, rho] => Ok(GraphSpec::ErdosRenyi {
                nodes: p.parse().map_err(|_| bad())?,
                rho: rho.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// GNAR with a common `alpha_l` at every node; `beta[l][r-1]`.
    Gnar {
        graph: GraphSpec,
        alpha: Vec<f64>,
        beta: Vec<Vec<f64>>,
    },
    /// Ring VAR(1) with coefficients drawn from `(lo, hi)`.
    RingVar {
        nodes: usize,
        lo: f64,
        hi: f64,
    },
    /// `A = 0.5 I` with a sparse noise precision.
    NoisePrecision {
        nodes: usize,
    },
    BlockVarma,
    WhiteNoise {
        nodes: usize,
    },
}

/// A process drawn for one scenario, with the graph to compare against.
#[derive(Debug, Clone)]
pub struct SampledModel {
    pub var: VarmaModel,
    pub gnar: Option<GnarModel>,
    pub truth: Graph,
    /// Underlying GNAR network, for discovery runs.
    pub network: Option<Graph>,
}

impl ModelSpec {
    pub fn sample(&self, seed: u64) -> Result<SampledModel> {
        match self {
            ModelSpec::Gnar { graph, alpha, beta } => {
                let network = graph.sample(seed);
                let gnar = GnarModel::global(network.clone(), alpha, beta.clone())?;
                Ok(SampledModel {
                    var: gnar.to_var(),
                    truth: gnar.true_cig(),
                    network: Some(network),
                    gnar: Some(gnar),
                })
            }
            ModelSpec::RingVar { nodes, lo, hi } => {
                let var = random_ring_var(*nodes, *lo, *hi, seed);
                let truth = oracle_cig(&var)?;
                Ok(SampledModel {
                    var,
                    gnar: None,
                    truth,
                    network: Some(ring(*nodes)),
                })
            }
            ModelSpec::NoisePrecision { nodes } => {
                let var = noise_precision_var(*nodes, seed);
                let truth = oracle_cig(&var)?;
                Ok(SampledModel {
                    var,
                    gnar: None,
                    truth,
                    network: None,
                })
            }
            ModelSpec::BlockVarma => Ok(SampledModel {
                var: block_varma(),
                gnar: None,
                truth: crate::simulate::block_varma_graph(),
                network: None,
            }),
            ModelSpec::WhiteNoise { nodes } => Ok(SampledModel {
                var: VarmaModel::var(Vec::new(), nalgebra::DMatrix::identity(*nodes, *nodes)),
                gnar: None,
                truth: Graph::empty(*nodes),
                network: None,
            }),
        }
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("{what}: '{v}' is not a number")))
        })
        .collect()
}

fn parse_num<N: FromStr>(s: &str, what: &str) -> Result<N> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("{what}: cannot parse '{s}'")))
}

impl ModelSpec {
    /// Builds a model from loose key/value parts, as given on the command line
    /// or in a config file.
    ///
    /// Kinds: `gnar` (needs `graph`, `beta`; optional `alpha`), `ring-var`
    /// (`nodes`, optional `lo`/`hi`), `noise-precision` (`nodes`), `varma20`,
    /// `white` (`nodes`). `beta` separates lags with `;` and stages with `,`,
    /// so `0.4;0.4` is GNAR(2,[1,1]) and `0.4,0.4` is GNAR(1,[2]).
    pub fn from_parts(parts: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| parts.get(k).map(String::as_str);
        let need = |k: &str| get(k).ok_or_else(|| Error::config(format!("model kind needs '{k}'")));
        let nodes = || -> Result<usize> { parse_num(need("nodes")?, "nodes") };
        let kind = get("kind").unwrap_or("gnar");
        match kind {
            "gnar" => {
                let graph: GraphSpec = need("graph")?.parse()?;
                let beta = need("beta")?
                    .split(';')
                    .map(|lag| parse_list(lag, "beta"))
                    .collect::<Result<Vec<_>>>()?;
                let alpha = match get("alpha") {
                    Some(a) => parse_list(a, "alpha")?,
                    None => vec![0.0; beta.len()],
                };
                if alpha.len() != beta.len() {
                    return Err(Error::config(format!(
                        "alpha has {} lags but beta has {}",
                        alpha.len(),
                        beta.len()
                    )));
                }
                Ok(ModelSpec::Gnar { graph, alpha, beta })
            }
            "ring-var" => Ok(ModelSpec::RingVar {
                nodes: nodes()?,
                lo: get("lo").map_or(Ok(0.6), |v| parse_num(v, "lo"))?,
                hi: get("hi").map_or(Ok(0.7), |v| parse_num(v, "hi"))?,
            }),
            "noise-precision" => Ok(ModelSpec::NoisePrecision { nodes: nodes()? }),
            "varma20" => Ok(ModelSpec::BlockVarma),
            "white" => Ok(ModelSpec::WhiteNoise { nodes: nodes()? }),
            other => Err(Error::config(format!(
                "unknown model kind '{other}' (gnar, ring-var, noise-precision, varma20, white)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub model: ModelSpec,
    pub len: usize,
    pub replicates: usize,
    pub method: Method,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub fourier_criterion: Criterion,
    pub gamma: f64,
    pub family: WaveletFamily,
    pub half_window: Option<usize>,
    /// Score the discovered network (at this scale) instead of the CIG.
    pub discovery: Option<ScaleHint>,
}

impl Scenario {
    pub fn new(id: &str, model: ModelSpec) -> Self {
        Scenario {
            id: id.to_string(),
            model,
            len: 1024,
            replicates: 50,
            method: Method::Wavelet,
            bootstrap_replicates: 50,
            seed: 1,
            criterion: Criterion::Ebic,
            fourier_criterion: Criterion::Bic,
            gamma: 0.5,
            family: WaveletFamily::Haar,
            half_window: None,
            discovery: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::config(
                "the number of replicates K must be at least 1",
            ));
        }
        if self.len < 4 {
            return Err(Error::config("series length must be at least 4"));
        }
        Ok(())
    }

    /// Builds a scenario from `key = value` settings. A `scenario` key picks a
    /// built-in design to start from; otherwise the model keys of
    /// [`ModelSpec::from_parts`] are required.
    pub fn from_config(settings: &BTreeMap<String, String>) -> Result<Self> {
        let mut s = match settings.get("scenario") {
            Some(id) => scenario(id)?,
            None => Scenario::new(
                settings.get("id").map_or("custom", String::as_str),
                ModelSpec::from_parts(settings)?,
            ),
        };
        s.apply(settings)?;
        Ok(s)
    }

    /// Overrides run settings. Model keys and unknown keys are rejected here
    /// only if they cannot be interpreted at all.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        const MODEL_KEYS: &[&str] = &[
            "scenario", "id", "kind", "graph", "alpha", "beta", "nodes", "lo", "hi",
        ];
        for (key, value) in settings {
            match key.as_str() {
                "k" | "replicates" => self.replicates = parse_num(value, key)?,
                "t" | "len" => self.len = parse_num(value, key)?,
                "r" | "bootstrap" => self.bootstrap_replicates = parse_num(value, key)?,
                "seed" => self.seed = parse_num(value, key)?,
                "method" => self.method = value.parse()?,
                "criterion" => self.criterion = value.parse()?,
                "fourier_criterion" => self.fourier_criterion = value.parse()?,
                "gamma" => self.gamma = parse_num(value, key)?,
                "family" => self.family = value.parse()?,
                "half_window" => self.half_window = Some(parse_num(value, key)?),
                "discovery" | "scale" => self.discovery = Some(value.parse()?),
                k if MODEL_KEYS.contains(&k) => {}
                other => return Err(Error::config(format!("unknown setting '{other}'"))),
            }
        }
        self.validate()
    }

    pub fn wavelet_config(&self, seed: u64) -> WavTsGlassoConfig {
        WavTsGlassoConfig {
            family: self.family,
            bootstrap_replicates: self.bootstrap_replicates,
            criterion: self.criterion,
            gamma: self.gamma,
            seed,
            ..Default::default()
        }
    }

    pub fn fourier_config(&self) -> FourierConfig {
        FourierConfig {
            half_window: self.half_window,
            criterion: self.fourier_criterion,
            gamma: self.gamma,
            ..Default::default()
        }
    }
}

fn gnar(graph: GraphSpec, alpha: &[f64], beta: Vec<Vec<f64>>) -> ModelSpec {
    ModelSpec::Gnar {
        graph,
        alpha: alpha.to_vec(),
        beta,
    }
}

/// Identifiers accepted by [`scenario`].
pub const SCENARIO_IDS: &[&str] = &[
    "t1_er_rho01",
    "t1_er_rho04",
    "ring10_b065",
    "ring10_b035",
    "ring25_b065",
    "ring25_b035",
    "gnar2_er_rho01",
    "gnar2_er_rho04",
    "gnar1s2_er25_rho005",
    "gnar1s2_er25_rho01",
    "var_i1",
    "var_i2",
    "var_noise",
    "varma20",
    "white10",
    "disc_ring10_b065",
    "disc_er_rho01",
];

/// Built-in designs, with `K = R = 50` and `T = 1024`.
pub fn scenario(id: &str) -> Result<Scenario> {
    let er10 = |rho| GraphSpec::ErdosRenyi { nodes: 10, rho };
    let er25 = |rho| GraphSpec::ErdosRenyi { nodes: 25, rho };
    let model = match id {
        "t1_er_rho01" | "disc_er_rho01" => gnar(er10(0.1), &[0.0], vec![vec![0.85]]),
        "t1_er_rho04" => gnar(er10(0.4), &[0.0], vec![vec![0.85]]),
        "ring10_b065" | "disc_ring10_b065" => {
            gnar(GraphSpec::Ring { nodes: 10 }, &[0.0], vec![vec![0.65]])
        }
        "ring10_b035" => gnar(GraphSpec::Ring { nodes: 10 }, &[0.0], vec![vec![0.35]]),
        "ring25_b065" => gnar(GraphSpec::Ring { nodes: 25 }, &[0.0], vec![vec![0.65]]),
        "ring25_b035" => gnar(GraphSpec::Ring { nodes: 25 }, &[0.0], vec![vec![0.35]]),
        "gnar2_er_rho01" => gnar(er10(0.1), &[0.0, 0.0], vec![vec![0.4], vec![0.4]]),
        "gnar2_er_rho04" => gnar(er10(0.4), &[0.0, 0.0], vec![vec![0.4], vec![0.4]]),
        "gnar1s2_er25_rho005" => gnar(er25(0.05), &[0.0], vec![vec![0.4, 0.4]]),
        "gnar1s2_er25_rho01" => gnar(er25(0.1), &[0.0], vec![vec![0.4, 0.4]]),
        "var_i1" => ModelSpec::RingVar {
            nodes: 10,
            lo: 0.6,
            hi: 0.7,
        },
        "var_i2" => ModelSpec::RingVar {
            nodes: 10,
            lo: 0.4,
            hi: 0.9,
        },
        "var_noise" => ModelSpec::NoisePrecision { nodes: 10 },
        "varma20" => ModelSpec::BlockVarma,
        "white10" => ModelSpec::WhiteNoise { nodes: 10 },
        other => {
            return Err(Error::config(format!(
                "unknown scenario '{other}'; known: {}",
                SCENARIO_IDS.join(", ")
            )))
        }
    };
    let mut s = Scenario::new(id, model);
    if id.starts_with("disc_") {
        s.discovery = Some(ScaleHint::Finest);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub rates: Option<EdgeRates>,
    pub est_edges: Option<usize>,
    pub true_edges: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub scenario: String,
    pub rows: Vec<ReplicateRow>,
}

impl BenchmarkReport {
    /// Mean rates over the replicates that succeeded.
    pub fn mean(&self) -> Option<EdgeRates> {
        let ok: Vec<&EdgeRates> = self.rows.iter().filter_map(|r| r.rates.as_ref()).collect();
        if ok.is_empty() {
            return None;
        }
        let n = ok.len() as f64;
        Some(EdgeRates {
            tpr: ok.iter().map(|r| r.tpr).sum::<f64>() / n,
            fpr: ok.iter().map(|r| r.fpr).sum::<f64>() / n,
            tdr: ok.iter().map(|r| r.tdr).sum::<f64>() / n,
        })
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// CSV with a version comment line, one row per replicate and a final
    /// `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# wavecig {}", env!("CARGO_PKG_VERSION"));
        out.push_str("replicate,tpr,fpr,tdr,est_edges,true_edges,error\n");
        let num = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.replicate,
                num(r.rates.map(|x| x.tpr)),
                num(r.rates.map(|x| x.fpr)),
                num(r.rates.map(|x| x.tdr)),
                r.est_edges.map(|e| e.to_string()).unwrap_or_default(),
                r.true_edges,
                csv_field(r.error.as_deref().unwrap_or("")),
            );
        }
        let mean = self.mean();
        let est_mean = {
            let e: Vec<usize> = self.rows.iter().filter_map(|r| r.est_edges).collect();
            (!e.is_empty()).then(|| e.iter().sum::<usize>() as f64 / e.len() as f64)
        };
        let failures = self.failures();
        let _ = writeln!(
            out,
            "mean,{},{},{},{},{},{}",
            num(mean.map(|x| x.tpr)),
            num(mean.map(|x| x.fpr)),
            num(mean.map(|x| x.tdr)),
            num(est_mean),
            self.rows.first().map_or(0, |r| r.true_edges),
            if failures > 0 {
                format!("{failures} failed")
            } else {
                String::new()
            },
        );
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Seeds: stream 0 draws the model, stream 1 the data of replicate `k`,
/// stream 2 the estimator's bootstrap.
pub fn run_benchmark(scenario: &Scenario) -> Result<BenchmarkReport> {
    scenario.validate()?;
    let plan = RngSeedPlan::new(scenario.seed);
    let model = scenario.model.sample(plan.child(0).derive(1))?;
    let truth = match scenario.discovery {
        Some(_) => model.network.clone().ok_or_else(|| {
            Error::config("network discovery needs a model with an underlying network")
        })?,
        None => model.truth.clone(),
    };
    let rows = (1..=scenario.replicates)
        .into_par_iter()
        .map(|k| {
            let data_seed = plan.child(1).derive(k as u64);
            let est_seed = plan.child(2).derive(k as u64);
            let outcome = model
                .var
                .simulate(scenario.len, data_seed)
                .and_then(|x| estimate_graph(&x, scenario, est_seed))
                .and_then(|g| Ok((edge_rates(&g, &truth)?, g.edge_count())));
            match outcome {
                Ok((rates, edges)) => ReplicateRow {
                    replicate: k,
                    rates: Some(rates),
                    est_edges: Some(edges),
                    true_edges: truth.edge_count(),
                    error: None,
                },
                Err(e) => ReplicateRow {
                    replicate: k,
                    rates: None,
                    est_edges: None,
                    true_edges: truth.edge_count(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(BenchmarkReport {
        scenario: scenario.id.clone(),
        rows,
    })
}

fn estimate_graph(x: &nalgebra::DMatrix<f64>, scenario: &Scenario, seed: u64) -> Result<Graph> {
    match (scenario.method, scenario.discovery) {
        (Method::Wavelet, None) => Ok(wav_ts_glasso(x, &scenario.wavelet_config(seed))?.graph),
        (Method::Wavelet, Some(hint)) => {
            let est = crate::cig::estimate_scale_precisions(x, &scenario.wavelet_config(seed))?;
            discover_network(&est.estimates(), hint)
        }
        (Method::Fourier, None) => Ok(fourier_ts_glasso(x, &scenario.fourier_config())?.graph),
        (Method::Fourier, Some(_)) => Err(Error::config(
            "network discovery is only available for the wavelet method",
        )),
    }
}
