use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavecig::cig::{estimate_scale_precisions, wav_ts_glasso, WavTsGlassoConfig};
use wavecig::discovery::{discover_network, ScaleHint};
use wavecig::fourier::{fourier_ts_glasso, FourierConfig};
use wavecig::glasso::Criterion;
use wavecig::graph::{GraphDocument, GraphMeta};
use wavecig::harness::benchmark::{run_benchmark, Method, ModelSpec, Scenario};
use wavecig::harness::forecast::fit_gnar_forecast;
use wavecig::harness::io::{read_config, read_series, write_series, write_series_to, Series};
use wavecig::surrogate::RngSeedPlan;
use wavecig::wavelet::WaveletFamily;
use wavecig::{Error, Graph, Result};

#[derive(Parser)]
#[command(
    name = "wavecig",
    version,
    about = "Wavelet-domain conditional independence graphs for multivariate time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a process and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the conditional independence graph of a CSV series.
    Estimate(EstimateArgs),
    /// Recover an underlying network by clustering one scale's precision values.
    Discover(DiscoverArgs),
    /// Run a replicated simulation study and write edge rates as CSV.
    Benchmark(BenchmarkArgs),
    /// Fit GNAR(1,[1]) on a network and report multi-step MSPE.
    Forecast(ForecastArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// gnar, ring-var, noise-precision, varma20 or white.
    #[arg(long, default_value = "gnar")]
    kind: String,
    /// ring:P or er:P:rho.
    #[arg(long)]
    graph: Option<String>,
    /// Per-lag alpha, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Lags separated by ';', stages by ','.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long = "T", default_value_t = 1024)]
    len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the network (GNAR kinds) as graph JSON.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args)]
struct WaveletArgs {
    /// Bootstrap replicates.
    #[arg(long = "R", default_value_t = 50)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "haar")]
    family: WaveletFamily,
    /// aic, bic or ebic; eBIC for wavelets and BIC for Fourier by default.
    #[arg(long)]
    criterion: Option<Criterion>,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
}

impl WaveletArgs {
    fn config(&self) -> WavTsGlassoConfig {
        WavTsGlassoConfig {
            family: self.family,
            bootstrap_replicates: self.bootstrap,
            criterion: self.criterion.unwrap_or(Criterion::Ebic),
            gamma: self.gamma,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "wavelet")]
    method: Method,
    #[command(flatten)]
    wavelet: WaveletArgs,
    /// Fourier smoothing half-window m_T.
    #[arg(long)]
    half_window: Option<usize>,
    /// Graph JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscoverArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// finest, middle or a scale number.
    #[arg(long, default_value = "finest")]
    scale: ScaleHint,
    #[command(flatten)]
    wavelet: WaveletArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Built-in scenario id.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "K")]
    replicates: Option<usize>,
    #[arg(long = "R")]
    bootstrap: Option<usize>,
    #[arg(long = "T")]
    len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Network as graph JSON.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 5)]
    horizon: usize,
    /// Ridge added to the normal equations of the least-squares fit.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Add an `mspe_empty` column from the same fit on an edgeless network.
    #[arg(long)]
    compare_empty: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_graph(out: Option<&Path>, doc: &GraphDocument) -> Result<()> {
    emit(out, &doc.to_json()?)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut parts = BTreeMap::new();
    parts.insert("kind".to_string(), args.kind.clone());
    let optional = [
        ("graph", args.graph.clone()),
        ("alpha", args.alpha.clone()),
        ("beta", args.beta.clone()),
        ("nodes", args.nodes.map(|v| v.to_string())),
        ("lo", args.lo.map(|v| v.to_string())),
        ("hi", args.hi.map(|v| v.to_string())),
    ];
    for (k, v) in optional {
        if let Some(v) = v {
            parts.insert(k.to_string(), v);
        }
    }
    let plan = RngSeedPlan::new(args.seed);
    let model = ModelSpec::from_parts(&parts)?.sample(plan.child(0).derive(1))?;
    let data = model.var.simulate(args.len, plan.child(1).derive(1))?;
    let series = Series::new(data);
    match &args.out {
        Some(path) => write_series(path, &series)?,
        None => write_series_to(std::io::stdout().lock(), &series)?,
    }
    if let Some(path) = &args.graph_out {
        let network = model
            .network
            .ok_or_else(|| Error::config("--graph-out needs a model with an underlying network"))?;
        let meta = GraphMeta {
            method: "network".into(),
            ..Default::default()
        };
        emit_graph(
            Some(path),
            &GraphDocument::new(&network, series.names.clone(), meta),
        )?;
    }
    Ok(())
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let series = read_series(&args.input)?;
    let (graph, meta) = match args.method {
        Method::Wavelet => {
            let est = wav_ts_glasso(&series.data, &args.wavelet.config())?;
            let meta = est.diagnostics.meta("wavelet_l1");
            (est.graph, meta)
        }
        Method::Fourier => {
            let cfg = FourierConfig {
                half_window: args.half_window,
                criterion: args.wavelet.criterion.unwrap_or(Criterion::Bic),
                gamma: args.wavelet.gamma,
                ..Default::default()
            };
            let est = fourier_ts_glasso(&series.data, &cfg)?;
            let meta = est.meta();
            (est.graph, meta)
        }
    };
    emit_graph(
        args.out.as_deref(),
        &GraphDocument::new(&graph, series.names, meta),
    )
}

fn discover(args: DiscoverArgs) -> Result<()> {
    let series = read_series(&args.input)?;
    let est = estimate_scale_precisions(&series.data, &args.wavelet.config())?;
    let estimates = est.estimates();
    let j = args.scale.resolve(estimates.len())?;
    let graph = discover_network(&estimates, args.scale)?;
    let mut lambda_per_scale = BTreeMap::new();
    lambda_per_scale.insert(j.to_string(), estimates[j - 1].lambda);
    let meta = GraphMeta {
        method: "discovery".into(),
        scales_selected: vec![j],
        lambda_per_scale,
    };
    emit_graph(
        args.out.as_deref(),
        &GraphDocument::new(&graph, series.names, meta),
    )
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let mut settings = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    if let Some(id) = &args.scenario {
        settings.insert("scenario".into(), id.clone());
    }
    let flags = [
        ("k", args.replicates.map(|v| v.to_string())),
        ("r", args.bootstrap.map(|v| v.to_string())),
        ("t", args.len.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("method", args.method.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            settings.insert(k.to_string(), v);
        }
    }
    let scenario = Scenario::from_config(&settings)?;
    let report = run_benchmark(&scenario)?;
    emit(args.out.as_deref(), &report.to_csv())
}

fn forecast(args: ForecastArgs) -> Result<()> {
    let series = read_series(&args.input)?;
    let graph = GraphDocument::read(&args.graph)?.graph()?;
    if graph.node_count() != series.data.ncols() {
        return Err(Error::data(format!(
            "graph has {} nodes but the series has {} columns",
            graph.node_count(),
            series.data.ncols()
        )));
    }
    let report = fit_gnar_forecast(&series.data, &graph, args.horizon, args.ridge)?;
    if !args.compare_empty {
        return emit(args.out.as_deref(), &report.to_csv());
    }
    let empty = Graph::empty(graph.node_count());
    let baseline = fit_gnar_forecast(&series.data, &empty, args.horizon, args.ridge)?;
    let mut csv = String::from("horizon,mspe,mspe_empty\n");
    for ((h, a), b) in report.horizons.iter().zip(&report.mspe).zip(&baseline.mspe) {
        csv.push_str(&format!("{h},{a:.8},{b:.8}\n"));
    }
    emit(args.out.as_deref(), &csv)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("WAVECIG_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::config(format!(
                "WAVECIG_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("cannot configure the thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Discover(a) => discover(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Forecast(a) => forecast(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
