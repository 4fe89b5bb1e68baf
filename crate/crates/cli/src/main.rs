//! `fewshot-eval`: run, compare and size few-shot evaluations from the shell.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fewshot_eval::output::{self, OutputFormat};
use fewshot_eval::variance_lab::{
    feasible_q_grid, fit_variance_model, sweep_variance, FitWeighting, GaussianClassSpec, SynthConfig, DEFAULT_Q_GRID,
};
use fewshot_eval::{
    compare_runs, conclusiveness_report, ingest_feature_file, run_protocol, Adapter, Error, ErrorCategory, ExecMode,
    LogRegConfig, OracleConfig, PoolSource, ProtocolConfig, RunManifest, SamplingMode, SignificanceMatrix, TaskSpec,
    DEFAULT_P_LIMIT,
};

use config::ConfigFile;

#[derive(Parser)]
#[command(
    name = "fewshot-eval",
    version,
    about = "Few-shot evaluation with honest confidence intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a feature CSV and summarize the pool.
    IngestCheck {
        /// Feature CSV with header `label,f0,...`.
        input: PathBuf,
    },
    /// Sample tasks, evaluate a method and write the run manifest.
    Run(RunArgs),
    /// Build the significance matrix of saved run manifests.
    Compare(CompareArgs),
    /// Measure Var(Ā) against the number of queries on synthetic data.
    Sweep(SweepArgs),
    /// Fit the variance model to a sweep and report the best query count.
    Fit(FitArgs),
    /// Count conclusive verdicts over saved significance matrices.
    Report(ReportArgs),
}

#[derive(Args, Default)]
struct PoolArgs {
    /// Feature CSV to evaluate on.
    #[arg(long, conflicts_with = "synth")]
    input: Option<PathBuf>,
    /// Synthetic 1-D Gaussian classes as `mu:sigma,mu:sigma,...`.
    #[arg(long, allow_hyphen_values = true)]
    synth: Option<String>,
    /// Total samples of the synthetic pool.
    #[arg(long)]
    pool_size: Option<usize>,
}

#[derive(Args, Default)]
struct AdapterArgs {
    /// `ncc`, `ncc-l2`, `lr` (logistic regression) or `oracle`.
    #[arg(long)]
    adapter: Option<String>,
    #[arg(long)]
    lr_step: Option<f64>,
    #[arg(long)]
    lr_l2: Option<f64>,
    #[arg(long)]
    lr_iters: Option<usize>,
    /// Mean accuracy of the oracle method.
    #[arg(long)]
    oracle_base: Option<f64>,
    /// Per-task standard deviation of the oracle method.
    #[arg(long)]
    oracle_sd: Option<f64>,
    /// Correlation between oracle methods evaluated on the same tasks.
    #[arg(long)]
    oracle_r: Option<f64>,
    /// Noise stream of the oracle; distinct methods need distinct streams.
    #[arg(long)]
    oracle_stream: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required, no default).
    #[arg(long)]
    seed: Option<u64>,
    /// `with_replacement` or `depletion`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    ways: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    queries: Option<usize>,
    /// Number of tasks (with replacement only).
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    p_limit: Option<f64>,
    /// Method name stored in the manifest.
    #[arg(long)]
    method_id: Option<String>,
    /// Manifest output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate tasks on all cores (output is identical).
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    pool: PoolArgs,
    #[command(flatten)]
    adapter: AdapterArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Run manifests to compare (at least two).
    #[arg(required = true, num_args = 2..)]
    manifests: Vec<PathBuf>,
    #[arg(long)]
    p_limit: Option<f64>,
    /// `text`, `json` or `csv`.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ways: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    /// Comma-separated query counts; defaults to a 1..90 grid cut to what fits.
    #[arg(long)]
    q_grid: Option<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
    #[arg(long, allow_hyphen_values = true)]
    synth: Option<String>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[command(flatten)]
    adapter: AdapterArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep CSV produced by `sweep`.
    sweep: PathBuf,
    #[arg(long)]
    ways: usize,
    /// Total samples of the swept pool.
    #[arg(long)]
    pool_size: usize,
    /// Weight points by their repetition count.
    #[arg(long)]
    weighted: bool,
    /// `text` or `json`.
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Significance matrices in JSON form.
    #[arg(required = true)]
    matrices: Vec<PathBuf>,
    #[arg(long, default_value = "text")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::InsufficientTasks => 4,
            })
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::IngestCheck { input } => ingest_check(&input),
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
        Command::Report(a) => report(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => output::write_output(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn exec_mode(parallel: bool) -> ExecMode {
    if parallel {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

fn ingest_check(input: &Path) -> Result<(), Error> {
    let pool = ingest_feature_file(input)?;
    let sizes = pool.class_sizes();
    let mut text = format!(
        "classes: {}\nsamples: {}\ndim: {}\npool_id: {}\n",
        pool.num_classes(),
        pool.total_samples(),
        pool.dim(),
        pool.pool_id()
    );
    for (label, n) in pool.labels().iter().zip(sizes) {
        text.push_str(&format!("  {label}: {n}\n"));
    }
    emit(None, &text)
}

const POOL_KEYS: [&str; 3] = ["input", "synth", "pool-size"];
const ADAPTER_KEYS: [&str; 8] = [
    "adapter",
    "lr-step",
    "lr-l2",
    "lr-iters",
    "oracle-base",
    "oracle-sd",
    "oracle-r",
    "oracle-stream",
];

fn parse_synth(spec: &str, total: usize, seed: u64) -> Result<SynthConfig, Error> {
    let class_specs = spec
        .split(',')
        .map(|part| {
            let (mu, sigma) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("synthetic class `{part}` is not `mu:sigma`")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("`{s}` in `--synth` is not a number")))
            };
            Ok(GaussianClassSpec::new(num(mu)?, num(sigma)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let cfg = SynthConfig {
        class_specs,
        total_samples: total,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn pool_source(args: PoolArgs, cfg: &ConfigFile, seed: u64) -> Result<PoolSource, Error> {
    let input: Option<PathBuf> = cfg.pick(args.input, "input")?;
    let synth: Option<String> = cfg.pick(args.synth, "synth")?;
    match (input, synth) {
        (Some(path), None) => Ok(PoolSource::FeatureFile(path)),
        (None, Some(spec)) => {
            let total = cfg.require(args.pool_size, "pool-size")?;
            Ok(PoolSource::Synthetic(parse_synth(&spec, total, seed)?))
        }
        (Some(_), Some(_)) => Err(Error::Config("give either `--input` or `--synth`, not both".into())),
        (None, None) => Err(Error::Config(
            "an `--input` feature file or a `--synth` pool is required".into(),
        )),
    }
}

fn adapter(args: AdapterArgs, cfg: &ConfigFile) -> Result<Adapter, Error> {
    let name = cfg.pick(args.adapter, "adapter")?.unwrap_or_else(|| "ncc".to_owned());
    let a = match name.as_str() {
        "ncc" => Adapter::Ncc { l2_normalize: false },
        "ncc-l2" => Adapter::Ncc { l2_normalize: true },
        "lr" | "logistic-regression" => {
            let d = LogRegConfig::default();
            Adapter::LogisticRegression(LogRegConfig {
                step_size: cfg.pick(args.lr_step, "lr-step")?.unwrap_or(d.step_size),
                l2_penalty: cfg.pick(args.lr_l2, "lr-l2")?.unwrap_or(d.l2_penalty),
                max_iters: cfg.pick(args.lr_iters, "lr-iters")?.unwrap_or(d.max_iters),
            })
        }
        "oracle" => Adapter::Oracle(OracleConfig::with_correlation(
            cfg.require(args.oracle_base, "oracle-base")?,
            cfg.require(args.oracle_sd, "oracle-sd")?,
            cfg.require(args.oracle_r, "oracle-r")?,
            cfg.require(args.oracle_stream, "oracle-stream")?,
        )),
        other => return Err(Error::Config(format!("unknown adapter `{other}`"))),
    };
    a.validate()?;
    Ok(a)
}

fn run(a: RunArgs) -> Result<(), Error> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    let mut known = vec![
        "seed",
        "mode",
        "ways",
        "shots",
        "queries",
        "tasks",
        "p-limit",
        "method-id",
        "out",
        "parallel",
    ];
    known.extend(POOL_KEYS);
    known.extend(ADAPTER_KEYS);
    cfg.check_keys(&known)?;

    let seed: u64 = cfg.require(a.seed, "seed")?;
    let mode: SamplingMode = cfg.require(a.mode, "mode")?.parse()?;
    let mut spec = TaskSpec::new(
        cfg.require(a.ways, "ways")?,
        cfg.require(a.shots, "shots")?,
        cfg.require(a.queries, "queries")?,
    );
    spec.task_count = cfg.pick(a.tasks, "tasks")?;
    let adapter = adapter(a.adapter, &cfg)?;
    let source = pool_source(a.pool, &cfg, seed)?;
    let mut protocol = ProtocolConfig::new(mode, spec, adapter, seed);
    protocol.p_limit = cfg.pick(a.p_limit, "p-limit")?.unwrap_or(DEFAULT_P_LIMIT);
    protocol.method_id = cfg.pick(a.method_id, "method-id")?;
    protocol.validate()?;
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let exec = exec_mode(cfg.flag(a.parallel, "parallel")?);

    let pool = source.load()?;
    let outcome = run_protocol(&pool, &protocol, exec)?;
    if let Some(path) = &out {
        outcome.manifest.write(path)?;
    }
    let kind = match mode {
        SamplingMode::WithReplacement => "closed, normal",
        SamplingMode::Depletion => "open, Student",
    };
    emit(
        None,
        &format!(
            "{}: {} ({kind}, p = {}, T = {})\n",
            outcome.manifest.method_id, outcome.interval, protocol.p_limit, outcome.interval.tasks
        ),
    )
}

fn read_manifests(paths: &[PathBuf]) -> Result<Vec<RunManifest>, Error> {
    paths.iter().map(|p| RunManifest::read(p)).collect()
}

fn compare(a: CompareArgs) -> Result<(), Error> {
    let format: OutputFormat = a.format.parse()?;
    let manifests = read_manifests(&a.manifests)?;
    let m = compare_runs(&manifests, a.p_limit.unwrap_or(DEFAULT_P_LIMIT))?;
    let text = match format {
        OutputFormat::Text => output::matrix_text(&m),
        OutputFormat::Json => output::matrix_json(&m)?,
        OutputFormat::Csv => output::matrix_csv(&m),
    };
    emit(a.out.as_deref(), &text)
}

fn parse_grid(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|q| {
            q.trim()
                .parse()
                .map_err(|_| Error::Config(format!("`{q}` in `--q-grid` is not a positive integer")))
        })
        .collect()
}

fn sweep(a: SweepArgs) -> Result<(), Error> {
    let cfg = ConfigFile::load(a.config.as_deref())?;
    let mut known = vec![
        "seed",
        "ways",
        "shots",
        "q-grid",
        "repetitions",
        "out",
        "parallel",
        "synth",
        "pool-size",
    ];
    known.extend(ADAPTER_KEYS);
    cfg.check_keys(&known)?;

    let seed: u64 = cfg.require(a.seed, "seed")?;
    let ways: usize = cfg.pick(a.ways, "ways")?.unwrap_or(2);
    let shots: usize = cfg.require(a.shots, "shots")?;
    let reps: usize = cfg.pick(a.repetitions, "repetitions")?.unwrap_or(200);
    let spec: String = cfg.pick(a.synth, "synth")?.unwrap_or_else(|| "-1:1,1:1".to_owned());
    let total: usize = cfg.pick(a.pool_size, "pool-size")?.unwrap_or(1000);
    let synth = parse_synth(&spec, total, seed)?;
    let grid = match cfg.pick::<String>(a.q_grid, "q-grid")? {
        Some(g) => parse_grid(&g)?,
        None => feasible_q_grid(&DEFAULT_Q_GRID, &synth, ways, shots),
    };
    let adapter = adapter(a.adapter, &cfg)?;
    let exec = exec_mode(cfg.flag(a.parallel, "parallel")?);
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;

    let points = sweep_variance(&synth, ways, shots, &grid, reps, &adapter, exec)?;
    emit(out.as_deref(), &output::sweep_csv(&points))
}

fn fit(a: FitArgs) -> Result<(), Error> {
    let format: OutputFormat = a.format.parse()?;
    let text = std::fs::read_to_string(&a.sweep).map_err(|e| Error::Io {
        path: a.sweep.clone(),
        source: e,
    })?;
    let points = output::sweep_from_csv(&text)?;
    let weighting = if a.weighted {
        FitWeighting::Repetitions
    } else {
        FitWeighting::Unweighted
    };
    let fit = fit_variance_model(&points, a.ways, a.pool_size, weighting)?;
    let q = fit.q_star().ok();
    let text = match format {
        OutputFormat::Json => output::fit_json(&fit, q)?,
        _ => output::fit_text(&fit, q),
    };
    emit(a.out.as_deref(), &text)
}

fn report(a: ReportArgs) -> Result<(), Error> {
    let format: OutputFormat = a.format.parse()?;
    let matrices = a
        .matrices
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            output::matrix_from_json(&text)
        })
        .collect::<Result<Vec<SignificanceMatrix>, Error>>()?;
    let r = conclusiveness_report(&matrices);
    let text = match format {
        OutputFormat::Json => output::report_json(&r)?,
        _ => output::report_text(&r),
    };
    emit(a.out.as_deref(), &text)
}
