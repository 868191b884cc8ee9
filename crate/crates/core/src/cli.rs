//! Command-line interface: `estimate`, `generate`, `benchmark`, `profile`,
//! `sweep`.
//!
//! Every persisted table starts with a commented manifest block (`# key =
//! value`) recording the resolved options, input digests and artifact
//! version, so a result file is reproducible from its own header. Exit
//! codes: 0 success/converged, 1 non-convergence, 2 usage or input errors.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ndarray::Array1;
use sha2::{Digest, Sha256};

use crate::amabs::AmabsConfig;
use crate::bench::{
    aggregate, mean_std, performance_profile, performance_ratios, run_sweep, BenchmarkResult,
    CellStatus, Measure, ProblemSetup, SuiteSettings, SweepParameter,
};
use crate::data::{
    generate_synthetic, load_csv, model_spec_to_string, parse_model_spec, synthetic_model_spec,
    SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::model::LogLikelihood;
use crate::optim::{run, standard_errors, Algorithm, OptimizerConfig, OrderUsed, StepInfo};

#[derive(Parser)]
#[command(
    name = "mnlfit",
    version,
    about = "Multinomial logit estimation with deterministic, stochastic and hybrid optimizers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a model on a CSV dataset.
    Estimate(EstimateArgs),
    /// Generate a synthetic dataset with known true parameters.
    Generate(GenerateArgs),
    /// Run an algorithm x problem suite and persist per-repetition results.
    Benchmark(BenchmarkArgs),
    /// Compute performance profiles from a benchmark results table.
    Profile(ProfileArgs),
    /// Re-run one model over a grid of values for a single tuning parameter.
    Sweep(SweepArgs),
}

/// Optimizer knobs shared by estimate and sweep, named after the usual
/// symbols: window W, threshold Delta, count C, factor tau, batch0 N'_0,
/// hybrid-threshold Delta_H, epsilon.
#[derive(Args, Debug, Clone)]
struct OptimizerFlags {
    /// Stopping threshold on the relative gradient norm.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Epoch budget.
    #[arg(long, default_value_t = 1000)]
    max_epochs: u32,
    /// Moving-average window W.
    #[arg(long, default_value_t = 10)]
    window: usize,
    /// Improvement threshold (1% by default).
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    /// Unsuccessful iterations tolerated before the batch grows.
    #[arg(long, default_value_t = 2)]
    count: u32,
    /// Batch expansion factor.
    #[arg(long, default_value_t = 2.0)]
    factor: f64,
    /// Initial batch size.
    #[arg(long, default_value_t = 1000)]
    batch0: usize,
    /// Batch fraction above which hybrids switch to quasi-Newton steps.
    #[arg(long, default_value_t = 0.30)]
    hybrid_threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OptimizerFlags {
    fn to_config(&self, algorithm: Algorithm) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::new(algorithm);
        cfg.epsilon = self.epsilon;
        cfg.max_epochs = self.max_epochs;
        cfg.amabs = AmabsConfig {
            window: self.window,
            threshold: self.threshold,
            failure_cap: self.count,
            expansion: self.factor,
            initial_batch: self.batch0,
        };
        if algorithm.is_hybrid() {
            cfg.hybrid_threshold = Some(self.hybrid_threshold);
        }
        cfg.seed = self.seed;
        cfg
    }

    fn describe(&self, manifest: &mut Manifest) {
        manifest.opt("epsilon", self.epsilon);
        manifest.opt("max_epochs", self.max_epochs);
        manifest.opt("window", self.window);
        manifest.opt("threshold", self.threshold);
        manifest.opt("count", self.count);
        manifest.opt("factor", self.factor);
        manifest.opt("batch0", self.batch0);
        manifest.opt("hybrid_threshold", self.hybrid_threshold);
        manifest.opt("seed", self.seed);
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV dataset.
    #[arg(long)]
    data: PathBuf,
    /// Model specification file.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "HAMABS")]
    algorithm: String,
    /// Starting point: "zeros" or a comma-separated list of K values.
    #[arg(long, default_value = "zeros")]
    theta0: String,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    /// Write the parameter table here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-iteration trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Skip the final Hessian pass that produces standard errors.
    #[arg(long)]
    no_std_errors: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Synthetic specification (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Where to write the dataset CSV.
    #[arg(long)]
    data_out: PathBuf,
    /// Where to write the matching model specification.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Suite configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Results table destination.
    #[arg(long)]
    out: PathBuf,
    /// Concurrent cells (overrides the config).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Benchmark results table.
    #[arg(long)]
    results: PathBuf,
    /// Performance measure: time | epochs.
    #[arg(long, default_value = "time")]
    measure: String,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: u32,
    /// Profile table destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "HAMABS")]
    algorithm: String,
    /// One of: window, threshold, count, factor, batch0, hybrid-threshold, epsilon.
    #[arg(long)]
    parameter: String,
    /// Comma-separated grid, e.g. "1.1,2,5".
    #[arg(long)]
    values: String,
    #[arg(long, default_value_t = 5)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Commented key/value header embedded in every output table.
struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    fn new(command: &str) -> Self {
        let mut m = Manifest { entries: Vec::new() };
        m.opt("artifact", format!("mnlfit {}", env!("CARGO_PKG_VERSION")));
        m.opt("command", command);
        m
    }

    fn opt(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    fn input(&mut self, key: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.opt(key, format!("{} sha256={hex}", path.display()));
        Ok(())
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (key, value) in &self.entries {
            writeln!(w, "# {key} = {value}")?;
        }
        Ok(())
    }
}

fn create_output(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn parse_theta0(text: &str, k: usize) -> Result<Option<Array1<f64>>> {
    if text.trim() == "zeros" {
        return Ok(None);
    }
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("theta0 entry '{s}' is not numeric")))
        })
        .collect::<Result<_>>()?;
    if values.len() != k {
        return Err(Error::Config(format!(
            "theta0 has {} entries, model has {k} parameters",
            values.len()
        )));
    }
    Ok(Some(Array1::from_vec(values)))
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("value '{s}' is not numeric")))
        })
        .collect()
}

fn estimate_cmd(args: &EstimateArgs) -> Result<i32> {
    let algorithm: Algorithm = args.algorithm.parse()?;
    let spec = parse_model_spec(&args.model)?;
    let data = load_csv(&args.data, &spec)?;
    println!(
        "loaded {} observations, {} alternatives, {} parameters",
        data.n_obs(),
        spec.alternative_count(),
        spec.parameter_count()
    );
    let ll = LogLikelihood::bind(&spec, &data)?;

    let mut config = args.optimizer.to_config(algorithm);
    config.theta0 = parse_theta0(&args.theta0, spec.parameter_count())?;

    let result = run(&ll, &config)?;
    let se = if args.no_std_errors {
        None
    } else {
        Some(standard_errors(&ll, &result.theta.view())?)
    };

    println!("algorithm        {}", algorithm.name());
    println!("converged        {}", result.converged);
    println!("status           {:?}", result.status);
    println!("final L          {:.6}", result.final_eval.value);
    println!("rel gradient     {:.3e}", result.rel_grad);
    println!("epochs           {:.2}", result.epochs);
    println!("iterations       {}", result.iterations);
    println!("wall time        {:.3} s", result.wall_time.as_secs_f64());
    println!();
    println!("{:<20} {:>14} {:>12}", "parameter", "estimate", "std err");
    for (i, name) in spec.parameters.iter().enumerate() {
        match &se {
            Some(se) => println!("{:<20} {:>14.6} {:>12.6}", name, result.theta[i], se[i]),
            None => println!("{:<20} {:>14.6} {:>12}", name, result.theta[i], "-"),
        }
    }

    let mut manifest = Manifest::new("estimate");
    manifest.opt("algorithm", algorithm.name());
    manifest.opt("theta0", &args.theta0);
    args.optimizer.describe(&mut manifest);
    manifest.input("data", &args.data)?;
    manifest.input("model", &args.model)?;
    manifest.opt("converged", result.converged);
    manifest.opt("final_L", result.final_eval.value);
    manifest.opt("rel_grad", result.rel_grad);
    manifest.opt("epochs", result.epochs);
    manifest.opt("iterations", result.iterations);

    if let Some(path) = &args.out {
        let mut w = create_output(path)?;
        manifest.write_to(&mut w)?;
        writeln!(w, "parameter,estimate,std_err")?;
        for (i, name) in spec.parameters.iter().enumerate() {
            match &se {
                Some(se) => writeln!(w, "{name},{},{}", result.theta[i], se[i])?,
                None => writeln!(w, "{name},{},", result.theta[i])?,
            }
        }
    }
    if let Some(path) = &args.trace {
        let mut w = create_output(path)?;
        manifest.write_to(&mut w)?;
        writeln!(w, "k,batch_size,order,value,rel_grad,step_kind,step_size,epochs")?;
        for rec in &result.trace {
            let order = match rec.order_used {
                OrderUsed::FirstOrder => "first",
                OrderUsed::SecondOrder => "second",
            };
            let (kind, size) = match rec.step {
                StepInfo::LineSearch { alpha } => ("line_search", alpha.to_string()),
                StepInfo::TrustRegion { radius } => ("trust_region", radius.to_string()),
                StepInfo::None => ("none", String::new()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                rec.k, rec.batch_size, order, rec.value, rec.rel_grad, kind, size, rec.epochs
            )?;
        }
    }

    Ok(if result.converged { 0 } else { 1 })
}

fn generate_cmd(args: &GenerateArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)?;
    let spec = SyntheticSpec::from_toml(&text)?;
    let (data, theta_star) = generate_synthetic(&spec)?;
    let model = synthetic_model_spec(&spec);

    let mut manifest = Manifest::new("generate");
    manifest.input("config", &args.config)?;
    manifest.opt("seed", spec.seed);
    manifest.opt("n_obs", spec.n_obs);

    let mut w = create_output(&args.data_out)?;
    manifest.write_to(&mut w)?;
    crate::data::write_csv_to(&data, &mut w)?;
    drop(w);

    if let Some(model_out) = &args.model_out {
        std::fs::write(model_out, model_spec_to_string(&model))?;
    }

    println!("wrote {} observations to {}", data.n_obs(), args.data_out.display());
    println!("{:<20} {:>12}", "parameter", "true value");
    for (name, value) in model.parameters.iter().zip(theta_star.iter()) {
        println!("{:<20} {:>12.6}", name, value);
    }
    Ok(0)
}

/// TOML schema of a benchmark suite.
#[derive(serde::Deserialize)]
struct SuiteConfigFile {
    #[serde(default = "default_reps")]
    repetitions: u32,
    #[serde(default)]
    base_seed: u64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_max_epochs")]
    max_epochs: u32,
    #[serde(default)]
    time_budget_s: Option<f64>,
    #[serde(default)]
    workers: Option<usize>,
    algorithms: Vec<String>,
    problems: Vec<ProblemEntry>,
    #[serde(default)]
    optimizer: OptimizerOverrides,
}

fn default_reps() -> u32 {
    1
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_max_epochs() -> u32 {
    1000
}

#[derive(serde::Deserialize)]
struct ProblemEntry {
    name: String,
    data: Option<PathBuf>,
    model: Option<PathBuf>,
    synthetic: Option<PathBuf>,
}

#[derive(serde::Deserialize, Default)]
struct OptimizerOverrides {
    batch0: Option<usize>,
    window: Option<usize>,
    threshold: Option<f64>,
    count: Option<u32>,
    factor: Option<f64>,
    hybrid_threshold: Option<f64>,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn load_problem(base: &Path, entry: &ProblemEntry) -> Result<ProblemSetup> {
    let loglik = match (&entry.data, &entry.model, &entry.synthetic) {
        (Some(data), Some(model), None) => {
            let spec = parse_model_spec(&resolve(base, model))?;
            let dataset = load_csv(&resolve(base, data), &spec)?;
            LogLikelihood::bind(&spec, &dataset)?
        }
        (None, None, Some(synth)) => {
            let text = std::fs::read_to_string(resolve(base, synth))?;
            let spec = SyntheticSpec::from_toml(&text)?;
            let (dataset, _) = generate_synthetic(&spec)?;
            let model = synthetic_model_spec(&spec);
            LogLikelihood::bind(&model, &dataset)?
        }
        _ => {
            return Err(Error::Config(format!(
                "problem '{}' must set either data+model or synthetic",
                entry.name
            )))
        }
    };
    Ok(ProblemSetup {
        name: entry.name.clone(),
        loglik: Arc::new(loglik),
    })
}

fn write_results_table<W: Write>(w: &mut W, results: &[BenchmarkResult]) -> std::io::Result<()> {
    writeln!(
        w,
        "problem,algorithm,rep,seed,time_s,epochs,converged,final_L,rel_grad,status"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.problem,
            r.algorithm,
            r.repetition,
            r.seed,
            r.time_s,
            r.epochs,
            r.converged,
            r.final_ll,
            r.rel_grad,
            r.status.as_str()
        )?;
    }
    Ok(())
}

fn benchmark_cmd(args: &BenchmarkArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)?;
    let config: SuiteConfigFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad suite config: {e}")))?;
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    let algorithms: Vec<Algorithm> = config
        .algorithms
        .iter()
        .map(|name| name.parse())
        .collect::<Result<_>>()?;
    if algorithms.is_empty() {
        return Err(Error::Config("suite lists no algorithms".into()));
    }
    let mut problems = Vec::new();
    for entry in &config.problems {
        match load_problem(&base, entry) {
            Ok(setup) => problems.push(setup),
            Err(e) => {
                // a broken problem should not sink the whole suite
                eprintln!("warning: skipping problem '{}': {e}", entry.name);
            }
        }
    }
    if problems.is_empty() {
        return Err(Error::Config("no usable problems in the suite".into()));
    }

    let mut amabs = AmabsConfig::default();
    if let Some(v) = config.optimizer.batch0 {
        amabs.initial_batch = v;
    }
    if let Some(v) = config.optimizer.window {
        amabs.window = v;
    }
    if let Some(v) = config.optimizer.threshold {
        amabs.threshold = v;
    }
    if let Some(v) = config.optimizer.count {
        amabs.failure_cap = v;
    }
    if let Some(v) = config.optimizer.factor {
        amabs.expansion = v;
    }

    let settings = SuiteSettings {
        repetitions: config.repetitions,
        base_seed: config.base_seed,
        epsilon: config.epsilon,
        max_epochs: config.max_epochs,
        workers: args
            .workers
            .or(config.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get())),
        time_budget: config.time_budget_s.map(std::time::Duration::from_secs_f64),
        amabs,
        hybrid_threshold: config.optimizer.hybrid_threshold.unwrap_or(0.30),
    };

    let results = crate::bench::run_suite(&problems, &algorithms, &settings);

    let mut manifest = Manifest::new("benchmark");
    manifest.input("config", &args.config)?;
    manifest.opt("repetitions", settings.repetitions);
    manifest.opt("base_seed", settings.base_seed);
    manifest.opt("epsilon", settings.epsilon);
    manifest.opt("max_epochs", settings.max_epochs);
    let mut w = create_output(&args.out)?;
    manifest.write_to(&mut w)?;
    write_results_table(&mut w, &results)?;
    drop(w);

    // human summary: mean +/- std per cell
    let times = mean_std(&results, Measure::Time);
    let epochs = mean_std(&results, Measure::Epochs);
    println!(
        "{:<16} {:<14} {:>18} {:>18}",
        "problem", "algorithm", "time [s]", "epochs"
    );
    for ((p, a), (tm, ts)) in &times {
        let (em, es) = epochs[&(p.clone(), a.clone())];
        println!(
            "{:<16} {:<14} {:>10.3} ± {:>5.3} {:>10.2} ± {:>5.2}",
            p, a, tm, ts, em, es
        );
    }
    let skipped = results
        .iter()
        .filter(|r| r.status == CellStatus::Budget)
        .count();
    if skipped > 0 {
        println!("{skipped} cells skipped by the time budget");
    }
    println!("results written to {}", args.out.display());
    Ok(0)
}

/// Reads a results table produced by `benchmark` (manifest comments are
/// skipped).
pub fn read_results_table(path: &Path) -> Result<Vec<BenchmarkResult>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data {
            row,
            message: format!("unreadable record: {e}"),
        })?;
        let get = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Data {
                row,
                message: format!("missing field {i}"),
            })
        };
        let parse_f = |i: usize| -> Result<f64> {
            get(i)?.parse().map_err(|_| Error::Data {
                row,
                message: format!("field {i} is not numeric"),
            })
        };
        let status = match get(9)? {
            "ok" => CellStatus::Ok,
            "budget" => CellStatus::Budget,
            other => CellStatus::Failed(other.to_string()),
        };
        out.push(BenchmarkResult {
            problem: get(0)?.to_string(),
            algorithm: get(1)?.to_string(),
            repetition: get(2)?.parse().map_err(|_| Error::Data {
                row,
                message: "bad repetition".into(),
            })?,
            seed: get(3)?.parse().map_err(|_| Error::Data {
                row,
                message: "bad seed".into(),
            })?,
            time_s: parse_f(4)?,
            epochs: parse_f(5)?,
            converged: get(6)? == "true",
            final_ll: parse_f(7)?,
            rel_grad: parse_f(8)?,
            status,
        });
    }
    Ok(out)
}

fn profile_cmd(args: &ProfileArgs) -> Result<i32> {
    let measure = Measure::parse(&args.measure)
        .ok_or_else(|| Error::Config(format!("unknown measure '{}'", args.measure)))?;
    let results = read_results_table(&args.results)?;
    if results.is_empty() {
        return Err(Error::EmptyInput("results table has no rows"));
    }
    let (measures, convergence) = aggregate(&results, measure, args.epsilon, args.max_epochs);
    let ratios = performance_ratios(&measures, &convergence)?;
    for p in &ratios.dropped {
        eprintln!("warning: problem '{p}' dropped (no algorithm converged)");
    }
    let curves = performance_profile(&ratios);

    let mut manifest = Manifest::new("profile");
    manifest.input("results", &args.results)?;
    manifest.opt("measure", measure.name());
    manifest.opt("epsilon", args.epsilon);
    manifest.opt("max_epochs", args.max_epochs);
    manifest.opt("problems", ratios.problems.len());
    manifest.opt("max_finite_ratio", curves.first().map_or(1.0, |c| c.max_finite_ratio));
    let mut w = create_output(&args.out)?;
    manifest.write_to(&mut w)?;
    writeln!(w, "algorithm,pi,rho")?;
    for curve in &curves {
        for &(pi, rho) in &curve.points {
            writeln!(w, "{},{},{}", curve.algorithm, pi, rho)?;
        }
    }
    println!(
        "profiles over {} problems, {} algorithms written to {}",
        ratios.problems.len(),
        ratios.algorithms.len(),
        args.out.display()
    );
    Ok(0)
}

fn sweep_cmd(args: &SweepArgs) -> Result<i32> {
    let algorithm: Algorithm = args.algorithm.parse()?;
    let parameter = SweepParameter::parse(&args.parameter).ok_or_else(|| {
        Error::Config(format!(
            "unknown parameter '{}'; expected window, threshold, count, factor, batch0, hybrid-threshold or epsilon",
            args.parameter
        ))
    })?;
    let values = parse_values(&args.values)?;
    let spec = parse_model_spec(&args.model)?;
    let data = load_csv(&args.data, &spec)?;
    let ll = LogLikelihood::bind(&spec, &data)?;

    let rows = run_sweep(&ll, algorithm, parameter, &values, args.reps, args.seed)?;

    println!(
        "{:>12} {:>12} {:>10} {:>12} {:>10}",
        parameter.name(),
        "mean t [s]",
        "std",
        "mean epochs",
        "relative"
    );
    for row in &rows {
        println!(
            "{:>12} {:>12.4} {:>10.4} {:>12.2} {:>10.3}",
            row.value, row.mean_time_s, row.std_time_s, row.mean_epochs, row.relative_time
        );
    }

    if let Some(path) = &args.out {
        let mut manifest = Manifest::new("sweep");
        manifest.opt("algorithm", algorithm.name());
        manifest.opt("parameter", parameter.name());
        manifest.opt("reps", args.reps);
        manifest.opt("seed", args.seed);
        manifest.input("data", &args.data)?;
        manifest.input("model", &args.model)?;
        let mut w = create_output(path)?;
        manifest.write_to(&mut w)?;
        writeln!(
            w,
            "parameter,value,mean_time_s,std_time_s,mean_epochs,converged_reps,total_reps,relative_time"
        )?;
        for row in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                parameter.name(),
                row.value,
                row.mean_time_s,
                row.std_time_s,
                row.mean_epochs,
                row.converged_reps,
                row.total_reps,
                row.relative_time
            )?;
        }
    }
    Ok(0)
}

/// Entry point used by the `mnlfit` binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Estimate(args) => estimate_cmd(args),
        Command::Generate(args) => generate_cmd(args),
        Command::Benchmark(args) => benchmark_cmd(args),
        Command::Profile(args) => profile_cmd(args),
        Command::Sweep(args) => sweep_cmd(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
