//! Benchmark harness: algorithm x problem suites with repetitions,
//! convergence testing, and Dolan-More performance ratios/profiles for the
//! wall-time and epoch measures.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::amabs::AmabsConfig;
use crate::error::{Error, Result};
use crate::model::LogLikelihood;
use crate::optim::{run, Algorithm, OptimizerConfig};

/// Cell completion state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// Skipped because the suite's wall-clock budget ran out.
    Budget,
    /// The run aborted with an error.
    Failed(String),
}

impl CellStatus {
    pub fn as_str(&self) -> &str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Budget => "budget",
            CellStatus::Failed(_) => "error",
        }
    }
}

/// One repetition of one algorithm on one problem.
#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub problem: String,
    pub algorithm: String,
    pub repetition: u32,
    pub seed: u64,
    pub time_s: f64,
    pub epochs: f64,
    pub converged: bool,
    pub final_ll: f64,
    /// Relative gradient norm on the full data at the final iterate.
    pub rel_grad: f64,
    pub status: CellStatus,
}

/// The convergence test: precision reached on the full data within the epoch
/// budget.
pub fn convergence_test(result: &BenchmarkResult, epsilon: f64, max_epochs: u32) -> bool {
    result.status == CellStatus::Ok
        && result.rel_grad < epsilon
        && result.epochs <= max_epochs as f64
}

/// Performance measure for ratios and profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Time,
    Epochs,
}

impl Measure {
    pub fn parse(s: &str) -> Option<Measure> {
        match s.to_ascii_lowercase().as_str() {
            "time" => Some(Measure::Time),
            "epochs" => Some(Measure::Epochs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Time => "time",
            Measure::Epochs => "epochs",
        }
    }
}

/// Collapses repetitions into one `(measure, converged)` entry per
/// (problem, algorithm) cell: the measure is the mean over completed
/// repetitions, and a cell converges only if every completed repetition
/// passes the convergence test. Budget-skipped repetitions are ignored; a
/// cell with no completed repetition at all is dropped here and treated as
/// failed downstream.
/// Mean measure and convergence flag per (problem, algorithm) cell.
pub type CellMaps = (
    BTreeMap<(String, String), f64>,
    BTreeMap<(String, String), bool>,
);

pub fn aggregate(
    results: &[BenchmarkResult],
    measure: Measure,
    epsilon: f64,
    max_epochs: u32,
) -> CellMaps {
    let mut sums: BTreeMap<(String, String), (f64, u32, bool)> = BTreeMap::new();
    for r in results {
        if r.status == CellStatus::Budget {
            continue;
        }
        let key = (r.problem.clone(), r.algorithm.clone());
        let entry = sums.entry(key).or_insert((0.0, 0, true));
        let m = match measure {
            Measure::Time => r.time_s,
            Measure::Epochs => r.epochs,
        };
        entry.0 += m;
        entry.1 += 1;
        entry.2 &= convergence_test(r, epsilon, max_epochs);
    }
    let mut measures = BTreeMap::new();
    let mut converged = BTreeMap::new();
    for (key, (sum, count, ok)) in sums {
        measures.insert(key.clone(), sum / count as f64);
        converged.insert(key, ok);
    }
    (measures, converged)
}

/// Ratios `r_{p,a}` plus the index sets they were computed over.
#[derive(Debug, Clone)]
pub struct RatioSet {
    pub ratios: BTreeMap<(String, String), f64>,
    /// Problems retained (at least one converged algorithm).
    pub problems: Vec<String>,
    /// Problems dropped because no algorithm converged.
    pub dropped: Vec<String>,
    pub algorithms: Vec<String>,
}

/// Performance ratios: each converged cell is divided by the best converged
/// measure on its problem (so the winner gets exactly 1); failed cells get
/// the infinity sentinel. Problems where nothing converged are dropped.
pub fn performance_ratios(
    measures: &BTreeMap<(String, String), f64>,
    convergence: &BTreeMap<(String, String), bool>,
) -> Result<RatioSet> {
    if measures.is_empty() {
        return Err(Error::EmptyInput("no benchmark measures"));
    }
    let mut problems: Vec<String> = Vec::new();
    let mut algorithms: Vec<String> = Vec::new();
    for (p, a) in measures.keys() {
        if !problems.contains(p) {
            problems.push(p.clone());
        }
        if !algorithms.contains(a) {
            algorithms.push(a.clone());
        }
    }

    let mut ratios = BTreeMap::new();
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for p in &problems {
        let best = algorithms
            .iter()
            .filter(|a| {
                convergence
                    .get(&(p.clone(), (*a).clone()))
                    .copied()
                    .unwrap_or(false)
            })
            .filter_map(|a| measures.get(&(p.clone(), a.clone())))
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if !best.is_finite() {
            dropped.push(p.clone());
            continue;
        }
        retained.push(p.clone());
        for a in &algorithms {
            let key = (p.clone(), a.clone());
            let ok = convergence.get(&key).copied().unwrap_or(false);
            let r = if ok {
                measures.get(&key).map_or(f64::INFINITY, |&t| t / best)
            } else {
                f64::INFINITY
            };
            ratios.insert(key, r);
        }
    }
    Ok(RatioSet {
        ratios,
        problems: retained,
        dropped,
        algorithms,
    })
}

/// One algorithm's profile: the fraction of problems solved within factor pi
/// of the per-problem best, evaluated on a shared grid.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub algorithm: String,
    /// Ordered `(pi, rho)` step points.
    pub points: Vec<(f64, f64)>,
    /// Largest finite ratio across the whole set; the grid's upper bound.
    pub max_finite_ratio: f64,
}

/// Builds the profile curves over a grid of all distinct finite ratios plus
/// the integer points of `[1, R]` (the curve only changes at ratio values,
/// so integer filling stops after 10'000 points).
pub fn performance_profile(ratios: &RatioSet) -> Vec<ProfileCurve> {
    let finite: Vec<f64> = ratios
        .ratios
        .values()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    let r_max = finite.iter().fold(1.0f64, |m, &v| m.max(v));

    let mut grid: Vec<f64> = finite;
    grid.push(1.0);
    let mut i = 1.0;
    while i <= r_max.min(10_000.0) {
        grid.push(i);
        i += 1.0;
    }
    grid.push(r_max);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let n_problems = ratios.problems.len();
    ratios
        .algorithms
        .iter()
        .map(|alg| {
            let rs: Vec<f64> = ratios
                .problems
                .iter()
                .map(|p| {
                    ratios
                        .ratios
                        .get(&(p.clone(), alg.clone()))
                        .copied()
                        .unwrap_or(f64::INFINITY)
                })
                .collect();
            let points = grid
                .iter()
                .map(|&pi| {
                    let count = rs.iter().filter(|&&r| r <= pi).count();
                    (pi, count as f64 / n_problems as f64)
                })
                .collect();
            ProfileCurve {
                algorithm: alg.clone(),
                points,
                max_finite_ratio: r_max,
            }
        })
        .collect()
}

/// A problem ready to estimate.
pub struct ProblemSetup {
    pub name: String,
    pub loglik: Arc<LogLikelihood>,
}

/// Suite-wide settings.
#[derive(Debug, Clone)]
pub struct SuiteSettings {
    pub repetitions: u32,
    pub base_seed: u64,
    pub epsilon: f64,
    pub max_epochs: u32,
    pub workers: usize,
    /// Wall-clock budget for the whole suite; cells that have not started by
    /// the deadline are recorded with budget status.
    pub time_budget: Option<Duration>,
    pub amabs: AmabsConfig,
    pub hybrid_threshold: f64,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            repetitions: 1,
            base_seed: 0,
            epsilon: 1e-6,
            max_epochs: 1000,
            workers: 1,
            time_budget: None,
            amabs: AmabsConfig::default(),
            hybrid_threshold: 0.30,
        }
    }
}

fn cell_config(alg: Algorithm, settings: &SuiteSettings, rep: u32) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::new(alg);
    cfg.epsilon = settings.epsilon;
    cfg.max_epochs = settings.max_epochs;
    cfg.amabs = settings.amabs.clone();
    if alg.is_hybrid() {
        cfg.hybrid_threshold = Some(settings.hybrid_threshold);
    }
    cfg.seed = settings.base_seed + rep as u64;
    cfg
}

/// Runs every (problem, algorithm, repetition) cell. Repetition seeds are
/// `base_seed + repetition`, so stochastic runs replay exactly. Cells run
/// concurrently on up to `workers` threads; the deadline is checked before a
/// cell starts, never mid-run. Results come back sorted.
pub fn run_suite(
    problems: &[ProblemSetup],
    algorithms: &[Algorithm],
    settings: &SuiteSettings,
) -> Vec<BenchmarkResult> {
    let deadline = settings.time_budget.map(|b| Instant::now() + b);
    let mut cells: Vec<(usize, Algorithm, u32)> = Vec::new();
    for (pi, _) in problems.iter().enumerate() {
        for &alg in algorithms {
            for rep in 0..settings.repetitions {
                cells.push((pi, alg, rep));
            }
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<BenchmarkResult>> = Mutex::new(Vec::with_capacity(cells.len()));
    let workers = settings.workers.max(1).min(cells.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let (pi, alg, rep) = cells[idx];
                let problem = &problems[pi];
                let seed = settings.base_seed + rep as u64;
                let over_budget = deadline.is_some_and(|d| Instant::now() >= d);
                let result = if over_budget {
                    BenchmarkResult {
                        problem: problem.name.clone(),
                        algorithm: alg.name().to_string(),
                        repetition: rep,
                        seed,
                        time_s: 0.0,
                        epochs: 0.0,
                        converged: false,
                        final_ll: f64::NAN,
                        rel_grad: f64::NAN,
                        status: CellStatus::Budget,
                    }
                } else {
                    let cfg = cell_config(alg, settings, rep);
                    match run(&problem.loglik, &cfg) {
                        Ok(r) => BenchmarkResult {
                            problem: problem.name.clone(),
                            algorithm: alg.name().to_string(),
                            repetition: rep,
                            seed,
                            time_s: r.wall_time.as_secs_f64(),
                            epochs: r.epochs,
                            converged: r.converged,
                            final_ll: r.final_eval.value,
                            rel_grad: r.rel_grad,
                            status: CellStatus::Ok,
                        },
                        Err(e) => BenchmarkResult {
                            problem: problem.name.clone(),
                            algorithm: alg.name().to_string(),
                            repetition: rep,
                            seed,
                            time_s: 0.0,
                            epochs: 0.0,
                            converged: false,
                            final_ll: f64::NAN,
                            rel_grad: f64::NAN,
                            status: CellStatus::Failed(e.to_string()),
                        },
                    }
                };
                results.lock().unwrap().push(result);
            });
        }
    });

    let mut out = results.into_inner().unwrap();
    out.sort_by(|a, b| {
        (&a.problem, &a.algorithm, a.repetition).cmp(&(&b.problem, &b.algorithm, b.repetition))
    });
    out
}

/// Mean and standard deviation of a measure per (problem, algorithm) cell,
/// the usual way benchmark tables report repetitions.
pub fn mean_std(
    results: &[BenchmarkResult],
    measure: Measure,
) -> BTreeMap<(String, String), (f64, f64)> {
    let mut grouped: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in results {
        if r.status != CellStatus::Ok {
            continue;
        }
        let m = match measure {
            Measure::Time => r.time_s,
            Measure::Epochs => r.epochs,
        };
        grouped
            .entry((r.problem.clone(), r.algorithm.clone()))
            .or_default()
            .push(m);
    }
    grouped
        .into_iter()
        .map(|(key, vals)| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (key, (mean, var.sqrt()))
        })
        .collect()
}

/// Parameter grids for the sweep command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Window,
    Threshold,
    Count,
    Factor,
    Batch0,
    HybridThreshold,
    Epsilon,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Option<SweepParameter> {
        match s.to_ascii_lowercase().as_str() {
            "window" => Some(SweepParameter::Window),
            "threshold" => Some(SweepParameter::Threshold),
            "count" => Some(SweepParameter::Count),
            "factor" => Some(SweepParameter::Factor),
            "batch0" => Some(SweepParameter::Batch0),
            "hybrid-threshold" | "hybrid_threshold" => Some(SweepParameter::HybridThreshold),
            "epsilon" => Some(SweepParameter::Epsilon),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Window => "window",
            SweepParameter::Threshold => "threshold",
            SweepParameter::Count => "count",
            SweepParameter::Factor => "factor",
            SweepParameter::Batch0 => "batch0",
            SweepParameter::HybridThreshold => "hybrid-threshold",
            SweepParameter::Epsilon => "epsilon",
        }
    }

    /// The default value of the swept knob; the normalization baseline.
    pub fn default_value(self) -> f64 {
        match self {
            SweepParameter::Window => 10.0,
            SweepParameter::Threshold => 0.01,
            SweepParameter::Count => 2.0,
            SweepParameter::Factor => 2.0,
            SweepParameter::Batch0 => 1000.0,
            SweepParameter::HybridThreshold => 0.30,
            SweepParameter::Epsilon => 1e-6,
        }
    }

    pub fn apply(self, config: &mut OptimizerConfig, value: f64) -> Result<()> {
        match self {
            SweepParameter::Window => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config("window values must be positive integers".into()));
                }
                config.amabs.window = value as usize;
            }
            SweepParameter::Threshold => config.amabs.threshold = value,
            SweepParameter::Count => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config("count values must be positive integers".into()));
                }
                config.amabs.failure_cap = value as u32;
            }
            SweepParameter::Factor => config.amabs.expansion = value,
            SweepParameter::Batch0 => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::Config("batch0 values must be positive integers".into()));
                }
                config.amabs.initial_batch = value as usize;
            }
            SweepParameter::HybridThreshold => {
                if config.algorithm.is_hybrid() {
                    config.hybrid_threshold = Some(value);
                } else {
                    return Err(Error::Config(
                        "hybrid-threshold sweeps need a hybrid algorithm".into(),
                    ));
                }
            }
            SweepParameter::Epsilon => config.epsilon = value,
        }
        config.validate()
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub mean_time_s: f64,
    pub std_time_s: f64,
    pub mean_epochs: f64,
    pub converged_reps: u32,
    pub total_reps: u32,
    /// Mean time divided by the default-value mean time.
    pub relative_time: f64,
}

/// Re-runs one model over a grid of values for a single parameter and
/// normalizes mean times to the default-value run. The default value is
/// added to the grid when missing, so the baseline row always exists.
pub fn run_sweep(
    ll: &LogLikelihood,
    algorithm: Algorithm,
    parameter: SweepParameter,
    values: &[f64],
    repetitions: u32,
    base_seed: u64,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one value"));
    }
    let default = parameter.default_value();
    let mut grid: Vec<f64> = values.to_vec();
    if !grid.contains(&default) {
        grid.push(default);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let mut rows = Vec::with_capacity(grid.len());
    for &value in &grid {
        let mut times = Vec::new();
        let mut epochs = Vec::new();
        let mut converged = 0u32;
        for rep in 0..repetitions.max(1) {
            let mut cfg = OptimizerConfig::new(algorithm);
            cfg.seed = base_seed + rep as u64;
            parameter.apply(&mut cfg, value)?;
            let r = run(ll, &cfg)?;
            times.push(r.wall_time.as_secs_f64());
            epochs.push(r.epochs);
            if r.converged {
                converged += 1;
            }
        }
        let n = times.len() as f64;
        let mean_time = times.iter().sum::<f64>() / n;
        let var = times.iter().map(|t| (t - mean_time).powi(2)).sum::<f64>() / n;
        rows.push(SweepRow {
            value,
            mean_time_s: mean_time,
            std_time_s: var.sqrt(),
            mean_epochs: epochs.iter().sum::<f64>() / n,
            converged_reps: converged,
            total_reps: repetitions.max(1),
            relative_time: f64::NAN,
        });
    }
    let baseline = rows
        .iter()
        .find(|r| r.value == default)
        .map(|r| r.mean_time_s)
        .expect("baseline present by construction");
    for row in &mut rows {
        row.relative_time = row.mean_time_s / baseline;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(problem: &str, algorithm: &str, rel_grad: f64, epochs: f64) -> BenchmarkResult {
        BenchmarkResult {
            problem: problem.into(),
            algorithm: algorithm.into(),
            repetition: 0,
            seed: 0,
            time_s: 1.0,
            epochs,
            converged: rel_grad < 1e-6,
            final_ll: -100.0,
            rel_grad,
            status: CellStatus::Ok,
        }
    }

    #[test]
    fn convergence_test_requires_both_conditions() {
        let good = result("p", "a", 1e-7, 12.0);
        assert!(convergence_test(&good, 1e-6, 1000));
        let over_budget = result("p", "a", 1e-7, 1001.0);
        assert!(!convergence_test(&over_budget, 1e-6, 1000));
        let imprecise = result("p", "a", 1e-3, 999.0);
        assert!(!convergence_test(&imprecise, 1e-6, 1000));
    }

    fn maps(
        entries: &[(&str, &str, f64, bool)],
    ) -> (
        BTreeMap<(String, String), f64>,
        BTreeMap<(String, String), bool>,
    ) {
        let mut m = BTreeMap::new();
        let mut c = BTreeMap::new();
        for &(p, a, t, ok) in entries {
            m.insert((p.to_string(), a.to_string()), t);
            c.insert((p.to_string(), a.to_string()), ok);
        }
        (m, c)
    }

    #[test]
    fn ratios_divide_by_the_best_converged() {
        let (m, c) = maps(&[("p1", "a1", 2.0, true), ("p1", "a2", 10.0, true)]);
        let rs = performance_ratios(&m, &c).unwrap();
        assert_eq!(rs.ratios[&("p1".into(), "a1".into())], 1.0);
        assert_eq!(rs.ratios[&("p1".into(), "a2".into())], 5.0);
    }

    #[test]
    fn failed_cells_get_infinity() {
        let (m, c) = maps(&[("p1", "a1", 2.0, true), ("p1", "a2", 1.0, false)]);
        let rs = performance_ratios(&m, &c).unwrap();
        // a2 was faster but failed: a1 is the best converged
        assert_eq!(rs.ratios[&("p1".into(), "a1".into())], 1.0);
        assert!(rs.ratios[&("p1".into(), "a2".into())].is_infinite());
    }

    #[test]
    fn single_converged_algorithm_gets_ratio_one_everywhere() {
        let (m, c) = maps(&[("p1", "a1", 3.0, true), ("p2", "a1", 7.0, true)]);
        let rs = performance_ratios(&m, &c).unwrap();
        assert!(rs.ratios.values().all(|&r| r == 1.0));
    }

    #[test]
    fn problems_without_any_convergence_are_dropped() {
        let (m, c) = maps(&[
            ("p1", "a1", 1.0, true),
            ("p2", "a1", 1.0, false),
        ]);
        let rs = performance_ratios(&m, &c).unwrap();
        assert_eq!(rs.problems, vec!["p1".to_string()]);
        assert_eq!(rs.dropped, vec!["p2".to_string()]);
    }

    #[test]
    fn empty_input_is_an_error() {
        let (m, c) = maps(&[]);
        assert!(performance_ratios(&m, &c).is_err());
    }

    #[test]
    fn profile_counts_fractions() {
        // 2 problems; a1 ratios {1, 3}
        let (m, c) = maps(&[
            ("p1", "a1", 1.0, true),
            ("p1", "a2", 3.0, true),
            ("p2", "a1", 6.0, true),
            ("p2", "a2", 2.0, true),
        ]);
        let rs = performance_ratios(&m, &c).unwrap();
        let profiles = performance_profile(&rs);
        let a1 = profiles.iter().find(|p| p.algorithm == "a1").unwrap();
        let rho_at = |curve: &ProfileCurve, pi: f64| {
            curve
                .points
                .iter()
                .rev()
                .find(|(x, _)| *x <= pi)
                .map(|(_, y)| *y)
                .unwrap()
        };
        assert_eq!(rho_at(a1, 1.0), 0.5);
        assert_eq!(rho_at(a1, 3.0), 1.0);
        // monotone, within [0, 1]
        for curve in &profiles {
            let mut prev = 0.0;
            for &(_, rho) in &curve.points {
                assert!(rho >= prev && (0.0..=1.0).contains(&rho));
                prev = rho;
            }
        }
    }

    #[test]
    fn suite_results_are_independent_of_worker_count() {
        use crate::data::{generate_synthetic, synthetic_model_spec, SynthKind, SyntheticParam, SyntheticSpec};
        let spec = SyntheticSpec {
            n_obs: 2000,
            alternatives: vec!["a".into(), "b".into()],
            seed: 5,
            params: vec![
                SyntheticParam {
                    name: "b_x".into(),
                    kind: SynthKind::Generic,
                    true_value: -0.6,
                    alternative: None,
                    mean: 0.0,
                    std: 1.0,
                },
                SyntheticParam {
                    name: "asc_b".into(),
                    kind: SynthKind::Constant,
                    true_value: 0.2,
                    alternative: Some("b".into()),
                    mean: 0.0,
                    std: 1.0,
                },
            ],
        };
        let (data, _) = generate_synthetic(&spec).unwrap();
        let ll = Arc::new(LogLikelihood::bind(&synthetic_model_spec(&spec), &data).unwrap());
        let problems = [ProblemSetup {
            name: "p".into(),
            loglik: ll,
        }];
        let algorithms = [Algorithm::Newton, Algorithm::Hamabs, Algorithm::BfgsAbs];
        let mut settings = SuiteSettings {
            repetitions: 2,
            base_seed: 9,
            ..SuiteSettings::default()
        };
        let serial = run_suite(&problems, &algorithms, &settings);
        settings.workers = 3;
        let parallel = run_suite(&problems, &algorithms, &settings);
        assert_eq!(serial.len(), parallel.len());
        for (a, b) in serial.iter().zip(parallel.iter()) {
            assert_eq!(a.problem, b.problem);
            assert_eq!(a.algorithm, b.algorithm);
            assert_eq!(a.repetition, b.repetition);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.epochs.to_bits(), b.epochs.to_bits());
            assert_eq!(a.final_ll.to_bits(), b.final_ll.to_bits());
            assert_eq!(a.rel_grad.to_bits(), b.rel_grad.to_bits());
            assert_eq!(a.converged, b.converged);
        }
    }

    #[test]
    fn one_failed_repetition_fails_the_cell() {
        let mut rows = vec![
            result("p1", "a1", 1e-8, 10.0),
            result("p1", "a1", 1e-8, 12.0),
        ];
        rows[1].rel_grad = 1e-2; // second repetition missed the precision
        let (measures, converged) = aggregate(&rows, Measure::Epochs, 1e-6, 1000);
        let key = ("p1".to_string(), "a1".to_string());
        assert_eq!(measures[&key], 11.0, "mean over completed repetitions");
        assert!(!converged[&key], "any failed repetition fails the cell");
    }

    #[test]
    fn budget_rows_are_excluded_from_aggregation() {
        let mut rows = vec![
            result("p1", "a1", 1e-8, 10.0),
            result("p1", "a1", f64::NAN, 0.0),
        ];
        rows[1].status = CellStatus::Budget;
        let (measures, converged) = aggregate(&rows, Measure::Epochs, 1e-6, 1000);
        let key = ("p1".to_string(), "a1".to_string());
        assert_eq!(measures[&key], 10.0, "budget row must not pollute the mean");
        assert!(converged[&key]);

        // a cell that is budget-skipped entirely disappears (and is treated
        // as failed by the ratio computation)
        let mut only_budget = vec![result("p2", "a1", f64::NAN, 0.0)];
        only_budget[0].status = CellStatus::Budget;
        let (m2, _) = aggregate(&only_budget, Measure::Epochs, 1e-6, 1000);
        assert!(m2.is_empty());
    }

    #[test]
    fn flat_profile_for_a_single_algorithm() {
        let (m, c) = maps(&[("p1", "a1", 2.0, true), ("p2", "a1", 5.0, true)]);
        let rs = performance_ratios(&m, &c).unwrap();
        let profiles = performance_profile(&rs);
        assert_eq!(profiles.len(), 1);
        assert!(profiles[0].points.iter().all(|&(_, rho)| rho == 1.0));
    }
}
