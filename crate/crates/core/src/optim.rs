//! The fifteen-algorithm optimizer catalog and the estimation driver.
//!
//! Six deterministic methods (steepest descent, BFGS in direct and inverse
//! form, quasi-Newton trust region, Newton, trust region), their six
//! adaptive-batch-size counterparts, and three hybrids that generate
//! candidates with a second-order method while the batch is a small fraction
//! of the data and with a quasi-Newton method afterwards.
//!
//! All methods minimize the negated log likelihood; results are reported on
//! the log-likelihood scale. Convergence is declared when the relative
//! gradient norm on a full-data evaluation drops below epsilon; a stochastic
//! run whose criterion fires on a partial batch is promoted to the full
//! dataset and must pass the test there.

use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amabs::{sample_batch, AmabsConfig, AmabsState};
use crate::error::{Error, Result};
use crate::linalg::{chol_inverse, chol_solve, cholesky, pd_repair};
use crate::model::{Batch, EvalOrder, Evaluation, LogLikelihood};
use crate::step::{
    solve_tr_subproblem, tr_ratio, tr_update, wolfe_line_search, LineSearchConfig,
    TrustRegionState,
};

/// The algorithm catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Steepest descent with Wolfe line search.
    Gd,
    /// BFGS approximating the Hessian.
    Bfgs,
    /// BFGS approximating the inverse Hessian.
    BfgsInv,
    /// Quasi-Newton trust region (BFGS Hessian approximation).
    TrBfgs,
    /// Newton's method (PD-repaired Hessian) with line search.
    Newton,
    /// Trust region with the exact Hessian.
    Tr,
    /// Adaptive-batch-size variants of the six above.
    GdAbs,
    BfgsAbs,
    BfgsInvAbs,
    TrBfgsAbs,
    NewtonAbs,
    TrAbs,
    /// Hybrid: Newton while batches are small, then BFGS.
    HybridNewtonBfgs,
    /// Hybrid: exact-Hessian trust region, then BFGS trust region.
    HybridTrBfgs,
    /// Hybrid: Newton, then inverse-form BFGS.
    Hamabs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 15] = [
        Algorithm::Gd,
        Algorithm::Bfgs,
        Algorithm::BfgsInv,
        Algorithm::TrBfgs,
        Algorithm::Newton,
        Algorithm::Tr,
        Algorithm::GdAbs,
        Algorithm::BfgsAbs,
        Algorithm::BfgsInvAbs,
        Algorithm::TrBfgsAbs,
        Algorithm::NewtonAbs,
        Algorithm::TrAbs,
        Algorithm::HybridNewtonBfgs,
        Algorithm::HybridTrBfgs,
        Algorithm::Hamabs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gd => "GD",
            Algorithm::Bfgs => "BFGS",
            Algorithm::BfgsInv => "BFGS-INV",
            Algorithm::TrBfgs => "TR-BFGS",
            Algorithm::Newton => "NM",
            Algorithm::Tr => "TR",
            Algorithm::GdAbs => "GD-ABS",
            Algorithm::BfgsAbs => "BFGS-ABS",
            Algorithm::BfgsInvAbs => "BFGS-INV-ABS",
            Algorithm::TrBfgsAbs => "TR-BFGS-ABS",
            Algorithm::NewtonAbs => "NM-ABS",
            Algorithm::TrAbs => "TR-ABS",
            Algorithm::HybridNewtonBfgs => "H-NM-ABS",
            Algorithm::HybridTrBfgs => "H-TR-ABS",
            Algorithm::Hamabs => "HAMABS",
        }
    }

    /// Case-insensitive lookup; `BFGS^-1` is accepted for the inverse form.
    pub fn parse(name: &str) -> Option<Algorithm> {
        let canon = name.trim().to_ascii_uppercase().replace("^-1", "-INV");
        Algorithm::ALL.iter().copied().find(|a| a.name() == canon)
    }

    /// True for the stochastic (adaptive-batch-size) variants, hybrids
    /// included.
    pub fn uses_amabs(self) -> bool {
        !matches!(
            self,
            Algorithm::Gd
                | Algorithm::Bfgs
                | Algorithm::BfgsInv
                | Algorithm::TrBfgs
                | Algorithm::Newton
                | Algorithm::Tr
        )
    }

    pub fn is_hybrid(self) -> bool {
        matches!(
            self,
            Algorithm::HybridNewtonBfgs | Algorithm::HybridTrBfgs | Algorithm::Hamabs
        )
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::parse(s).ok_or_else(|| {
            let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!(
                "unknown algorithm '{s}'; expected one of: {}",
                names.join(", ")
            ))
        })
    }
}

/// Which derivative information generated this iteration's candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderUsed {
    /// Gradient-only or quasi-Newton step.
    FirstOrder,
    /// Step built from the (batch) Hessian.
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StepFamily {
    LineSearch,
    TrustRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Preconditioner {
    Identity,
    Hessian,
    QuasiDirect,
    QuasiInverse,
}

#[derive(Debug, Clone, Copy)]
struct Mode {
    family: StepFamily,
    precond: Preconditioner,
}

fn fixed_order(alg: Algorithm) -> Option<OrderUsed> {
    match alg {
        Algorithm::Gd
        | Algorithm::GdAbs
        | Algorithm::Bfgs
        | Algorithm::BfgsAbs
        | Algorithm::BfgsInv
        | Algorithm::BfgsInvAbs
        | Algorithm::TrBfgs
        | Algorithm::TrBfgsAbs => Some(OrderUsed::FirstOrder),
        Algorithm::Newton | Algorithm::NewtonAbs | Algorithm::Tr | Algorithm::TrAbs => {
            Some(OrderUsed::SecondOrder)
        }
        Algorithm::HybridNewtonBfgs | Algorithm::HybridTrBfgs | Algorithm::Hamabs => None,
    }
}

fn mode_for(alg: Algorithm, order: OrderUsed) -> Mode {
    use Preconditioner::*;
    use StepFamily::*;
    let (family, precond) = match alg {
        Algorithm::Gd | Algorithm::GdAbs => (LineSearch, Identity),
        Algorithm::Bfgs | Algorithm::BfgsAbs => (LineSearch, QuasiDirect),
        Algorithm::BfgsInv | Algorithm::BfgsInvAbs => (LineSearch, QuasiInverse),
        Algorithm::TrBfgs | Algorithm::TrBfgsAbs => (TrustRegion, QuasiDirect),
        Algorithm::Newton | Algorithm::NewtonAbs => (LineSearch, Hessian),
        Algorithm::Tr | Algorithm::TrAbs => (TrustRegion, Hessian),
        Algorithm::HybridNewtonBfgs => match order {
            OrderUsed::SecondOrder => (LineSearch, Hessian),
            OrderUsed::FirstOrder => (LineSearch, QuasiDirect),
        },
        Algorithm::HybridTrBfgs => match order {
            OrderUsed::SecondOrder => (TrustRegion, Hessian),
            OrderUsed::FirstOrder => (TrustRegion, QuasiDirect),
        },
        Algorithm::Hamabs => match order {
            OrderUsed::SecondOrder => (LineSearch, Hessian),
            OrderUsed::FirstOrder => (LineSearch, QuasiInverse),
        },
    };
    Mode { family, precond }
}

/// Picks the candidate generator for a hybrid iteration: quasi-Newton once
/// the batch uses strictly more than `delta_h` of the data, second order
/// otherwise.
pub fn hybrid_select(batch_size: usize, n: usize, delta_h: f64) -> OrderUsed {
    if batch_size as f64 / n as f64 > delta_h {
        OrderUsed::FirstOrder
    } else {
        OrderUsed::SecondOrder
    }
}

/// Full run configuration. `OptimizerConfig::new` fills the defaults:
/// epsilon 1e-6, 1000 epochs, theta0 = 0, AMABS defaults, hybrid threshold
/// 30% for the hybrid algorithms.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub max_epochs: u32,
    pub amabs: AmabsConfig,
    /// Present exactly for hybrid algorithms.
    pub hybrid_threshold: Option<f64>,
    pub seed: u64,
    /// Starting point; `None` means the zero vector.
    pub theta0: Option<Array1<f64>>,
    pub line_search: LineSearchConfig,
    pub trust_region: TrustRegionState,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        OptimizerConfig {
            algorithm,
            epsilon: 1e-6,
            max_epochs: 1000,
            amabs: AmabsConfig::default(),
            hybrid_threshold: algorithm.is_hybrid().then_some(0.30),
            seed: 0,
            theta0: None,
            line_search: LineSearchConfig::default(),
            trust_region: TrustRegionState::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be > 0".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::Config("max_epochs must be >= 1".into()));
        }
        match (self.algorithm.is_hybrid(), self.hybrid_threshold) {
            (true, Some(t)) if (0.0..=1.0).contains(&t) => {}
            (true, Some(_)) => {
                return Err(Error::Config("hybrid threshold must be in [0, 1]".into()))
            }
            (true, None) => {
                return Err(Error::Config(
                    "hybrid algorithms need a hybrid threshold".into(),
                ))
            }
            (false, Some(_)) => {
                return Err(Error::Config(
                    "hybrid threshold only applies to hybrid algorithms".into(),
                ))
            }
            (false, None) => {}
        }
        self.amabs.validate()?;
        self.line_search.validate()?;
        self.trust_region.validate()?;
        Ok(())
    }
}

/// Step information recorded per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepInfo {
    LineSearch { alpha: f64 },
    TrustRegion { radius: f64 },
    /// Convergence checks, batch promotions and stalled iterations take no step.
    None,
}

/// One row of the optimization trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub batch_size: usize,
    pub order_used: OrderUsed,
    /// Batch log likelihood at theta_k.
    pub value: f64,
    pub rel_grad: f64,
    pub step: StepInfo,
    /// Cumulative epochs after this iteration's evaluation.
    pub epochs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxEpochs,
    /// No step generator could make progress (full batch, budget left).
    Stalled,
}

/// Everything a finished run reports.
#[derive(Debug)]
pub struct RunResult {
    pub theta: Array1<f64>,
    /// Value and gradient on the full dataset at the final theta.
    pub final_eval: Evaluation,
    /// Relative gradient norm of `final_eval`.
    pub rel_grad: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    pub status: RunStatus,
    pub epochs: f64,
    pub iterations: usize,
    pub wall_time: Duration,
    /// Times a quasi-Newton direction had to be reset to steepest descent.
    pub direction_resets: u32,
    /// Quasi-Newton updates skipped by the curvature guard.
    pub skipped_updates: u32,
}

/// Steepest descent direction: the negated (minimization) gradient.
pub fn direction_steepest(gradient: &ArrayView1<f64>) -> Array1<f64> {
    gradient.mapv(|v| -v)
}

/// Newton direction from a possibly indefinite Hessian.
pub struct NewtonDirection {
    pub direction: Array1<f64>,
    /// Diagonal shift applied by the PD repair.
    pub lambda: f64,
    /// True when the repair failed and the direction fell back to `-g`.
    pub fell_back: bool,
}

/// Solves `(H + lambda I) d = -g` where lambda is the smallest doubling shift
/// making the minimization Hessian positive definite. Falls back to steepest
/// descent when no reasonable shift works.
pub fn direction_newton(gradient: &ArrayView1<f64>, hessian: &ArrayView2<f64>) -> NewtonDirection {
    match pd_repair(hessian) {
        Some(rep) => {
            let rhs = gradient.mapv(|v| -v);
            let d = chol_solve(&rep.factor, &rhs.view());
            NewtonDirection {
                direction: d,
                lambda: rep.lambda,
                fell_back: false,
            }
        }
        None => NewtonDirection {
            direction: gradient.mapv(|v| -v),
            lambda: f64::INFINITY,
            fell_back: true,
        },
    }
}

const CURVATURE_GUARD: f64 = 1e-10;

fn curvature_ok(s: &ArrayView1<f64>, y: &ArrayView1<f64>) -> bool {
    let sy = s.dot(y);
    let scale = s.dot(s).sqrt() * y.dot(y).sqrt();
    sy > CURVATURE_GUARD * scale
}

/// Rank-two secant update of a direct Hessian approximation:
/// `B' = B + y y'/(y's) - B s s' B/(s' B s)`. Returns false (leaving `B`
/// untouched) when the curvature guard trips.
pub fn bfgs_update(b: &mut Array2<f64>, s: &ArrayView1<f64>, y: &ArrayView1<f64>) -> bool {
    if !curvature_ok(s, y) {
        return false;
    }
    let sy = s.dot(y);
    let bs = b.dot(s);
    let sbs = s.dot(&bs);
    if !(sbs > 0.0) || !sbs.is_finite() {
        return false;
    }
    let k = b.nrows();
    for i in 0..k {
        for j in 0..k {
            b[[i, j]] += y[i] * y[j] / sy - bs[i] * bs[j] / sbs;
        }
    }
    symmetrize(b);
    true
}

/// Secant update of an inverse Hessian approximation:
/// `B' = B + (s'y + y'By)(s s')/(s'y)^2 - (B y s' + s y' B)/(s'y)`.
pub fn bfgs_inv_update(binv: &mut Array2<f64>, s: &ArrayView1<f64>, y: &ArrayView1<f64>) -> bool {
    if !curvature_ok(s, y) {
        return false;
    }
    let sy = s.dot(y);
    let u = binv.dot(y);
    let yu = y.dot(&u);
    let c = (sy + yu) / (sy * sy);
    let k = binv.nrows();
    for i in 0..k {
        for j in 0..k {
            binv[[i, j]] += c * s[i] * s[j] - (u[i] * s[j] + s[i] * u[j]) / sy;
        }
    }
    symmetrize(binv);
    true
}

fn symmetrize(m: &mut Array2<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in 0..i {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// Direct (`B ~ Hessian`) or inverse (`B ~ Hessian^-1`) secant approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnMode {
    Direct,
    Inverse,
}

/// Quasi-Newton state: the SPD approximation matrix plus the previous iterate
/// used to form (s, y) pairs across iterations.
#[derive(Debug, Clone)]
pub struct QuasiNewtonState {
    pub mode: QnMode,
    pub matrix: Array2<f64>,
    pub last_theta: Option<Array1<f64>>,
    pub last_gradient: Option<Array1<f64>>,
    pub skipped_updates: u32,
}

impl QuasiNewtonState {
    pub fn identity(mode: QnMode, k: usize) -> Self {
        QuasiNewtonState {
            mode,
            matrix: Array2::eye(k),
            last_theta: None,
            last_gradient: None,
            skipped_updates: 0,
        }
    }

    /// Applies the secant update for this state's mode; counts guard skips.
    pub fn update(&mut self, s: &ArrayView1<f64>, y: &ArrayView1<f64>) -> bool {
        let applied = match self.mode {
            QnMode::Direct => bfgs_update(&mut self.matrix, s, y),
            QnMode::Inverse => bfgs_inv_update(&mut self.matrix, s, y),
        };
        if !applied {
            self.skipped_updates += 1;
        }
        applied
    }

    /// Preconditioned direction `-B^-1 g` (direct mode solves, inverse mode
    /// multiplies). `None` when the matrix lost positive definiteness.
    pub fn direction(&self, gradient: &ArrayView1<f64>) -> Option<Array1<f64>> {
        match self.mode {
            QnMode::Direct => {
                let l = cholesky(&self.matrix.view())?;
                let rhs = gradient.mapv(|v| -v);
                Some(chol_solve(&l, &rhs.view()))
            }
            QnMode::Inverse => Some(-self.matrix.dot(gradient)),
        }
    }
}

/// Scale-invariant stopping measure: `max_i |g_i| max(|theta_i|, 1) / max(|L|, 1)`.
pub fn relative_gradient_norm(theta: &ArrayView1<f64>, value: f64, gradient: &ArrayView1<f64>) -> f64 {
    let denom = value.abs().max(1.0);
    theta
        .iter()
        .zip(gradient.iter())
        .map(|(&t, &g)| (g * t.abs().max(1.0) / denom).abs())
        .fold(0.0, f64::max)
}

struct LsCandidate {
    theta_next: Array1<f64>,
    alpha: f64,
    /// Minimization gradient at the accepted point (same batch).
    grad_min_next: Array1<f64>,
    /// Strict decrease achieved; false means the step is unusable.
    progressed: bool,
}

/// Wolfe line search along `direction` on the batch objective `-L`.
fn candidate_line_search(
    ll: &LogLikelihood,
    batch: &Batch,
    theta: &Array1<f64>,
    f0: f64,
    grad_min: &Array1<f64>,
    direction: &Array1<f64>,
    config: &LineSearchConfig,
) -> Result<LsCandidate> {
    let dphi0 = grad_min.dot(direction);
    let mut fatal: Option<Error> = None;
    let mut last: Option<(f64, f64, Array1<f64>)> = None;

    let outcome = {
        let phi = |alpha: f64| -> (f64, f64) {
            if fatal.is_some() {
                return (f64::NAN, f64::NAN);
            }
            let trial = theta + &(alpha * direction);
            match ll.evaluate(trial.as_slice().expect("contiguous"), batch, EvalOrder::Gradient) {
                Ok(ev) => {
                    let g_min = ev.gradient().mapv(|v| -v);
                    let value = -ev.value;
                    let slope = g_min.dot(direction);
                    last = Some((alpha, value, g_min));
                    (value, slope)
                }
                // extreme trial steps may overflow utilities; shrink instead of aborting
                Err(Error::Evaluation { .. }) => (f64::INFINITY, f64::INFINITY),
                Err(e) => {
                    fatal = Some(e);
                    (f64::NAN, f64::NAN)
                }
            }
        };
        wolfe_line_search(f0, dphi0, phi, config)
    }?;
    if let Some(e) = fatal {
        return Err(e);
    }

    let progressed = outcome.value.is_finite() && outcome.value < f0;
    let theta_next = theta + &(outcome.alpha * direction);
    let grad_min_next = match last {
        Some((a, _, g)) if a == outcome.alpha => g,
        _ => {
            let ev = ll.evaluate(
                theta_next.as_slice().expect("contiguous"),
                batch,
                EvalOrder::Gradient,
            )?;
            ev.gradient().mapv(|v| -v)
        }
    };
    Ok(LsCandidate {
        theta_next,
        alpha: outcome.alpha,
        grad_min_next,
        progressed,
    })
}

const TR_MAX_REJECTIONS: u32 = 50;

struct TrCandidate {
    theta_next: Array1<f64>,
    /// Radius at which the accepted step was generated.
    radius_used: f64,
    accepted: bool,
}

/// Trust-region candidate: solve the subproblem, test the reduction ratio,
/// and re-solve at the shrunk radius on rejection. The gradient/Hessian of
/// the model are fixed for the whole inner loop; only cheap value evaluations
/// are repeated.
fn candidate_trust_region(
    ll: &LogLikelihood,
    batch: &Batch,
    theta: &Array1<f64>,
    f0: f64,
    grad_min: &Array1<f64>,
    b: &ArrayView2<f64>,
    trust: &mut TrustRegionState,
) -> Result<TrCandidate> {
    for _ in 0..TR_MAX_REJECTIONS {
        let d = solve_tr_subproblem(&grad_min.view(), b, trust.radius);
        let radius_used = trust.radius;
        let model_delta = grad_min.dot(&d) + 0.5 * d.dot(&b.dot(&d));
        let trial = theta + &d;
        let f_trial = match ll.evaluate(trial.as_slice().expect("contiguous"), batch, EvalOrder::Value)
        {
            Ok(ev) => -ev.value,
            Err(Error::Evaluation { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let rho = tr_ratio(f0, f_trial, f0, f0 + model_delta);
        let update = tr_update(rho, trust);
        trust.radius = update.radius;
        if update.accepted {
            return Ok(TrCandidate {
                theta_next: trial,
                radius_used,
                accepted: true,
            });
        }
        if trust.radius < 1e-14 {
            break;
        }
    }
    Ok(TrCandidate {
        theta_next: theta.clone(),
        radius_used: trust.radius,
        accepted: false,
    })
}

fn initial_qn(alg: Algorithm, k: usize) -> Option<QuasiNewtonState> {
    use Algorithm::*;
    match alg {
        Bfgs | BfgsAbs | TrBfgs | TrBfgsAbs | HybridNewtonBfgs | HybridTrBfgs => {
            Some(QuasiNewtonState::identity(QnMode::Direct, k))
        }
        BfgsInv | BfgsInvAbs | Hamabs => Some(QuasiNewtonState::identity(QnMode::Inverse, k)),
        _ => None,
    }
}

/// Runs one optimization to convergence or budget exhaustion.
pub fn run(ll: &LogLikelihood, config: &OptimizerConfig) -> Result<RunResult> {
    config.validate()?;
    let k_dim = ll.n_params();
    let n = ll.n_obs();
    let start = Instant::now();

    let mut theta = match &config.theta0 {
        Some(t0) => {
            if t0.len() != k_dim {
                return Err(Error::Config(format!(
                    "theta0 has {} entries, model has {k_dim} parameters",
                    t0.len()
                )));
            }
            t0.clone()
        }
        None => Array1::zeros(k_dim),
    };

    let alg = config.algorithm;
    let stochastic = alg.uses_amabs();
    let mut amabs = AmabsState::new(config.amabs.clone(), n)?;
    let mut batch_size = if stochastic { amabs.batch_size() } else { n };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut qn = initial_qn(alg, k_dim);
    let mut trust = config.trust_region.clone();
    let mut last_hessian_min: Option<Array2<f64>> = None;
    let mut qn_seeded = false;
    let mut direction_resets = 0u32;

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut epochs = 0.0f64;
    let mut k = 0usize;
    let status;
    let mut converged = false;
    let mut last_full: Option<(Array1<f64>, f64, Array1<f64>)> = None;

    loop {
        if epochs >= config.max_epochs as f64 {
            status = RunStatus::MaxEpochs;
            break;
        }

        let batch = if batch_size == n {
            Batch::full(n)
        } else {
            sample_batch(n, batch_size, &mut rng)?
        };
        let order_used = fixed_order(alg).unwrap_or_else(|| {
            hybrid_select(batch_size, n, config.hybrid_threshold.unwrap_or(0.30))
        });
        let mode = mode_for(alg, order_used);
        let order = if mode.precond == Preconditioner::Hessian {
            EvalOrder::Hessian
        } else {
            EvalOrder::Gradient
        };

        let eval = ll.evaluate(theta.as_slice().expect("contiguous"), &batch, order)?;
        if !eval.value.is_finite() {
            return Err(Error::Optimization(format!(
                "log likelihood is not finite at iteration {k}"
            )));
        }
        epochs += batch_size as f64 / n as f64;
        let rel = relative_gradient_norm(&theta.view(), eval.value, &eval.gradient().view());

        if batch_size == n {
            last_full = Some((theta.clone(), eval.value, eval.gradient().clone()));
        }

        if rel < config.epsilon {
            trace.push(IterationRecord {
                k,
                batch_size,
                order_used,
                value: eval.value,
                rel_grad: rel,
                step: StepInfo::None,
                epochs,
            });
            k += 1;
            if batch_size == n {
                converged = true;
                status = RunStatus::Converged;
                break;
            }
            // a small stochastic gradient says nothing about the full one:
            // grow to the full dataset and re-verify there
            batch_size = n;
            amabs.promote_to_full();
            continue;
        }

        let f0 = -eval.value;
        let grad_min = eval.gradient().mapv(|v| -v);

        // cross-iteration secant pair for the trust-region quasi-Newton family
        if mode.family == StepFamily::TrustRegion && mode.precond == Preconditioner::QuasiDirect {
            if let Some(state) = qn.as_mut() {
                if let (Some(lt), Some(lg)) = (state.last_theta.take(), state.last_gradient.take())
                {
                    let s = &theta - &lt;
                    let y = &grad_min - &lg;
                    state.update(&s.view(), &y.view());
                }
                state.last_theta = Some(theta.clone());
                state.last_gradient = Some(grad_min.clone());
            }
        }

        if let Some(h) = &eval.hessian {
            last_hessian_min = Some(h.mapv(|v| -v));
        }

        // first switch to the quasi-Newton phase of a hybrid: warm-start the
        // approximation from the last repaired batch Hessian
        if alg.is_hybrid() && order_used == OrderUsed::FirstOrder && !qn_seeded {
            qn_seeded = true;
            if let (Some(state), Some(hmin)) = (qn.as_mut(), last_hessian_min.as_ref()) {
                if let Some(rep) = pd_repair(&hmin.view()) {
                    state.matrix = match state.mode {
                        QnMode::Direct => rep.matrix,
                        QnMode::Inverse => chol_inverse(&rep.factor),
                    };
                }
            }
        }

        let mut stalled = false;
        let mut step_info = StepInfo::None;
        let mut theta_next = theta.clone();

        match mode.family {
            StepFamily::LineSearch => {
                let mut direction = match mode.precond {
                    Preconditioner::Identity => direction_steepest(&grad_min.view()),
                    Preconditioner::Hessian => {
                        let h_min = eval.hessian.as_ref().expect("hessian requested").mapv(|v| -v);
                        direction_newton(&grad_min.view(), &h_min.view()).direction
                    }
                    Preconditioner::QuasiDirect | Preconditioner::QuasiInverse => {
                        let state = qn.as_mut().expect("quasi-Newton state");
                        match state.direction(&grad_min.view()) {
                            Some(d) => d,
                            None => {
                                // factorization failure: start the secant
                                // approximation over
                                state.matrix = Array2::eye(k_dim);
                                direction_resets += 1;
                                grad_min.mapv(|v| -v)
                            }
                        }
                    }
                };
                if direction.dot(&grad_min) >= 0.0 {
                    // repair: reset the preconditioner and fall back to -g
                    if let Some(state) = qn.as_mut() {
                        state.matrix = Array2::eye(k_dim);
                    }
                    direction = grad_min.mapv(|v| -v);
                    direction_resets += 1;
                }
                let cand = candidate_line_search(
                    ll,
                    &batch,
                    &theta,
                    f0,
                    &grad_min,
                    &direction,
                    &config.line_search,
                )?;
                if cand.progressed {
                    if matches!(
                        mode.precond,
                        Preconditioner::QuasiDirect | Preconditioner::QuasiInverse
                    ) {
                        if let Some(state) = qn.as_mut() {
                            let s = &cand.theta_next - &theta;
                            let y = &cand.grad_min_next - &grad_min;
                            state.update(&s.view(), &y.view());
                        }
                    }
                    step_info = StepInfo::LineSearch { alpha: cand.alpha };
                    theta_next = cand.theta_next;
                } else {
                    stalled = true;
                }
            }
            StepFamily::TrustRegion => {
                let b_owned;
                let b_view = match mode.precond {
                    Preconditioner::Hessian => {
                        b_owned = eval.hessian.as_ref().expect("hessian requested").mapv(|v| -v);
                        b_owned.view()
                    }
                    _ => qn.as_ref().expect("quasi-Newton state").matrix.view(),
                };
                let cand =
                    candidate_trust_region(ll, &batch, &theta, f0, &grad_min, &b_view, &mut trust)?;
                if cand.accepted {
                    step_info = StepInfo::TrustRegion {
                        radius: cand.radius_used,
                    };
                    theta_next = cand.theta_next;
                } else {
                    stalled = true;
                }
            }
        }

        trace.push(IterationRecord {
            k,
            batch_size,
            order_used,
            value: eval.value,
            rel_grad: rel,
            step: step_info,
            epochs,
        });
        k += 1;

        if stalled && batch_size == n {
            status = RunStatus::Stalled;
            break;
        }

        if stochastic {
            let scaled = eval.value * n as f64 / batch_size as f64;
            batch_size = amabs.step(scaled)?;
        }
        theta = theta_next;
    }

    let (final_value, final_gradient) = match last_full {
        Some((t, v, g)) if t == theta => (v, g),
        _ => {
            let ev = ll.evaluate(
                theta.as_slice().expect("contiguous"),
                &Batch::full(n),
                EvalOrder::Gradient,
            )?;
            (ev.value, ev.gradient().clone())
        }
    };
    let rel_grad = relative_gradient_norm(&theta.view(), final_value, &final_gradient.view());
    let skipped_updates = qn.as_ref().map_or(0, |s| s.skipped_updates);

    Ok(RunResult {
        final_eval: Evaluation {
            value: final_value,
            gradient: Some(final_gradient),
            hessian: None,
            batch_fraction: 1.0,
        },
        theta,
        rel_grad,
        trace,
        converged,
        status,
        epochs,
        iterations: k,
        wall_time: start.elapsed(),
        direction_resets,
        skipped_updates,
    })
}

/// Standard errors from the observed information matrix at `theta`
/// (square roots of the diagonal of `(-hessian)^-1` on the full data).
pub fn standard_errors(ll: &LogLikelihood, theta: &ArrayView1<f64>) -> Result<Array1<f64>> {
    let eval = ll.evaluate(
        theta.as_slice().expect("contiguous"),
        &Batch::full(ll.n_obs()),
        EvalOrder::Hessian,
    )?;
    let info = eval.hessian.expect("hessian requested").mapv(|v| -v);
    let rep = pd_repair(&info.view()).ok_or_else(|| {
        Error::Optimization("information matrix is singular; standard errors unavailable".into())
    })?;
    let cov = chol_inverse(&rep.factor);
    Ok(Array1::from_iter((0..cov.nrows()).map(|i| cov[[i, i]].sqrt())))
}
