//! Step-length machinery shared by every optimizer: a weak-Wolfe line search
//! and a Steihaug (truncated conjugate gradient) trust-region subproblem
//! solver with the classic ratio-based radius update.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Wolfe line-search constants. The defaults (c1 = 1e-4, c2 = 0.9, unit
/// initial step) are the standard quasi-Newton choices.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchConfig {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// First trial step.
    pub alpha_init: f64,
    /// Cap on objective evaluations.
    pub max_trials: u32,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        LineSearchConfig {
            c1: 1e-4,
            c2: 0.9,
            alpha_init: 1.0,
            max_trials: 50,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::Config("need 0 < c1 < c2 < 1".into()));
        }
        if !(self.alpha_init > 0.0) {
            return Err(Error::Config("alpha_init must be > 0".into()));
        }
        if self.max_trials == 0 {
            return Err(Error::Config("max_trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of a line search along one direction.
#[derive(Debug, Clone, Copy)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    /// Objective value at `alpha` (minimization convention).
    pub value: f64,
    /// Directional derivative at `alpha`.
    pub slope: f64,
    /// True when both Wolfe conditions hold; false for a best-effort trial
    /// returned after the evaluation cap.
    pub satisfied: bool,
    pub trials: u32,
}

/// Finds a step length satisfying the (weak) Wolfe conditions on the 1-D
/// restriction `phi(alpha)` of the minimization objective along a descent
/// direction. `phi` returns `(value, slope)`; non-finite trial values shrink
/// the step instead of aborting.
///
/// `phi0`/`dphi0` are value and slope at alpha = 0. When the trial cap is hit
/// the best finite trial is returned with `satisfied = false`.
pub fn wolfe_line_search<F>(
    phi0: f64,
    dphi0: f64,
    mut phi: F,
    config: &LineSearchConfig,
) -> Result<LineSearchOutcome>
where
    F: FnMut(f64) -> (f64, f64),
{
    config.validate()?;
    if !(dphi0 < 0.0) {
        return Err(Error::NonDescentDirection { slope: dphi0 });
    }

    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    let mut alpha = config.alpha_init;
    let mut best: Option<LineSearchOutcome> = None;
    let mut trials_done = 0;

    for trial in 1..=config.max_trials {
        trials_done = trial;
        let (value, slope) = phi(alpha);
        if value.is_finite() && best.is_none_or(|b| value < b.value) {
            best = Some(LineSearchOutcome {
                alpha,
                value,
                slope,
                satisfied: false,
                trials: trial,
            });
        }
        let armijo_ok = value.is_finite() && value <= phi0 + config.c1 * alpha * dphi0;
        if !armijo_ok || !slope.is_finite() {
            hi = alpha;
            alpha = 0.5 * (lo + hi);
        } else if slope < config.c2 * dphi0 {
            // still descending too steeply: the step is too short
            lo = alpha;
            alpha = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
        } else {
            return Ok(LineSearchOutcome {
                alpha,
                value,
                slope,
                satisfied: true,
                trials: trial,
            });
        }
        if hi.is_finite() && (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            break; // bracket collapsed to rounding noise
        }
    }

    best.map(|mut b| {
        b.trials = trials_done;
        b
    })
    .ok_or(Error::NonFiniteLineSearch)
}

/// Trust-region radius and acceptance thresholds. Defaults: initial radius 1,
/// eta1 = 0.01, eta2 = 0.9, expansion 2, contraction 0.5, radius cap 1e10.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionState {
    pub radius: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub radius_max: f64,
}

impl Default for TrustRegionState {
    fn default() -> Self {
        TrustRegionState {
            radius: 1.0,
            eta1: 0.01,
            eta2: 0.9,
            gamma1: 2.0,
            gamma2: 0.5,
            radius_max: 1e10,
        }
    }
}

impl TrustRegionState {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eta1 && self.eta1 < self.eta2 && self.eta2 < 1.0) {
            return Err(Error::Config("need 0 < eta1 < eta2 < 1".into()));
        }
        if !(self.gamma1 > 1.0) {
            return Err(Error::Config("gamma1 must be > 1".into()));
        }
        if !(0.0 < self.gamma2 && self.gamma2 < 1.0) {
            return Err(Error::Config("gamma2 must be in (0, 1)".into()));
        }
        if !(self.radius > 0.0 && self.radius <= self.radius_max) {
            return Err(Error::Config("radius must be in (0, radius_max]".into()));
        }
        Ok(())
    }
}

fn norm(v: &ArrayView1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Positive root of ||z + tau d|| = radius.
fn boundary_tau(z: &Array1<f64>, d: &Array1<f64>, radius: f64) -> f64 {
    let dd = d.dot(d);
    let zd = z.dot(d);
    let zz = z.dot(z);
    let disc = (zd * zd + dd * (radius * radius - zz)).max(0.0);
    (-zd + disc.sqrt()) / dd
}

/// Approximately minimizes the quadratic model `g'd + d'Bd/2` inside
/// `||d|| <= radius` with Steihaug's truncated conjugate gradient.
///
/// The returned step never exceeds the radius, does at least as well as the
/// Cauchy point, and equals the unconstrained Newton step whenever conjugate
/// gradient converges strictly inside the region. Directions of negative
/// curvature are followed to the boundary, so indefinite `B` needs no repair.
pub fn solve_tr_subproblem(g: &ArrayView1<f64>, b: &ArrayView2<f64>, radius: f64) -> Array1<f64> {
    let k = g.len();
    debug_assert!(radius > 0.0);
    let g_norm = norm(g);
    let mut z = Array1::<f64>::zeros(k);
    if g_norm == 0.0 {
        return z;
    }
    let tol = g_norm.sqrt().min(0.1) * g_norm;

    let mut r = g.to_owned();
    let mut d = -g.to_owned();
    let mut r_sq = r.dot(&r);

    for _ in 0..(2 * k.max(1)) {
        let bd = b.dot(&d);
        let curvature = d.dot(&bd);
        if curvature <= 0.0 {
            let tau = boundary_tau(&z, &d, radius);
            return z + tau * &d;
        }
        let alpha = r_sq / curvature;
        let z_next = &z + &(alpha * &d);
        if norm(&z_next.view()) >= radius {
            let tau = boundary_tau(&z, &d, radius);
            return z + tau * &d;
        }
        let r_next = &r + &(alpha * &bd);
        let r_next_sq = r_next.dot(&r_next);
        z = z_next;
        if r_next_sq.sqrt() <= tol {
            return z;
        }
        let beta = r_next_sq / r_sq;
        d = -&r_next + beta * &d;
        r = r_next;
        r_sq = r_next_sq;
    }
    z
}

/// Sentinel ratio for a step with no (or negative) predicted reduction.
pub const FAILED_RATIO: f64 = f64::NEG_INFINITY;

/// Ratio of actual to predicted reduction, on the minimization objective.
/// A non-positive or non-finite predicted reduction yields [`FAILED_RATIO`],
/// which the update rule treats as a rejected step.
pub fn tr_ratio(actual_old: f64, actual_new: f64, model_old: f64, model_new: f64) -> f64 {
    let predicted = model_old - model_new;
    if !(predicted > 0.0) || !predicted.is_finite() {
        return FAILED_RATIO;
    }
    let actual = actual_old - actual_new;
    if !actual.is_finite() {
        return FAILED_RATIO;
    }
    actual / predicted
}

/// Outcome of the radius update rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrUpdate {
    pub radius: f64,
    pub accepted: bool,
}

/// The three-case radius rule: expand when `rho >= eta2`, keep when
/// `rho in [eta1, eta2)`, shrink when `rho < eta1`. The step is accepted
/// exactly when `rho >= eta1`. Pure function of its inputs.
pub fn tr_update(rho: f64, state: &TrustRegionState) -> TrUpdate {
    if rho >= state.eta2 {
        TrUpdate {
            radius: (state.gamma1 * state.radius).min(state.radius_max),
            accepted: true,
        }
    } else if rho >= state.eta1 {
        TrUpdate {
            radius: state.radius,
            accepted: true,
        }
    } else {
        TrUpdate {
            radius: state.gamma2 * state.radius,
            accepted: false,
        }
    }
}
