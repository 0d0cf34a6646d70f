//! Euler-Newton predictor-corrector tracing of the homotopy path from `t = 1`
//! down to `t = 0`, with adaptive step sizes.
//!
//! Each step picks `t_next = t - dt` (clamped to exactly zero on the final
//! step), predicts along the tangent `g = dz/dt` obtained from
//! `D_z H g = -D_t H`, and corrects with pseudo-inverse Newton iterations at
//! fixed `t_next`. The pseudo-inverse is applied to the column-equilibrated
//! `D_z H`. Interior steps are corrected to `eps1`. The final step is corrected
//! to `eps2` and, because the endpoint may be a degenerate root, also until the
//! last Newton update is at most `eps1`.
//!
//! Step-size control: a step that needed more than three Newton iterations
//! halves `dt`; once the last two steps both went through without a cut, `dt`
//! doubles. `dt` is kept inside `[dt_min, dt_max]`. A step is rejected and
//! `dt` halved when the tangent solve fails, the corrector does not converge,
//! or the corrected point before `t = 0` is not strictly positive. The
//! predicted point itself may leave the orthant: near a zero coordinate the
//! path is convex and Euler overshoots, and the corrector pulls it back.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TcpError};
use crate::homotopy::{self, start_point, HomotopyParams, HomotopyPoint};
use crate::linalg::{pinv_solve_equilibrated, solve_direct};
use crate::model::{reformulation_residual, CandidatePair, TcpProblem};

/// Newton iterations above which the next step is halved.
pub const NEWTON_CUT_THRESHOLD: usize = 3;

/// Slack factor applied to the path-norm bound by [`divergence_guard`].
pub const GUARD_SLACK: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TracerConfig {
    pub params: HomotopyParams,
    pub dt0: f64,
    /// Corrector tolerance for interior steps.
    pub eps1: f64,
    /// Corrector tolerance for the final step at `t = 0`.
    pub eps2: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_newton_per_step: usize,
    /// Newton budget for the final step, where `D_z H` may be singular.
    pub max_newton_final: usize,
    /// Budget on step attempts, accepted or rejected.
    pub max_steps: usize,
    /// Predictor systems with a larger condition number are rejected.
    pub max_condition: f64,
    pub guard_radius: Option<f64>,
    pub beta_estimate: Option<f64>,
}

impl TracerConfig {
    /// Defaults: `a = b = 1`, `dt0 = 0.1`, `eps1 = 1e-5`, `eps2 = 1e-12`.
    pub fn new(params: HomotopyParams) -> Self {
        Self {
            params,
            dt0: 0.1,
            eps1: 1e-5,
            eps2: 1e-12,
            dt_min: 1e-6,
            dt_max: 0.5,
            max_newton_per_step: 20,
            max_newton_final: 60,
            max_steps: 1000,
            max_condition: 1e14,
            guard_radius: None,
            beta_estimate: None,
        }
    }

    pub fn with_defaults(n: usize) -> Self {
        Self::new(HomotopyParams::ones(n))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(TcpError::Parameter(msg));
        if self.params.dim() != n {
            return Err(TcpError::Shape {
                what: "homotopy parameters",
                expected: n,
                got: self.params.dim(),
            });
        }
        if !(0.0 < self.dt_min
            && self.dt_min <= self.dt0
            && self.dt0 <= self.dt_max
            && self.dt_max <= 1.0)
        {
            return bad(format!(
                "need 0 < dt_min <= dt0 <= dt_max <= 1, got dt_min={}, dt0={}, dt_max={}",
                self.dt_min, self.dt0, self.dt_max
            ));
        }
        if !(0.0 < self.eps2 && self.eps2 <= self.eps1) {
            return bad(format!(
                "need 0 < eps2 <= eps1, got eps1={}, eps2={}",
                self.eps1, self.eps2
            ));
        }
        if self.max_newton_per_step == 0 || self.max_newton_final == 0 || self.max_steps == 0 {
            return bad("iteration limits must be positive".into());
        }
        if let Some(r) = self.guard_radius {
            if !(r > 0.0) {
                return bad(format!("guard radius must be positive, got {r}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Converged,
    Stalled,
    GuardTripped,
    MaxSteps,
}

impl TraceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceStatus::Converged => "converged",
            TraceStatus::Stalled => "stalled",
            TraceStatus::GuardTripped => "guard_tripped",
            TraceStatus::MaxSteps => "max_steps",
        }
    }
}

/// One step attempt, accepted or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub newton_iters: usize,
    pub h_norm: Option<f64>,
    pub x_inf: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub solution: CandidatePair,
    pub residue: f64,
    /// Accepted prediction steps, including the final one.
    pub itr: usize,
    /// Newton iterations over all attempts, including rejected ones.
    pub nwtitr: usize,
    pub path: Vec<HomotopyPoint>,
    pub steps: Vec<StepRecord>,
    pub status: TraceStatus,
}

/// Adaptive step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    current_dt: f64,
    consecutive_uncut: u32,
    dt_min: f64,
    dt_max: f64,
}

impl StepController {
    pub fn new(dt0: f64, dt_min: f64, dt_max: f64) -> Self {
        Self {
            current_dt: dt0.clamp(dt_min, dt_max),
            consecutive_uncut: 0,
            dt_min,
            dt_max,
        }
    }

    pub fn current_dt(&self) -> f64 {
        self.current_dt
    }

    pub fn consecutive_uncut(&self) -> u32 {
        self.consecutive_uncut
    }

    /// Update after an accepted step that used `newton_iters` corrector iterations.
    pub fn update_step(self, newton_iters: usize) -> Self {
        if newton_iters > NEWTON_CUT_THRESHOLD {
            return self.cut();
        }
        let consecutive_uncut = self.consecutive_uncut.saturating_add(1);
        let current_dt = if consecutive_uncut >= 2 {
            (2.0 * self.current_dt).min(self.dt_max)
        } else {
            self.current_dt
        };
        Self {
            current_dt,
            consecutive_uncut,
            ..self
        }
    }

    /// Halves the step and resets the uncut counter.
    pub fn cut(self) -> Self {
        Self {
            current_dt: (0.5 * self.current_dt).max(self.dt_min),
            consecutive_uncut: 0,
            ..self
        }
    }

    pub fn at_minimum(&self) -> bool {
        self.current_dt <= self.dt_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub ztilde: DVector<f64>,
    /// `dz/dt` at the current point.
    pub tangent: DVector<f64>,
}

/// Euler predictor for moving from `pt.t` to `pt.t - dt`.
///
/// Returns `Ok(None)` when `D_z H` is singular or too ill-conditioned
/// (condition number above `1e14`).
pub fn euler_predict(
    p: &TcpProblem,
    params: &HomotopyParams,
    pt: &HomotopyPoint,
    dt: f64,
) -> Result<Option<Prediction>> {
    predict(p, params, &pt.z(), pt.t, dt, 1e14)
}

fn predict(
    p: &TcpProblem,
    params: &HomotopyParams,
    z: &DVector<f64>,
    t: f64,
    dt: f64,
    max_cond: f64,
) -> Result<Option<Prediction>> {
    let jz = homotopy::jacobian_z_at(p, z, t)?;
    let jt = homotopy::jacobian_t_at(p, params, z)?;
    let Some(tangent) = solve_direct(&jz, &(-jt), max_cond) else {
        return Ok(None);
    };
    let ztilde = z - dt * &tangent;
    Ok(Some(Prediction { ztilde, tangent }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorOutcome {
    pub z: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `|H|_2` before each update and after the last one.
    pub residuals: Vec<f64>,
}

/// Newton's method on `H(., t_fixed) = 0` with `w <- w - (D_z H)^+ H`.
///
/// Stops as soon as `|H|_2 <= tol`. A non-finite iterate ends the iteration
/// unconverged.
pub fn newton_correct(
    p: &TcpProblem,
    params: &HomotopyParams,
    z_init: &DVector<f64>,
    t_fixed: f64,
    tol: f64,
    max_iter: usize,
) -> Result<CorrectorOutcome> {
    newton_correct_stepped(p, params, z_init, t_fixed, tol, f64::INFINITY, max_iter)
}

/// Like [`newton_correct`], but convergence additionally needs the last
/// update to be at most `step_tol` in max norm.
///
/// At a degenerate root `|H|` shrinks like a high power of the distance, so a
/// small residual alone can leave `x` far from the root.
pub fn newton_correct_stepped(
    p: &TcpProblem,
    params: &HomotopyParams,
    z_init: &DVector<f64>,
    t_fixed: f64,
    tol: f64,
    step_tol: f64,
    max_iter: usize,
) -> Result<CorrectorOutcome> {
    let mut w = z_init.clone();
    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    loop {
        let h = homotopy::evaluate(p, params, &w, t_fixed)?;
        let norm = h.norm();
        residuals.push(norm);
        if !norm.is_finite() {
            break;
        }
        if norm <= tol && (last_step <= step_tol || step_tol.is_infinite()) {
            return Ok(CorrectorOutcome {
                z: w,
                iterations,
                converged: true,
                residuals,
            });
        }
        if iterations == max_iter {
            break;
        }
        let jz = homotopy::jacobian_z_at(p, &w, t_fixed)?;
        let Some(delta) = pinv_solve_equilibrated(&jz, &h) else {
            break;
        };
        last_step = delta.amax();
        w -= delta;
        iterations += 1;
        if w.iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    Ok(CorrectorOutcome {
        z: w,
        iterations,
        converged: false,
        residuals,
    })
}

/// Upper bound on `|x|∞^{m-1}` along the path at parameter `t`:
/// `max(1, (max a + |q|∞ + |b|∞) / ((1 - t) beta))`.
pub fn path_norm_bound(p: &TcpProblem, params: &HomotopyParams, t: f64, beta: f64) -> f64 {
    let num = params.a().max() + p.q().amax() + params.b().amax();
    let den = (1.0 - t) * beta;
    if den > 0.0 {
        (num / den).max(1.0)
    } else {
        f64::INFINITY
    }
}

/// Whether `pt` has escaped the bounded region the path must stay in.
///
/// With a positive `beta_estimate` this trips when `|x|∞^{m-1}` exceeds
/// [`GUARD_SLACK`] times [`path_norm_bound`]; otherwise it falls back to
/// `cfg.guard_radius` on `|x|∞`. Never trips at `t >= 1`.
pub fn divergence_guard(
    p: &TcpProblem,
    cfg: &TracerConfig,
    pt: &HomotopyPoint,
    beta_estimate: Option<f64>,
) -> bool {
    if pt.t >= 1.0 {
        return false;
    }
    let x_inf = pt.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match beta_estimate.filter(|b| *b > 0.0) {
        Some(beta) => {
            let bound = path_norm_bound(p, &cfg.params, pt.t, beta);
            x_inf.powi(p.order() as i32 - 1) > GUARD_SLACK * bound
        }
        None => cfg.guard_radius.is_some_and(|r| x_inf > r),
    }
}

fn in_orthant(z: &DVector<f64>, slack: f64) -> bool {
    z.iter().all(|&v| v >= -slack)
}

fn strictly_positive(z: &DVector<f64>) -> bool {
    z.iter().all(|&v| v > 0.0)
}

/// Traces the path from the start point at `t = 1` to `t = 0`.
pub fn trace(p: &TcpProblem, cfg: &TracerConfig) -> Result<TraceResult> {
    let n = p.dim();
    cfg.validate(n)?;
    let params = &cfg.params;

    let start = start_point(params);
    let mut z = start.z();
    let mut t = 1.0;
    let mut ctrl = StepController::new(cfg.dt0, cfg.dt_min, cfg.dt_max);
    let mut path = vec![start];
    let mut steps = Vec::new();
    let (mut itr, mut nwtitr) = (0, 0);

    let status = loop {
        if steps.len() >= cfg.max_steps {
            break TraceStatus::MaxSteps;
        }
        let dt = ctrl.current_dt();
        let terminal = t - dt <= 0.0;
        let (t_next, h) = if terminal { (0.0, t) } else { (t - dt, dt) };

        let outcome = match predict(p, params, &z, t, h, cfg.max_condition)? {
            Some(pred) if terminal => Some(newton_correct_stepped(
                p,
                params,
                &pred.ztilde,
                0.0,
                cfg.eps2,
                cfg.eps1,
                cfg.max_newton_final,
            )?),
            Some(pred) => Some(newton_correct(
                p,
                params,
                &pred.ztilde,
                t_next,
                cfg.eps1,
                cfg.max_newton_per_step,
            )?),
            None => None,
        };

        let iters = outcome.as_ref().map_or(0, |o| o.iterations);
        nwtitr += iters;
        let accepted = outcome.as_ref().is_some_and(|o| {
            o.converged
                && (terminal
                    || if params.is_relaxed() {
                        in_orthant(&o.z, cfg.eps1)
                    } else {
                        strictly_positive(&o.z)
                    })
        });
        steps.push(StepRecord {
            t: t_next,
            dt: h,
            newton_iters: iters,
            h_norm: outcome.as_ref().and_then(|o| o.residuals.last().copied()),
            x_inf: outcome.as_ref().map(|o| o.z.rows(0, n).amax()),
            accepted,
        });

        if !accepted {
            if ctrl.at_minimum() {
                break TraceStatus::Stalled;
            }
            ctrl = ctrl.cut();
            continue;
        }

        let outcome = outcome.expect("accepted implies an outcome");
        z = outcome.z;
        t = t_next;
        itr += 1;
        let point = HomotopyPoint::from_z(&z, t);
        let tripped = divergence_guard(p, cfg, &point, cfg.beta_estimate);
        path.push(point);
        if tripped {
            break TraceStatus::GuardTripped;
        }
        if terminal {
            break TraceStatus::Converged;
        }
        ctrl = ctrl.update_step(outcome.iterations);
    };

    let solution = CandidatePair::new(z.rows(0, n).into_owned(), z.rows(n, n).into_owned())?;
    let residue = reformulation_residual(p, &solution)?;
    Ok(TraceResult {
        solution,
        residue,
        itr,
        nwtitr,
        path,
        steps,
        status,
    })
}
