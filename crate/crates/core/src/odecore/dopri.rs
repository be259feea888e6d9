//! Dormand–Prince 5(4) with PI step-size control.
//!
//! Output nodes are placed on a uniform grid by shortening the step that
//! would overshoot the next node, so stored states carry the full accuracy of
//! the method instead of the accuracy of an interpolant.

use serde::{Deserialize, Serialize};

use super::params::ToleranceSpec;
use super::system::OdeSystem;
use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MAX_STEPS: usize = 10_000_000;

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "y_stop", rename_all = "snake_case")]
pub enum Termination {
    CompletedSpan,
    /// A component exceeded the overflow cap; carries the last valid position.
    OverflowHalt(f64),
    /// The step size fell below the representable minimum at this position.
    StepFailure(f64),
}

impl Termination {
    pub fn is_complete(&self) -> bool {
        matches!(self, Termination::CompletedSpan)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Termination::CompletedSpan => Ok(()),
            Termination::OverflowHalt(y) => Err(Error::Overflow { y }),
            Termination::StepFailure(y) => Err(Error::StepFailure { y }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrateOptions {
    /// Uniform spacing of stored nodes. `None` stores every accepted step.
    pub out_resolution: Option<f64>,
    /// Rescale the state to unit max-norm whenever it exceeds this value.
    /// Only meaningful for linear homogeneous systems. When set, only the
    /// initial and final states are stored.
    pub renorm_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration<const N: usize> {
    /// Stored `(t, state)` pairs in integration order.
    pub nodes: Vec<(f64, [f64; N])>,
    pub termination: Termination,
    /// Sum of `ln` of all renormalization divisors; the true final state is
    /// `exp(log_scale)` times the stored one.
    pub log_scale: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<const N: usize> Integration<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        *self
            .nodes
            .last()
            .expect("integration always stores its start")
    }
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: &ToleranceSpec,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = tol.abs_tol + tol.rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn weighted_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let sum: f64 = (0..N).map(|i| (v[i] / scale[i]).powi(2)).sum();
    (sum / N as f64).sqrt()
}

fn initial_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    tol: &ToleranceSpec,
) -> f64 {
    let scale: [f64; N] = std::array::from_fn(|i| tol.abs_tol + tol.rel_tol * y0[i].abs());
    let d0 = weighted_norm(y0, &scale);
    let d1 = weighted_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = sys.rhs(t0 + dir * h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = weighted_norm(&diff, &scale) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(tol.max_step)
}

struct Step<const N: usize> {
    y: [f64; N],
    f: [f64; N],
    err: f64,
}

#[inline]
fn dopri_step<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: &ToleranceSpec,
) -> Step<N> {
    let stage =
        |coef: &dyn Fn(usize) -> f64| -> [f64; N] { std::array::from_fn(|i| y[i] + h * coef(i)) };
    let k2 = sys.rhs(t + C2 * h, &stage(&|i| A21 * k1[i]));
    let k3 = sys.rhs(t + C3 * h, &stage(&|i| A31 * k1[i] + A32 * k2[i]));
    let k4 = sys.rhs(
        t + C4 * h,
        &stage(&|i| A41 * k1[i] + A42 * k2[i] + A43 * k3[i]),
    );
    let k5 = sys.rhs(
        t + C5 * h,
        &stage(&|i| A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]),
    );
    let k6 = sys.rhs(
        t + h,
        &stage(&|i| A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]),
    );
    let y_new = stage(&|i| A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    let k7 = sys.rhs(t + h, &y_new);
    let err: [f64; N] = std::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    Step {
        err: error_norm(&err, y, &y_new, tol),
        y: y_new,
        f: k7,
    }
}

/// Integrate `sys` from `(t0, y0)` to `t_end` (either direction).
pub fn integrate_system<S: OdeSystem<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: &ToleranceSpec,
    opts: IntegrateOptions,
) -> Result<Integration<N>> {
    tol.validate()?;
    if !(t0.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite span [{t0}, {t_end}]"
        )));
    }
    if t0 == t_end {
        return Err(Error::EmptySpan(t0));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite initial state".into()));
    }
    if let Some(d) = opts.out_resolution {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidInput(format!(
                "output resolution must be positive, got {d}"
            )));
        }
    }

    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let dense = opts.renorm_threshold.is_none();
    let grid = if dense { opts.out_resolution } else { None };
    let n_nodes = grid.map(|d| ((span / d - 1e-9).ceil() as usize).max(1));
    let target_at = |k: usize| -> f64 {
        match (grid, n_nodes) {
            (Some(d), Some(n)) if k < n => t0 + dir * (k as f64) * d,
            _ => t_end,
        }
    };

    let mut out = Integration {
        nodes: vec![(t0, y0)],
        termination: Termination::CompletedSpan,
        log_scale: 0.0,
        accepted_steps: 0,
        rejected_steps: 0,
    };

    let mut t = t0;
    let mut y = y0;
    let mut f = sys.rhs(t, &y);
    let mut h = initial_step(sys, t0, &y0, &f, dir, tol);
    let mut err_old: f64 = 1e-4;
    let mut next = 1usize;

    loop {
        let target = target_at(next);
        let remaining = (target - t).abs();
        let h_try = h.min(remaining).min(tol.max_step);
        let truncated = h_try < h;
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h_try < h_min && h_try < remaining {
            out.termination = Termination::StepFailure(t);
            break;
        }
        if out.accepted_steps + out.rejected_steps >= MAX_STEPS {
            out.termination = Termination::StepFailure(t);
            break;
        }

        let step = dopri_step(sys, t, &y, &f, dir * h_try, tol);
        let err = if step.err.is_finite() {
            step.err
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let reached = h_try == remaining;
            let t_new = if reached { target } else { t + dir * h_try };
            let mut y_new = step.y;
            let mut f_new = step.f;
            if y_new.iter().any(|v| !v.is_finite())
                || (dense && sys.magnitude(&y_new) > tol.overflow_cap)
            {
                out.termination = Termination::OverflowHalt(t);
                break;
            }
            if let Some(thr) = opts.renorm_threshold {
                let m = y_new.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if m > thr {
                    y_new.iter_mut().for_each(|v| *v /= m);
                    f_new.iter_mut().for_each(|v| *v /= m);
                    out.log_scale += m.ln();
                }
            }
            t = t_new;
            y = y_new;
            f = f_new;
            out.accepted_steps += 1;

            let fac =
                (SAFETY * err.max(1e-10).powf(-ALPHA) * err_old.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
            err_old = err.max(1e-4);
            if !(truncated && fac >= 1.0) {
                h = h_try * fac;
            }

            if reached {
                let done = target == t_end;
                if grid.is_some() || done {
                    out.nodes.push((t, y));
                }
                if done {
                    break;
                }
                next += 1;
            } else if dense && grid.is_none() {
                out.nodes.push((t, y));
            }
        } else {
            out.rejected_steps += 1;
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h = h_try * fac;
        }
    }
    Ok(out)
}
