use serde::{Deserialize, Serialize};

use super::dopri::{integrate_system, IntegrateOptions, Termination};
use super::params::{EigenParams, PhiState, ToleranceSpec};
use super::system::{rhs, CoupledSystem};
use crate::error::{Error, Result};

/// Default spacing of stored samples.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

/// Sampled solution of the coupled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: EigenParams,
    /// Strictly monotone in `y` (increasing or decreasing).
    pub samples: Vec<PhiState>,
    pub termination: Termination,
    pub tol: ToleranceSpec,
}

impl Trajectory {
    /// Wrap externally produced samples; they must be finite and strictly
    /// monotone in `y`.
    pub fn from_samples(
        params: EigenParams,
        samples: Vec<PhiState>,
        termination: Termination,
        tol: ToleranceSpec,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("trajectory has no samples".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample at y = {}",
                bad.y
            )));
        }
        let increasing = samples.len() < 2 || samples[1].y > samples[0].y;
        let monotone = samples.windows(2).all(|w| {
            if increasing {
                w[1].y > w[0].y
            } else {
                w[1].y < w[0].y
            }
        });
        if !monotone {
            return Err(Error::InvalidInput(
                "samples are not strictly monotone in y".into(),
            ));
        }
        Ok(Trajectory {
            params,
            samples,
            termination,
            tol,
        })
    }

    /// Covered range `(min y, max y)`.
    pub fn range(&self) -> (f64, f64) {
        let a = self.samples.first().unwrap().y;
        let b = self.samples.last().unwrap().y;
        (a.min(b), a.max(b))
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.range();
        a <= lo && hi <= b
    }

    pub fn first(&self) -> &PhiState {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhiState {
        self.samples.last().unwrap()
    }

    /// Samples re-ordered by increasing `y`.
    pub fn ascending(&self) -> Vec<PhiState> {
        let mut s = self.samples.clone();
        if s.len() > 1 && s[0].y > s[1].y {
            s.reverse();
        }
        s
    }

    pub fn scaled(&self, c: f64) -> Trajectory {
        Trajectory {
            samples: self.samples.iter().map(|s| s.combine(c, s, 0.0)).collect(),
            ..self.clone()
        }
    }

    pub fn sample(&self, y: f64) -> Result<PhiState> {
        sample(self, y)
    }
}

/// Integrate the coupled system from `init` to `y_end` with samples every
/// `out_resolution`.
pub fn integrate(
    params: EigenParams,
    init: PhiState,
    y_end: f64,
    tol: ToleranceSpec,
    out_resolution: f64,
) -> Result<Trajectory> {
    if !init.is_finite() {
        return Err(Error::InvalidInput("non-finite initial state".into()));
    }
    let sys = CoupledSystem { params };
    let run = integrate_system(
        &sys,
        init.y,
        init.vector(),
        y_end,
        &tol,
        IntegrateOptions {
            out_resolution: Some(out_resolution),
            renorm_threshold: None,
        },
    )?;
    let samples = run
        .nodes
        .into_iter()
        .map(|(y, v)| PhiState::from_vector(y, v))
        .collect();
    Ok(Trajectory {
        params,
        samples,
        termination: run.termination,
        tol,
    })
}

/// Cubic Hermite interpolation of one component on `[y0, y1]`.
#[inline]
pub(crate) fn hermite(y0: f64, v0: f64, d0: f64, y1: f64, v1: f64, d1: f64, y: f64) -> f64 {
    let h = y1 - y0;
    let s = (y - y0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1
}

/// Interpolated state at `y`. Derivatives at the bracketing nodes come from
/// the right-hand side, so every component is interpolated with its exact
/// slope.
pub fn sample(traj: &Trajectory, y: f64) -> Result<PhiState> {
    let (lo, hi) = traj.range();
    if !(y >= lo && y <= hi) {
        return Err(Error::OutOfRange { y, lo, hi });
    }
    let s = &traj.samples;
    if s.len() == 1 {
        return Ok(s[0]);
    }
    let increasing = s[1].y > s[0].y;
    // first index whose position is past `y` in integration order
    let idx = s.partition_point(|p| if increasing { p.y <= y } else { p.y >= y });
    if idx > 0 && s[idx - 1].y == y {
        return Ok(s[idx - 1]);
    }
    let (a, b) = if idx == 0 {
        (&s[0], &s[1])
    } else if idx >= s.len() {
        (&s[s.len() - 2], &s[s.len() - 1])
    } else {
        (&s[idx - 1], &s[idx])
    };
    let da = rhs(a, &traj.params);
    let db = rhs(b, &traj.params);
    let va = a.vector();
    let vb = b.vector();
    let v: [f64; 4] = std::array::from_fn(|i| hermite(a.y, va[i], da[i], b.y, vb[i], db[i], y));
    Ok(PhiState::from_vector(y, v))
}

/// Conserved antisymmetric form
/// `φ₁ᵃ′φ₁ᵇ − φ₁ᵃφ₁ᵇ′ + φ₂ᵃ′φ₂ᵇ − φ₂ᵃφ₂ᵇ′` evaluated at `y`.
pub fn bilinear_form(a: &Trajectory, b: &Trajectory, y: f64) -> Result<f64> {
    if a.params != b.params {
        return Err(Error::ParamsMismatch(format!(
            "epsilon {} vs {}",
            a.params.epsilon(),
            b.params.epsilon()
        )));
    }
    let sa = sample(a, y)?;
    let sb = sample(b, y)?;
    Ok(bilinear_of_states(&sa, &sb))
}

pub fn bilinear_of_states(a: &PhiState, b: &PhiState) -> f64 {
    a.dphi1 * b.phi1 - a.phi1 * b.dphi1 + a.dphi2 * b.phi2 - a.phi2 * b.dphi2
}
