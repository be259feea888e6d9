//! Figure presets with their published initial data, the reproduced
//! trajectories over `[−10, 10]`, and the "as published" reconstruction that
//! keeps only `y ≥ 0` and extends it by rotation (φ₁) and mirroring (φ₂).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odecore::{integrate, EigenParams, PhiState, Termination, ToleranceSpec, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig9,
    Fig10,
    Fig11,
}

impl FigureId {
    pub const ALL: [FigureId; 3] = [FigureId::Fig9, FigureId::Fig10, FigureId::Fig11];

    pub fn number(&self) -> u32 {
        match self {
            FigureId::Fig9 => 9,
            FigureId::Fig10 => 10,
            FigureId::Fig11 => 11,
        }
    }

    pub fn from_number(n: u32) -> Result<FigureId> {
        match n {
            9 => Ok(FigureId::Fig9),
            10 => Ok(FigureId::Fig10),
            11 => Ok(FigureId::Fig11),
            other => Err(Error::InvalidInput(format!(
                "unknown figure {other}; expected 9, 10 or 11"
            ))),
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "fig{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigurePreset {
    pub id: FigureId,
    pub epsilon: f64,
    /// State at `y = 0`.
    pub init: PhiState,
    pub span: (f64, f64),
    /// Range shown in the zoomed panel.
    pub detail_window: (f64, f64),
}

impl FigurePreset {
    pub fn params(&self) -> EigenParams {
        EigenParams::new(self.epsilon)
    }
}

/// Frozen preset values. `flip_slopes` negates both initial derivatives,
/// matching the sign the original plots appear to use.
pub fn preset(id: FigureId, flip_slopes: bool) -> FigurePreset {
    let (epsilon, init, detail_window) = match id {
        FigureId::Fig9 => (
            2.0,
            PhiState::new(0.0, 1.0, 0.0, 0.0, -0.354651985),
            (-2.0, 10.0),
        ),
        FigureId::Fig10 => (
            2.0,
            PhiState::new(0.0, 0.0, -0.665192338, 1.0, 0.0),
            (-2.0, 10.0),
        ),
        FigureId::Fig11 => (
            5.0,
            PhiState::new(0.0, 0.0, -0.36012, 1.0, 0.0),
            (-4.0, 10.0),
        ),
    };
    let init = if flip_slopes {
        PhiState {
            dphi1: -init.dphi1,
            dphi2: -init.dphi2,
            ..init
        }
    } else {
        init
    };
    FigurePreset {
        id,
        epsilon,
        init,
        span: (-10.0, 10.0),
        detail_window,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMagnitudes {
    pub phi1: f64,
    pub phi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneGrowth {
    /// `|φ₂|` grows strictly toward the left end for all `y < y_star`, over
    /// at least one unit of `y`.
    pub flag: bool,
    pub y_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Position of the left end actually reached.
    pub y_neg: f64,
    pub endpoint_neg: ComponentMagnitudes,
    pub y_pos: f64,
    pub endpoint_pos: ComponentMagnitudes,
    /// Max `|φ₂|` over the unit window at the left end, `[y_neg, y_neg + 1]`.
    pub max_neg_window: f64,
    pub monotone_growth: MonotoneGrowth,
}

/// Integrate a preset from `y = 0` out to both span ends and stitch the
/// halves into one ascending trajectory.
pub fn reproduce(id: FigureId, tol: ToleranceSpec) -> Result<(Trajectory, GrowthReport)> {
    let p = preset(id, false);
    reproduce_preset(&p, tol, p.span, crate::odecore::DEFAULT_RESOLUTION)
}

/// As [`reproduce`] with an explicit preset, span and output resolution.
/// A span end equal to 0 skips that half.
pub fn reproduce_preset(
    preset: &FigurePreset,
    tol: ToleranceSpec,
    span: (f64, f64),
    resolution: f64,
) -> Result<(Trajectory, GrowthReport)> {
    let (lo, hi) = span;
    if !(lo <= 0.0 && hi >= 0.0) || lo == hi {
        return Err(Error::InvalidInput(format!(
            "span [{lo}, {hi}] must contain y = 0 and have positive length"
        )));
    }
    let params = preset.params();
    let neg = if lo < 0.0 {
        Some(integrate(params, preset.init, lo, tol, resolution)?)
    } else {
        None
    };
    let pos = if hi > 0.0 {
        Some(integrate(params, preset.init, hi, tol, resolution)?)
    } else {
        None
    };
    let traj = stitch(params, tol, neg, pos)?;
    let report = growth_report(&traj);
    Ok((traj, report))
}

fn stitch(
    params: EigenParams,
    tol: ToleranceSpec,
    neg: Option<Trajectory>,
    pos: Option<Trajectory>,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    let mut termination = Termination::CompletedSpan;
    if let Some(n) = &neg {
        samples.extend(n.samples.iter().rev().copied());
        termination = n.termination;
    }
    if let Some(p) = &pos {
        let skip = usize::from(neg.is_some());
        samples.extend(p.samples.iter().skip(skip).copied());
        termination = match (termination, p.termination) {
            (Termination::StepFailure(y), _) => Termination::StepFailure(y),
            (_, Termination::StepFailure(y)) => Termination::StepFailure(y),
            (Termination::OverflowHalt(y), _) => Termination::OverflowHalt(y),
            (_, t) => t,
        };
    }
    Trajectory::from_samples(params, samples, termination, tol)
}

/// Magnitude summary of a trajectory: endpoint values at both ends, the
/// left-end window maximum, and the extent of monotone growth of `|φ₂|`.
pub fn growth_report(traj: &Trajectory) -> GrowthReport {
    let s = traj.ascending();
    let first = s.first().expect("trajectory is non-empty");
    let last = s.last().expect("trajectory is non-empty");
    let window_hi = first.y + 1.0;
    let max_neg_window = s
        .iter()
        .take_while(|p| p.y <= window_hi)
        .fold(0.0_f64, |m, p| m.max(p.phi2.abs()));

    // walk right from the left end while |φ₂| keeps strictly decreasing
    let mut k = 0;
    while k + 1 < s.len() && s[k + 1].phi2.abs() < s[k].phi2.abs() {
        k += 1;
    }
    let y_star = s[k].y;
    GrowthReport {
        y_neg: first.y,
        endpoint_neg: ComponentMagnitudes {
            phi1: first.phi1.abs(),
            phi2: first.phi2.abs(),
        },
        y_pos: last.y,
        endpoint_pos: ComponentMagnitudes {
            phi1: last.phi1.abs(),
            phi2: last.phi2.abs(),
        },
        max_neg_window,
        monotone_growth: MonotoneGrowth {
            flag: y_star - first.y >= 1.0,
            y_star,
        },
    }
}

/// Largest `max(|φ₁|, |φ₂|)` over stored samples in `[lo, hi]`.
pub fn max_magnitude(traj: &Trajectory, lo: f64, hi: f64) -> f64 {
    traj.samples
        .iter()
        .filter(|p| p.y >= lo && p.y <= hi)
        .fold(0.0_f64, |m, p| m.max(p.phi1.abs()).max(p.phi2.abs()))
}

/// Curves reconstructed from the `y ≥ 0` half only: φ₁ extended as an odd
/// function (180° rotation about the origin) and φ₂ as an even function
/// (reflection across `y = 0`). Ascending in `y`, symmetric about 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedCurves {
    pub y: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

impl PublishedCurves {
    /// The transformed part only, `y ≤ 0`.
    pub fn left_branch(&self) -> PublishedCurves {
        let k = self.y.partition_point(|&v| v <= 0.0);
        PublishedCurves {
            y: self.y[..k].to_vec(),
            phi1: self.phi1[..k].to_vec(),
            phi2: self.phi2[..k].to_vec(),
        }
    }

    /// Apply the same reconstruction to these curves.
    pub fn transform(&self) -> Result<PublishedCurves> {
        publish_curves(&self.y, &self.phi1, &self.phi2)
    }
}

/// Discard `y < 0`, rotate φ₁ by 180° and mirror φ₂ across `y = 0`.
pub fn as_published_transform(traj: &Trajectory) -> Result<PublishedCurves> {
    let s = traj.ascending();
    let y: Vec<f64> = s.iter().map(|p| p.y).collect();
    let phi1: Vec<f64> = s.iter().map(|p| p.phi1).collect();
    let phi2: Vec<f64> = s.iter().map(|p| p.phi2).collect();
    publish_curves(&y, &phi1, &phi2)
}

/// Core of [`as_published_transform`] on raw ascending samples.
pub fn publish_curves(y: &[f64], phi1: &[f64], phi2: &[f64]) -> Result<PublishedCurves> {
    if y.len() != phi1.len() || y.len() != phi2.len() {
        return Err(Error::InvalidInput("curve lengths differ".into()));
    }
    let start = y.partition_point(|&v| v < 0.0);
    if start >= y.len() || y[start] != 0.0 || y.len() - start < 2 {
        return Err(Error::InvalidInput(
            "curves must include y = 0 and some y > 0".into(),
        ));
    }
    let right = start..y.len();
    let mut out = PublishedCurves {
        y: Vec::with_capacity(2 * right.len() - 1),
        phi1: Vec::new(),
        phi2: Vec::new(),
    };
    for i in right.clone().skip(1).rev() {
        out.y.push(-y[i]);
        out.phi1.push(-phi1[i]);
        out.phi2.push(phi2[i]);
    }
    for i in right {
        out.y.push(y[i]);
        out.phi1.push(phi1[i]);
        out.phi2.push(phi2[i]);
    }
    Ok(out)
}
