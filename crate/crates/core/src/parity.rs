//! Quantitative parity checks on computed solutions: distance from even/odd
//! symmetry, the swap-mirror symmetry of the equations, proportionality of
//! φ₁(y) and φ₂(−y), and the superposition constraint system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, DenseMatrix};
use crate::odecore::{rhs, PhiState, Trajectory};

pub const DEFAULT_WINDOW: f64 = 2.0;
pub const DEFAULT_STEP: f64 = 0.01;

/// Below this ratio of extreme singular values the two columns are treated
/// as linearly dependent.
const DEGENERACY_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Phi1,
    Phi2,
}

impl Component {
    fn pick(&self, s: &PhiState) -> f64 {
        match self {
            Component::Phi1 => s.phi1,
            Component::Phi2 => s.phi2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub component: Option<Component>,
    /// `‖φ(y) + φ(−y)‖ / ‖φ‖`; zero for an odd function.
    pub odd_defect: f64,
    /// `‖φ(y) − φ(−y)‖ / ‖φ‖`; zero for an even function.
    pub even_defect: f64,
    /// Half-width `w` of the window `[−w, w]`.
    pub window: f64,
    pub grid_step: f64,
    /// Plain L² sum norm `‖φ‖` over the grid.
    pub norm: f64,
}

impl ParityReport {
    /// `odd² + even²`, which is exactly 4 on a symmetric grid.
    pub fn pythagorean_sum(&self) -> f64 {
        self.odd_defect * self.odd_defect + self.even_defect * self.even_defect
    }
}

/// Grid `k·step` for `k = −K..=K`, `K = round(w / step)`. Exactly symmetric.
pub fn symmetric_grid(window: f64, step: f64) -> Result<Vec<f64>> {
    if !(window > 0.0 && window.is_finite()) || !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "window {window} and grid step {step} must be positive and finite"
        )));
    }
    let k = (window / step).round() as i64;
    if k < 1 {
        return Err(Error::InvalidInput(format!(
            "grid step {step} is wider than the window {window}"
        )));
    }
    Ok((-k..=k).map(|i| i as f64 * step).collect())
}

fn check_coverage(traj: &Trajectory, grid: &[f64]) -> Result<()> {
    let (lo, hi) = traj.range();
    let (a, b) = (grid[0], grid[grid.len() - 1]);
    if a < lo || b > hi {
        return Err(Error::OutOfRange {
            y: if a < lo { a } else { b },
            lo,
            hi,
        });
    }
    Ok(())
}

fn states(traj: &Trajectory, grid: &[f64]) -> Result<Vec<PhiState>> {
    check_coverage(traj, grid)?;
    grid.iter().map(|&y| traj.sample(y)).collect()
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Parity defects of one component of a trajectory over `[−w, w]`.
pub fn parity_defect(
    traj: &Trajectory,
    component: Component,
    window: f64,
    grid_step: f64,
) -> Result<ParityReport> {
    let grid = symmetric_grid(window, grid_step)?;
    let s = states(traj, &grid)?;
    let values: Vec<f64> = s.iter().map(|p| component.pick(p)).collect();
    let mut r = defects_on_grid(&values, window, grid_step)?;
    r.component = Some(component);
    Ok(r)
}

/// Parity defects of an arbitrary function, used for synthetic inputs.
pub fn parity_defect_fn(
    f: impl Fn(f64) -> f64,
    window: f64,
    grid_step: f64,
) -> Result<ParityReport> {
    let grid = symmetric_grid(window, grid_step)?;
    let values: Vec<f64> = grid.iter().map(|&y| f(y)).collect();
    defects_on_grid(&values, window, grid_step)
}

/// `values[k]` sits at the k-th node of the symmetric grid, so the mirror
/// of index `k` is `n − 1 − k`.
fn defects_on_grid(values: &[f64], window: f64, grid_step: f64) -> Result<ParityReport> {
    let n = values.len();
    let norm = l2(values.iter().copied());
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Degenerate(format!(
            "norm over [-{window}, {window}] is {norm}"
        )));
    }
    let odd = l2((0..n).map(|k| values[k] + values[n - 1 - k]));
    let even = l2((0..n).map(|k| values[k] - values[n - 1 - k]));
    Ok(ParityReport {
        component: None,
        odd_defect: odd / norm,
        even_defect: even / norm,
        window,
        grid_step,
        norm,
    })
}

/// How the mirrored candidate pair is built from the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `(u₁, u₂) = (φ₂(−y), φ₁(−y))`, the symmetry of the equations.
    Swapped,
    /// `(u₁, u₂) = (φ₁(−y), φ₂(−y))`, a negative control.
    Unswapped,
}

/// Residual of the coupled equations for the mirrored pair, `‖L[u]‖ / ‖u‖`
/// (L² over both components on the grid). Second derivatives are taken
/// from the right-hand side at the original point and carried through the
/// mirror. A zero pair has residual 0.
pub fn mirrored_pair_residual(
    traj: &Trajectory,
    window: f64,
    grid_step: f64,
    pairing: Pairing,
) -> Result<f64> {
    let grid = symmetric_grid(window, grid_step)?;
    check_coverage(traj, &grid)?;
    let p = traj.params;
    let (e, c) = (p.scaled_energy(), p.coupling());
    let mut res2 = 0.0;
    let mut norm2 = 0.0;
    for &y in &grid {
        let m = traj.sample(-y)?;
        let d = rhs(&m, &p);
        // (u₁, u₁″, u₂, u₂″)
        let (u1, u1pp, u2, u2pp) = match pairing {
            Pairing::Swapped => (m.phi2, d[3], m.phi1, d[1]),
            Pairing::Unswapped => (m.phi1, d[1], m.phi2, d[3]),
        };
        let r1 = u1pp - ((y - e) * u1 + c * u2);
        let r2 = u2pp - ((-y - e) * u2 + c * u1);
        res2 += r1 * r1 + r2 * r2;
        norm2 += u1 * u1 + u2 * u2;
    }
    if norm2 == 0.0 {
        return Ok(0.0);
    }
    Ok((res2 / norm2).sqrt())
}

/// The reflected pair `(φ₂(−y), φ₁(−y))` as a trajectory over the mirrored
/// range, with derivatives transformed by the chain rule.
pub fn swap_mirror(traj: &Trajectory) -> Result<Trajectory> {
    let samples = traj
        .ascending()
        .iter()
        .rev()
        .map(|s| PhiState::new(-s.y, s.phi2, -s.dphi2, s.phi1, -s.dphi1))
        .collect();
    Trajectory::from_samples(traj.params, samples, traj.termination, traj.tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceFit {
    /// Least-squares `k` in `φ₁(y) ≈ k·φ₂(−y)`.
    pub k: f64,
    /// `‖φ₁(y) − k·φ₂(−y)‖ / ‖φ₁‖`, in `[0, 1]`; 0 when φ₁ vanishes.
    pub residual: f64,
    pub window: f64,
    pub grid_step: f64,
}

pub fn dependence_fit(traj: &Trajectory, window: f64, grid_step: f64) -> Result<DependenceFit> {
    let grid = symmetric_grid(window, grid_step)?;
    let s = states(traj, &grid)?;
    let n = s.len();
    let phi1: Vec<f64> = s.iter().map(|p| p.phi1).collect();
    let u: Vec<f64> = (0..n).map(|k| s[n - 1 - k].phi2).collect();
    fit_on_grid(&phi1, &u, window, grid_step)
}

/// Fit `f ≈ k·g` where both are sampled on the same grid.
pub fn fit_on_grid(f: &[f64], g: &[f64], window: f64, grid_step: f64) -> Result<DependenceFit> {
    let gg: f64 = g.iter().map(|v| v * v).sum();
    if gg == 0.0 {
        return Err(Error::Degenerate(
            "φ₂(−y) vanishes on the window; k is undefined".into(),
        ));
    }
    let fg: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
    let k = fg / gg;
    let ff = l2(f.iter().copied());
    let residual = if ff == 0.0 {
        0.0
    } else {
        (l2(f.iter().zip(g).map(|(a, b)| a - k * b)) / ff).min(1.0)
    };
    Ok(DependenceFit {
        k,
        residual,
        window,
        grid_step,
    })
}

/// Which parity each component is required to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityAssignment {
    /// φ₁ odd, φ₂ even.
    OddEven,
    /// φ₁ even, φ₂ odd.
    EvenOdd,
}

impl ParityAssignment {
    pub const BOTH: [ParityAssignment; 2] = [ParityAssignment::OddEven, ParityAssignment::EvenOdd];

    /// The two constraint values at `y` (zero when the assignment holds).
    fn constraints(&self, p: &PhiState, m: &PhiState) -> [f64; 2] {
        match self {
            ParityAssignment::OddEven => [p.phi1 + m.phi1, p.phi2 - m.phi2],
            ParityAssignment::EvenOdd => [p.phi1 - m.phi1, p.phi2 + m.phi2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTest {
    pub assignment: ParityAssignment,
    /// Smallest singular value of the column-normalized constraint system.
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Columns (near-)proportional or identically zero.
    pub degenerate: bool,
    pub window: f64,
    pub grid_step: f64,
    pub rows: usize,
}

/// Can a nontrivial combination `a·A + b·B` of two solutions satisfy the
/// parity assignment on the grid? Rows are two constraints per grid point,
/// columns are `(a, b)`; each column is scaled to unit norm (zero columns
/// stay zero) before taking singular values.
pub fn superposition_parity_test(
    a: &Trajectory,
    b: &Trajectory,
    window: f64,
    grid_step: f64,
    assignment: ParityAssignment,
) -> Result<SuperpositionTest> {
    if a.params != b.params {
        return Err(Error::ParamsMismatch(format!(
            "epsilon {} vs {}",
            a.params.epsilon(),
            b.params.epsilon()
        )));
    }
    let grid = symmetric_grid(window, grid_step)?;
    let column = |t: &Trajectory| -> Result<Vec<f64>> {
        check_coverage(t, &grid)?;
        let mut col = Vec::with_capacity(2 * grid.len());
        for &y in &grid {
            col.extend(assignment.constraints(&t.sample(y)?, &t.sample(-y)?));
        }
        Ok(col)
    };
    superposition_from_columns(&column(a)?, &column(b)?, window, grid_step, assignment)
}

/// Core of [`superposition_parity_test`] on raw constraint columns.
pub fn superposition_from_columns(
    ca: &[f64],
    cb: &[f64],
    window: f64,
    grid_step: f64,
    assignment: ParityAssignment,
) -> Result<SuperpositionTest> {
    if ca.len() != cb.len() || ca.is_empty() {
        return Err(Error::InvalidInput(
            "constraint columns differ in length".into(),
        ));
    }
    let rows = ca.len();
    let mut m = DenseMatrix::zeros(rows, 2);
    let mut zero_column = false;
    for (j, col) in [ca, cb].into_iter().enumerate() {
        let n = l2(col.iter().copied());
        if n == 0.0 {
            zero_column = true;
            continue;
        }
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = v / n;
        }
    }
    let sv = singular_values(&m);
    let (sigma_max, sigma_min) = (sv[0], sv[1]);
    let degenerate = zero_column || sigma_min <= DEGENERACY_RATIO * sigma_max;
    Ok(SuperpositionTest {
        assignment,
        sigma_min,
        sigma_max,
        degenerate,
        window,
        grid_step,
        rows,
    })
}
