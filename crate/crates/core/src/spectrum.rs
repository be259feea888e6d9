//! Two independent probes for bound states of the coupled system:
//!
//! * a finite-difference spectrum on `[−L, L]` with Dirichlet ends, compared
//!   across several `L` to separate converged levels from truncation
//!   artifacts;
//! * a two-sided shooting scan: the 4×4 map from initial data at `y = 0` to
//!   component values at `±Y` becomes singular at a decaying solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym_band, singular_values, DenseMatrix, SymBandMatrix};
use crate::odecore::{
    coupling, integrate_system, inverse_energy_scale, CoupledSystem, EigenParams, IntegrateOptions,
    OdeSystem, OscillatorPair, Termination, ToleranceSpec,
};

/// Largest grid spacing used when `N` is chosen automatically.
pub const DEFAULT_MAX_SPACING: f64 = 0.01;
pub const DEFAULT_RENORM_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(l: f64, n: usize) -> Result<GridSpec> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half-width L must be positive, got {l}"
            )));
        }
        if n < 16 {
            return Err(Error::InvalidInput(format!(
                "need at least 16 interior points, got {n}"
            )));
        }
        Ok(Self::unchecked(l, n))
    }

    /// Smallest `N` with `h ≤ max_spacing`.
    pub fn with_max_spacing(l: f64, max_spacing: f64) -> Result<GridSpec> {
        if !(max_spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive, got {max_spacing}"
            )));
        }
        let n = ((2.0 * l / max_spacing - 1e-9).ceil() as usize).saturating_sub(1);
        Self::new(l, n.max(16))
    }

    fn unchecked(l: f64, n: usize) -> GridSpec {
        GridSpec {
            l,
            n,
            h: 2.0 * l / (n + 1) as f64,
        }
    }

    /// Interior node `j` (0-based), `y_j = −L + (j + 1)h`. Computed as an
    /// integer multiple of `h/2` so that `y_{N−1−j} == −y_j` exactly.
    pub fn node(&self, j: usize) -> f64 {
        (2 * (j as i64 + 1) - (self.n as i64 + 1)) as f64 * (self.h / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    /// The coupled block `[[y, 2^{2/3}], [2^{2/3}, −y]]`.
    Coupled,
    /// No potential: two copies of the Dirichlet Laplacian (test hook).
    Free,
}

pub fn assemble_operator(grid: &GridSpec) -> SymBandMatrix {
    assemble_operator_with(grid, Potential::Coupled)
}

/// `−d²/dy² + V(y)` by central differences, unknowns interleaved as
/// `(φ₁(y₀), φ₂(y₀), φ₁(y₁), ...)`; bandwidth 2.
pub fn assemble_operator_with(grid: &GridSpec, potential: Potential) -> SymBandMatrix {
    let n = grid.n;
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut a = SymBandMatrix::zeros(2 * n, 2);
    let c = coupling();
    for j in 0..n {
        let (v1, v2, cc) = match potential {
            Potential::Coupled => {
                let y = grid.node(j);
                (y, -y, c)
            }
            Potential::Free => (0.0, 0.0, 0.0),
        };
        a.set(2 * j, 2 * j, 2.0 * inv_h2 + v1);
        a.set(2 * j + 1, 2 * j + 1, 2.0 * inv_h2 + v2);
        a.set(2 * j, 2 * j + 1, cc);
        if j + 1 < n {
            a.set(2 * j, 2 * j + 2, -inv_h2);
            a.set(2 * j + 1, 2 * j + 3, -inv_h2);
        }
    }
    a
}

/// The operator conjugated by the swap-mirror permutation
/// `(φ₁, φ₂)(y_j) ↦ (φ₂, φ₁)(y_{N−1−j})`.
pub fn swap_mirrored(a: &SymBandMatrix) -> SymBandMatrix {
    let m = a.n();
    let perm = |i: usize| m - 1 - i;
    let b = a.bandwidth();
    let mut out = SymBandMatrix::zeros(m, b);
    for i in 0..m {
        for j in i.saturating_sub(b)..=i {
            out.set(perm(i), perm(j), a.get(i, j));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub grid: GridSpec,
    pub potential: Potential,
    /// Ascending eigenvalues in the scaled variable E′.
    pub eigenvalues_scaled: Vec<f64>,
    /// The same values as ε = 2^{1/3}·E′.
    pub eigenvalues_eps: Vec<f64>,
    pub lowest: f64,
}

impl SpectrumResult {
    /// Eigenvalue (in ε) closest to `target`.
    pub fn nearest_eps(&self, target: f64) -> f64 {
        nearest(&self.eigenvalues_eps, target)
    }
}

fn nearest(sorted: &[f64], target: f64) -> f64 {
    let k = sorted.partition_point(|&v| v < target);
    let mut best = f64::NAN;
    for i in [k.wrapping_sub(1), k] {
        if let Some(&v) = sorted.get(i) {
            if best.is_nan() || (v - target).abs() < (best - target).abs() {
                best = v;
            }
        }
    }
    best
}

pub fn compute_spectrum(grid: &GridSpec, potential: Potential) -> Result<SpectrumResult> {
    let scaled = eig_sym_band(&assemble_operator_with(grid, potential))?;
    let k = inverse_energy_scale();
    let eps: Vec<f64> = scaled.iter().map(|v| k * v).collect();
    Ok(SpectrumResult {
        grid: *grid,
        potential,
        lowest: scaled[0],
        eigenvalues_scaled: scaled,
        eigenvalues_eps: eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub l_from: f64,
    pub l_to: f64,
    pub eps_from: f64,
    /// Nearest eigenvalue on the larger domain.
    pub eps_to: f64,
    pub shift: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub results: Vec<SpectrumResult>,
    /// Shift threshold (in ε) above which a level counts as not converged.
    pub threshold: f64,
    /// Levels compared, restricted to `eps_window`.
    pub eps_window: (f64, f64),
    pub table: Vec<ConvergenceRow>,
}

impl SpectrumScan {
    /// Shift of the level nearest `target` between grids `i` and `j`.
    pub fn nearest_shift(&self, i: usize, j: usize, target: f64) -> f64 {
        (self.results[i].nearest_eps(target) - self.results[j].nearest_eps(target)).abs()
    }

    pub fn lowest_strictly_decreasing(&self) -> bool {
        self.results.windows(2).all(|w| w[1].lowest < w[0].lowest)
    }
}

/// Spectra on each grid (in parallel, results in input order) and the
/// table pairing every level inside `eps_window` with its nearest
/// counterpart on the next grid.
pub fn spectrum_scan(
    grids: &[GridSpec],
    potential: Potential,
    threshold: f64,
    eps_window: (f64, f64),
) -> Result<SpectrumScan> {
    if grids.len() < 2 {
        return Err(Error::InvalidInput("need at least two grids".into()));
    }
    if grids.windows(2).any(|w| w[1].l <= w[0].l) {
        return Err(Error::InvalidInput("grid half-widths must increase".into()));
    }
    let results = grids
        .par_iter()
        .map(|g| compute_spectrum(g, potential))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Vec::new();
    for w in results.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for &e in &a.eigenvalues_eps {
            if e < eps_window.0 || e > eps_window.1 {
                continue;
            }
            let to = b.nearest_eps(e);
            let shift = (to - e).abs();
            table.push(ConvergenceRow {
                l_from: a.grid.l,
                l_to: b.grid.l,
                eps_from: e,
                eps_to: to,
                shift,
                converged: shift <= threshold,
            });
        }
    }
    Ok(SpectrumScan {
        results,
        threshold,
        eps_window,
        table,
    })
}

/// Which equations the shooting machinery runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShootingSystem {
    Coupled,
    /// Two decoupled oscillators with known levels E′ = 1, 3, 5, ...
    Oscillator,
}

/// Map from initial data at 0 to `(φ₁(Y), φ₂(Y), φ₁(−Y), φ₂(−Y))`.
/// Column `j` is the image of the canonical vector `e_j`; its true value is
/// `matrix[·][j] · exp(renorm_log[j])`, with each stored column scaled to
/// unit max-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMap {
    pub epsilon: f64,
    pub y_half: f64,
    pub matrix: [[f64; 4]; 4],
    /// Natural log of each column's true max-norm.
    pub renorm_log: [f64; 4],
}

impl BoundaryMap {
    /// Columns rescaled to a single common scale (the largest column has
    /// unit max-norm); proportional to the true map.
    pub fn common_scale(&self) -> DenseMatrix {
        let top = self
            .renorm_log
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut m = DenseMatrix::zeros(4, 4);
        for j in 0..4 {
            let s = (self.renorm_log[j] - top).exp();
            for i in 0..4 {
                m[(i, j)] = self.matrix[i][j] * s;
            }
        }
        m
    }

    /// `σ_min / σ_max` of the map, in `[0, 1]`; zero iff some nontrivial
    /// initial data vanishes at both ends.
    pub fn sigma_ratio(&self) -> f64 {
        let sv = singular_values(&self.common_scale());
        if sv[0] == 0.0 {
            0.0
        } else {
            sv[3] / sv[0]
        }
    }

    /// Push initial data through the true map. Also returns, per row, the
    /// magnitude `Σ_j |M_ij·v_j|` against which cancellation is measured.
    pub fn apply(&self, v: [f64; 4]) -> ([f64; 4], [f64; 4]) {
        let mut out = [0.0; 4];
        let mut mag = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                let t = self.matrix[i][j] * self.renorm_log[j].exp() * v[j];
                out[i] += t;
                mag[i] += t.abs();
            }
        }
        (out, mag)
    }
}

fn shoot<S: OdeSystem<4>>(
    sys: &S,
    y_half: f64,
    tol: &ToleranceSpec,
    renorm_threshold: f64,
    epsilon: f64,
) -> Result<BoundaryMap> {
    if !(y_half > 0.0 && y_half.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "half-width Y must be positive, got {y_half}"
        )));
    }
    let opts = IntegrateOptions {
        out_resolution: None,
        renorm_threshold: Some(renorm_threshold),
    };
    let mut matrix = [[0.0; 4]; 4];
    let mut renorm_log = [0.0; 4];
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let mut ends = Vec::with_capacity(2);
        for end in [y_half, -y_half] {
            let run = integrate_system(sys, 0.0, e, end, tol, opts)?;
            match run.termination {
                Termination::CompletedSpan => {}
                Termination::OverflowHalt(y) => return Err(Error::Overflow { y }),
                Termination::StepFailure(y) => return Err(Error::StepFailure { y }),
            }
            let (_, s) = run.last();
            ends.push(([s[0], s[2]], run.log_scale));
        }
        // bring both halves to a common log scale, then to unit max-norm
        let top = ends[0].1.max(ends[1].1);
        let col: Vec<f64> = ends
            .iter()
            .flat_map(|(v, l)| {
                let s = (l - top).exp();
                [v[0] * s, v[1] * s]
            })
            .collect();
        let m = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let (div, log) = if m > 0.0 {
            (m, top + m.ln())
        } else {
            (1.0, top)
        };
        for i in 0..4 {
            matrix[i][j] = col[i] / div;
        }
        renorm_log[j] = log;
    }
    Ok(BoundaryMap {
        epsilon,
        y_half,
        matrix,
        renorm_log,
    })
}

/// Boundary map of the coupled system at `eps`, renormalizing fundamental
/// solutions whenever their max-norm exceeds `renorm_threshold`.
pub fn fundamental_boundary_map(
    eps: f64,
    y_half: f64,
    tol: &ToleranceSpec,
    system: ShootingSystem,
    renorm_threshold: f64,
) -> Result<BoundaryMap> {
    let params = EigenParams::new(eps);
    match system {
        ShootingSystem::Coupled => shoot(
            &CoupledSystem { params },
            y_half,
            tol,
            renorm_threshold,
            eps,
        ),
        ShootingSystem::Oscillator => shoot(
            &OscillatorPair {
                scaled_energy: params.scaled_energy(),
            },
            y_half,
            tol,
            renorm_threshold,
            eps,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScan {
    pub system: ShootingSystem,
    #[serde(rename = "Y")]
    pub y_half: f64,
    pub epsilons: Vec<f64>,
    /// Per-ε `σ_min/σ_max` of the boundary map.
    pub sigma_min: Vec<f64>,
    pub renorm_log: Vec<[f64; 4]>,
}

impl BoundaryScan {
    /// Interior local minima of `sigma_min`, as ε positions.
    pub fn dips(&self) -> Vec<f64> {
        let v = &self.sigma_min;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
            .map(|i| self.epsilons[i])
            .collect()
    }
}

/// `eps_min, eps_min + step, ...` up to `eps_max` (inclusive within
/// rounding); a single point when the ends coincide.
pub fn eps_grid(eps_min: f64, eps_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(eps_min.is_finite() && eps_max.is_finite()) || eps_max < eps_min {
        return Err(Error::InvalidInput(format!(
            "bad ε range [{eps_min}, {eps_max}]"
        )));
    }
    if eps_max == eps_min {
        return Ok(vec![eps_min]);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ε step must be positive, got {step}"
        )));
    }
    let n = ((eps_max - eps_min) / step + 1e-9).floor() as usize;
    // snap to 1e-12 so decimal steps print cleanly
    Ok((0..=n)
        .map(|k| ((eps_min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Sweep ε and record the boundary-map singularity measure at half-width
/// `y_half`. Points run in parallel; output is in ε order.
pub fn boundedness_scan(
    eps_range: (f64, f64),
    step: f64,
    y_half: f64,
    tol: &ToleranceSpec,
    system: ShootingSystem,
    renorm_threshold: f64,
) -> Result<BoundaryScan> {
    let epsilons = eps_grid(eps_range.0, eps_range.1, step)?;
    let maps = epsilons
        .par_iter()
        .map(|&e| fundamental_boundary_map(e, y_half, tol, system, renorm_threshold))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryScan {
        system,
        y_half,
        sigma_min: maps.iter().map(BoundaryMap::sigma_ratio).collect(),
        renorm_log: maps.iter().map(|m| m.renorm_log).collect(),
        epsilons,
    })
}

/// A dip seen in every scan: its position in each scan, in scan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistentDip {
    pub positions: Vec<f64>,
}

impl PersistentDip {
    pub fn center(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.positions.len() as f64
    }
}

/// Dips of the first scan that have a dip within `tol` (in ε) in every
/// other scan, with every matched pair also within `tol` of each other.
/// Reference dips that match the same partners are merged.
pub fn persistent_dips(scans: &[BoundaryScan], tol: f64) -> Vec<PersistentDip> {
    let Some((first, rest)) = scans.split_first() else {
        return Vec::new();
    };
    let others: Vec<Vec<f64>> = rest.iter().map(BoundaryScan::dips).collect();
    let mut out: Vec<PersistentDip> = Vec::new();
    for d in first.dips() {
        let mut positions = vec![d];
        for o in &others {
            match o
                .iter()
                .copied()
                .min_by(|a, b| (a - d).abs().total_cmp(&(b - d).abs()))
            {
                Some(m) if (m - d).abs() <= tol => positions.push(m),
                _ => break,
            }
        }
        if positions.len() != scans.len() {
            continue;
        }
        let spread = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - positions.iter().copied().fold(f64::INFINITY, f64::min);
        if spread > tol {
            continue;
        }
        if let Some(prev) = out
            .iter_mut()
            .find(|p| !rest.is_empty() && p.positions[1..] == positions[1..])
        {
            prev.positions[0] = (prev.positions[0] + d) / 2.0;
        } else {
            out.push(PersistentDip { positions });
        }
    }
    out
}
