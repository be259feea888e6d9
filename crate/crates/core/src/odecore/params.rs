use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2^{2/3}`, the off-diagonal coupling between the two components.
pub fn coupling() -> f64 {
    2f64.powf(2.0 / 3.0)
}

/// `2^{−1/3}`, the factor taking ε to the scaled energy E′.
pub fn energy_scale() -> f64 {
    2f64.powf(-1.0 / 3.0)
}

/// `2^{1/3}`, the inverse of [`energy_scale`].
pub fn inverse_energy_scale() -> f64 {
    2f64.powf(1.0 / 3.0)
}

/// Eigenvalue ε together with the derived quantities the equations use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "EpsilonOnly", into = "EpsilonOnly")]
pub struct EigenParams {
    epsilon: f64,
    scaled_energy: f64,
    coupling: f64,
}

#[derive(Serialize, Deserialize)]
struct EpsilonOnly {
    epsilon: f64,
}

impl From<EpsilonOnly> for EigenParams {
    fn from(raw: EpsilonOnly) -> Self {
        EigenParams::new(raw.epsilon)
    }
}

impl From<EigenParams> for EpsilonOnly {
    fn from(p: EigenParams) -> Self {
        EpsilonOnly { epsilon: p.epsilon }
    }
}

impl EigenParams {
    pub fn new(epsilon: f64) -> Self {
        EigenParams {
            epsilon,
            scaled_energy: epsilon * energy_scale(),
            coupling: coupling(),
        }
    }

    /// Build from the scaled energy E′ = ε·2^{−1/3}.
    pub fn from_scaled_energy(scaled: f64) -> Self {
        Self::new(scaled * inverse_energy_scale())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scaled_energy(&self) -> f64 {
        self.scaled_energy
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

/// Phase point (φ₁, φ₁′, φ₂, φ₂′) at position `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiState {
    pub y: f64,
    pub phi1: f64,
    pub dphi1: f64,
    pub phi2: f64,
    pub dphi2: f64,
}

impl PhiState {
    pub fn new(y: f64, phi1: f64, dphi1: f64, phi2: f64, dphi2: f64) -> Self {
        PhiState {
            y,
            phi1,
            dphi1,
            phi2,
            dphi2,
        }
    }

    pub fn zero(y: f64) -> Self {
        Self::new(y, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn from_vector(y: f64, v: [f64; 4]) -> Self {
        Self::new(y, v[0], v[1], v[2], v[3])
    }

    pub fn vector(&self) -> [f64; 4] {
        [self.phi1, self.dphi1, self.phi2, self.dphi2]
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.vector().iter().all(|v| v.is_finite())
    }

    /// `α·self + β·other`, keeping `self.y`.
    pub fn combine(&self, alpha: f64, other: &PhiState, beta: f64) -> PhiState {
        let a = self.vector();
        let b = other.vector();
        PhiState::from_vector(self.y, std::array::from_fn(|i| alpha * a[i] + beta * b[i]))
    }

    /// Canonical basis vector `e_k` (k in 0..4) at `y`.
    pub fn unit(y: f64, k: usize) -> PhiState {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        PhiState::from_vector(y, v)
    }
}

/// Error targets and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    /// Integration halts once a solution component exceeds this magnitude.
    pub overflow_cap: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_step: 0.1,
            overflow_cap: 1e12,
        }
    }
}

impl ToleranceSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("max_step", self.max_step),
            ("overflow_cap", self.overflow_cap),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.rel_tol >= 1.0 {
            return Err(Error::InvalidTolerance(format!(
                "rel_tol must be below 1, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// Both error targets scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> ToleranceSpec {
        ToleranceSpec {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}
