use super::params::{EigenParams, PhiState};

/// First-order system `dy/dt = f(t, y)` with a fixed-size real state.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];

    /// Magnitude compared against the overflow cap.
    fn magnitude(&self, y: &[f64; N]) -> f64 {
        y.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// The coupled eigenfunction system in first-order form, state
/// `(φ₁, φ₁′, φ₂, φ₂′)`.
#[derive(Debug, Clone, Copy)]
pub struct CoupledSystem {
    pub params: EigenParams,
}

impl OdeSystem<4> for CoupledSystem {
    #[inline]
    fn rhs(&self, y: f64, s: &[f64; 4]) -> [f64; 4] {
        let e = self.params.scaled_energy();
        let c = self.params.coupling();
        [
            s[1],
            (y - e) * s[0] + c * s[2],
            s[3],
            (-y - e) * s[2] + c * s[0],
        ]
    }

    fn magnitude(&self, s: &[f64; 4]) -> f64 {
        s[0].abs().max(s[2].abs())
    }
}

/// Derivative of the phase point: `(φ₁′, φ₁″, φ₂′, φ₂″)`.
pub fn rhs(state: &PhiState, params: &EigenParams) -> [f64; 4] {
    CoupledSystem { params: *params }.rhs(state.y, &state.vector())
}

/// Two decoupled oscillators `−φ″ + y²φ = E′φ`, used to validate the
/// shooting machinery against the known spectrum E′ = 1, 3, 5, ...
#[derive(Debug, Clone, Copy)]
pub struct OscillatorPair {
    pub scaled_energy: f64,
}

impl OdeSystem<4> for OscillatorPair {
    #[inline]
    fn rhs(&self, y: f64, s: &[f64; 4]) -> [f64; 4] {
        let k = y * y - self.scaled_energy;
        [s[1], k * s[0], s[3], k * s[2]]
    }

    fn magnitude(&self, s: &[f64; 4]) -> f64 {
        s[0].abs().max(s[2].abs())
    }
}
