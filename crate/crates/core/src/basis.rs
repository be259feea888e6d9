//! The complex pair `Ψ₁ = (φ₁ + iφ₂)/√2`, `Ψ₂ = (φ₂ + iφ₁)/√2` built from a
//! real solution, the identities it satisfies, and the `x = 2^{−2/3}·y`
//! rescaling to the complex x-domain system.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odecore::{
    coupling, integrate_system, rhs, EigenParams, IntegrateOptions, OdeSystem, PhiState,
    Termination, ToleranceSpec, Trajectory,
};

/// Minimal complex number; only what the residuals need.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl Cplx {
    pub const ZERO: Cplx = Cplx { re: 0.0, im: 0.0 };
    pub const I: Cplx = Cplx { re: 0.0, im: 1.0 };

    pub const fn new(re: f64, im: f64) -> Cplx {
        Cplx { re, im }
    }

    pub fn conj(self) -> Cplx {
        Cplx::new(self.re, -self.im)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Cplx {
    type Output = Cplx;
    fn add(self, o: Cplx) -> Cplx {
        Cplx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cplx {
    type Output = Cplx;
    fn sub(self, o: Cplx) -> Cplx {
        Cplx::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx::new(-self.re, -self.im)
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    fn mul(self, o: Cplx) -> Cplx {
        Cplx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Mul<f64> for Cplx {
    type Output = Cplx;
    fn mul(self, s: f64) -> Cplx {
        Cplx::new(self.re * s, self.im * s)
    }
}

/// How `Ψ₂` is assembled from the real components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `Ψ₂ = (φ₂ + iφ₁)/√2`.
    Standard,
    /// `Ψ₂ = (φ₂ − iφ₁)/√2`, a deliberately wrong sign used as a control.
    FlippedSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexSample {
    pub y: f64,
    pub psi1: Cplx,
    pub dpsi1: Cplx,
    pub d2psi1: Cplx,
    pub psi2: Cplx,
    pub dpsi2: Cplx,
    pub d2psi2: Cplx,
}

impl ComplexSample {
    /// Compose from `(φ₁, φ₁′, φ₂, φ₂′)` and `(φ₁″, φ₂″)` at `y`.
    pub fn compose(y: f64, phi: [f64; 4], d2: [f64; 2], convention: Convention) -> ComplexSample {
        let s = FRAC_1_SQRT_2;
        let sign = match convention {
            Convention::Standard => 1.0,
            Convention::FlippedSign => -1.0,
        };
        let one = |a: f64, b: f64| Cplx::new(a * s, b * s);
        let two = |a: f64, b: f64| Cplx::new(a * s, sign * (b * s));
        ComplexSample {
            y,
            psi1: one(phi[0], phi[2]),
            dpsi1: one(phi[1], phi[3]),
            d2psi1: one(d2[0], d2[1]),
            psi2: two(phi[2], phi[0]),
            dpsi2: two(phi[3], phi[1]),
            d2psi2: two(d2[1], d2[0]),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.psi1.abs().max(self.psi2.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPairTrajectory {
    pub params: EigenParams,
    pub convention: Convention,
    pub samples: Vec<ComplexSample>,
}

impl ComplexPairTrajectory {
    fn max_magnitude(&self) -> f64 {
        self.samples
            .iter()
            .fold(0.0_f64, |m, s| m.max(s.magnitude()))
    }
}

pub fn compose_complex(traj: &Trajectory) -> ComplexPairTrajectory {
    compose_complex_with(traj, Convention::Standard)
}

/// Compose on the trajectory's own grid; second derivatives come from the
/// right-hand side and are composed like values.
pub fn compose_complex_with(traj: &Trajectory, convention: Convention) -> ComplexPairTrajectory {
    let samples = traj
        .samples
        .iter()
        .map(|s| {
            let d = rhs(s, &traj.params);
            ComplexSample::compose(s.y, s.vector(), [d[1], d[3]], convention)
        })
        .collect();
    ComplexPairTrajectory {
        params: traj.params,
        convention,
        samples,
    }
}

/// Max over samples of `|i·conj(Ψ₂) − Ψ₁| / max(|Ψ₁|, f64::MIN_POSITIVE)`.
pub fn conjugation_identity(cp: &ComplexPairTrajectory) -> f64 {
    cp.samples.iter().fold(0.0_f64, |m, s| {
        let d = (Cplx::I * s.psi2.conj() - s.psi1).abs();
        if d == 0.0 {
            m
        } else {
            m.max(d / s.psi1.abs().max(f64::MIN_POSITIVE))
        }
    })
}

/// Residuals of the two complex equations at one sample:
/// `−Ψ₁″ − E′Ψ₁ + (c − iy)Ψ₂` and `−Ψ₂″ − E′Ψ₂ + (c + iy)Ψ₁`.
pub fn complex_residual_at(s: &ComplexSample, params: &EigenParams) -> [Cplx; 2] {
    let e = params.scaled_energy();
    let c = params.coupling();
    let minus = Cplx::new(c, -s.y);
    let plus = Cplx::new(c, s.y);
    [
        -s.d2psi1 - s.psi1 * e + minus * s.psi2,
        -s.d2psi2 - s.psi2 * e + plus * s.psi1,
    ]
}

/// Residuals of the real equations in operator form,
/// `−φ₁″ + (y − E′)φ₁ + cφ₂` and `−φ₂″ + (−y − E′)φ₂ + cφ₁`.
pub fn real_residual_at(y: f64, phi: [f64; 4], d2: [f64; 2], params: &EigenParams) -> [f64; 2] {
    let e = params.scaled_energy();
    let c = params.coupling();
    [
        -d2[0] + (y - e) * phi[0] + c * phi[2],
        -d2[1] + (-y - e) * phi[2] + c * phi[0],
    ]
}

fn check_params(cp: &ComplexPairTrajectory, params: &EigenParams) -> Result<()> {
    if cp.params != *params {
        return Err(Error::ParamsMismatch(format!(
            "pair has epsilon {}, asked for {}",
            cp.params.epsilon(),
            params.epsilon()
        )));
    }
    Ok(())
}

fn normalized(max_res: f64, scale: f64) -> f64 {
    if max_res == 0.0 {
        0.0
    } else {
        max_res / scale
    }
}

/// Max-norm residual of both complex equations over the grid, divided by
/// the max-norm of the pair.
pub fn complex_system_residual(cp: &ComplexPairTrajectory, params: &EigenParams) -> Result<f64> {
    check_params(cp, params)?;
    let r = cp.samples.iter().fold(0.0_f64, |m, s| {
        let [a, b] = complex_residual_at(s, params);
        m.max(a.abs()).max(b.abs())
    });
    Ok(normalized(r, cp.max_magnitude()))
}

/// Residual of the conjugated second equation
/// `−(Ψ₂*)″ − E′Ψ₂* + (c − iy)Ψ₁*`, normalized like
/// [`complex_system_residual`].
pub fn conjugate_pair_residual(cp: &ComplexPairTrajectory, params: &EigenParams) -> Result<f64> {
    conjugate_pair_residual_mixed(cp, cp, params)
}

/// As [`conjugate_pair_residual`] with the `Ψ₂*` slot taken from `a` and
/// the `Ψ₁*` slot from `b`. Both pairs must share the grid.
pub fn conjugate_pair_residual_mixed(
    a: &ComplexPairTrajectory,
    b: &ComplexPairTrajectory,
    params: &EigenParams,
) -> Result<f64> {
    check_params(a, params)?;
    check_params(b, params)?;
    if a.samples.len() != b.samples.len()
        || a.samples.iter().zip(&b.samples).any(|(p, q)| p.y != q.y)
    {
        return Err(Error::InvalidInput("pairs are not on the same grid".into()));
    }
    let e = params.scaled_energy();
    let c = params.coupling();
    let mut res = 0.0_f64;
    let mut scale = 0.0_f64;
    for (p, q) in a.samples.iter().zip(&b.samples) {
        let r = -p.d2psi2.conj() - p.psi2.conj() * e + Cplx::new(c, -p.y) * q.psi1.conj();
        res = res.max(r.abs());
        scale = scale.max(p.psi2.abs()).max(q.psi1.abs());
    }
    Ok(normalized(res, scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingDirection {
    XFromY,
    YFromX,
}

/// The change of variable `x = 2^{−2/3}·y`. A state's position and its
/// first derivatives are converted together (`d/dx = 2^{2/3}·d/dy`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub factor: f64,
    pub direction: ScalingDirection,
}

impl ScalingMap {
    pub fn new(direction: ScalingDirection) -> ScalingMap {
        ScalingMap {
            factor: 1.0 / coupling(),
            direction,
        }
    }

    pub fn inverse(&self) -> ScalingMap {
        ScalingMap {
            factor: self.factor,
            direction: match self.direction {
                ScalingDirection::XFromY => ScalingDirection::YFromX,
                ScalingDirection::YFromX => ScalingDirection::XFromY,
            },
        }
    }

    /// Multiplier applied to positions.
    pub fn position_scale(&self) -> f64 {
        match self.direction {
            ScalingDirection::XFromY => self.factor,
            ScalingDirection::YFromX => 1.0 / self.factor,
        }
    }

    pub fn position(&self, p: f64) -> f64 {
        match self.direction {
            ScalingDirection::XFromY => p * self.factor,
            ScalingDirection::YFromX => p / self.factor,
        }
    }

    pub fn derivative(&self, d: f64) -> f64 {
        match self.direction {
            ScalingDirection::XFromY => d / self.factor,
            ScalingDirection::YFromX => d * self.factor,
        }
    }

    /// Convert a state; the `y` field carries whichever position variable
    /// the state is expressed in.
    pub fn apply(&self, s: &PhiState) -> PhiState {
        PhiState::new(
            self.position(s.y),
            s.phi1,
            self.derivative(s.dphi1),
            s.phi2,
            self.derivative(s.dphi2),
        )
    }
}

/// Apply `map` then its inverse.
pub fn scaling_roundtrip(state: &PhiState, map: &ScalingMap) -> PhiState {
    map.inverse().apply(&map.apply(state))
}

/// The complex system in the x variable,
/// `Ψ₁ₓₓ = 2[−εΨ₁ + 2(1 − ix)Ψ₂]`, `Ψ₂ₓₓ = 2[−εΨ₂ + 2(1 + ix)Ψ₁]`,
/// as eight real components (see [`XDomainSystem::pack`]).
#[derive(Debug, Clone, Copy)]
pub struct XDomainSystem {
    pub epsilon: f64,
}

/// `(Ψ₁, Ψ₁ₓ, Ψ₂, Ψ₂ₓ)`.
pub type XState = [Cplx; 4];

impl XDomainSystem {
    /// Real/imaginary interleaving: `[Re Ψ₁, Im Ψ₁, Re Ψ₁ₓ, Im Ψ₁ₓ, ...]`.
    pub fn pack(s: &XState) -> [f64; 8] {
        std::array::from_fn(|k| {
            let z = s[k / 2];
            if k % 2 == 0 {
                z.re
            } else {
                z.im
            }
        })
    }

    pub fn unpack(v: &[f64; 8]) -> XState {
        std::array::from_fn(|k| Cplx::new(v[2 * k], v[2 * k + 1]))
    }
}

impl OdeSystem<8> for XDomainSystem {
    fn rhs(&self, x: f64, v: &[f64; 8]) -> [f64; 8] {
        let [p1, d1, p2, d2] = Self::unpack(v);
        let dd1 = (p1 * -self.epsilon + Cplx::new(2.0, -2.0 * x) * p2) * 2.0;
        let dd2 = (p2 * -self.epsilon + Cplx::new(2.0, 2.0 * x) * p1) * 2.0;
        Self::pack(&[d1, dd1, d2, dd2])
    }

    fn magnitude(&self, v: &[f64; 8]) -> f64 {
        Cplx::new(v[0], v[1]).abs().max(Cplx::new(v[4], v[5]).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    /// Half-width of the compared y-window.
    pub window: f64,
    /// Max over compared points of `|ΔΨ₁| + |ΔΨ₂|`, divided by the
    /// max-norm of the y-domain pair on the window.
    pub max_rel_error: f64,
    pub points: usize,
}

/// Integrate the x-domain system from the y-domain initial state mapped to
/// `x = 0`, map every node back to y, and compare with the composed pair of
/// `traj` (which must cover `[−window, window]` and share ε).
pub fn x_domain_agreement(
    traj: &Trajectory,
    init: &PhiState,
    window: f64,
    tol: &ToleranceSpec,
) -> Result<ScalingCheck> {
    if !traj.covers(-window, window) {
        let (lo, hi) = traj.range();
        return Err(Error::OutOfRange { y: window, lo, hi });
    }
    let params = traj.params;
    let to_x = ScalingMap::new(ScalingDirection::XFromY);
    let d = rhs(init, &params);
    let c0 = ComplexSample::compose(init.y, init.vector(), [d[1], d[3]], Convention::Standard);
    let x0: XState = [
        c0.psi1,
        Cplx::new(to_x.derivative(c0.dpsi1.re), to_x.derivative(c0.dpsi1.im)),
        c0.psi2,
        Cplx::new(to_x.derivative(c0.dpsi2.re), to_x.derivative(c0.dpsi2.im)),
    ];
    let sys = XDomainSystem {
        epsilon: params.epsilon(),
    };
    let x_start = to_x.position(init.y);
    let x_res = to_x.position(0.01);
    let mut compared = Vec::new();
    for end in [-window, window] {
        let run = integrate_system(
            &sys,
            x_start,
            XDomainSystem::pack(&x0),
            to_x.position(end),
            tol,
            IntegrateOptions {
                out_resolution: Some(x_res),
                renorm_threshold: None,
            },
        )?;
        if let Termination::OverflowHalt(x) | Termination::StepFailure(x) = run.termination {
            return Err(Error::StepFailure { y: x / to_x.factor });
        }
        for (x, v) in run.nodes {
            let y = (x / to_x.factor).clamp(-window, window);
            let z = XDomainSystem::unpack(&v);
            compared.push((y, z[0], z[2]));
        }
    }

    let mut scale = 0.0_f64;
    let mut worst = 0.0_f64;
    for &(y, p1, p2) in &compared {
        let s = traj.sample(y)?;
        let d = rhs(&s, &params);
        let c = ComplexSample::compose(y, s.vector(), [d[1], d[3]], Convention::Standard);
        scale = scale.max(c.magnitude());
        worst = worst.max((p1 - c.psi1).abs() + (p2 - c.psi2).abs());
    }
    Ok(ScalingCheck {
        window,
        max_rel_error: normalized(worst, scale),
        points: compared.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odecore::integrate;

    fn fig9(span: f64) -> Trajectory {
        let p = EigenParams::new(2.0);
        let tol = ToleranceSpec::default();
        let s0 = PhiState::new(0.0, 1.0, 0.0, 0.0, -0.354651985);
        let neg = integrate(p, s0, -span, tol, 0.01).unwrap();
        let pos = integrate(p, s0, span, tol, 0.01).unwrap();
        let mut samples: Vec<_> = neg.samples.into_iter().rev().collect();
        samples.extend(pos.samples.into_iter().skip(1));
        Trajectory::from_samples(p, samples, Termination::CompletedSpan, tol).unwrap()
    }

    #[test]
    fn unit_phi1_composes() {
        let c = ComplexSample::compose(0.0, [1.0, 0.0, 0.0, 0.0], [0.0, 0.0], Convention::Standard);
        assert_eq!(c.psi1, Cplx::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(c.psi2, Cplx::new(0.0, FRAC_1_SQRT_2));
    }

    #[test]
    fn complex_arithmetic() {
        let a = Cplx::new(1.0, 2.0);
        let b = Cplx::new(-3.0, 0.5);
        assert_eq!(a * b, Cplx::new(-4.0, -5.5));
        assert_eq!(Cplx::I * Cplx::I, Cplx::new(-1.0, 0.0));
        assert_eq!(a.conj(), Cplx::new(1.0, -2.0));
        assert_eq!(Cplx::new(3.0, 4.0).abs(), 5.0);
    }

    #[test]
    fn zero_pair_is_zero_everywhere() {
        let s = (0..=10).map(|k| PhiState::zero(k as f64 * 0.1)).collect();
        let t = Trajectory::from_samples(
            EigenParams::new(2.0),
            s,
            Termination::CompletedSpan,
            ToleranceSpec::default(),
        )
        .unwrap();
        let cp = compose_complex(&t);
        assert!(cp.samples.iter().all(|s| s.magnitude() == 0.0));
        assert_eq!(conjugation_identity(&cp), 0.0);
        assert_eq!(complex_system_residual(&cp, &t.params).unwrap(), 0.0);
        assert_eq!(conjugate_pair_residual(&cp, &t.params).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_psi2_shows_in_identity() {
        let t = fig9(1.0);
        let mut cp = compose_complex(&t);
        let k = 37;
        cp.samples[k].psi2.re += 0.1;
        let want = 0.1 / cp.samples[k].psi1.abs();
        assert!((conjugation_identity(&cp) - want).abs() < 1e-12);
    }

    #[test]
    fn identities_and_controls_on_fig9() {
        let t = fig9(10.0);
        let cp = compose_complex(&t);
        assert!(conjugation_identity(&cp) < 1e-14);
        for (s, p) in cp.samples.iter().zip(&t.samples) {
            let lhs = s.psi1.norm_sqr() + s.psi2.norm_sqr();
            let rhs = p.phi1 * p.phi1 + p.phi2 * p.phi2;
            assert!((lhs - rhs).abs() <= 1e-15 * rhs.max(1e-300) * 4.0);
        }
        assert!(complex_system_residual(&cp, &t.params).unwrap() < 1e-8);
        assert!(conjugate_pair_residual(&cp, &t.params).unwrap() < 1e-8);
        let bad = compose_complex_with(&t, Convention::FlippedSign);
        assert!(complex_system_residual(&bad, &t.params).unwrap() > 0.1);
        assert!(conjugation_identity(&bad) > 0.1);
        assert!(complex_system_residual(&cp, &EigenParams::new(5.0)).is_err());
    }

    #[test]
    fn real_and_imaginary_parts_split() {
        let p = EigenParams::new(3.7);
        let phi = [0.3, -1.2, 2.5, 0.7];
        let d2 = [1.1, -0.4];
        let s = ComplexSample::compose(0.8, phi, d2, Convention::Standard);
        let [r1, _] = complex_residual_at(&s, &p);
        let [e1, e2] = real_residual_at(0.8, phi, d2, &p);
        assert!((r1.re * 2f64.sqrt() - e1).abs() < 1e-14);
        assert!((r1.im * 2f64.sqrt() - e2).abs() < 1e-14);
    }

    #[test]
    fn scaling_map_definition() {
        let m = ScalingMap::new(ScalingDirection::XFromY);
        assert!((m.position(2f64.powf(2.0 / 3.0)) - 1.0).abs() < 1e-15);
        let s = PhiState::new(1.7, 0.2, -3.0, 4.0, 0.5);
        let r = scaling_roundtrip(&s, &m);
        for (a, b) in r.vector().iter().zip(s.vector()) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
        assert!((r.y - s.y).abs() <= 1e-15 * s.y.abs());
    }

    #[test]
    fn pack_roundtrip() {
        let s: XState = [
            Cplx::new(1.0, 2.0),
            Cplx::new(3.0, 4.0),
            Cplx::new(5.0, 6.0),
            Cplx::new(7.0, 8.0),
        ];
        assert_eq!(
            XDomainSystem::pack(&s),
            [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
        );
        assert_eq!(XDomainSystem::unpack(&XDomainSystem::pack(&s)), s);
    }

    #[test]
    fn x_domain_matches_y_domain() {
        let t = fig9(4.0);
        let init = t.sample(0.0).unwrap();
        let chk = x_domain_agreement(&t, &init, 4.0, &ToleranceSpec::default()).unwrap();
        assert!(chk.max_rel_error < 1e-6, "{}", chk.max_rel_error);
        assert!(chk.points > 700);
    }
}
