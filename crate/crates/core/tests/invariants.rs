mod common;

use paircheck::basis::{self, ScalingDirection, ScalingMap};
use paircheck::odecore::{
    integrate, EigenParams, PhiState, Termination, ToleranceSpec, Trajectory,
};
use paircheck::parity::{self, Pairing};
use paircheck::repro::{self, FigureId};
use paircheck::spectrum::{self, GridSpec, Potential};
use proptest::prelude::*;

use common::rel;

fn state() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0..2.0_f64)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn end_state(eps: f64, init: [f64; 4], y_end: f64, tol: ToleranceSpec) -> PhiState {
    let t = integrate(
        EigenParams::new(eps),
        PhiState::from_vector(0.0, init),
        y_end,
        tol,
        0.01,
    )
    .unwrap();
    assert_eq!(t.termination, Termination::CompletedSpan);
    *t.last()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn linearity(
        eps in 0.0..6.0_f64,
        u in state(),
        v in state(),
        alpha in -2.0..2.0_f64,
        beta in -2.0..2.0_f64,
        y_end in prop_oneof![-6.0..-1.0_f64, 1.0..6.0_f64],
    ) {
        let tol = ToleranceSpec::default();
        let p = EigenParams::new(eps);
        let run = |v: [f64; 4]| integrate(p, PhiState::from_vector(0.0, v), y_end, tol, 0.01).unwrap();
        let init: [f64; 4] = std::array::from_fn(|i| alpha * u[i] + beta * v[i]);
        let (c, a, b) = (run(init), run(u), run(v));
        for k in 1..=8 {
            let y = y_end * k as f64 / 8.0;
            let (sa, sb) = (a.sample(y).unwrap(), b.sample(y).unwrap());
            let expect = sa.combine(alpha, &sb, beta);
            // magnitude of the terms being combined
            let scale = sa.vector().iter().zip(sb.vector()).map(|(x, z)| (alpha * x).abs() + (beta * z).abs()).fold(0.0, f64::max);
            for (x, z) in c.sample(y).unwrap().vector().iter().zip(expect.vector()) {
                prop_assert!((x - z).abs() <= 10.0 * (tol.abs_tol + tol.rel_tol * scale),
                    "y = {y}: {x} vs {z} (scale {scale})");
            }
        }
    }

    #[test]
    fn restart_from_sampled_state(eps in 0.0..6.0_f64, u in state()) {
        let tol = ToleranceSpec::default();
        let p = EigenParams::new(eps);
        let one = integrate(p, PhiState::from_vector(0.0, u), -10.0, tol, 0.01).unwrap();
        let half = integrate(p, PhiState::from_vector(0.0, u), -5.0, tol, 0.01).unwrap();
        let two = integrate(p, *half.last(), -10.0, tol, 0.01).unwrap();
        let (a, b) = (one.last().vector(), two.last().vector());
        let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y).abs() <= 1e-6 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn tightening_tolerance_changes_little(eps in 0.0..6.0_f64, u in state(), y_end in prop_oneof![-10.0..-3.0_f64, 3.0..10.0_f64]) {
        let tol = ToleranceSpec::default();
        let a = end_state(eps, u, y_end, tol).vector();
        let b = end_state(eps, u, y_end, tol.scaled(0.1)).vector();
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y).abs() < 1e-4 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn mirrored_residual_is_scale_free(c in prop_oneof![-1e6..-1e-6_f64, 1e-6..1e6_f64], fig in 0usize..3) {
        let (t, _) = repro::reproduce(FigureId::ALL[fig], ToleranceSpec::default()).unwrap();
        for pairing in [Pairing::Swapped, Pairing::Unswapped] {
            let a = parity::mirrored_pair_residual(&t, 10.0, 0.01, pairing).unwrap();
            let b = parity::mirrored_pair_residual(&t.scaled(c), 10.0, 0.01, pairing).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn defects_satisfy_pythagorean_identity(seed in state(), w in 0.5..3.0_f64) {
        let f = |y: f64| seed[0] + seed[1] * y + seed[2] * (y * y).sin() + seed[3] * y.powi(3).exp().min(1e3);
        let r = parity::parity_defect_fn(f, w, 0.01).unwrap();
        if r.norm > 0.0 {
            prop_assert!((r.pythagorean_sum() - 4.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn scaling_roundtrip_is_identity(y in -20.0..20.0_f64, v in state(), dir in any::<bool>()) {
        let d = if dir { ScalingDirection::XFromY } else { ScalingDirection::YFromX };
        let s = PhiState::from_vector(y, v);
        let r = basis::scaling_roundtrip(&s, &ScalingMap::new(d));
        for (a, b) in [(r.y, s.y), (r.phi1, s.phi1), (r.dphi1, s.dphi1), (r.phi2, s.phi2), (r.dphi2, s.dphi2)] {
            prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0));
        }
    }

    #[test]
    fn operator_is_exactly_symmetric(l in 0.5..20.0_f64, n in 16usize..200) {
        let g = GridSpec::new(l, n).unwrap();
        let a = spectrum::assemble_operator(&g);
        prop_assert_eq!(a.to_dense().asymmetry(), 0.0);
        prop_assert_eq!(spectrum::swap_mirrored(&a), a);
    }
}

#[test]
fn planted_proportionality_is_recovered() {
    let g = |s: f64| (-(s - 0.3) * (s - 0.3)).exp() * (1.0 + s);
    for k in [-2.0, 0.5, 10.0] {
        let samples = parity::symmetric_grid(2.0, 0.01)
            .unwrap()
            .into_iter()
            .map(|y| PhiState::new(y, k * g(-y), 0.0, g(y), 0.0))
            .collect();
        let t = Trajectory::from_samples(
            EigenParams::new(2.0),
            samples,
            Termination::CompletedSpan,
            ToleranceSpec::default(),
        )
        .unwrap();
        let fit = parity::dependence_fit(&t, 2.0, 0.01).unwrap();
        assert!(rel(fit.k, k) <= 1e-8, "k = {} for planted {k}", fit.k);
        assert!(fit.residual <= 1e-8);
    }
}

#[test]
fn presets_roundtrip_exactly() {
    for id in FigureId::ALL {
        for flip in [false, true] {
            let p = repro::preset(id, flip);
            let back: repro::FigurePreset =
                serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
            assert_eq!(back, p);
        }
    }
}

#[test]
fn divergence_grows_toward_the_left() {
    for id in [FigureId::Fig9, FigureId::Fig10] {
        let (t, _) = repro::reproduce(id, ToleranceSpec::default()).unwrap();
        let m: Vec<f64> = [-6.0, -8.0, -10.0]
            .iter()
            .map(|&y| t.sample(y).unwrap().phi2.abs())
            .collect();
        assert!(m[0] < m[1] && m[1] < m[2], "{id}: {m:?}");
    }
}

#[test]
fn zero_data_stays_zero() {
    let t = integrate(
        EigenParams::new(3.7),
        PhiState::zero(0.0),
        -10.0,
        ToleranceSpec::default(),
        0.01,
    )
    .unwrap();
    assert!(t.samples.iter().all(|s| s.vector() == [0.0; 4]));
}

#[test]
fn swap_mirrored_spectrum_is_identical() {
    let g = GridSpec::new(6.0, 300).unwrap();
    let a = paircheck::linalg::eig_sym_band(&spectrum::assemble_operator(&g)).unwrap();
    let b =
        paircheck::linalg::eig_sym_band(&spectrum::swap_mirrored(&spectrum::assemble_operator(&g)))
            .unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
    }
    let free = spectrum::compute_spectrum(&g, Potential::Free).unwrap();
    assert!(free.eigenvalues_scaled.windows(2).all(|w| w[0] <= w[1]));
}
