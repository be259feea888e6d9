//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use paircheck::basis::{self, Convention};
use paircheck::odecore::{bilinear_form, inverse_energy_scale, ToleranceSpec};
use paircheck::parity::{self, Component, Pairing, ParityAssignment};
use paircheck::repro::{self, FigureId};
use paircheck::spectrum::{self, GridSpec, Potential, ShootingSystem};

use common::{paircheck, read_json};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within_factor(v: f64, target: f64, factor: f64) -> bool {
    v >= target / factor && v <= target * factor
}

fn trajectories() -> Vec<(String, paircheck::Trajectory)> {
    let mut out = Vec::new();
    for id in FigureId::ALL {
        for flip in [false, true] {
            let p = repro::preset(id, flip);
            let (t, _) =
                repro::reproduce_preset(&p, ToleranceSpec::default(), p.span, 0.01).unwrap();
            out.push((format!("{id}{}", if flip { "/flipped" } else { "" }), t));
        }
    }
    out
}

fn c01_fig9_divergence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = paircheck(
        dir.path(),
        &["--timestamp", "0", "reproduce", "--figure", "9"],
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&dir.path().join("fig9_report.json"));
    let v = r["endpoint_neg"]["phi2"].as_f64().unwrap();
    outcome(
        within_factor(v, 2e7, 3.0) && elapsed < 1.0,
        format!("|phi2(-10)| = {v:.4e} (target 2e7, factor 3); runtime {elapsed:.3} s (< 1 s)"),
    )
}

fn c02_fig10_divergence() -> Outcome {
    let (_, g) = repro::reproduce(FigureId::Fig10, ToleranceSpec::default()).unwrap();
    let v = g.endpoint_neg.phi2;
    outcome(
        within_factor(v, 1.5e7, 3.0),
        format!("|phi2(-10)| = {v:.4e} (target 1.5e7, factor 3)"),
    )
}

fn c03_fig11_divergence() -> Outcome {
    let (_, g) = repro::reproduce(FigureId::Fig11, ToleranceSpec::default()).unwrap();
    let v = g.max_neg_window;
    outcome(
        v > 6000.0,
        format!("max |phi2| on [-10, -9] = {v:.1} (> 6000)"),
    )
}

fn c04_bilinear_conservation() -> Outcome {
    let tol = ToleranceSpec::default();
    let (a, _) = repro::reproduce(FigureId::Fig9, tol).unwrap();
    let (b, _) = repro::reproduce(FigureId::Fig10, tol).unwrap();
    let b0 = bilinear_form(&a, &b, 0.0).unwrap();
    let (mut worst, mut at) = (0.0_f64, 0.0);
    // first y (scanning outward from 0 to the left) where the bound breaks
    let mut holds_down_to = -10.0;
    for k in (0..=2000).rev() {
        let y = -10.0 + k as f64 * 0.01;
        let d = (bilinear_form(&a, &b, y).unwrap() - b0).abs() / b0.abs().max(1.0);
        if d > worst {
            worst = d;
            at = y;
        }
        if d >= 1e-8 && y < 0.0 && holds_down_to == -10.0 {
            holds_down_to = y + 0.01;
        }
    }
    outcome(
        worst < 1e-8,
        format!(
            "B(0) = {b0:.6}; max relative drift {worst:.3e} at y = {at:.2} (< 1e-8); bound holds for y >= {holds_down_to:.2}"
        ),
    )
}

fn c05_swap_mirror_symmetry() -> Outcome {
    let (mut worst, mut control) = (0.0_f64, f64::INFINITY);
    for (_, t) in trajectories() {
        worst =
            worst.max(parity::mirrored_pair_residual(&t, 10.0, 0.01, Pairing::Swapped).unwrap());
        control = control
            .min(parity::mirrored_pair_residual(&t, 10.0, 0.01, Pairing::Unswapped).unwrap());
    }
    outcome(
        worst < 1e-6 && control > 0.1,
        format!(
            "max swapped residual {worst:.3e} (< 1e-6); min no-swap control {control:.3e} (> 0.1)"
        ),
    )
}

fn c06_basis_identities() -> Outcome {
    let (mut conj, mut sys, mut control) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for (_, t) in trajectories() {
        let cp = basis::compose_complex(&t);
        conj = conj.max(basis::conjugation_identity(&cp));
        sys = sys.max(basis::complex_system_residual(&cp, &t.params).unwrap());
        let bad = basis::compose_complex_with(&t, Convention::FlippedSign);
        control = control.min(basis::complex_system_residual(&bad, &t.params).unwrap());
    }
    outcome(
        conj < 1e-14 && sys < 1e-8 && control > 0.1,
        format!(
            "conjugation identity {conj:.3e} (< 1e-14); complex residual {sys:.3e} (< 1e-8); flipped-sign control {control:.3e} (> 0.1)"
        ),
    )
}

const PARITY_FLOOR: f64 = 0.5;
const SUPERPOSITION_FLOOR: f64 = 0.3;

fn c07_parity_asymmetry() -> Outcome {
    let (t, _) = repro::reproduce(FigureId::Fig9, ToleranceSpec::default()).unwrap();
    let r = parity::parity_defect(&t, Component::Phi2, 2.0, 0.01).unwrap();
    let even = parity::parity_defect_fn(|y| y * y, 2.0, 0.01).unwrap();
    let odd = parity::parity_defect_fn(|y| y * y * y, 2.0, 0.01).unwrap();
    let synthetic = even.even_defect.max(odd.odd_defect);
    outcome(
        r.odd_defect > PARITY_FLOOR && r.even_defect > PARITY_FLOOR && synthetic <= 1e-10,
        format!(
            "fig9 phi2 on [-2, 2]: odd {:.4}, even {:.4} (both > {PARITY_FLOOR}); exact even/odd inputs {synthetic:.1e} (<= 1e-10)",
            r.odd_defect, r.even_defect
        ),
    )
}

fn c08_superposition() -> Outcome {
    let tol = ToleranceSpec::default();
    let (a, _) = repro::reproduce(FigureId::Fig9, tol).unwrap();
    let (b, _) = repro::reproduce(FigureId::Fig10, tol).unwrap();
    let sigmas: Vec<f64> = ParityAssignment::BOTH
        .iter()
        .map(|&p| {
            parity::superposition_parity_test(&a, &b, 2.0, 0.01, p)
                .unwrap()
                .sigma_min
        })
        .collect();
    // odd φ₁ and even φ₂ satisfy the odd/even constraints identically
    let grid = parity::symmetric_grid(2.0, 0.01).unwrap();
    let column = |f1: &dyn Fn(f64) -> f64, f2: &dyn Fn(f64) -> f64| -> Vec<f64> {
        grid.iter()
            .flat_map(|&y| [f1(y) + f1(-y), f2(y) - f2(-y)])
            .collect()
    };
    let ca = column(&|y| y * y * y - y, &|y| y * y + 1.0);
    let cb = column(&|y| y.sin(), &|y| y.cos());
    let vac = parity::superposition_from_columns(&ca, &cb, 2.0, 0.01, ParityAssignment::OddEven)
        .unwrap()
        .sigma_min;
    let min = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        min > SUPERPOSITION_FLOOR && vac == 0.0,
        format!(
            "fig9+fig10 sigma_min odd/even {:.4}, even/odd {:.4} (> {SUPERPOSITION_FLOOR}); vacuous case {vac}",
            sigmas[0], sigmas[1]
        ),
    )
}

fn free_errors(l: f64, n: usize) -> Vec<f64> {
    let r = spectrum::compute_spectrum(&GridSpec::new(l, n).unwrap(), Potential::Free).unwrap();
    r.eigenvalues_scaled
        .iter()
        .step_by(2)
        .take(5)
        .enumerate()
        .map(|(i, &v)| {
            let exact = ((i + 1) as f64 * std::f64::consts::PI / (2.0 * l)).powi(2);
            (v - exact).abs() / exact
        })
        .collect()
}

fn c09_free_operator() -> Outcome {
    let l = 10.0;
    let worst = free_errors(l, 2000).into_iter().fold(0.0_f64, f64::max);
    // N + 1 doubles, so h halves exactly
    let coarse = free_errors(l, 999);
    let fine = free_errors(l, 1999);
    let ratios: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| c / f).collect();
    let ratio_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.15 * 4.0);
    outcome(
        worst < 1e-3 && ratio_ok,
        format!(
            "max relative error n=1..5 at N=2000: {worst:.3e} (< 1e-3); h-halving ratios {:?} (4 ± 15%)",
            ratios.iter().map(|r| (r * 1e3).round() / 1e3).collect::<Vec<_>>()
        ),
    )
}

/// Drop of the lowest level from L = 10 to L = 15 required by the oracle run.
const LOWEST_DROP: f64 = 4.5;

fn c10_no_converged_bound_state() -> Outcome {
    let grids: Vec<GridSpec> = [8.0, 10.0, 12.0, 15.0]
        .iter()
        .map(|&l| GridSpec::with_max_spacing(l, spectrum::DEFAULT_MAX_SPACING).unwrap())
        .collect();
    let s = spectrum::spectrum_scan(&grids, Potential::Coupled, 0.1, (1.5, 5.5)).unwrap();
    let near2 = s.nearest_shift(1, 2, 2.0);
    let near5 = s.nearest_shift(1, 2, 5.0);
    let decreasing = s.lowest_strictly_decreasing();
    let drop = s.results[1].lowest - s.results[3].lowest;
    let lowest: Vec<String> = s
        .results
        .iter()
        .map(|r| format!("{:.3}", r.lowest))
        .collect();
    outcome(
        near2 > 0.1 && near5 > 0.1 && decreasing && drop > LOWEST_DROP,
        format!(
            "L 10->12 shift near eps=2: {near2:.4}, near eps=5: {near5:.4} (both > 0.1); lowest E' over L=8,10,12,15: [{}] strictly decreasing = {decreasing}, drop 10->15 {drop:.3} (> {LOWEST_DROP})",
            lowest.join(", ")
        ),
    )
}

fn c11_oscillator_self_test() -> Outcome {
    let scan = spectrum::boundedness_scan(
        (0.5, 7.0),
        0.01,
        8.0,
        &ToleranceSpec::default(),
        ShootingSystem::Oscillator,
        spectrum::DEFAULT_RENORM_THRESHOLD,
    )
    .unwrap();
    let dips = scan.dips();
    let k = inverse_energy_scale();
    let misses: Vec<f64> = [1.0, 3.0, 5.0]
        .iter()
        .map(|e| {
            let target = e * k;
            dips.iter()
                .map(|d| (d - target).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    outcome(
        misses.iter().all(|m| *m <= 0.01 + 1e-9),
        format!(
            "dips at eps = {dips:?}; distance to E' = 1, 3, 5: [{}] (<= 0.01)",
            misses
                .iter()
                .map(|m| format!("{m:.1e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn c12_determinism() -> Outcome {
    let runs: [(&[&str], &str); 7] = [
        (
            &["reproduce", "--figure", "9", "--as-published"],
            "fig9_manifest.json",
        ),
        (&["parity", "--figure", "10"], "fig10_parity_manifest.json"),
        (&["parity", "--self-test"], "parity_self_test_manifest.json"),
        (
            &["basis", "--figure", "11", "--negative-control"],
            "fig11_basis_manifest.json",
        ),
        (&["spectrum", "--L", "4,6"], "spectrum_manifest.json"),
        (
            &["spectrum", "--free-particle", "--L", "2,3"],
            "spectrum_free_manifest.json",
        ),
        (
            &["scan", "--eps", "2:3:0.05", "--Y", "6,8"],
            "scan_manifest.json",
        ),
    ];
    let mut compared = 0;
    for (args, manifest) in runs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = paircheck(a.path(), args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let m = a.path().join(manifest);
        let out = paircheck(b.path(), &["rerun", m.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "rerun {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let list = |d: &std::path::Path| {
            let mut v: Vec<_> = std::fs::read_dir(d)
                .unwrap()
                .map(|e| e.unwrap().file_name())
                .collect();
            v.sort();
            v
        };
        let (fa, fb) = (list(a.path()), list(b.path()));
        if fa != fb {
            return outcome(
                false,
                format!("{args:?}: file sets differ: {fa:?} vs {fb:?}"),
            );
        }
        for f in &fa {
            let (x, y) = (
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap(),
            );
            if x != y {
                return outcome(
                    false,
                    format!("{args:?}: {} differs after rerun", f.to_string_lossy()),
                );
            }
            compared += 1;
        }
    }
    outcome(
        true,
        format!("{compared} files across 7 runs byte-identical after rerun"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("fig9 divergence and runtime", c01_fig9_divergence),
        ("fig10 divergence", c02_fig10_divergence),
        ("fig11 divergence", c03_fig11_divergence),
        ("bilinear-form conservation", c04_bilinear_conservation),
        ("swap-mirror equation symmetry", c05_swap_mirror_symmetry),
        ("complex basis identities", c06_basis_identities),
        ("parity asymmetry", c07_parity_asymmetry),
        ("superposition test", c08_superposition),
        ("finite-difference operator validity", c09_free_operator),
        (
            "no converged bound state near eps = 2, 5",
            c10_no_converged_bound_state,
        ),
        ("shooting self-test", c11_oscillator_self_test),
        ("determinism", c12_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        let o = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {n:>2} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!(
            "acceptance: {} of 12 criteria fail: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}
