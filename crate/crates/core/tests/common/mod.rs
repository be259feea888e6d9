#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// Fixed-step classical RK4 for the coupled system, written without any
/// crate code. State order `(φ₁, φ₁′, φ₂, φ₂′)`.
pub fn rk4(epsilon: f64, init: [f64; 4], y_end: f64, steps: usize) -> [f64; 4] {
    let e = epsilon * 2f64.powf(-1.0 / 3.0);
    let c = 2f64.powf(2.0 / 3.0);
    let f = |y: f64, s: [f64; 4]| {
        [
            s[1],
            (y - e) * s[0] + c * s[2],
            s[3],
            (-y - e) * s[2] + c * s[0],
        ]
    };
    let h = y_end / steps as f64;
    let add = |s: [f64; 4], k: [f64; 4], w: f64| std::array::from_fn(|i| s[i] + w * k[i]);
    let mut s = init;
    for i in 0..steps {
        let y = i as f64 * h;
        let k1 = f(y, s);
        let k2 = f(y + h / 2.0, add(s, k1, h / 2.0));
        let k3 = f(y + h / 2.0, add(s, k2, h / 2.0));
        let k4 = f(y + h, add(s, k3, h));
        s = std::array::from_fn(|j| s[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
    }
    s
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn paircheck(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paircheck"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("PAIRCHECK_THREADS")
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("valid JSON")
}
