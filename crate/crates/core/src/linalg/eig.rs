use super::matrix::{DenseMatrix, SymBandMatrix};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// All eigenvalues of a dense symmetric matrix, ascending.
///
/// Householder reduction to tridiagonal form followed by implicit QL.
pub fn eig_sym(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidInput(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let scale = (0..a.rows())
        .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
        .fold(0.0_f64, |m, (i, j)| m.max(a[(i, j)].abs()));
    if a.asymmetry() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidInput("matrix is not symmetric".into()));
    }
    let (d, e) = householder_tridiagonal(a);
    eig_tridiagonal(&d, &e)
}

/// All eigenvalues of a symmetric band matrix, ascending.
///
/// The band is first reduced to tridiagonal form with Givens rotations and
/// bulge chasing, which costs O(n²·bandwidth) instead of O(n³).
pub fn eig_sym_band(a: &SymBandMatrix) -> Result<Vec<f64>> {
    let (d, e) = band_tridiagonal(a);
    eig_tridiagonal(&d, &e)
}

fn householder_tridiagonal(a: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| m[(i, k)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        // alpha has the opposite sign of x[0], so v is never zero here
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= vn);

        // trailing block A22 <- H A22 H with H = I - 2 v vᵀ
        let off = k + 1;
        let len = n - off;
        let p: Vec<f64> = (0..len)
            .map(|i| (0..len).map(|j| m[(off + i, off + j)] * v[j]).sum())
            .collect();
        let kk: f64 = (0..len).map(|i| v[i] * p[i]).sum();
        let w: Vec<f64> = (0..len).map(|i| p[i] - kk * v[i]).collect();
        for i in 0..len {
            for j in 0..len {
                m[(off + i, off + j)] -= 2.0 * (v[i] * w[j] + w[i] * v[j]);
            }
        }
        e[k] = alpha;
        for i in k + 1..n {
            m[(i, k)] = 0.0;
            m[(k, i)] = 0.0;
        }
    }
    for i in 0..n {
        d[i] = m[(i, i)];
    }
    if n >= 2 {
        e[n - 2] = m[(n - 1, n - 2)];
    }
    (d, e)
}

fn band_tridiagonal(a: &SymBandMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.n();
    let b = a.bandwidth();
    // one extra diagonal holds the bulge while it is chased down
    let mut m = a.widened(b + 1);
    let w = b + 1;

    let rotate = |m: &mut SymBandMatrix, p: usize, c: f64, s: f64| {
        let q = p + 1;
        let lo = p.saturating_sub(w);
        let hi = (q + w).min(n - 1);
        for l in lo..=hi {
            if l == p || l == q {
                continue;
            }
            let dp = p.abs_diff(l);
            let dq = q.abs_diff(l);
            let x = if dp <= w { m.get(p, l) } else { 0.0 };
            let y = if dq <= w { m.get(q, l) } else { 0.0 };
            if x == 0.0 && y == 0.0 {
                continue;
            }
            let nx = c * x + s * y;
            let ny = -s * x + c * y;
            if dp <= w {
                m.set(p, l, nx);
            }
            if dq <= w {
                m.set(q, l, ny);
            }
        }
        let app = m.get(p, p);
        let aqq = m.get(q, q);
        let apq = m.get(p, q);
        m.set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        m.set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        m.set(p, q, (c * c - s * s) * apq + c * s * (aqq - app));
    };

    for k in (2..=b).rev() {
        for j in 0..n {
            let mut i = j + k;
            let mut col = j;
            while i < n {
                let x = m.get(i - 1, col);
                let y = m.get(i, col);
                if y != 0.0 {
                    let r = x.hypot(y);
                    rotate(&mut m, i - 1, x / r, y / r);
                    m.set(i, col, 0.0);
                }
                col = i - 1;
                i += k;
            }
        }
    }

    let d = (0..n).map(|i| m.get(i, i)).collect();
    let e = (0..n.saturating_sub(1)).map(|i| m.get(i + 1, i)).collect();
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() - 1`), ascending. Implicit QL with
/// Wilkinson-style shifts.
pub fn eig_tridiagonal(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if e.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal length {} does not match diagonal length {n}",
            e.len()
        )));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}
