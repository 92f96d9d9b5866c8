//! Independent reference computations used only by the tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

type C = Complex64;

/// Divides `q` (ascending) by `(s - p)`, returning quotient and remainder.
fn synthetic_div(q: &[C], p: C) -> (Vec<C>, C) {
    let n = q.len();
    if n == 1 {
        return (vec![C::new(0.0, 0.0)], q[0]);
    }
    let mut out = vec![C::new(0.0, 0.0); n - 1];
    let mut acc = q[n - 1];
    for k in (0..n - 1).rev() {
        out[k] = acc;
        acc = q[k] + acc * p;
    }
    (out, acc)
}

/// Taylor coefficients of `q(p + t)` in `t`, first `terms` of them.
fn taylor_at(q: &[C], p: C, terms: usize) -> Vec<C> {
    let mut cur = q.to_vec();
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        if cur.is_empty() {
            out.push(C::new(0.0, 0.0));
            continue;
        }
        let (quot, rem) = synthetic_div(&cur, p);
        out.push(rem);
        cur = if cur.len() == 1 { vec![] } else { quot };
    }
    out
}

/// Laurent coefficients `a_{-m}, ..., a_{terms-m-1}` of `num/den` at the
/// pole `p` of order `m`: deflate `(s - p)^m` out of `den`, then divide the
/// Taylor series of `num` by that of the deflated denominator.
pub fn laurent_by_division(num: &[f64], den: &[f64], p: C, m: usize, terms: usize) -> Vec<C> {
    let mut d: Vec<C> = den.iter().map(|&c| C::new(c, 0.0)).collect();
    for _ in 0..m {
        let (q, rem) = synthetic_div(&d, p);
        let scale = d.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(
            rem.norm() <= 1e-8 * scale,
            "p is not a root of den: remainder {rem}"
        );
        d = q;
    }
    let n: Vec<C> = num.iter().map(|&c| C::new(c, 0.0)).collect();
    let nt = taylor_at(&n, p, terms);
    let dt = taylor_at(&d, p, terms);
    let mut c = vec![C::new(0.0, 0.0); terms];
    for k in 0..terms {
        let mut acc = nt[k];
        for i in 1..=k {
            acc -= dt[i] * c[k - i];
        }
        c[k] = acc / dt[0];
    }
    c
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn dense_sym_eigs(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Roots of an ascending real polynomial as companion-matrix eigenvalues.
pub fn companion_roots(coeffs: &[f64]) -> Vec<C> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -coeffs[n - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    m.complex_eigenvalues().iter().copied().collect()
}

/// The (1,1) entry of the inverse of a 3×3 complex matrix, by cofactors.
pub fn inverse_11_3x3(a: [[C; 3]; 3]) -> C {
    let m = Matrix3::from_fn(|i, j| a[i][j]);
    let cof = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    debug_assert!((m.determinant() - det).norm() <= 1e-9 * det.norm().max(1.0));
    cof / det
}

/// Plain trapezoid rule on a uniform grid of `n` intervals.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..n {
        s += f(a + h * i as f64);
    }
    s * h
}

/// Brute-force `∫₀^∞ f` using fine uniform trapezoid panels, skipping an
/// `eps` window around each singular frequency, and a `u = 1/ω` tail.
pub fn brute_force_half_line<F: Fn(f64) -> f64>(
    f: F,
    singular: &[f64],
    omega_max: f64,
    eps: f64,
    panel_width: f64,
    points_per_unit: usize,
) -> f64 {
    let mut cuts = vec![0.0, panel_width, omega_max];
    for &w in singular {
        cuts.push((w - eps).max(0.0));
        cuts.push(w + eps);
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let excised = singular
            .iter()
            .any(|&s| a >= (s - eps).max(0.0) - 1e-15 && b <= s + eps + 1e-15);
        if excised || b <= a {
            continue;
        }
        // coarser far from the singular band
        let density = if b <= panel_width {
            points_per_unit
        } else {
            points_per_unit / 100
        };
        let n = (((b - a) * density as f64).ceil() as usize).max(2);
        total += trapezoid(&f, a, b, n);
    }
    let tail = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            f(1.0 / u) / (u * u)
        }
    };
    total + trapezoid(tail, 0.0, 1.0 / omega_max, 20_000)
}

/// Relative distance between two complex numbers.
pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}
