//! The network sensitivity `S_N(s) = [(I + L(s) L_N)^-1]_{1,1}` of a string
//! of `N` identical agents with loop transfer function `L(s) = P(s)C(s)`.
//!
//! Three evaluation routes are provided and are expected to agree:
//!
//! * [`sn_mobius`]: closed form in the small root `ζ` of
//!   `ζ² - (1/L + 2) ζ + 1 = 0`, i.e.
//!   `S_N = (1-ζ)(1-ζ^{2N}) / (1+ζ^{2N+1})`.
//! * [`sn_eigenproduct`]: determinant ratio
//!   `det(I + L·L̄_{N-1}) / det(I + L·L_N)` as products over the closed-form
//!   spectra of the two tridiagonal matrices.
//! * [`sn_linsolve`]: the definition, a tridiagonal solve for the first
//!   entry of `(I + L·L_N)^-1 e₁`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational_tf::{RationalTF, POLE_GUARD};

/// Möbius evaluation is refused when `|ζ| > 1 - MOBIUS_GUARD`.
pub const MOBIUS_GUARD: f64 = 1e-6;

/// Largest network handled by [`sn_linsolve`].
pub const LINSOLVE_DEFAULT_CAP: usize = 2000;

/// Default sweep density.
pub const DEFAULT_POINTS_PER_DECADE: usize = 2000;

const GRID_POLE_NUDGE: f64 = 1e-9;
const LOG_OVERFLOW: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `L_N = B_Nᵀ B_N`, first diagonal entry 1.
    Pinned,
    /// All diagonal entries 2.
    Dirichlet,
}

/// Symmetric tridiagonal coupling matrix of a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringLaplacian {
    pub n: usize,
    pub variant: Variant,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl StringLaplacian {
    pub fn new(n: usize, variant: Variant) -> Self {
        let mut diag = vec![2.0; n];
        if variant == Variant::Pinned && n > 0 {
            diag[0] = 1.0;
        }
        StringLaplacian {
            n,
            variant,
            diag,
            offdiag: vec![-1.0; n.saturating_sub(1)],
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.variant {
            Variant::Pinned => eig_pinned(self.n),
            Variant::Dirichlet => eig_dirichlet(self.n),
        }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            m[i][i] = self.diag[i];
            if i + 1 < self.n {
                m[i][i + 1] = self.offdiag[i];
                m[i + 1][i] = self.offdiag[i];
            }
        }
        m
    }
}

/// Spectrum of `L_N`: `2(1 - cos((2k-1)π/(2N+1)))`, `k = 1..N`, ascending.
pub fn eig_pinned(n: usize) -> Vec<f64> {
    let denom = (2 * n + 1) as f64;
    (1..=n)
        .map(|k| 2.0 * (1.0 - ((2 * k - 1) as f64 * PI / denom).cos()))
        .collect()
}

/// Spectrum of `L̄_N`: `2(1 - cos(kπ/(N+1)))`, `k = 1..N`, ascending.
/// Empty for `N = 0`.
pub fn eig_dirichlet(n: usize) -> Vec<f64> {
    let denom = (n + 1) as f64;
    (1..=n)
        .map(|k| 2.0 * (1.0 - (k as f64 * PI / denom).cos()))
        .collect()
}

/// Returns `(ζ, 1 - ζ)` where `ζ` is the root of smaller modulus of
/// `ζ² - (1/v + 2)ζ + 1 = 0`. The complement is computed without
/// cancellation so it stays accurate when `ζ → 1`.
fn zeta_parts(loop_value: Complex64) -> Result<(Complex64, Complex64)> {
    if loop_value.norm() == 0.0 {
        return Err(Error::ZeroLoopValue);
    }
    let w = loop_value.inv();
    let b = w + 2.0;
    // b² - 4 = w (w + 4)
    let root = (w * (w + 4.0)).sqrt();
    // pick the sign giving the larger root q; ζ = 1/q
    let half = if (b.conj() * root).re >= 0.0 {
        0.5 * (w + root)
    } else {
        0.5 * (w - root)
    };
    let q = half + 1.0;
    Ok((q.inv(), half / q))
}

/// Small-modulus root of `ζ² - (1/v + 2)ζ + 1 = 0`.
pub fn zeta(loop_value: Complex64) -> Result<Complex64> {
    zeta_parts(loop_value).map(|(z, _)| z)
}

/// Möbius closed form from a loop value.
pub fn sn_mobius_value(loop_value: Complex64, n: usize) -> Result<Complex64> {
    let (z, one_minus_z) = match zeta_parts(loop_value) {
        Ok(parts) => parts,
        Err(Error::ZeroLoopValue) => return Ok(Complex64::new(1.0, 0.0)),
        Err(e) => return Err(e),
    };
    let modulus = z.norm();
    if modulus > 1.0 - MOBIUS_GUARD {
        return Err(Error::Conditioning { modulus });
    }
    let z2n = z.powu(2 * n as u32);
    let den = 1.0 + z2n * z;
    if den.norm() < 1e-300 {
        return Err(Error::ClosedLoopPole(loop_value));
    }
    Ok(one_minus_z * (1.0 - z2n) / den)
}

/// `S_N(s)` via the iterated Möbius closed form.
pub fn sn_mobius(lp: &RationalTF, n: usize, s: Complex64) -> Result<Complex64> {
    sn_mobius_value(lp.eval(s)?, n)
}

/// `(ln|S_N|, arg S_N)` from the determinant ratio, accumulated in log form.
pub fn sn_eigenproduct_log(loop_value: Complex64, n: usize) -> Result<(f64, f64)> {
    let mut ln_abs = 0.0;
    let mut arg = 0.0;
    for mu in eig_dirichlet(n.saturating_sub(1)) {
        let f = 1.0 + mu * loop_value;
        ln_abs += f.norm().ln();
        arg += f.arg();
    }
    for lambda in eig_pinned(n) {
        let f = 1.0 + lambda * loop_value;
        let mag = f.norm();
        if mag < 1e-300 {
            return Err(Error::ClosedLoopPole(loop_value));
        }
        ln_abs -= mag.ln();
        arg -= f.arg();
    }
    Ok((ln_abs, arg))
}

pub fn sn_eigenproduct_value(loop_value: Complex64, n: usize) -> Result<Complex64> {
    let (ln_abs, arg) = sn_eigenproduct_log(loop_value, n)?;
    Ok(Complex64::from_polar(ln_abs.exp(), arg))
}

/// `S_N(s)` as `∏(1 + μ_k L) / ∏(1 + λ_k L)` over the spectra of `L̄_{N-1}`
/// and `L_N`.
pub fn sn_eigenproduct(lp: &RationalTF, n: usize, s: Complex64) -> Result<Complex64> {
    sn_eigenproduct_value(lp.eval(s)?, n)
}

/// First entry of `(I + v L_N)^-1 e₁` by tridiagonal elimination.
pub fn sn_linsolve_value(loop_value: Complex64, n: usize) -> Result<Complex64> {
    if n > LINSOLVE_DEFAULT_CAP {
        return Err(Error::SizeCap {
            n,
            cap: LINSOLVE_DEFAULT_CAP,
        });
    }
    if n == 0 {
        return Err(Error::SizeCap { n, cap: 0 });
    }
    let lap = StringLaplacian::new(n, Variant::Pinned);
    let off = -loop_value;
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let diag = 1.0 + loop_value * lap.diag[i];
        let (pivot, rhs) = if i == 0 {
            (diag, Complex64::new(1.0, 0.0))
        } else {
            (diag - off * c_prime[i - 1], -off * d_prime[i - 1])
        };
        if pivot.norm() == 0.0 {
            return Err(Error::ClosedLoopPole(loop_value));
        }
        c_prime[i] = off / pivot;
        d_prime[i] = rhs / pivot;
    }
    let mut x = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x = d_prime[i] - c_prime[i] * x;
    }
    Ok(x)
}

/// `S_N(s)` straight from its definition.
pub fn sn_linsolve(lp: &RationalTF, n: usize, s: Complex64) -> Result<Complex64> {
    sn_linsolve_value(lp.eval(s)?, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Möbius form, falling back to the eigenproduct inside the guard band.
    #[default]
    Auto,
    Mobius,
    Eigenproduct,
    Linsolve,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Method::Auto),
            "mobius" => Ok(Method::Mobius),
            "eigenproduct" => Ok(Method::Eigenproduct),
            "linsolve" => Ok(Method::Linsolve),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// One evaluation: value, `ln|S_N|`, and whether auto fell back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub ln_abs: f64,
    pub fell_back: bool,
}

/// Evaluates `S_N` from a loop value by the chosen method.
pub fn evaluate_value(loop_value: Complex64, n: usize, method: Method) -> Result<Evaluation> {
    let plain = |value: Complex64| Evaluation {
        value,
        ln_abs: value.norm().ln(),
        fell_back: false,
    };
    let from_log = |(ln_abs, arg): (f64, f64), fell_back: bool| Evaluation {
        value: if ln_abs.abs() > LOG_OVERFLOW {
            Complex64::new(f64::NAN, f64::NAN)
        } else {
            Complex64::from_polar(ln_abs.exp(), arg)
        },
        ln_abs,
        fell_back,
    };
    match method {
        Method::Mobius => sn_mobius_value(loop_value, n).map(plain),
        Method::Linsolve => sn_linsolve_value(loop_value, n).map(plain),
        Method::Eigenproduct => sn_eigenproduct_log(loop_value, n).map(|l| from_log(l, false)),
        Method::Auto => match sn_mobius_value(loop_value, n) {
            Ok(v) => Ok(plain(v)),
            Err(Error::Conditioning { .. }) => {
                sn_eigenproduct_log(loop_value, n).map(|l| from_log(l, true))
            }
            Err(e) => Err(e),
        },
    }
}

/// Evaluates `S_N(s)` by the chosen method.
pub fn evaluate(lp: &RationalTF, n: usize, s: Complex64, method: Method) -> Result<Evaluation> {
    evaluate_value(lp.eval(s)?, n, method)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    #[default]
    Log,
    Linear,
}

/// Frequency grid over `[omega_min, omega_max]` rad/s.
///
/// For a log grid `points_per_decade` is the density per decade. For a
/// linear grid it is the total number of intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
    pub scale: GridScale,
}

impl FrequencyGrid {
    pub fn log(omega_min: f64, omega_max: f64, points_per_decade: usize) -> Self {
        FrequencyGrid {
            omega_min,
            omega_max,
            points_per_decade,
            scale: GridScale::Log,
        }
    }

    pub fn linear(omega_min: f64, omega_max: f64, intervals: usize) -> Self {
        FrequencyGrid {
            omega_min,
            omega_max,
            points_per_decade: intervals,
            scale: GridScale::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidGrid(m.to_string()));
        if !(self.omega_min.is_finite() && self.omega_max.is_finite()) {
            return bad("frequency bounds must be finite");
        }
        if self.omega_min >= self.omega_max {
            return bad("omega_min must be below omega_max");
        }
        if self.omega_min < 0.0 {
            return bad("frequencies must be nonnegative");
        }
        if self.scale == GridScale::Log && self.omega_min <= 0.0 {
            return bad("log grid needs omega_min > 0");
        }
        if self.points_per_decade == 0 {
            return bad("points_per_decade must be positive");
        }
        Ok(())
    }

    pub fn omegas(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self.scale {
            GridScale::Log => {
                let decades = (self.omega_max / self.omega_min).log10();
                let count = ((decades * self.points_per_decade as f64).ceil() as usize + 1).max(2);
                let (lo, hi) = (self.omega_min.log10(), self.omega_max.log10());
                (0..count)
                    .map(|i| {
                        if i == count - 1 {
                            self.omega_max
                        } else {
                            10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64)
                        }
                    })
                    .collect()
            }
            GridScale::Linear => {
                let count = self.points_per_decade.max(1) + 1;
                let step = (self.omega_max - self.omega_min) / (count - 1) as f64;
                (0..count)
                    .map(|i| {
                        if i == count - 1 {
                            self.omega_max
                        } else {
                            self.omega_min + step * i as f64
                        }
                    })
                    .collect()
            }
        })
    }
}

/// A failed grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub index: usize,
    pub omega: f64,
    pub reason: String,
}

/// `S_N(jω)` sampled over a grid. Failed points hold NaN and are listed in
/// `gaps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    pub method: Method,
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub log_mags: Vec<f64>,
    /// Points where auto mode fell back from the Möbius form.
    pub fallbacks: usize,
    pub gaps: Vec<Gap>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Index and value of the largest `ln|S_N|` on the grid.
    pub fn peak(&self) -> Option<(usize, f64)> {
        self.log_mags
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Moves grid frequencies that land on an imaginary-axis pole of the loop.
pub fn nudge_off_poles(lp: &RationalTF, omega: f64) -> f64 {
    let s = Complex64::new(0.0, omega);
    let hit = lp
        .poles()
        .iter()
        .any(|p| (s - p.location).norm() <= POLE_GUARD * p.location.norm().max(1.0));
    if hit {
        omega + GRID_POLE_NUDGE * omega.abs().max(1.0)
    } else {
        omega
    }
}

/// Evaluates `S_N(jω)` across an explicit list of frequencies.
pub fn sweep_omegas(lp: &RationalTF, n: usize, omegas: &[f64], method: Method) -> SweepResult {
    let results: Vec<(f64, Result<Evaluation>)> = omegas
        .par_iter()
        .map(|&w| {
            let w = nudge_off_poles(lp, w);
            (w, evaluate(lp, n, Complex64::new(0.0, w), method))
        })
        .collect();

    let mut out = SweepResult {
        n,
        method,
        omegas: Vec::with_capacity(results.len()),
        values: Vec::with_capacity(results.len()),
        log_mags: Vec::with_capacity(results.len()),
        fallbacks: 0,
        gaps: Vec::new(),
    };
    for (index, (omega, r)) in results.into_iter().enumerate() {
        out.omegas.push(omega);
        match r {
            Ok(e) => {
                out.values.push(e.value);
                out.log_mags.push(e.ln_abs);
                out.fallbacks += e.fell_back as usize;
            }
            Err(err) => {
                out.values.push(Complex64::new(f64::NAN, f64::NAN));
                out.log_mags.push(f64::NAN);
                out.gaps.push(Gap {
                    index,
                    omega,
                    reason: err.to_string(),
                });
            }
        }
    }
    out
}

/// Evaluates `S_N(jω)` over a frequency grid. Per-point failures become
/// gaps; only an invalid grid is an error.
pub fn sweep(
    lp: &RationalTF,
    n: usize,
    grid: &FrequencyGrid,
    method: Method,
) -> Result<SweepResult> {
    let omegas = grid.omegas()?;
    Ok(sweep_omegas(lp, n, &omegas, method))
}
