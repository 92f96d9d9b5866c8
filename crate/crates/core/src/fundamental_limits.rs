//! Fundamental limitations on `S_N`: the H∞ lower bound from Laurent data
//! of closed-right-half-plane loop poles, stability of `1/(1 + k L)` over the
//! gain interval `(0, 4)`, and the sensitivity integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Refusal, Result};
use crate::polynomial::{roots, Poly, Root};
use crate::quadrature;
use crate::rational_tf::RationalTF;
use crate::string_sensitivity::{eig_dirichlet, eig_pinned, evaluate, Method, Variant};

/// Crossings within this distance of `k = 4` are flagged as boundary.
pub const BOUNDARY_GAIN_TOL: f64 = 1e-9;

/// Share of the quadrature tolerance given to the finite panels; the rest
/// goes to the mapped tail.
pub const FINITE_SHARE: f64 = 0.8;

const MAX_PANELS: usize = 50_000;

/// Crossing gains at or below this are the open-loop axis poles themselves.
const ZERO_GAIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundReason {
    OrhpPole,
    AxisMultiplicityGe3,
    AxisM2,
    AxisM1,
    NoCrhpPoles,
}

/// Bound contributed by one imaginary-axis double pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleBound {
    pub pole: Complex64,
    pub a_minus2: Complex64,
    pub a_minus1: Complex64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub verdict: Verdict,
    /// Lower bound on `sup_N ||S_N||∞`; infinite when unbounded.
    pub bound_value: f64,
    pub bound_db: f64,
    pub contributing_pole: Option<Root>,
    /// `(a_{-m}, a_{1-m})` at the contributing pole.
    pub laurent_used: Option<(Complex64, Complex64)>,
    pub reason: BoundReason,
    /// `|Re|` of the pole that decided the verdict.
    pub axis_margin: Option<f64>,
    pub per_pole: Vec<PoleBound>,
}

fn is_on_axis(p: Complex64, axis_tol: f64) -> bool {
    p.re.abs() <= axis_tol * p.norm().max(1.0)
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// `4 / (π |a_{-1} √a_{-2}|)`
pub fn double_pole_bound(a_minus2: Complex64, a_minus1: Complex64) -> f64 {
    4.0 / (PI * (a_minus1 * a_minus2.sqrt()).norm())
}

/// Lower bound on `sup_N ||S_N||∞` implied by the closed-right-half-plane
/// poles of the loop.
///
/// Any open-right-half-plane pole, or an imaginary-axis pole of
/// multiplicity three or more, makes the supremum infinite. Each axis
/// double pole `p` gives `4 / (π |a_{-1} √a_{-2}|)` from the Laurent series
/// of the loop at `p`; the largest such value is reported. Simple axis
/// poles contribute zero.
pub fn hinf_lower_bound(lp: &RationalTF, axis_tol: f64) -> Result<BoundReport> {
    let crhp = lp.poles().closed_rhp(axis_tol);
    let report =
        |verdict, bound_value: f64, pole: Option<Root>, laurent, reason, per_pole| BoundReport {
            verdict,
            bound_value,
            bound_db: db(bound_value),
            contributing_pole: pole,
            laurent_used: laurent,
            reason,
            axis_margin: pole.map(|p: Root| p.location.re.abs()),
            per_pole,
        };

    if let Some(p) = crhp
        .iter()
        .filter(|p| !is_on_axis(p.location, axis_tol))
        .max_by(|a, b| a.location.re.total_cmp(&b.location.re))
    {
        return Ok(report(
            Verdict::Unbounded,
            f64::INFINITY,
            Some(*p),
            None,
            BoundReason::OrhpPole,
            vec![],
        ));
    }
    if let Some(p) = crhp.iter().find(|p| p.multiplicity >= 3) {
        return Ok(report(
            Verdict::Unbounded,
            f64::INFINITY,
            Some(*p),
            None,
            BoundReason::AxisMultiplicityGe3,
            vec![],
        ));
    }

    let mut per_pole = Vec::new();
    for p in crhp.iter().filter(|p| p.multiplicity == 2) {
        let l = lp.laurent_at(p.location, 2, 4)?;
        let (a2, a1) = (l.coeff(-2), l.coeff(-1));
        per_pole.push((
            *p,
            PoleBound {
                pole: p.location,
                a_minus2: a2,
                a_minus1: a1,
                bound: double_pole_bound(a2, a1),
            },
        ));
    }
    let summary: Vec<PoleBound> = per_pole.iter().map(|(_, b)| *b).collect();
    if let Some((p, b)) = per_pole
        .iter()
        .max_by(|a, b| a.1.bound.total_cmp(&b.1.bound))
    {
        let verdict = if b.bound.is_finite() {
            Verdict::Finite
        } else {
            // a_{-1} = 0: the bound itself is infinite
            Verdict::Unbounded
        };
        return Ok(report(
            verdict,
            b.bound,
            Some(*p),
            Some((b.a_minus2, b.a_minus1)),
            BoundReason::AxisM2,
            summary,
        ));
    }

    if let Some(p) = crhp.first() {
        let l = lp.laurent_at(p.location, 1, 2)?;
        return Ok(report(
            Verdict::Finite,
            0.0,
            Some(*p),
            Some((l.coeff(-1), l.coeff(0))),
            BoundReason::AxisM1,
            vec![],
        ));
    }

    let mut r = report(
        Verdict::Finite,
        0.0,
        None,
        None,
        BoundReason::NoCrhpPoles,
        vec![],
    );
    r.axis_margin = lp
        .poles()
        .iter()
        .map(|p| p.location.re.abs())
        .reduce(f64::min);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub omega_peak: f64,
    pub peak_mag: f64,
    /// `Im(p) + π|√a_{-2}|/(2N+1)`.
    pub seed_omega: f64,
    /// `|S_N|` at the seed frequency.
    pub seed_mag: f64,
    pub window: (f64, f64),
    /// False when the maximum sits on the window edge (no local peak found).
    pub interior: bool,
}

const PROBE_SCAN: usize = 400;

/// Locates the peak of `|S_N(jω)|` just above the axis double pole `pole`.
///
/// The search covers `Im(p) + (0, 4h]` with `h = π|√a_{-2}|/(2N+1)`: a scan
/// on a uniform grid through the seed `Im(p) + h`, then golden-section
/// refinement around the best scan point.
pub fn probe_peak(
    lp: &RationalTF,
    pole: Complex64,
    n: usize,
    method: Method,
    axis_tol: f64,
) -> Result<ProbeResult> {
    if !is_on_axis(pole, axis_tol) {
        return Err(Error::NotAxisPole(pole));
    }
    let l = lp.laurent_at(pole, 2, 3)?;
    let h = PI * l.coeff(-2).sqrt().norm() / (2 * n + 1) as f64;
    let w0 = l.center.im;
    let width = 4.0 * h;
    let mag = |w: f64| -> Result<f64> {
        Ok(evaluate(lp, n, Complex64::new(0.0, w), method)?
            .ln_abs
            .exp())
    };

    let grid: Vec<f64> = (1..=PROBE_SCAN)
        .map(|i| w0 + width * i as f64 / PROBE_SCAN as f64)
        .collect();
    let mags: Vec<f64> = grid.iter().map(|&w| mag(w)).collect::<Result<_>>()?;
    let best = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let interior = best + 1 < PROBE_SCAN;

    let lo = if best == 0 {
        w0 + 1e-3 * width / PROBE_SCAN as f64
    } else {
        grid[best - 1]
    };
    let hi = if interior { grid[best + 1] } else { grid[best] };
    let (omega_peak, peak_mag) = if interior {
        golden_max(&mag, lo, hi, 1e-12 * w0.abs().max(width))?
    } else {
        (grid[best], mags[best])
    };
    let (omega_peak, peak_mag) = if peak_mag >= mags[best] {
        (omega_peak, peak_mag)
    } else {
        (grid[best], mags[best])
    };
    Ok(ProbeResult {
        omega_peak,
        peak_mag,
        seed_omega: w0 + h,
        seed_mag: mag(w0 + h)?,
        window: (w0, w0 + width),
        interior,
    })
}

fn golden_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// A gain at which `d + k n` has a root at `jω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalGain {
    pub k: f64,
    pub omega: f64,
    /// Within [`BOUNDARY_GAIN_TOL`] of the excluded endpoint `k = 4`.
    pub boundary: bool,
}

/// Splits `p(jω)` into real polynomials `(Re, Im)` in `ω`.
fn split_on_axis(p: &Poly) -> (Poly, Poly) {
    let mut re = vec![0.0; p.coeffs().len()];
    let mut im = vec![0.0; p.coeffs().len()];
    for (k, &c) in p.coeffs().iter().enumerate() {
        // j^k
        match k % 4 {
            0 => re[k] = c,
            1 => im[k] = c,
            2 => re[k] = -c,
            _ => im[k] = -c,
        }
    }
    (Poly::new(re), Poly::new(im))
}

/// Positive gains `k` at which `1 + k L(jω) = 0` for some `ω >= 0`.
///
/// With `L = n/d`, the crossing frequencies are the nonnegative real roots
/// of `Im(d(jω) conj(n(jω)))`, and the gain at each is
/// `-Re(d conj n) / |n|²`.
pub fn gain_crossings(lp: &RationalTF) -> Result<Vec<CriticalGain>> {
    let (n, d) = (lp.num(), lp.den());
    if n.is_zero() {
        return Err(Error::DegenerateLoop);
    }
    let (nr, ni) = split_on_axis(n);
    let (dr, di) = (split_on_axis(d).0, split_on_axis(d).1);
    let im_poly = &(&di * &nr) - &(&dr * &ni);
    let re_poly = &(&dr * &nr) + &(&di * &ni);
    if im_poly.is_zero() || im_poly.degree() == 0 {
        // phase never crosses, or the locus lies on the axis for a
        // continuum of gains; the Routh test decides those
        return Ok(Vec::new());
    }
    let dim = im_poly.derivative();
    let mut out: Vec<CriticalGain> = Vec::new();
    for r in &roots(&im_poly, lp.cluster_tol())? {
        if r.location.im != 0.0 || r.location.re < -1e-12 {
            continue;
        }
        let mut w = r.location.re.max(0.0);
        if r.multiplicity == 1 {
            for _ in 0..3 {
                let slope = dim.eval_real(w);
                if slope == 0.0 {
                    break;
                }
                w -= im_poly.eval_real(w) / slope;
            }
            w = w.max(0.0);
        }
        let nn = nr.eval_real(w).powi(2) + ni.eval_real(w).powi(2);
        if nn == 0.0 {
            continue;
        }
        let k = -re_poly.eval_real(w) / nn;
        // open-loop axis poles show up as crossings at k = 0
        if k > ZERO_GAIN_TOL
            && k.is_finite()
            && !out
                .iter()
                .any(|c| (c.k - k).abs() <= 1e-12 * k && (c.omega - w).abs() <= 1e-9 * w.max(1.0))
        {
            out.push(CriticalGain {
                k,
                omega: w,
                boundary: (k - 4.0).abs() <= BOUNDARY_GAIN_TOL,
            });
        }
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.omega.total_cmp(&b.omega)));
    Ok(out)
}

/// Routh–Hurwitz test: true iff every root of `p` has negative real part.
/// A zero in the first column (marginal or degenerate) counts as unstable.
pub fn routh_hurwitz_stable(p: &Poly) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let n = p.degree();
    if n == 0 {
        return Ok(true);
    }
    let sign = p.leading().signum();
    let desc: Vec<f64> = p.coeffs().iter().rev().map(|c| c * sign).collect();
    let mut upper: Vec<f64> = desc.iter().step_by(2).copied().collect();
    let mut lower: Vec<f64> = desc.iter().skip(1).step_by(2).copied().collect();
    let width = upper.len();
    lower.resize(width, 0.0);

    for _ in 0..n {
        let scale = upper
            .iter()
            .chain(lower.iter())
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if lower[0] <= 1e-12 * scale {
            return Ok(false);
        }
        let mut next = vec![0.0; width];
        for i in 0..width - 1 {
            next[i] = (lower[0] * upper[i + 1] - upper[0] * lower[i + 1]) / lower[0];
        }
        upper = std::mem::replace(&mut lower, next);
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSample {
    pub k: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable_all_gains: bool,
    pub critical_gains: Vec<CriticalGain>,
    pub tested_gains: Vec<GainSample>,
    pub gain_interval: (f64, f64),
}

/// `d + k n`, the characteristic polynomial of `1/(1 + k L)`.
pub fn characteristic(lp: &RationalTF, k: f64) -> Poly {
    lp.den() + &lp.num().scale(k)
}

/// Decides whether `1/(1 + k L(s))` is stable for every `k` in `(0, 4)`.
pub fn stable_for_all_gains(lp: &RationalTF) -> Result<StabilityReport> {
    let interval = (0.0, 4.0);
    if lp.is_zero() {
        let stable = routh_hurwitz_stable(lp.den())?;
        return Ok(StabilityReport {
            stable_all_gains: stable,
            critical_gains: vec![],
            tested_gains: vec![GainSample { k: 2.0, stable }],
            gain_interval: interval,
        });
    }
    let critical = gain_crossings(lp)?;
    let mut cuts: Vec<f64> = vec![interval.0];
    cuts.extend(
        critical
            .iter()
            .filter(|c| c.k > interval.0 && c.k < interval.1 && !c.boundary)
            .map(|c| c.k),
    );
    cuts.push(interval.1);
    cuts.dedup();
    let interior_crossing = cuts.len() > 2;

    let tested: Vec<GainSample> = cuts
        .windows(2)
        .map(|w| {
            let k = 0.5 * (w[0] + w[1]);
            Ok(GainSample {
                k,
                stable: routh_hurwitz_stable(&characteristic(lp, k))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(StabilityReport {
        // at an interior crossing gain the closed loop has an axis pole
        stable_all_gains: !interior_crossing && tested.iter().all(|g| g.stable),
        critical_gains: critical,
        tested_gains: tested,
        gain_interval: interval,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub n: usize,
    /// Spectrum used for determinant integrals; absent for `∫ ln|S_N|`.
    pub variant: Option<Variant>,
    pub value: f64,
    pub error_estimate: f64,
    pub split_points: Vec<f64>,
    pub truncation_freq: f64,
    pub tail_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

fn check_relative_degree(lp: &RationalTF) -> Result<()> {
    let r = lp.relative_degree();
    if r < 2 {
        return Err(Refusal::RelativeDegree(r).into());
    }
    Ok(())
}

/// Frequencies of lightly damped singular features and the truncation
/// frequency for the given spectrum.
fn integration_layout(lp: &RationalTF, gains: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut features: Vec<Complex64> = lp
        .poles()
        .iter()
        .chain(lp.zeros().iter())
        .map(|r| r.location)
        .collect();
    for &k in gains {
        let ch = characteristic(lp, k);
        if ch.degree() > 0 {
            features.extend(roots(&ch, lp.cluster_tol())?.iter().map(|r| r.location));
        }
    }
    let largest = features.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let omega_max = 100.0 * largest;

    let mut splits: Vec<f64> = features
        .iter()
        .filter(|z| z.re.abs() <= 0.1 * z.norm())
        .map(|z| z.im.abs())
        .filter(|w| *w > 0.0 && *w < omega_max)
        .collect();
    let mut decade = 1e-3;
    while decade < omega_max {
        splits.push(decade);
        decade *= 10.0;
    }
    splits.push(0.0);
    splits.push(omega_max);
    splits.sort_by(f64::total_cmp);
    splits.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    Ok((splits, omega_max))
}

fn integrate_over_half_line<F>(
    f: &F,
    splits: Vec<f64>,
    omega_max: f64,
    tol: f64,
    n: usize,
    variant: Option<Variant>,
) -> Result<IntegralReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let finite = quadrature::integrate(f, &splits, FINITE_SHARE * tol, MAX_PANELS)?;
    // ω = Ω / t maps [Ω, ∞) onto (0, 1]
    let tail_fn = |t: f64| -> Result<f64> { Ok(f(omega_max / t)? * omega_max / (t * t)) };
    let tail = quadrature::integrate(
        &tail_fn,
        &[0.0, 0.5, 1.0],
        (1.0 - FINITE_SHARE) * tol,
        MAX_PANELS,
    )?;
    Ok(IntegralReport {
        n,
        variant,
        value: finite.value + tail.value,
        error_estimate: finite.error + tail.error,
        split_points: splits,
        truncation_freq: omega_max,
        tail_estimate: tail.value,
        panels: finite.panels + tail.panels,
        converged: finite.converged && tail.converged,
    })
}

/// `∫₀^∞ ln|S_N(jω)| dω`.
///
/// Refused unless the loop has relative degree at least two and
/// `1/(1 + kL)` is stable for all `k` in `(0, 4)`.
pub fn bode_integral(
    lp: &RationalTF,
    n: usize,
    method: Method,
    tol: f64,
) -> Result<IntegralReport> {
    if n == 0 {
        return Err(Refusal::ZeroNetworkSize.into());
    }
    check_relative_degree(lp)?;
    if !stable_for_all_gains(lp)?.stable_all_gains {
        return Err(Refusal::NotStableForAllGains.into());
    }
    log_sensitivity_integral(lp, n, method, tol)
}

/// `∫₀^∞ ln|S_N(jω)| dω` without the stability premise.
///
/// Closed-loop poles on the axis give integrable logarithmic singularities
/// and are split on; poles in the open right half plane make the value
/// meaningless as a limitation, which is why [`bode_integral`] guards them.
pub fn log_sensitivity_integral(
    lp: &RationalTF,
    n: usize,
    method: Method,
    tol: f64,
) -> Result<IntegralReport> {
    if n == 0 {
        return Err(Refusal::ZeroNetworkSize.into());
    }
    check_relative_degree(lp)?;
    let mut gains = eig_pinned(n);
    gains.extend(eig_dirichlet(n - 1));
    let (splits, omega_max) = integration_layout(lp, &gains)?;
    let f = |w: f64| -> Result<f64> { Ok(evaluate(lp, n, Complex64::new(0.0, w), method)?.ln_abs) };
    integrate_over_half_line(&f, splits, omega_max, tol, n, None)
}

/// `∫₀^∞ ln|det(I + L(jω) M)^-1| dω` for `M = L_n` (pinned) or `L̄_n`
/// (dirichlet), computed as `-Σ_k ∫ ln|1 + κ_k L(jω)| dω` over the
/// spectrum `κ_k` of `M`.
pub fn det_log_integral(
    lp: &RationalTF,
    n: usize,
    variant: Variant,
    tol: f64,
) -> Result<IntegralReport> {
    check_relative_degree(lp)?;
    let spectrum = match variant {
        Variant::Pinned => eig_pinned(n),
        Variant::Dirichlet => eig_dirichlet(n),
    };
    for &k in &spectrum {
        if !routh_hurwitz_stable(&characteristic(lp, k))? {
            return Err(Refusal::UnstableAtEigenvalue(k).into());
        }
    }
    if spectrum.is_empty() {
        return Ok(IntegralReport {
            n,
            variant: Some(variant),
            value: 0.0,
            error_estimate: 0.0,
            split_points: vec![],
            truncation_freq: 0.0,
            tail_estimate: 0.0,
            panels: 0,
            converged: true,
        });
    }
    let (splits, omega_max) = integration_layout(lp, &spectrum)?;
    let f = |w: f64| -> Result<f64> {
        let v = lp.eval(Complex64::new(0.0, w))?;
        Ok(-spectrum
            .iter()
            .map(|k| (1.0 + k * v).norm().ln())
            .sum::<f64>())
    };
    integrate_over_half_line(&f, splits, omega_max, tol, n, Some(variant))
}
