//! Rational transfer functions `num(s) / den(s)` with cached pole/zero
//! structure and Laurent expansion at a pole.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{roots, Poly, Root, RootSet, DEFAULT_CLUSTER_TOL};

/// Default tolerance for classifying a pole as lying on the imaginary axis,
/// relative to `max(1, |p|)`.
pub const DEFAULT_AXIS_TOL: f64 = 1e-7;

/// Evaluation closer than this (relative to `max(1, |p|)`) to a pole is
/// refused.
pub const POLE_GUARD: f64 = 1e-12;

/// Below this `|p(s)| / Σ|a_i||s|^i` the expanded form has lost too many digits.
const EXPANDED_EVAL_MIN_RATIO: f64 = 1e-6;

const LAURENT_MIN_NODES: usize = 64;
const LAURENT_MAX_NODES: usize = 4096;
const LAURENT_REL_TOL: f64 = 1e-10;
const LAURENT_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    num: Poly,
    den: Poly,
    poles: RootSet,
    zeros: RootSet,
    cluster_tol: f64,
}

impl RationalTF {
    /// Builds `num / den`, cancelling common roots (multiplicity aware).
    pub fn make(num: Poly, den: Poly, cluster_tol: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RationalTF {
                num,
                den: Poly::constant(1.0),
                poles: RootSet::empty(),
                zeros: RootSet::empty(),
                cluster_tol,
            });
        }
        let poles = root_set(&den, cluster_tol)?;
        let zeros = root_set(&num, cluster_tol)?;

        let mut common = Vec::new();
        for p in &poles {
            let scale = cluster_tol * p.location.norm().max(1.0);
            if let Some(z) = zeros.nearest(p.location) {
                if (z.location - p.location).norm() < scale {
                    common.push((p.location, z.location, p.multiplicity.min(z.multiplicity)));
                }
            }
        }
        if common.is_empty() {
            return Ok(RationalTF {
                num,
                den,
                poles,
                zeros,
                cluster_tol,
            });
        }

        let factor = Poly::from_roots(
            &RootSet::new(
                common
                    .iter()
                    .map(|&(p, _, m)| Root {
                        location: p,
                        multiplicity: m,
                    })
                    .collect(),
            ),
            1.0,
        )?;
        let num = num.div_rem(&factor)?.0;
        let den = den.div_rem(&factor)?.0;
        let poles = remove(&poles, common.iter().map(|&(p, _, m)| (p, m)));
        let zeros = remove(&zeros, common.iter().map(|&(_, z, m)| (z, m)));
        Ok(RationalTF {
            num,
            den,
            poles,
            zeros,
            cluster_tol,
        })
    }

    /// `num / den` from ascending coefficient slices with the default
    /// clustering tolerance.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::make(
            Poly::new(num.to_vec()),
            Poly::new(den.to_vec()),
            DEFAULT_CLUSTER_TOL,
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::make(Poly::constant(c), Poly::constant(1.0), DEFAULT_CLUSTER_TOL)
            .expect("constant transfer function")
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    pub fn poles(&self) -> &RootSet {
        &self.poles
    }

    pub fn zeros(&self) -> &RootSet {
        &self.zeros
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg(den) - deg(num)`; negative for improper functions.
    pub fn relative_degree(&self) -> i64 {
        if self.num.is_zero() {
            return i64::MAX;
        }
        self.den.degree() as i64 - self.num.degree() as i64
    }

    pub fn mul(&self, other: &RationalTF) -> Result<RationalTF> {
        Self::make(
            &self.num * &other.num,
            &self.den * &other.den,
            self.cluster_tol.min(other.cluster_tol),
        )
    }

    pub fn inverse(&self) -> Result<RationalTF> {
        Self::make(self.den.clone(), self.num.clone(), self.cluster_tol)
    }

    /// Evaluates `num(s) / den(s)`, refusing points within the guard
    /// distance of a pole.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        for p in &self.poles {
            if (s - p.location).norm() <= POLE_GUARD * p.location.norm().max(1.0) {
                return Err(Error::NearSingularity {
                    s,
                    pole: p.location,
                });
            }
        }
        let d = eval_accurate(&self.den, &self.poles, s);
        if d.norm() == 0.0 {
            let pole = self.poles.nearest(s).map(|r| r.location).unwrap_or(s);
            return Err(Error::NearSingularity { s, pole });
        }
        Ok(eval_accurate(&self.num, &self.zeros, s) / d)
    }

    /// Evaluation without the pole guard; used on contours known to avoid
    /// the poles.
    pub(crate) fn eval_unchecked(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Laurent coefficients `a_k`, `k = -m .. -m + num_terms - 1`, of this
    /// function around the pole `p` of multiplicity `m`.
    ///
    /// The coefficients come from the Cauchy integral
    /// `a_k = (1/2πi) ∮ g(s) (s-p)^(-k-1) ds` on a circle of radius
    /// `min(1, d/2)`, `d` being the distance to the nearest other pole or
    /// zero, discretised by the trapezoid rule with the node count doubled
    /// until two successive estimates agree.
    pub fn laurent_at(&self, p: Complex64, m: usize, num_terms: usize) -> Result<LaurentExpansion> {
        let pole = self
            .poles
            .nearest(p)
            .filter(|r| (r.location - p).norm() <= self.cluster_tol * p.norm().max(1.0))
            .ok_or(Error::PoleNotFound(p))?;
        if m == 0 || pole.multiplicity != m {
            return Err(Error::MultiplicityMismatch {
                pole: pole.location,
                requested: m,
                detected: pole.multiplicity,
            });
        }
        let center = pole.location;
        let num_terms = num_terms.max(m + 1);

        let nearest = self
            .poles
            .iter()
            .chain(self.zeros.iter())
            .map(|r| (r.location - center).norm())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let radius = (0.5 * nearest).min(1.0);

        // orders -m-1 ..= -m + num_terms - 1; index 0 is the test term
        let lowest = -(m as i32) - 1;
        let count = num_terms + 1;
        let mut prev = trapezoid_coeffs(self, center, radius, lowest, count, LAURENT_MIN_NODES);
        let mut nodes = LAURENT_MIN_NODES;
        let mut converged = false;
        while nodes < LAURENT_MAX_NODES {
            nodes *= 2;
            let next = trapezoid_coeffs(self, center, radius, lowest, count, nodes);
            // compare in the norm natural on the contour, |a_k| r^k; rounding
            // in the high orders grows like r^-k and would never settle
            let weight = |i: usize| radius.powi(lowest + i as i32);
            let scale = next
                .iter()
                .enumerate()
                .fold(0.0_f64, |m, (i, a)| m.max(a.norm() * weight(i)));
            let diff = next
                .iter()
                .zip(&prev)
                .enumerate()
                .fold(0.0_f64, |m, (i, (a, b))| m.max((a - b).norm() * weight(i)));
            prev = next;
            if diff <= LAURENT_REL_TOL * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::LaurentFailed {
                pole: center,
                reason: format!("trapezoid estimates still changing at {nodes} nodes"),
            });
        }

        let test_term = prev[0];
        let mut coeffs = prev[1..].to_vec();
        let leading = coeffs[0].norm();
        let contour_scale = coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm() * radius.powi(i as i32 - m as i32))
            .fold(0.0_f64, f64::max);
        if leading * radius.powi(-(m as i32)) <= 1e-8 * contour_scale {
            return Err(Error::LaurentFailed {
                pole: center,
                reason: "leading coefficient vanishes; multiplicity is lower than requested".into(),
            });
        }
        if test_term.norm() > 1e-6 * radius * leading {
            return Err(Error::LaurentFailed {
                pole: center,
                reason: "nonzero coefficient below the leading order; multiplicity is higher than requested"
                    .into(),
            });
        }

        let real_center = center.im == 0.0;
        for a in coeffs.iter_mut() {
            if a.norm() < LAURENT_SNAP * leading {
                *a = Complex64::new(0.0, 0.0);
            } else if real_center {
                a.im = 0.0;
            }
        }

        Ok(LaurentExpansion {
            center,
            min_order: -(m as i32),
            coeffs,
            radius,
            nodes,
        })
    }
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Evaluates `p(s)`, switching to the factored form `c Π (s - r)^m` where
/// the expanded sum cancels badly, as it does next to a multiple root.
fn eval_accurate(p: &Poly, roots: &RootSet, s: Complex64) -> Complex64 {
    let direct = p.eval(s);
    if roots.is_empty() {
        return direct;
    }
    let size: f64 = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| a.abs() * s.norm().powi(i as i32))
        .sum();
    if direct.norm() > EXPANDED_EVAL_MIN_RATIO * size {
        return direct;
    }
    roots
        .iter()
        .fold(Complex64::new(p.leading(), 0.0), |acc, r| {
            acc * (s - r.location).powi(r.multiplicity as i32)
        })
}

fn root_set(p: &Poly, tol: f64) -> Result<RootSet> {
    if p.degree() == 0 {
        Ok(RootSet::empty())
    } else {
        roots(p, tol)
    }
}

fn remove(set: &RootSet, drop: impl Iterator<Item = (Complex64, usize)>) -> RootSet {
    let mut roots: Vec<Root> = set.iter().copied().collect();
    for (loc, m) in drop {
        if let Some(r) = roots.iter_mut().find(|r| r.location == loc) {
            r.multiplicity -= m;
        }
    }
    RootSet::new(roots)
}

fn trapezoid_coeffs(
    g: &RationalTF,
    center: Complex64,
    radius: f64,
    lowest: i32,
    count: usize,
    nodes: usize,
) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); count];
    for q in 0..nodes {
        let theta = 2.0 * PI * q as f64 / nodes as f64;
        let offset = Complex64::from_polar(radius, theta);
        let value = g.eval_unchecked(center + offset);
        for (i, a) in acc.iter_mut().enumerate() {
            let k = lowest + i as i32;
            *a += value * Complex64::from_polar(radius.powi(-k), -(k as f64) * theta);
        }
    }
    acc.iter().map(|a| a / nodes as f64).collect()
}

/// Truncated Laurent series `Σ a_k (s - center)^k`, `k >= min_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentExpansion {
    pub center: Complex64,
    pub min_order: i32,
    pub coeffs: Vec<Complex64>,
    /// Contour radius used for the coefficient integrals.
    pub radius: f64,
    /// Trapezoid node count at convergence.
    pub nodes: usize,
}

impl LaurentExpansion {
    pub fn multiplicity(&self) -> usize {
        (-self.min_order) as usize
    }

    /// `a_k`, zero outside the computed range.
    pub fn coeff(&self, k: i32) -> Complex64 {
        let idx = k - self.min_order;
        if idx < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .get(idx as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn max_order(&self) -> i32 {
        self.min_order + self.coeffs.len() as i32 - 1
    }

    /// Partial sum of the series at `s`.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let ds = s - self.center;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * ds.powi(self.min_order + i as i32))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_coeffs(num, den).unwrap()
    }

    #[test]
    fn cancels_common_factors() {
        let g = tf(&[0.0, 1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(g.num().coeffs(), &[1.0]);
        assert_eq!(g.den().coeffs(), &[0.0, 1.0]);

        let g = tf(&[1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(g.den().coeffs(), &[0.0, 0.0, 1.0]);

        let g = tf(&[1.0, 1.0], &[1.0, 2.0, 1.0]);
        assert_eq!(g.num().degree(), 0);
        assert_eq!(g.den().degree(), 1);
        let v = g.eval(c(2.0, 0.0)).unwrap();
        assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RationalTF::from_coeffs(&[1.0], &[0.0]),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn eval_examples() {
        let g = tf(&[1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(g.eval(c(2.0, 0.0)).unwrap(), c(0.25, 0.0));
        assert!(matches!(
            g.eval(c(0.0, 0.0)),
            Err(Error::NearSingularity { .. })
        ));
        let ex2 = tf(&[1.0, 4.0, 6.0, 4.0, 1.0], &[1.0, 0.0, 2.0, 0.0, 1.0]);
        assert!((ex2.eval(c(1.0, 0.0)).unwrap() - c(4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn poles_and_zeros() {
        let g = tf(&[1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(g.poles().len(), 1);
        assert_eq!(g.poles().iter().next().unwrap().multiplicity, 2);
        assert!(g.zeros().is_empty());

        let g = tf(&[-1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(g.poles().iter().next().unwrap().location, c(-1.0, 0.0));
        assert_eq!(g.zeros().iter().next().unwrap().location, c(1.0, 0.0));
    }

    #[test]
    fn relative_degree_examples() {
        assert_eq!(RationalTF::constant(1.0).relative_degree(), 0);
        assert_eq!(tf(&[1.0, 1.0], &[0.0, 0.0, 0.0, 1.0]).relative_degree(), 2);
        assert_eq!(tf(&[0.0, 0.0, 1.0], &[1.0]).relative_degree(), -2);
    }

    #[test]
    fn product_and_inverse() {
        let a = tf(&[1.0, 3.0], &[2.0, 1.0, 1.0]);
        let one = a.mul(&a.inverse().unwrap()).unwrap();
        assert_eq!(one.num().degree(), 0);
        assert_eq!(one.den().degree(), 0);
        assert!((one.eval(c(0.3, 0.7)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);

        let s_inv = tf(&[1.0], &[0.0, 1.0]);
        let sq = s_inv.mul(&s_inv).unwrap();
        assert_eq!(sq.poles().iter().next().unwrap().multiplicity, 2);
    }

    #[test]
    fn laurent_of_pure_double_pole() {
        let g = tf(&[1.0], &[0.0, 0.0, 1.0]);
        let l = g.laurent_at(c(0.0, 0.0), 2, 4).unwrap();
        assert_eq!(l.coeff(-2), c(1.0, 0.0));
        assert_eq!(l.coeff(-1), c(0.0, 0.0));
        assert_eq!(l.coeff(0), c(0.0, 0.0));
        assert_eq!(l.multiplicity(), 2);
    }

    #[test]
    fn laurent_rejects_wrong_pole_or_multiplicity() {
        let g = tf(&[1.0], &[0.0, 0.0, 1.0]);
        assert!(matches!(
            g.laurent_at(c(1.0, 0.0), 2, 4),
            Err(Error::PoleNotFound(_))
        ));
        assert!(matches!(
            g.laurent_at(c(0.0, 0.0), 1, 4),
            Err(Error::MultiplicityMismatch { detected: 2, .. })
        ));
        assert!(matches!(
            g.laurent_at(c(0.0, 0.0), 3, 4),
            Err(Error::MultiplicityMismatch { .. })
        ));
    }

    #[test]
    fn laurent_simple_pole_residue() {
        // 1/((s-1)(s+1)) has residue 1/2 at s = 1
        let g = tf(&[1.0], &[-1.0, 0.0, 1.0]);
        let l = g.laurent_at(c(1.0, 0.0), 1, 3).unwrap();
        assert!((l.coeff(-1) - c(0.5, 0.0)).norm() < 1e-12);
        assert!((l.coeff(0) - c(-0.25, 0.0)).norm() < 1e-12);
    }
}
