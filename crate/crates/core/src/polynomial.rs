//! Real polynomials in the Laplace variable.
//!
//! Coefficients are stored in ascending power order: `coeffs[k]` multiplies
//! `s^k`. The zero polynomial is the single coefficient `0.0`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative distance under which computed roots are merged.
/// Backward error assumed for coefficients when judging root clusters.
const MULTIPLE_ROOT_BACKWARD_ERROR: f64 = 1e-13;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

const ABERTH_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", from = "Vec<f64>")]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl From<Poly> for Vec<f64> {
    fn from(p: Poly) -> Self {
        p.coeffs
    }
}

impl From<Vec<f64>> for Poly {
    fn from(v: Vec<f64>) -> Self {
        Poly::new(v)
    }
}

impl Poly {
    /// Builds a polynomial from ascending coefficients, trimming zero
    /// leading terms.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c * s^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Largest coefficient magnitude.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, c: f64) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Polynomial long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return Ok((Poly::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd.max(1));
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Expands `leading * prod (s - r)^m` over a conjugate-closed root set.
    pub fn from_roots(rs: &RootSet, leading: f64) -> Result<Self> {
        let mut p = Poly::constant(leading);
        for root in rs.iter() {
            let z = root.location;
            let scale = 1e-9 * z.norm().max(1.0);
            if z.im.abs() <= scale {
                let lin = Poly::new(vec![-z.re, 1.0]);
                for _ in 0..root.multiplicity {
                    p = &p * &lin;
                }
            } else if z.im > 0.0 {
                let partner = rs
                    .iter()
                    .find(|r| {
                        r.multiplicity == root.multiplicity
                            && (r.location - z.conj()).norm() <= scale
                    })
                    .ok_or(Error::NotConjugateSymmetric(z))?;
                let mid = 0.5 * (z + partner.location.conj());
                let quad = Poly::new(vec![mid.norm_sqr(), -2.0 * mid.re, 1.0]);
                for _ in 0..root.multiplicity {
                    p = &p * &quad;
                }
            } else if !rs.iter().any(|r| {
                r.multiplicity == root.multiplicity && (r.location - z.conj()).norm() <= scale
            }) {
                return Err(Error::NotConjugateSymmetric(z));
            }
        }
        Ok(p)
    }

    /// All complex roots with multiplicities, using the default clustering
    /// tolerance.
    pub fn roots(&self) -> Result<RootSet> {
        roots(self, DEFAULT_CLUSTER_TOL)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && !(self.is_zero() && k == 0) {
                continue;
            }
            if !first {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}s")?,
                _ => write!(f, "{a}s^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Poly::new(
            (0..n)
                .map(|k| get(&self.coeffs, k) + get(&rhs.coeffs, k))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: usize,
}

/// Roots of a real polynomial, each distinct location listed once.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.retain(|r| r.multiplicity > 0);
        roots.sort_by(|a, b| {
            a.location
                .re
                .total_cmp(&b.location.re)
                .then(a.location.im.total_cmp(&b.location.im))
        });
        RootSet { roots }
    }

    pub fn empty() -> Self {
        RootSet { roots: Vec::new() }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Root> {
        self.roots.iter()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Roots with `Re >= -axis_tol * max(1, |r|)`.
    pub fn closed_rhp(&self, axis_tol: f64) -> Vec<Root> {
        self.roots
            .iter()
            .filter(|r| r.location.re >= -axis_tol * r.location.norm().max(1.0))
            .copied()
            .collect()
    }

    /// Roots with `|Re| <= axis_tol * max(1, |r|)`.
    pub fn on_axis(&self, axis_tol: f64) -> Vec<Root> {
        self.roots
            .iter()
            .filter(|r| r.location.re.abs() <= axis_tol * r.location.norm().max(1.0))
            .copied()
            .collect()
    }

    /// The root nearest to `z`, if any.
    pub fn nearest(&self, z: Complex64) -> Option<Root> {
        self.roots
            .iter()
            .min_by(|a, b| (a.location - z).norm().total_cmp(&(b.location - z).norm()))
            .copied()
    }
}

impl<'a> IntoIterator for &'a RootSet {
    type Item = &'a Root;
    type IntoIter = std::slice::Iter<'a, Root>;
    fn into_iter(self) -> Self::IntoIter {
        self.roots.iter()
    }
}

/// Finds all roots of `p`. Roots closer than `cluster_tol * max(1, |r|)`
/// are merged into one location whose multiplicity is the cluster size; each
/// merged location is then polished by Newton iteration on the
/// `(m-1)`-th derivative.
pub fn roots(p: &Poly, cluster_tol: f64) -> Result<RootSet> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::NoRoots);
    }
    let zero_mult = p.coeffs.iter().take_while(|c| **c == 0.0).count();
    let reduced = Poly::new(p.coeffs[zero_mult..].to_vec());

    let mut found = Vec::new();
    if zero_mult > 0 {
        found.push(Root {
            location: Complex64::new(0.0, 0.0),
            multiplicity: zero_mult,
        });
    }
    if reduced.degree() > 0 {
        let raw = aberth(&reduced);
        let clusters = cluster(&reduced, &raw, cluster_tol);
        let symmetric = enforce_conjugates(clusters, cluster_tol);
        for root in symmetric {
            found.push(Root {
                location: polish(&reduced, root.location, root.multiplicity),
                multiplicity: root.multiplicity,
            });
        }
    }
    // polishing must not break conjugate symmetry
    let mut out: Vec<Root> = Vec::with_capacity(found.len());
    for r in &found {
        if r.location.im < 0.0 {
            continue;
        }
        out.push(*r);
        if r.location.im > 0.0 {
            out.push(Root {
                location: r.location.conj(),
                multiplicity: r.multiplicity,
            });
        }
    }
    Ok(RootSet::new(out))
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Aberth-Ehrlich simultaneous iteration. `p` must have a nonzero constant
/// term and degree >= 1.
fn aberth(p: &Poly) -> Vec<Complex64> {
    let n = p.degree();
    let lead = p.leading();
    let monic: Vec<f64> = p.coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![Complex64::new(-monic[0], 0.0)];
    }

    let radius = monic[0].abs().powf(1.0 / n as f64).max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..ABERTH_MAX_ITER {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dpv) = eval_with_derivative(&monic, z[k]);
            if pv == Complex64::new(0.0, 0.0) {
                done[k] = true;
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            let step = if step.is_finite() { step } else { ratio };
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(f64::MIN_POSITIVE) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

fn cluster(p: &Poly, points: &[Complex64], tol: f64) -> Vec<Root> {
    let groups = multiple_root_groups(p, points);
    let n = groups.len();
    let centers: Vec<Complex64> = groups.iter().map(|g| centroid(g)).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = centers[i].norm().max(centers[j].norm()).max(1.0);
            if (centers[i] - centers[j]).norm() < tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut merged: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for (i, g) in groups.into_iter().enumerate() {
        let r = find(&mut parent, i);
        merged.entry(r).or_default().extend(g);
    }
    merged
        .into_values()
        .map(|g| Root {
            location: centroid(&g),
            multiplicity: g.len(),
        })
        .collect()
}

fn centroid(g: &[Complex64]) -> Complex64 {
    g.iter().sum::<Complex64>() / g.len() as f64
}

/// Radius to which rounding at relative level `MULTIPLE_ROOT_BACKWARD_ERROR`
/// can spread a `k`-fold root of `p` at `c`:
/// `(η Σ|a_i||c|^i / |p^(k)(c)/k!|)^(1/k)`.
fn multiple_root_spread(p: &Poly, c: Complex64, k: usize) -> f64 {
    let size: f64 = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a.abs() * c.norm().powi(i as i32))
        .sum();
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let taylor = p.nth_derivative(k).eval(c).norm() / factorial;
    if taylor == 0.0 {
        return 0.0;
    }
    2.0 * (MULTIPLE_ROOT_BACKWARD_ERROR * size / taylor).powf(1.0 / k as f64)
}

/// Peels off groups of raw roots that are no wider than a rounded multiple
/// root of the group size would be, largest groups first. A `k`-fold root
/// splits into a ring of radius about `ε^(1/k)`, far beyond any fixed
/// tolerance once `k > 2`.
fn multiple_root_groups(p: &Poly, points: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut left: Vec<Complex64> = points.to_vec();
    let mut out = Vec::new();
    while left.len() > 1 {
        // (size, ratio, members)
        let mut best: Option<(usize, f64, Vec<usize>)> = None;
        for i in 0..left.len() {
            let mut order: Vec<usize> = (0..left.len()).collect();
            order.sort_by(|&a, &b| {
                (left[a] - left[i])
                    .norm()
                    .total_cmp(&(left[b] - left[i]).norm())
            });
            for k in 2..=left.len() {
                let members = &order[..k];
                let c = members.iter().map(|&m| left[m]).sum::<Complex64>() / k as f64;
                let spread = members
                    .iter()
                    .map(|&m| (left[m] - c).norm())
                    .fold(0.0, f64::max);
                let ratio = spread / multiple_root_spread(p, c, k);
                let better = match &best {
                    None => true,
                    Some((bk, br, _)) => k > *bk || (k == *bk && ratio < *br),
                };
                if ratio <= 1.0 && better {
                    best = Some((k, ratio, members.to_vec()));
                }
            }
        }
        let Some((_, _, mut members)) = best else {
            break;
        };
        members.sort_unstable_by(|a, b| b.cmp(a));
        out.push(members.iter().map(|&m| left.swap_remove(m)).collect());
    }
    out.extend(left.into_iter().map(|z| vec![z]));
    out
}

/// Snaps near-real clusters onto the real axis and averages conjugate
/// partners. Returns the real roots and the upper-half-plane member of
/// each pair.
fn enforce_conjugates(clusters: Vec<Root>, tol: f64) -> Vec<Root> {
    let mut out = Vec::new();
    let mut lower: Vec<Option<Root>> = Vec::new();
    let mut upper = Vec::new();
    for c in clusters {
        let z = c.location;
        if z.im.abs() <= tol * z.norm().max(1.0) {
            out.push(Root {
                location: Complex64::new(z.re, 0.0),
                multiplicity: c.multiplicity,
            });
        } else if z.im > 0.0 {
            upper.push(c);
        } else {
            lower.push(Some(c));
        }
    }
    for u in upper {
        let best = lower
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|l| (i, (l.location - u.location.conj()).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let location = match best {
            Some((i, _)) => {
                let l = lower[i].take().unwrap();
                0.5 * (u.location + l.location.conj())
            }
            None => u.location,
        };
        out.push(Root {
            location,
            multiplicity: u.multiplicity,
        });
    }
    // unmatched lower-half roots keep their mirror image
    for l in lower.into_iter().flatten() {
        out.push(Root {
            location: l.location.conj(),
            multiplicity: l.multiplicity,
        });
    }
    out
}

/// Newton on the `(m-1)`-th derivative, accepting steps only while the
/// residual decreases.
fn polish(p: &Poly, z0: Complex64, m: usize) -> Complex64 {
    let f = p.nth_derivative(m - 1);
    let df = f.derivative();
    let real = z0.im == 0.0;
    let mut z = z0;
    let mut fz = f.eval(z).norm();
    for _ in 0..8 {
        let d = df.eval(z);
        if d.norm() == 0.0 || fz == 0.0 {
            break;
        }
        let mut next = z - f.eval(z) / d;
        if real {
            next.im = 0.0;
        } else if next.im <= 0.0 {
            break;
        }
        let fnext = f.eval(next).norm();
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(fnext < fz) {
            break;
        }
        z = next;
        fz = fnext;
    }
    z
}
