//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The rule never samples interval endpoints, so integrable endpoint
//! singularities (logarithmic ones in particular) are handled by bisection
//! alone as long as they sit on breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::Result;

// Published 35-digit tables, kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

impl Eq for Panel {}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One Gauss–Kronrod 7/15 panel with the QUADPACK error heuristic.
pub fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, refining the
/// panels with the largest error estimates until the summed estimate drops
/// below `abs_tol` or `max_panels` is reached.
pub fn integrate<F>(
    f: &F,
    breakpoints: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let initial: Vec<Panel> = breakpoints
        .par_windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, w[0], w[1]))
        .collect::<Result<_>>()?;
    let mut heap: BinaryHeap<Panel> = initial.into_iter().collect();

    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        if total_err <= abs_tol || heap.len() >= max_panels {
            let value = heap.iter().map(|p| p.value).sum();
            return Ok(QuadResult {
                value,
                error: total_err,
                panels: heap.len(),
                converged: total_err <= abs_tol,
            });
        }
        // bisect the worst panels covering at least half the error
        let mut batch = Vec::new();
        let mut taken = 0.0;
        while let Some(p) = heap.pop() {
            taken += p.error;
            let tiny = (p.b - p.a) <= 64.0 * f64::EPSILON * p.a.abs().max(p.b.abs());
            batch.push((p, tiny));
            if taken >= 0.5 * total_err || batch.len() >= 64 {
                break;
            }
        }
        let refined: Vec<Vec<Panel>> = batch
            .par_iter()
            .map(|&(p, tiny)| {
                if tiny {
                    // cannot split further; freeze it
                    return Ok(vec![Panel { error: 0.0, ..p }]);
                }
                let mid = 0.5 * (p.a + p.b);
                Ok(vec![gk15(f, p.a, mid)?, gk15(f, mid, p.b)?])
            })
            .collect::<Result<_>>()?;
        heap.extend(refined.into_iter().flatten());
    }
}
