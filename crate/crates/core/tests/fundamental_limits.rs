mod oracles;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stringsens::fundamental_limits::{characteristic, BoundReason, Verdict};
use stringsens::string_sensitivity::sweep;
use stringsens::{
    bode_integral, det_log_integral, gain_crossings, hinf_lower_bound, log_sensitivity_integral,
    probe_peak, routh_hurwitz_stable, stable_for_all_gains, Error, FrequencyGrid, Method, Poly,
    RationalTF, Refusal, Variant,
};

const AXIS_TOL: f64 = 1e-7;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn example1() -> RationalTF {
    let plant = RationalTF::from_coeffs(&[1.0], &[0.0, 0.0, 1.0, 0.1]).unwrap();
    let ctrl = RationalTF::from_coeffs(&[1.0, 2.0], &[1.0, 0.05]).unwrap();
    plant.mul(&ctrl).unwrap()
}

fn example2() -> RationalTF {
    RationalTF::from_coeffs(&[1.0, 4.0, 6.0, 4.0, 1.0], &[1.0, 0.0, 2.0, 0.0, 1.0]).unwrap()
}

#[test]
fn routh_agrees_with_roots_on_random_polynomials() {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut stable_seen = 0;
    for case in 0..500 {
        let degree = rng.gen_range(1..=8);
        let mut p =
            Poly::constant(rng.gen_range(0.2..3.0) * if rng.gen_bool(0.1) { -1.0 } else { 1.0 });
        let mut left = degree;
        while left > 0 {
            // mostly left-half-plane roots so both outcomes occur often
            let sign = if rng.gen_bool(0.85) { -1.0 } else { 1.0 };
            let re = sign * rng.gen_range(1e-3..3.0);
            if left >= 2 && rng.gen_bool(0.5) {
                let im = rng.gen_range(0.1..4.0);
                p = &p * &Poly::new(vec![re * re + im * im, -2.0 * re, 1.0]);
                left -= 2;
            } else {
                p = &p * &Poly::new(vec![-re, 1.0]);
                left -= 1;
            }
        }
        let reference = oracles::companion_roots(p.coeffs());
        let explicit = reference.iter().all(|z| z.re < 0.0);
        assert_eq!(
            routh_hurwitz_stable(&p).unwrap(),
            explicit,
            "case {case}: {p}"
        );
        stable_seen += explicit as usize;
    }
    assert!(
        stable_seen > 50 && stable_seen < 450,
        "{stable_seen} stable of 500"
    );
}

#[test]
fn routh_fourth_order_closed_form() {
    // a_i > 0 and a1 a2 a3 > a0 a3² + a4 a1² (coefficients descending a0..a4)
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..200 {
        let a: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..3.0)).collect();
        let closed = a[1] * a[2] * a[3] > a[0] * a[3] * a[3] + a[4] * a[1] * a[1];
        let asc: Vec<f64> = a.iter().rev().copied().collect();
        assert_eq!(routh_hurwitz_stable(&Poly::new(asc)).unwrap(), closed);
    }
}

#[test]
fn example3_critical_gain() {
    let g = example1();
    let crossings = gain_crossings(&g).unwrap();
    let positive: Vec<_> = crossings.iter().filter(|c| c.k > 0.0).collect();
    assert_eq!(positive.len(), 1, "{crossings:?}");
    assert!((positive[0].k - 13.875).abs() < 1e-6);
    let report = stable_for_all_gains(&g).unwrap();
    assert!(report.stable_all_gains);
    assert!(report
        .critical_gains
        .iter()
        .all(|c| !(c.k > 0.0 && c.k < 4.0)));
    let p = |k: f64| Poly::new(vec![k, 2.0 * k, 1.0, 0.15, 0.005]);
    assert!(routh_hurwitz_stable(&p(2.0)).unwrap());
    assert!(!routh_hurwitz_stable(&p(14.0)).unwrap());
    for (a, b) in p(3.0).coeffs().iter().zip(characteristic(&g, 3.0).coeffs()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn crossings_are_axis_roots() {
    let loops = [
        example1(),
        RationalTF::from_coeffs(&[1.0], &[0.0, 1.0, 2.0, 1.0]).unwrap(),
        RationalTF::from_coeffs(&[1.0], &[0.0, 2.0, 3.0, 1.0]).unwrap(),
        RationalTF::from_coeffs(&[3.0, 1.0], &[2.0, 5.0, 4.0, 1.0, 0.0]).unwrap(),
    ];
    let mut total = 0;
    for g in &loops {
        for cg in gain_crossings(g).unwrap() {
            let ch = characteristic(g, cg.k);
            let near = oracles::companion_roots(ch.coeffs())
                .iter()
                .map(|z| (z - c(0.0, cg.omega)).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                near < 1e-6,
                "k = {} ω = {}: nearest root {near}",
                cg.k,
                cg.omega
            );
            total += 1;
        }
    }
    assert!(total >= 3);
}

#[test]
fn interior_crossing_breaks_premise() {
    // s³ + 2s² + s + k crosses the axis at k = 2
    let g = RationalTF::from_coeffs(&[1.0], &[0.0, 1.0, 2.0, 1.0]).unwrap();
    let r = stable_for_all_gains(&g).unwrap();
    assert!(!r.stable_all_gains);
    assert!(r.critical_gains.iter().any(|c| (c.k - 2.0).abs() < 1e-9));
    assert_eq!(
        bode_integral(&g, 3, Method::Auto, 1e-6).unwrap_err(),
        Error::Refused(Refusal::NotStableForAllGains)
    );
    // s³ + 3s² + 2s + k crosses at k = 6, outside (0, 4)
    let g = RationalTF::from_coeffs(&[1.0], &[0.0, 2.0, 3.0, 1.0]).unwrap();
    assert!(stable_for_all_gains(&g).unwrap().stable_all_gains);
}

#[test]
fn boundary_crossing_is_flagged_not_fatal() {
    // s³ + 2s² + 2s + k is marginal exactly at k = 2·2 = 4
    let g = RationalTF::from_coeffs(&[1.0], &[0.0, 2.0, 2.0, 1.0]).unwrap();
    let r = stable_for_all_gains(&g).unwrap();
    let boundary: Vec<_> = r.critical_gains.iter().filter(|c| c.boundary).collect();
    assert_eq!(boundary.len(), 1, "{:?}", r.critical_gains);
    assert!((boundary[0].k - 4.0).abs() < 1e-9);
    assert!(r.stable_all_gains);
}

#[test]
fn example2_premise_holds() {
    // (s²+1)² + k (s+1)⁴ is Hurwitz for every k > 0
    let g = example2();
    for k in [1e-3, 0.5, 1.0, 2.0, 3.999] {
        assert!(
            routh_hurwitz_stable(&characteristic(&g, k)).unwrap(),
            "k = {k}"
        );
    }
    assert!(stable_for_all_gains(&g).unwrap().stable_all_gains);
}

#[test]
fn bounds_for_the_examples() {
    let r = hinf_lower_bound(&example2(), AXIS_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Finite);
    assert_eq!(r.reason, BoundReason::AxisM2);
    assert!((r.bound_value - 4.0 / (PI * 5f64.sqrt())).abs() < 1e-9);
    assert_eq!(r.per_pole.len(), 2);
    assert!((r.per_pole[0].bound - r.per_pole[1].bound).abs() < 1e-12);
    assert!((r.per_pole[0].a_minus1 - r.per_pole[1].a_minus1.conj()).norm() < 1e-9);

    let r = hinf_lower_bound(&example1(), AXIS_TOL).unwrap();
    let (a2, a1) = r.laurent_used.unwrap();
    assert!((a2 - c(1.0, 0.0)).norm() < 1e-9);
    let oracle = oracles::laurent_by_division(
        example1().num().coeffs(),
        example1().den().coeffs(),
        c(0.0, 0.0),
        2,
        2,
    );
    assert!((a1 - oracle[1]).norm() < 1e-8);
    assert!((r.bound_value - 4.0 / (PI * oracle[1].norm())).abs() < 1e-9);
}

#[test]
fn vanishing_residue_is_unbounded() {
    let g = RationalTF::from_coeffs(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
    let r = hinf_lower_bound(&g, AXIS_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Unbounded);
    assert!(r.bound_value.is_infinite());
}

#[test]
fn probe_peaks_never_fall_below_the_bound() {
    for (g, pole) in [(example1(), c(0.0, 0.0)), (example2(), c(0.0, 1.0))] {
        let bound = hinf_lower_bound(&g, AXIS_TOL).unwrap().bound_value;
        for n in [5, 20, 100, 400] {
            let p = probe_peak(&g, pole, n, Method::Auto, AXIS_TOL).unwrap();
            assert!(p.interior, "N = {n}");
            assert!(
                p.peak_mag >= bound * (1.0 - 1e-6),
                "N = {n}: {} < {bound}",
                p.peak_mag
            );
            assert!(p.peak_mag >= p.seed_mag);
        }
    }
}

#[test]
fn probe_rejects_off_axis_pole() {
    let g = RationalTF::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
    assert!(matches!(
        probe_peak(&g, c(-1.0, 0.0), 5, Method::Auto, AXIS_TOL),
        Err(Error::NotAxisPole(_))
    ));
}

#[test]
fn sweep_max_approaches_bound_at_n200() {
    let g = example1();
    let bound = hinf_lower_bound(&g, AXIS_TOL).unwrap().bound_value;
    let s = sweep(&g, 200, &FrequencyGrid::log(1e-4, 1.0, 2000), Method::Auto).unwrap();
    let peak = s.peak().unwrap().1.exp();
    assert!(peak >= bound * (1.0 - 0.15), "{peak} vs {bound}");
}

#[test]
fn sensitivity_integral_vanishes() {
    let g = example1();
    for n in [1, 2, 5, 10, 20] {
        let r = bode_integral(&g, n, Method::Auto, 1e-6).unwrap();
        assert!(r.converged, "N = {n}");
        assert!(
            r.value.abs() <= 1e-3_f64.max(10.0 * r.error_estimate),
            "N = {n}: {}",
            r.value
        );
    }
}

#[test]
fn methods_give_the_same_integral() {
    let g = example1();
    let a = bode_integral(&g, 4, Method::Eigenproduct, 1e-7).unwrap();
    let b = bode_integral(&g, 4, Method::Linsolve, 1e-7).unwrap();
    assert!((a.value - b.value).abs() <= a.error_estimate + b.error_estimate + 1e-9);
}

#[test]
fn determinant_integrals() {
    let g = example1();
    let r = det_log_integral(&g, 3, Variant::Pinned, 1e-6).unwrap();
    assert!(r.value.abs() < 1e-3);
    let one = det_log_integral(&g, 1, Variant::Pinned, 1e-8).unwrap();
    let scalar = bode_integral(&g, 1, Method::Auto, 1e-8).unwrap();
    assert!((one.value - scalar.value).abs() <= one.error_estimate + scalar.error_estimate);
    let empty = det_log_integral(&g, 0, Variant::Dirichlet, 1e-6).unwrap();
    assert_eq!(empty.value, 0.0);
}

#[test]
fn integral_decomposes_into_determinants() {
    let g = example1();
    for n in [2, 3, 5] {
        let total = bode_integral(&g, n, Method::Auto, 1e-7).unwrap();
        let pinned = det_log_integral(&g, n, Variant::Pinned, 1e-7).unwrap();
        let dirichlet = det_log_integral(&g, n - 1, Variant::Dirichlet, 1e-7).unwrap();
        let gap = (total.value - (pinned.value - dirichlet.value)).abs();
        let allowed = total.error_estimate + pinned.error_estimate + dirichlet.error_estimate;
        assert!(gap <= allowed, "N = {n}: gap {gap} > {allowed}");
    }
}

#[test]
fn double_integrator_integral_matches_brute_force() {
    // S_1 = s²/(s²+1): ln|S_1(jω)| = ln(ω²/|1-ω²|)
    let g = RationalTF::from_coeffs(&[1.0], &[0.0, 0.0, 1.0]).unwrap();
    let ours = log_sensitivity_integral(&g, 1, Method::Auto, 1e-8).unwrap();
    let f = |w: f64| (w * w / (1.0 - w * w).abs()).ln();
    let brute = oracles::brute_force_half_line(f, &[0.0, 1.0], 1e3, 1e-7, 2.0, 2_000_000);
    assert!(
        (ours.value - brute).abs() < 1e-4,
        "{} vs brute force {brute}",
        ours.value
    );
    assert!(ours.value.abs() < 1e-6, "{}", ours.value);
    // the guarded entry point refuses: s² + k has axis roots
    assert_eq!(
        bode_integral(&g, 1, Method::Auto, 1e-6).unwrap_err(),
        Error::Refused(Refusal::NotStableForAllGains)
    );
}

#[test]
fn refusals_name_the_premise() {
    assert_eq!(
        bode_integral(&example2(), 3, Method::Auto, 1e-6).unwrap_err(),
        Error::Refused(Refusal::RelativeDegree(0))
    );
    let first_order = RationalTF::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap();
    assert_eq!(
        det_log_integral(&first_order, 3, Variant::Pinned, 1e-6).unwrap_err(),
        Error::Refused(Refusal::RelativeDegree(1))
    );
    assert_eq!(
        bode_integral(&example1(), 0, Method::Auto, 1e-6).unwrap_err(),
        Error::Refused(Refusal::ZeroNetworkSize)
    );
}
