//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! when everything passes.

mod oracles;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stringsens::string_sensitivity::{
    eig_dirichlet, eig_pinned, sn_eigenproduct, sn_linsolve, sn_mobius, sweep, StringLaplacian,
};
use stringsens::{
    bode_integral, det_log_integral, gain_crossings, hinf_lower_bound, probe_peak,
    stable_for_all_gains, Error, FrequencyGrid, Method, RationalTF, Variant,
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

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn laurent_example2() -> Outcome {
    let (l, t) = timed(|| example2().laurent_at(c(0.0, 1.0), 2, 3).unwrap());
    let (a2, a1) = (l.coeff(-2), l.coeff(-1));
    let pass = (a2 - c(1.0, 0.0)).norm() <= 1e-9
        && (a1 - c(2.0, -1.0)).norm() <= 1e-9
        && t < Duration::from_secs(1);
    Outcome {
        pass,
        detail: format!("a_-2 = {a2:.12}, a_-1 = {a1:.12}, {t:?}"),
    }
}

fn bound_example2() -> Outcome {
    let (r, t) = timed(|| hinf_lower_bound(&example2(), AXIS_TOL).unwrap());
    let (a2, a1) = r.laurent_used.unwrap();
    let formula = 4.0 / (PI * (a1 * a2.sqrt()).norm());
    let closed = 4.0 / (PI * 5f64.sqrt());
    let pass = (r.bound_value - formula).abs() <= 1e-9
        && (r.bound_value - closed).abs() <= 1e-9
        && (r.bound_db - (-4.893)).abs() <= 0.01
        && t < Duration::from_secs(1);
    Outcome {
        pass,
        detail: format!(
            "bound {:.9} (4/(π√5) = {closed:.9}), {:.4} dB, {t:?}",
            r.bound_value, r.bound_db
        ),
    }
}

fn bound_example1() -> Outcome {
    let g = example1();
    let r = hinf_lower_bound(&g, AXIS_TOL).unwrap();
    let (a2, a1) = r.laurent_used.unwrap();
    let oracle =
        oracles::laurent_by_division(g.num().coeffs(), g.den().coeffs(), c(0.0, 0.0), 2, 2);
    let consistent = (a2 - oracle[0]).norm() <= 1e-8 && (a1 - oracle[1]).norm() <= 1e-8;
    let from_computed = 4.0 / (PI * a1.norm());
    let reference = 16.0 / (7.0 * PI);
    let pass = consistent
        && (a2 - c(1.0, 0.0)).norm() <= 1e-9
        && (r.bound_value - from_computed).abs() <= 1e-9;
    let flag = if (r.bound_value - reference).abs() > 1e-3 {
        format!("NOTE differs from the reference value 16/(7π) = {reference:.4} (a_-1 = 7/4 there)")
    } else {
        "matches the reference value".into()
    };
    Outcome {
        pass,
        detail: format!(
            "a_-1 = {:.12} (division oracle {:.12}), bound {:.4}; {flag}",
            a1.re, oracle[1].re, r.bound_value
        ),
    }
}

fn critical_gain_example3() -> Outcome {
    let g = example1();
    let ((crossings, report), t) = timed(|| {
        (
            gain_crossings(&g).unwrap(),
            stable_for_all_gains(&g).unwrap(),
        )
    });
    let positive: Vec<_> = crossings.iter().filter(|c| c.k > 0.0).collect();
    let inside = report.critical_gains.iter().any(|c| c.k > 0.0 && c.k < 4.0);
    let pass = positive.len() == 1
        && (positive[0].k - 13.875).abs() <= 1e-6
        && report.stable_all_gains
        && !inside
        && t < Duration::from_secs(1);
    let ks: Vec<String> = positive
        .iter()
        .map(|c| format!("k = {:.9} at ω = {:.6}", c.k, c.omega))
        .collect();
    Outcome {
        pass,
        detail: format!(
            "{}; stable on (0,4): {}, {t:?}",
            ks.join(", "),
            report.stable_all_gains
        ),
    }
}

fn bode_invariance() -> Outcome {
    let g = example1();
    let (reports, t) = timed(|| {
        [1, 2, 5, 10]
            .iter()
            .map(|&n| bode_integral(&g, n, Method::Auto, 1e-6).unwrap())
            .collect::<Vec<_>>()
    });
    let pass = reports
        .iter()
        .all(|r| r.value.abs() <= 1e-3 && r.error_estimate <= 1e-3)
        && t < Duration::from_secs(30);
    let parts: Vec<String> = reports
        .iter()
        .map(|r| format!("N={}: {:.2e}±{:.1e}", r.n, r.value, r.error_estimate))
        .collect();
    Outcome {
        pass,
        detail: format!("{}, {t:?}", parts.join(", ")),
    }
}

fn peak_emergence() -> Outcome {
    let g = example2();
    let bound = 4.0 / (PI * 5f64.sqrt());
    let (peaks, t) = timed(|| {
        [10, 50, 200, 400]
            .iter()
            .map(|&n| {
                probe_peak(&g, c(0.0, 1.0), n, Method::Auto, AXIS_TOL)
                    .unwrap()
                    .peak_mag
            })
            .collect::<Vec<_>>()
    });
    let near = (peaks[3] - bound).abs() <= 0.10 * bound;
    let monotone = peaks.windows(2).all(|w| w[1] >= w[0] * (1.0 - 0.01));
    let pass = near && monotone && t < Duration::from_secs(60);
    Outcome {
        pass,
        detail: format!(
            "peaks {:?} vs bound {bound:.5}: N=400 off by {:+.1}% (limit 10%), nondecreasing within 1%: {monotone}, {t:?}",
            peaks.iter().map(|p| format!("{p:.5}")).collect::<Vec<_>>(),
            100.0 * (peaks[3] / bound - 1.0)
        ),
    }
}

fn peak_value_example1() -> Outcome {
    let g = example1();
    let low = FrequencyGrid::log(1e-4, 1.0, 2000);
    let ten = sweep(&g, 10, &low, Method::Auto).unwrap().peak().unwrap().1;
    let computed = hinf_lower_bound(&g, AXIS_TOL).unwrap().bound_value;
    let at_200 = sweep(&g, 200, &low, Method::Auto)
        .unwrap()
        .peak()
        .unwrap()
        .1
        .exp();
    let pass = (ten - (-0.3)).abs() <= 0.1 && (at_200 / computed - 1.0).abs() <= 0.15;
    Outcome {
        pass,
        detail: format!(
            "N=10 ln peak {ten:.4} (reference ln(16/7π) = {:.4}, computed-data formula {:.4}); N=200 peak {at_200:.5} vs formula {computed:.5}",
            (16.0 / (7.0 * PI)).ln(),
            computed.ln()
        ),
    }
}

fn cross_method() -> Outcome {
    let loops = [example1(), example2()];
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    let mut declined = 0;
    let mut points = 0;
    let (_, t) = timed(|| {
        for g in &loops {
            for n in [1, 2, 3, 5, 10, 20, 50] {
                for _ in 0..50 {
                    let s = c(0.0, 10f64.powf(rng.gen_range(-2.0..2.0)));
                    let oracle = sn_linsolve(g, n, s).unwrap();
                    worst = worst.max(oracles::rel(sn_eigenproduct(g, n, s).unwrap(), oracle));
                    match sn_mobius(g, n, s) {
                        Ok(v) => worst = worst.max(oracles::rel(v, oracle)),
                        Err(Error::Conditioning { .. }) => declined += 1,
                        Err(e) => panic!("{e}"),
                    }
                    points += 1;
                }
            }
        }
    });
    Outcome {
        pass: worst <= 1e-7 && t < Duration::from_secs(10),
        detail: format!(
            "max relative deviation {worst:.2e} over {points} points (Möbius declined in guard band at {declined}), {t:?}"
        ),
    }
}

fn spectrum_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    for n in 1..=16 {
        for (variant, closed) in [
            (Variant::Pinned, eig_pinned(n)),
            (Variant::Dirichlet, eig_dirichlet(n)),
        ] {
            let dense = oracles::dense_sym_eigs(&StringLaplacian::new(n, variant).to_dense());
            for (a, b) in closed.iter().zip(&dense) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max |closed form - dense eigensolve| = {worst:.2e} for N ≤ 16"),
    }
}

fn integral_decomposition() -> Outcome {
    let g = example1();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 5] {
        let total = bode_integral(&g, n, Method::Auto, 1e-7).unwrap();
        let pinned = det_log_integral(&g, n, Variant::Pinned, 1e-7).unwrap();
        let dirichlet = det_log_integral(&g, n - 1, Variant::Dirichlet, 1e-7).unwrap();
        let gap = (total.value - (pinned.value - dirichlet.value)).abs();
        let allowed = total.error_estimate + pinned.error_estimate + dirichlet.error_estimate;
        pass &= gap <= allowed;
        parts.push(format!("N={n}: gap {gap:.2e} ≤ {allowed:.2e}"));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("Laurent coefficients, Example 2", laurent_example2),
        ("H∞ bound, Example 2", bound_example2),
        ("H∞ bound, Example 1", bound_example1),
        ("critical gain, Example 3", critical_gain_example3),
        (
            "sensitivity integral invariance, Example 1",
            bode_invariance,
        ),
        ("peak emergence, Example 2", peak_emergence),
        ("peak value, Example 1", peak_value_example1),
        ("cross-method equivalence", cross_method),
        ("spectrum oracle", spectrum_oracle),
        ("integral decomposition", integral_decomposition),
    ];
    let mut failed = Vec::new();
    println!();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "criteria failing: {failed:?}");
}
