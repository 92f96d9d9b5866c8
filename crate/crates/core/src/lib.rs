//! Sensitivity limitations for string networks of identical agents.
//!
//! A string of `N` agents with loop transfer function `L(s) = P(s)C(s)` and
//! coupling matrix `L_N = B_Nᵀ B_N` has network sensitivity
//! `S_N(s) = [(I + L(s) L_N)^-1]_{1,1}`. This crate evaluates `S_N`, bounds
//! `sup_N ||S_N||∞` from the Laurent data of the loop's imaginary-axis
//! poles, tests stability of `1/(1 + kL)` over `k ∈ (0, 4)`, and computes the
//! sensitivity integral `∫₀^∞ ln|S_N(jω)| dω`.

pub mod cli;
pub mod error;
pub mod fundamental_limits;
pub mod polynomial;
pub mod quadrature;
pub mod rational_tf;
pub mod string_sensitivity;

use serde::{Deserialize, Serialize};

pub use error::{Error, Refusal, Result};
pub use fundamental_limits::{
    bode_integral, det_log_integral, gain_crossings, hinf_lower_bound, log_sensitivity_integral,
    probe_peak, routh_hurwitz_stable, stable_for_all_gains, BoundReport, IntegralReport,
    StabilityReport,
};
pub use polynomial::{Poly, Root, RootSet};
pub use rational_tf::{LaurentExpansion, RationalTF};
pub use string_sensitivity::{FrequencyGrid, Method, SweepResult, Variant};

/// Numerical tolerances shared by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative distance under which roots are merged.
    pub cluster_tol: f64,
    /// Relative `|Re p|` under which a pole counts as on the imaginary axis.
    pub axis_tol: f64,
    /// Absolute tolerance for the frequency integrals.
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cluster_tol: polynomial::DEFAULT_CLUSTER_TOL,
            axis_tol: rational_tf::DEFAULT_AXIS_TOL,
            quad_tol: 1e-6,
        }
    }
}
