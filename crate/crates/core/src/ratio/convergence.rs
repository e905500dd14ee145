use serde::{Deserialize, Serialize};

use super::ewma::{ewma_recursive, EwmaParams};
use crate::error::{Error, Result};
use crate::series::WorkloadSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    /// Days of load applied (0 is the initial value itself).
    pub day: usize,
    pub from_a: f64,
    pub from_b: f64,
    pub difference: f64,
    /// (1−λ)^day · (a − b)
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub lambda: f64,
    pub epsilon: f64,
    pub initial_difference: f64,
    /// First day with |E_t(a) − E_t(b)| < ε, from the closed form. May lie
    /// beyond the end of the profile.
    pub convergence_day: u64,
    /// Same, read off the recursively computed trace (None if the profile
    /// ends first).
    pub observed_day: Option<usize>,
    /// Largest |recursive − closed form| over the trace.
    pub max_identity_error: f64,
    pub trace: Vec<ConvergenceStep>,
}

/// Smallest t ≥ 0 with (1−λ)^t · |Δ₀| < ε.
pub fn convergence_day(lambda: f64, initial_difference: f64, epsilon: f64) -> Result<u64> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is not in (0, 1]")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", "must be positive"));
    }
    let mut gap = initial_difference.abs();
    let keep = 1.0 - lambda;
    let mut t = 0u64;
    while gap >= epsilon {
        gap *= keep;
        t += 1;
    }
    Ok(t)
}

/// Run the same load profile from two initial values and find when the
/// EWMA outputs come within `epsilon` of each other. Every record of the
/// profile is a load; the initial-value policy in `p` is ignored.
pub fn convergence_analysis(
    profile: &WorkloadSeries,
    p: &EwmaParams,
    e0_a: f64,
    e0_b: f64,
    epsilon: f64,
) -> Result<ConvergenceReport> {
    p.validate()?;
    let lambda = p.lambda;
    let profile: Vec<f64> = profile.loads().collect();
    let delta0 = e0_a - e0_b;
    let convergence_day = convergence_day(lambda, delta0, epsilon)?;

    let a = ewma_recursive(&profile, lambda, e0_a);
    let b = ewma_recursive(&profile, lambda, e0_b);
    let keep = 1.0 - lambda;
    let mut decay = 1.0;
    let mut trace = Vec::with_capacity(profile.len() + 1);
    trace.push(ConvergenceStep {
        day: 0,
        from_a: e0_a,
        from_b: e0_b,
        difference: delta0,
        closed_form: delta0,
    });
    for (i, (&ea, &eb)) in a.iter().zip(&b).enumerate() {
        decay *= keep;
        trace.push(ConvergenceStep {
            day: i + 1,
            from_a: ea,
            from_b: eb,
            difference: ea - eb,
            closed_form: decay * delta0,
        });
    }
    let max_identity_error = trace
        .iter()
        .map(|s| (s.difference - s.closed_form).abs())
        .fold(0.0, f64::max);
    let observed_day = trace.iter().position(|s| s.difference.abs() < epsilon);

    Ok(ConvergenceReport {
        lambda,
        epsilon,
        initial_difference: delta0,
        convergence_day,
        observed_day,
        max_identity_error,
        trace,
    })
}
