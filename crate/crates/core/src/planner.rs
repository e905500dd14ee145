//! Upper-limit planning for next week's acute load, and schedule projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{compute_series_from, ratio_from_weekly_totals, MethodSpec, RatioSeries, RatioValue};
use crate::series::{Coupling, WindowConfig, WorkloadSeries};

fn default_chronic_weeks() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    /// Completed weekly totals, most recent last.
    pub prior_weekly_totals: Vec<f64>,
    pub max_acceptable_ratio: f64,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default = "default_chronic_weeks")]
    pub chronic_weeks: usize,
}

impl PlanRequest {
    pub fn new(prior_weekly_totals: Vec<f64>, max_acceptable_ratio: f64, coupling: Coupling) -> Self {
        Self {
            prior_weekly_totals,
            max_acceptable_ratio,
            coupling,
            chronic_weeks: 4,
        }
    }

    /// Number of prior weeks the formula reads.
    pub fn priors_needed(&self) -> usize {
        match self.coupling {
            Coupling::Coupled => self.chronic_weeks - 1,
            Coupling::Uncoupled => self.chronic_weeks,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.max_acceptable_ratio;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("max_acceptable_ratio", "must be a positive number"));
        }
        let min_weeks = match self.coupling {
            Coupling::Coupled => 2,
            Coupling::Uncoupled => 1,
        };
        if self.chronic_weeks < min_weeks {
            return Err(Error::param("chronic_weeks", format!("must be at least {min_weeks}")));
        }
        if let Some(bad) = self.prior_weekly_totals.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::param(
                "prior_weekly_totals",
                format!("{bad} is not a nonnegative load"),
            ));
        }
        let needed = self.priors_needed();
        if self.prior_weekly_totals.len() < needed {
            return Err(Error::param(
                "prior_weekly_totals",
                format!("need {needed} prior weeks, got {}", self.prior_weekly_totals.len()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum PlanBound {
    Finite(f64),
    /// No finite load reaches the cap.
    Unbounded,
    /// The chronic load is zero, so no ratio exists for any load.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub coupling: Coupling,
    pub max_acute_load: PlanBound,
    /// Ratio recomputed at the returned load.
    pub achieved_ratio_check: RatioValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Largest next-week load that keeps the rolling ratio at or below the cap.
///
/// Coupled: solve L / ((Σ prior + L)/W) = r, giving r·(W−1)·avg/(W−r).
/// Uncoupled: r times the mean of the W prior weeks.
pub fn max_safe_acute(req: &PlanRequest) -> Result<PlanResult> {
    req.validate()?;
    let r = req.max_acceptable_ratio;
    let w = req.chronic_weeks;
    let n = req.prior_weekly_totals.len();
    let priors = &req.prior_weekly_totals[n - req.priors_needed()..];
    let mean = priors.iter().sum::<f64>() / priors.len() as f64;

    let (bound, cfg) = match req.coupling {
        Coupling::Coupled => {
            if r >= w as f64 {
                return Ok(PlanResult {
                    coupling: req.coupling,
                    max_acute_load: PlanBound::Unbounded,
                    achieved_ratio_check: RatioValue::Undefined,
                    diagnostic: Some(format!(
                        "a {w}-week coupled ratio never exceeds {w}, so any load satisfies a cap of {r}"
                    )),
                });
            }
            let wf = w as f64;
            let load = r * (wf - 1.0) * mean / (wf - r);
            (load, WindowConfig::coupled(1, w))
        }
        Coupling::Uncoupled => {
            if mean == 0.0 {
                return Ok(PlanResult {
                    coupling: req.coupling,
                    max_acute_load: PlanBound::Undefined,
                    achieved_ratio_check: RatioValue::Undefined,
                    diagnostic: Some("prior chronic load is zero; the uncoupled ratio is undefined".into()),
                });
            }
            (r * mean, WindowConfig::uncoupled(1, w))
        }
    };

    let mut totals = priors.to_vec();
    totals.push(bound);
    let check = ratio_from_weekly_totals(&totals, cfg)?.ratio;
    let diagnostic = check
        .is_undefined()
        .then(|| "all prior weeks are zero; only a zero load keeps the ratio below the cap".to_string());
    Ok(PlanResult {
        coupling: req.coupling,
        max_acute_load: PlanBound::Finite(bound),
        achieved_ratio_check: check,
        diagnostic,
    })
}

/// Ratios over the planned days as if the plan were carried out after
/// `history`. Days without enough history produce no point.
pub fn project_schedule(
    history: &WorkloadSeries,
    planned: &WorkloadSeries,
    method: &MethodSpec,
) -> Result<RatioSeries> {
    let Some(first) = planned.start() else {
        return Ok(Vec::new());
    };
    let combined = history.concat(planned)?;
    compute_series_from(&combined, method, Some(first))
}
