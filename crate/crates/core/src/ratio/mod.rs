//! Acute:chronic ratio engines.
//!
//! Rolling-average ratios work on weekly totals; EWMA ratios work day by day.
//! A zero chronic load yields [`RatioValue::Undefined`], never 0 or infinity.

mod convergence;
mod ewma;
mod rolling;
mod weights;

pub use convergence::{convergence_analysis, convergence_day, ConvergenceReport, ConvergenceStep};
pub use ewma::{
    acratio_ewma_coupled, acratio_ewma_uncoupled, ewma, ewma_recursive, lambda_from_n, windowed_ewma, EwmaParams,
    EwmaPoint, InitialValue,
};
pub use rolling::{acratio_calendar_week, acratio_rolling, ratio_from_weekly_totals};
pub use weights::{chronic_ratio_contribution, initial_weight_dominates, weight_table, WeightTable};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Coupling, WindowConfig, WorkloadSeries};

/// A ratio that is either a finite nonnegative number or explicitly undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum RatioValue {
    Defined(f64),
    Undefined,
}

impl RatioValue {
    pub fn from_loads(acute: f64, chronic: f64) -> Self {
        if chronic > 0.0 {
            RatioValue::Defined(acute / chronic)
        } else {
            RatioValue::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            RatioValue::Defined(v) => Some(v),
            RatioValue::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, RatioValue::Undefined)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMethod {
    RollingCoupled,
    RollingUncoupled,
    EwmaCoupled,
    EwmaUncoupled,
}

impl RatioMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RatioMethod::RollingCoupled => "rolling_coupled",
            RatioMethod::RollingUncoupled => "rolling_uncoupled",
            RatioMethod::EwmaCoupled => "ewma_coupled",
            RatioMethod::EwmaUncoupled => "ewma_uncoupled",
        }
    }

    pub(crate) fn rolling(coupling: Coupling) -> Self {
        match coupling {
            Coupling::Coupled => RatioMethod::RollingCoupled,
            Coupling::Uncoupled => RatioMethod::RollingUncoupled,
        }
    }
}

/// Acute and chronic loads with their ratio, before being attached to a date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadRatio {
    pub acute: f64,
    pub chronic: f64,
    pub ratio: RatioValue,
}

impl LoadRatio {
    pub fn new(acute: f64, chronic: f64) -> Self {
        Self {
            acute,
            chronic,
            ratio: RatioValue::from_loads(acute, chronic),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub at: NaiveDate,
    pub acute: f64,
    pub chronic: f64,
    pub ratio: RatioValue,
    pub method: RatioMethod,
    pub converged: bool,
}

impl RatioPoint {
    pub fn new(at: NaiveDate, loads: LoadRatio, method: RatioMethod, converged: bool) -> Self {
        Self {
            at,
            acute: loads.acute,
            chronic: loads.chronic,
            ratio: loads.ratio,
            method,
            converged,
        }
    }
}

pub type RatioSeries = Vec<RatioPoint>;

/// A fully parameterized ratio method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodSpec {
    Rolling {
        #[serde(default)]
        window: WindowConfig,
    },
    EwmaCoupled {
        acute: EwmaParams,
        chronic: EwmaParams,
    },
    EwmaUncoupled {
        acute_days: usize,
        chronic_days: usize,
        acute: EwmaParams,
        chronic: EwmaParams,
    },
}

impl MethodSpec {
    pub fn rolling(window: WindowConfig) -> Self {
        MethodSpec::Rolling { window }
    }

    /// λ(7)/λ(28) with the first record as the initial value.
    pub fn ewma_coupled_default() -> Self {
        MethodSpec::EwmaCoupled {
            acute: EwmaParams::from_n(7),
            chronic: EwmaParams::from_n(28),
        }
    }

    pub fn ewma_uncoupled_default() -> Self {
        MethodSpec::EwmaUncoupled {
            acute_days: 7,
            chronic_days: 28,
            acute: EwmaParams::from_n(7),
            chronic: EwmaParams::from_n(28),
        }
    }

    pub fn method(&self) -> RatioMethod {
        match self {
            MethodSpec::Rolling { window } => RatioMethod::rolling(window.coupling),
            MethodSpec::EwmaCoupled { .. } => RatioMethod::EwmaCoupled,
            MethodSpec::EwmaUncoupled { .. } => RatioMethod::EwmaUncoupled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodSpec::Rolling { window } => window.validate(),
            MethodSpec::EwmaCoupled { acute, chronic } => {
                acute.validate()?;
                chronic.validate()
            }
            MethodSpec::EwmaUncoupled {
                acute_days,
                chronic_days,
                acute,
                chronic,
            } => {
                if *acute_days == 0 || *chronic_days == 0 {
                    return Err(Error::param("window", "window lengths must be positive"));
                }
                acute.validate()?;
                chronic.validate()
            }
        }
    }

    pub fn evaluate(&self, series: &WorkloadSeries, at: NaiveDate) -> Result<RatioPoint> {
        match self {
            MethodSpec::Rolling { window } => acratio_rolling(series, *window, at),
            MethodSpec::EwmaCoupled { acute, chronic } => acratio_ewma_coupled(series, acute, chronic, at),
            MethodSpec::EwmaUncoupled {
                acute_days,
                chronic_days,
                acute,
                chronic,
            } => acratio_ewma_uncoupled(series, *acute_days, *chronic_days, acute, chronic, at),
        }
    }
}

/// Ratio for every day of `series` from `from` onwards. Days whose windows
/// reach before the start of the series produce no point.
pub fn compute_series_from(
    series: &WorkloadSeries,
    method: &MethodSpec,
    from: Option<NaiveDate>,
) -> Result<RatioSeries> {
    method.validate()?;
    let from = from.or(series.start());
    let mut out = Vec::new();
    match method {
        MethodSpec::EwmaCoupled { acute, chronic } => {
            // one pass over both streams instead of re-running per day
            let a = ewma(series, acute)?;
            let c = ewma(series, chronic)?;
            for (pa, pc) in a.iter().zip(&c) {
                if Some(pa.date) < from {
                    continue;
                }
                out.push(RatioPoint::new(
                    pa.date,
                    LoadRatio::new(pa.value, pc.value),
                    RatioMethod::EwmaCoupled,
                    pa.converged && pc.converged,
                ));
            }
        }
        _ => {
            for day in series.days() {
                if Some(day.date) < from {
                    continue;
                }
                match method.evaluate(series, day.date) {
                    Ok(p) => out.push(p),
                    Err(Error::InsufficientHistory { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

pub fn compute_series(series: &WorkloadSeries, method: &MethodSpec) -> Result<RatioSeries> {
    if series.is_empty() {
        return Ok(Vec::new());
    }
    compute_series_from(series, method, None)
}
