//! Synthetic cohorts and the study designs used to expose and correct the
//! early-injury bias of weekly ratios.
//!
//! Athletes follow a planned schedule until their first injury. Injury is
//! decided at the end of each training day, so the injury day's load is part
//! of the realized history.

mod bias;
mod cohort;
mod design;
pub mod fixtures;
mod mitigation;

pub use bias::{athlete_weeks, weekly_bias_report, BiasReport, Stratum, WeekRecord, WeekdayStratum};
pub use cohort::{simulate_cohort, simulate_cohort_with, Execution};
pub use design::{
    build_case_crossover, build_nested_case_control, CrossoverControl, CrossoverRecord, CrossoverResult, MatchedPair,
    Matcher, NestedCaseControl,
};
pub use mitigation::{apply_mitigation, raw_exposures, ExposureRecord, GapSummary, Mitigation, MitigationOutput};

use chrono::{NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{WindowConfig, WorkloadSeries};

/// A repeating weekly plan of daily loads, optionally scaled per athlete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleGenerator {
    pub name: String,
    /// Daily loads for each week of the cycle, first day = week anchor.
    pub weeks: Vec<[f64; 7]>,
    /// Each athlete's plan is scaled by a factor drawn from
    /// [1 − jitter, 1 + jitter]. Zero gives identical schedules.
    #[serde(default)]
    pub scale_jitter: f64,
}

impl Default for ScheduleGenerator {
    fn default() -> Self {
        // six training days, rest on the last day, four-week loading cycle
        let week = |x: f64| [x, x, x, x, x, x, 0.0];
        Self {
            name: "standard".into(),
            weeks: vec![week(60.0), week(66.0), week(72.0), week(54.0)],
            scale_jitter: 0.0,
        }
    }
}

impl ScheduleGenerator {
    pub fn constant(name: impl Into<String>, daily: f64) -> Self {
        Self {
            name: name.into(),
            weeks: vec![[daily; 7]],
            scale_jitter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weeks.is_empty() {
            return Err(Error::param("schedule.weeks", "at least one week is required"));
        }
        if self.weeks.iter().flatten().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::param("schedule.weeks", "loads must be finite and nonnegative"));
        }
        if !(self.scale_jitter.is_finite() && (0.0..1.0).contains(&self.scale_jitter)) {
            return Err(Error::param("schedule.scale_jitter", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-session injury probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hazard {
    /// Same probability every training day, independent of load.
    Constant { p: f64 },
    /// 1 − exp(−rate · load).
    LoadProportional { rate: f64 },
    /// Logistic in the day's load and the trailing 7/28-day coupled ratio.
    /// Before 28 days of history the ratio term uses 1.
    Logistic {
        intercept: f64,
        load_coef: f64,
        ratio_coef: f64,
    },
}

impl Default for Hazard {
    fn default() -> Self {
        Hazard::Constant { p: 0.01 }
    }
}

impl Hazard {
    pub fn probability(&self, load: f64, ratio: Option<f64>) -> f64 {
        let p = match *self {
            Hazard::Constant { p } => p,
            Hazard::LoadProportional { rate } => 1.0 - (-rate * load).exp(),
            Hazard::Logistic {
                intercept,
                load_coef,
                ratio_coef,
            } => {
                let z = intercept + load_coef * load + ratio_coef * ratio.unwrap_or(1.0);
                1.0 / (1.0 + (-z).exp())
            }
        };
        p.clamp(0.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Hazard::Constant { p } => p.is_finite() && (0.0..=1.0).contains(&p),
            Hazard::LoadProportional { rate } => rate.is_finite() && rate >= 0.0,
            Hazard::Logistic {
                intercept,
                load_coef,
                ratio_coef,
            } => intercept.is_finite() && load_coef.is_finite() && ratio_coef.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param("hazard", "parameters out of range"))
        }
    }
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date")
}

fn default_anchor() -> Weekday {
    Weekday::Mon
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_athletes: usize,
    #[serde(default)]
    pub schedule: ScheduleGenerator,
    #[serde(default)]
    pub hazard: Hazard,
    pub horizon_weeks: usize,
    #[serde(default)]
    pub seed: u64,
    /// First day of the first week; must fall on `anchor`.
    #[serde(default = "default_start")]
    pub start: NaiveDate,
    #[serde(default = "default_anchor")]
    pub anchor: Weekday,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n_athletes: 10_000,
            schedule: ScheduleGenerator::default(),
            hazard: Hazard::default(),
            horizon_weeks: 12,
            seed: 20_190_101,
            start: default_start(),
            anchor: default_anchor(),
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_athletes == 0 {
            return Err(Error::param("n_athletes", "must be positive"));
        }
        if self.horizon_weeks == 0 {
            return Err(Error::param("horizon_weeks", "must be positive"));
        }
        if crate::series::week_start(self.start, self.anchor) != self.start {
            return Err(Error::param("start", format!("must fall on {}", self.anchor)));
        }
        self.schedule.validate()?;
        self.hazard.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AthleteOutcome {
    pub athlete_id: String,
    /// Name of the schedule generator that produced the plan.
    pub schedule: String,
    pub planned: WorkloadSeries,
    /// Planned loads up to and including the injury day.
    pub realized: WorkloadSeries,
    pub injury_day: Option<NaiveDate>,
    /// Share of the week's scheduled training days completed at injury.
    pub injury_fraction_of_week: Option<f64>,
}

impl AthleteOutcome {
    pub fn is_injured(&self) -> bool {
        self.injury_day.is_some()
    }
}

/// Rolling window plus week anchor used by every weekly analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeeklyAnalysis {
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default = "default_anchor")]
    pub anchor: Weekday,
}

impl Default for WeeklyAnalysis {
    fn default() -> Self {
        Self {
            window: WindowConfig::default(),
            anchor: Weekday::Mon,
        }
    }
}

/// Scheduled training days (positive planned load) in the anchored week of
/// `day`: (elapsed through `day`, total in the week).
pub(crate) fn scheduled_days(planned: &WorkloadSeries, day: NaiveDate, anchor: Weekday) -> (usize, usize) {
    let ws = crate::series::week_start(day, anchor);
    let mut elapsed = 0;
    let mut total = 0;
    for d in planned.days() {
        if crate::series::week_start(d.date, anchor) != ws || d.load <= 0.0 {
            continue;
        }
        total += 1;
        if d.date <= day {
            elapsed += 1;
        }
    }
    (elapsed, total)
}
