use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{AthleteOutcome, WeeklyAnalysis};
use crate::error::{Error, Result};
use crate::ratio::{acratio_calendar_week, RatioPoint};
use crate::series::WorkloadSeries;

/// Which athletes may serve as controls for a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Controls follow the same schedule generator as the case.
    #[default]
    SameSchedule,
    Any,
}

impl Matcher {
    fn accepts(&self, case: &AthleteOutcome, control: &AthleteOutcome) -> bool {
        match self {
            Matcher::SameSchedule => case.schedule == control.schedule,
            Matcher::Any => true,
        }
    }
}

/// A case and its control, both observed only through the case's injury day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub case_id: String,
    pub control_id: String,
    pub censor_date: NaiveDate,
    pub case_series: WorkloadSeries,
    pub control_series: WorkloadSeries,
    pub case_ratio: RatioPoint,
    pub control_ratio: RatioPoint,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NestedCaseControl {
    pub pairs: Vec<MatchedPair>,
    /// Cases with no eligible control still at risk.
    pub unmatched_cases: Vec<String>,
    /// Cases whose censored history is too short for a ratio.
    pub insufficient_history: Vec<String>,
}

/// One control per case, drawn from athletes still uninjured on the case's
/// injury day (lowest athlete id first). Both series are censored at that
/// day, so case and control cover the same part of the week.
pub fn build_nested_case_control(
    outcomes: &[AthleteOutcome],
    matcher: Matcher,
    analysis: &WeeklyAnalysis,
) -> Result<NestedCaseControl> {
    analysis.window.validate()?;
    let mut sorted: Vec<&AthleteOutcome> = outcomes.iter().collect();
    sorted.sort_by(|a, b| a.athlete_id.cmp(&b.athlete_id));

    let mut result = NestedCaseControl::default();
    for case in sorted.iter().filter(|o| o.is_injured()) {
        let day = case.injury_day.expect("filtered on injury");
        let control = sorted.iter().find(|c| {
            c.athlete_id != case.athlete_id
                && c.injury_day.is_none_or(|d| d > day)
                && c.realized.end().is_some_and(|e| e >= day)
                && matcher.accepts(case, c)
        });
        let Some(control) = control else {
            result.unmatched_cases.push(case.athlete_id.clone());
            continue;
        };
        let case_series = case.realized.truncated_through(day);
        let control_series = control.realized.truncated_through(day);
        let score = |s: &WorkloadSeries| acratio_calendar_week(s, analysis.window, analysis.anchor, day);
        match (score(&case_series), score(&control_series)) {
            (Ok(case_ratio), Ok(control_ratio)) => result.pairs.push(MatchedPair {
                case_id: case.athlete_id.clone(),
                control_id: control.athlete_id.clone(),
                censor_date: day,
                case_series,
                control_series,
                case_ratio,
                control_ratio,
            }),
            (Err(Error::InsufficientHistory { .. }), _) | (_, Err(Error::InsufficientHistory { .. })) => {
                result.insufficient_history.push(case.athlete_id.clone());
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverControl {
    /// Negative number of weeks before the injury.
    pub offset_weeks: i32,
    pub ratio: RatioPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRecord {
    pub athlete_id: String,
    pub injury_day: NaiveDate,
    pub case_ratio: RatioPoint,
    pub controls: Vec<CrossoverControl>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossoverResult {
    pub records: Vec<CrossoverRecord>,
    /// Control or case windows dropped for lack of history.
    pub omitted: Vec<String>,
}

/// Each injured athlete is compared with itself on the same weekday of
/// earlier weeks, so every window has the same number of elapsed days.
pub fn build_case_crossover(
    outcomes: &[AthleteOutcome],
    control_offsets_weeks: &[i32],
    analysis: &WeeklyAnalysis,
) -> Result<CrossoverResult> {
    analysis.window.validate()?;
    if control_offsets_weeks.is_empty() || control_offsets_weeks.iter().any(|&k| k >= 0) {
        return Err(Error::param(
            "control_offsets_weeks",
            "need one or more negative week offsets",
        ));
    }
    let mut result = CrossoverResult::default();
    for o in outcomes.iter().filter(|o| o.is_injured()) {
        let day = o.injury_day.expect("filtered on injury");
        let score = |at| acratio_calendar_week(&o.realized, analysis.window, analysis.anchor, at);
        let case_ratio = match score(day) {
            Ok(p) => p,
            Err(Error::InsufficientHistory { .. }) => {
                result
                    .omitted
                    .push(format!("{}: case window lacks history", o.athlete_id));
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut controls = Vec::new();
        for &k in control_offsets_weeks {
            let at = day + Duration::weeks(k as i64);
            match score(at) {
                Ok(ratio) => controls.push(CrossoverControl { offset_weeks: k, ratio }),
                Err(Error::InsufficientHistory { .. } | Error::DateOutOfRange(_)) => {
                    result
                        .omitted
                        .push(format!("{}: control at {k} weeks lacks history", o.athlete_id));
                }
                Err(e) => return Err(e),
            }
        }
        result.records.push(CrossoverRecord {
            athlete_id: o.athlete_id.clone(),
            injury_day: day,
            case_ratio,
            controls,
        });
    }
    Ok(result)
}
