use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use super::{AthleteOutcome, WeeklyAnalysis};
use crate::error::{Error, Result};
use crate::ratio::{acratio_calendar_week, RatioMethod, RatioPoint};
use crate::series::{week_start, WorkloadSeries};

/// One athlete-week of a weekly analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekRecord {
    pub athlete_id: String,
    pub week_start: NaiveDate,
    /// Last day counted in the week (the injury day for injured weeks).
    pub at: NaiveDate,
    pub point: RatioPoint,
    pub injured: bool,
}

/// Weekly ratios on `series` for every week with enough history. The
/// current week stops at `stop` (inclusive) when given; weeks after it are
/// not produced.
pub(crate) fn weekly_points(
    series: &WorkloadSeries,
    analysis: &WeeklyAnalysis,
    stop: Option<NaiveDate>,
) -> Vec<(NaiveDate, RatioPoint)> {
    let (Some(start), Some(end)) = (series.start(), series.end()) else {
        return Vec::new();
    };
    let end = stop.map_or(end, |s| s.min(end));
    let mut out = Vec::new();
    let mut ws = week_start(start, analysis.anchor);
    while ws <= end {
        let full_end = ws + Duration::days(6);
        let at = full_end.min(end);
        // a week cut short without a stop day is an unfinished horizon
        if at == full_end || stop == Some(at) {
            match acratio_calendar_week(series, analysis.window, analysis.anchor, at) {
                Ok(p) => out.push((ws, p)),
                Err(Error::InsufficientHistory { .. }) => {}
                Err(e) => unreachable!("weekly ratio on a valid series failed: {e}"),
            }
        }
        ws += Duration::days(7);
    }
    out
}

pub fn athlete_weeks(outcome: &AthleteOutcome, analysis: &WeeklyAnalysis) -> Vec<WeekRecord> {
    weekly_points(&outcome.realized, analysis, outcome.injury_day)
        .into_iter()
        .map(|(ws, point)| WeekRecord {
            athlete_id: outcome.athlete_id.clone(),
            week_start: ws,
            at: point.at,
            injured: outcome.injury_day == Some(point.at),
            point,
        })
        .collect()
}

/// Summary of defined ratios in one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub n: usize,
    pub n_undefined: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl Stratum {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a RatioPoint>) -> Option<Self> {
        let mut values = Vec::new();
        let mut n_undefined = 0;
        for p in points {
            match p.ratio.value() {
                Some(v) => values.push(v),
                None => n_undefined += 1,
            }
        }
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            n,
            n_undefined,
            mean,
            sd,
            se: sd / (n as f64).sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekdayStratum {
    pub weekday: Weekday,
    pub injuries: usize,
    pub mean_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub method: RatioMethod,
    pub injured: Option<Stratum>,
    pub uninjured: Option<Stratum>,
    /// Injured mean minus uninjured mean.
    pub difference: Option<f64>,
    pub se_difference: Option<f64>,
    pub per_weekday: Vec<WeekdayStratum>,
    pub diagnostics: Vec<String>,
}

/// Mean current-week ratio of injured versus uninjured athlete-weeks.
pub fn weekly_bias_report(outcomes: &[AthleteOutcome], analysis: &WeeklyAnalysis) -> Result<BiasReport> {
    analysis.window.validate()?;
    let records: Vec<WeekRecord> = outcomes.iter().flat_map(|o| athlete_weeks(o, analysis)).collect();
    Ok(summarize_records(
        records.iter().map(|r| (&r.point, r.injured)),
        RatioMethod::rolling(analysis.window.coupling),
    ))
}

pub(crate) fn summarize_records<'a>(
    records: impl Iterator<Item = (&'a RatioPoint, bool)> + Clone,
    method: RatioMethod,
) -> BiasReport {
    let injured = Stratum::from_points(records.clone().filter(|r| r.1).map(|r| r.0));
    let uninjured = Stratum::from_points(records.clone().filter(|r| !r.1).map(|r| r.0));

    let mut per_weekday = Vec::new();
    for offset in 0u8..7 {
        let weekday = Weekday::try_from(offset).expect("offset below 7");
        let hits: Vec<&RatioPoint> = records
            .clone()
            .filter(|r| r.1 && r.0.at.weekday() == weekday)
            .map(|r| r.0)
            .collect();
        per_weekday.push(WeekdayStratum {
            weekday,
            injuries: hits.len(),
            mean_ratio: Stratum::from_points(hits).map(|s| s.mean),
        });
    }

    let mut diagnostics = Vec::new();
    if injured.is_none() {
        diagnostics.push("no injured athlete-weeks with a defined ratio".to_string());
    }
    if uninjured.is_none() {
        diagnostics.push("no uninjured athlete-weeks with a defined ratio".to_string());
    }
    let (difference, se_difference) = match (injured, uninjured) {
        (Some(a), Some(b)) => (Some(a.mean - b.mean), Some((a.se.powi(2) + b.se.powi(2)).sqrt())),
        _ => (None, None),
    };
    BiasReport {
        method,
        injured,
        uninjured,
        difference,
        se_difference,
        per_weekday,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::fixtures::two_athlete_example;
    use crate::study::{simulate_cohort, CohortSpec, Hazard, ScheduleGenerator};

    #[test]
    fn worked_pair_injured_ratio_is_lower() {
        let (a1, a2) = two_athlete_example();
        let report = weekly_bias_report(&[a1, a2], &WeeklyAnalysis::default()).unwrap();
        let inj = report.injured.unwrap();
        let unj = report.uninjured.unwrap();
        // 4 / ((21 + 4) / 4) and 7 / (28 / 4)
        assert!((inj.mean - 0.64).abs() < 1e-12);
        assert!((unj.mean - 1.0).abs() < 1e-12);
        assert!(report.difference.unwrap() < 0.0);
        let tuesday = report.per_weekday.iter().find(|w| w.weekday == Weekday::Tue).unwrap();
        assert_eq!(tuesday.injuries, 1);
    }

    #[test]
    fn no_injuries_flags_empty_stratum() {
        let spec = CohortSpec {
            n_athletes: 5,
            hazard: Hazard::Constant { p: 0.0 },
            horizon_weeks: 6,
            ..CohortSpec::default()
        };
        let out = simulate_cohort(&spec).unwrap();
        let report = weekly_bias_report(&out, &WeeklyAnalysis::default()).unwrap();
        assert!(report.injured.is_none());
        assert!(report.difference.is_none());
        assert_eq!(report.diagnostics.len(), 1);
    }

    #[test]
    fn injuries_on_last_session_show_no_gap() {
        // training only on the last day of each week, so every injury
        // completes its week
        let spec = CohortSpec {
            n_athletes: 2000,
            schedule: ScheduleGenerator {
                name: "weekend".into(),
                weeks: vec![[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 10.0]],
                scale_jitter: 0.0,
            },
            hazard: Hazard::Constant { p: 0.05 },
            horizon_weeks: 10,
            ..CohortSpec::default()
        };
        let out = simulate_cohort(&spec).unwrap();
        let report = weekly_bias_report(&out, &WeeklyAnalysis::default()).unwrap();
        assert!(report.injured.unwrap().n > 50);
        assert!(report.difference.unwrap().abs() < 1e-12);
    }

    #[test]
    fn unfinished_horizon_week_is_skipped() {
        let (_, a2) = two_athlete_example();
        let mut cut = a2.clone();
        cut.realized = cut
            .realized
            .truncated_through(cut.realized.end().unwrap() - Duration::days(2));
        assert_eq!(athlete_weeks(&a2, &WeeklyAnalysis::default()).len(), 1);
        assert!(athlete_weeks(&cut, &WeeklyAnalysis::default()).is_empty());
    }
}
