use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::bias::{summarize_records, weekly_points, BiasReport};
use super::{scheduled_days, AthleteOutcome, WeeklyAnalysis};
use crate::error::{Error, Result};
use crate::ratio::{ratio_from_weekly_totals, LoadRatio, RatioMethod, RatioPoint};
use crate::series::{week_start, WorkloadSeries};

/// Ways of pairing exposures with outcomes that avoid comparing a
/// truncated injury week with complete weeks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mitigation {
    /// Ratio of week k−1 against injury during week k.
    SubsequentWeek,
    /// Acute load averaged over the current and previous week.
    TwoWeekAcute,
    /// Daily acute and chronic moving averages, one record per day.
    DailyMovingAverage {
        acute_days: usize,
        chronic_days: usize,
        include_current_day: bool,
    },
    /// Comparators' current week scaled to the injured athlete's elapsed
    /// share of scheduled training days.
    ProportionalCensoring,
    /// Planned loads stand in for realized loads.
    PlannedProxy,
}

impl Mitigation {
    pub fn daily_default() -> Self {
        Mitigation::DailyMovingAverage {
            acute_days: 7,
            chronic_days: 28,
            include_current_day: false,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mitigation::SubsequentWeek => "subsequent_week",
            Mitigation::TwoWeekAcute => "two_week_acute",
            Mitigation::DailyMovingAverage { .. } => "daily_moving_average",
            Mitigation::ProportionalCensoring => "proportional_censoring",
            Mitigation::PlannedProxy => "planned_proxy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRecord {
    pub athlete_id: String,
    pub exposure: RatioPoint,
    pub injured: bool,
    /// Last day whose load entered the exposure.
    pub data_through: NaiveDate,
}

pub type GapSummary = BiasReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationOutput {
    pub strategy: Option<Mitigation>,
    pub records: Vec<ExposureRecord>,
    pub metadata: Vec<String>,
}

impl MitigationOutput {
    /// Injured versus uninjured mean exposure.
    pub fn summary(&self) -> GapSummary {
        let method = self
            .records
            .first()
            .map_or(RatioMethod::RollingCoupled, |r| r.exposure.method);
        summarize_records(self.records.iter().map(|r| (&r.exposure, r.injured)), method)
    }
}

/// Unmitigated current-week exposures, for comparison.
pub fn raw_exposures(outcomes: &[AthleteOutcome], analysis: &WeeklyAnalysis) -> MitigationOutput {
    let records = outcomes
        .iter()
        .flat_map(|o| week_records(o, &o.realized, analysis, o.injury_day))
        .collect();
    MitigationOutput {
        strategy: None,
        records,
        metadata: vec!["current-week ratio on realized loads".into()],
    }
}

fn week_records(
    o: &AthleteOutcome,
    series: &WorkloadSeries,
    analysis: &WeeklyAnalysis,
    stop: Option<NaiveDate>,
) -> Vec<ExposureRecord> {
    weekly_points(series, analysis, stop)
        .into_iter()
        .map(|(ws, p)| ExposureRecord {
            athlete_id: o.athlete_id.clone(),
            injured: o.injury_day.is_some_and(|d| d >= ws && d <= p.at),
            data_through: p.at,
            exposure: p,
        })
        .collect()
}

pub fn apply_mitigation(
    outcomes: &[AthleteOutcome],
    strategy: Mitigation,
    analysis: &WeeklyAnalysis,
) -> Result<MitigationOutput> {
    analysis.window.validate()?;
    let (records, metadata) = match strategy {
        Mitigation::SubsequentWeek => (
            subsequent_week(outcomes, analysis),
            vec!["exposure: ratio of the previous complete week; outcome: injury in the following week".into()],
        ),
        Mitigation::TwoWeekAcute => {
            let mut two = *analysis;
            two.window.acute_weeks = 2;
            two.window.validate()?;
            let records = outcomes
                .iter()
                .flat_map(|o| week_records(o, &o.realized, &two, o.injury_day))
                .collect();
            (
                records,
                vec!["acute load: mean of the current and previous week".into()],
            )
        }
        Mitigation::DailyMovingAverage {
            acute_days,
            chronic_days,
            include_current_day,
        } => {
            if acute_days == 0 || chronic_days <= acute_days {
                return Err(Error::param("daily windows", "need 0 < acute_days < chronic_days"));
            }
            let records = outcomes
                .iter()
                .flat_map(|o| daily_records(o, acute_days, chronic_days, include_current_day))
                .collect();
            let note = if include_current_day {
                "daily moving averages including the current day"
            } else {
                "daily moving averages ending the day before the outcome day"
            };
            (records, vec![note.into()])
        }
        Mitigation::ProportionalCensoring => (
            proportional_censoring(outcomes, analysis),
            vec![
                "assumes daily activity is equal throughout the week".into(),
                "comparator week censored at the case's elapsed share of scheduled training days".into(),
            ],
        ),
        Mitigation::PlannedProxy => {
            let records = outcomes
                .iter()
                .flat_map(|o| {
                    let last_week = o.injury_day.map(|d| week_start(d, analysis.anchor));
                    week_records(o, &o.planned, analysis, None)
                        .into_iter()
                        .filter(move |r| last_week.is_none_or(|lw| week_start(r.exposure.at, analysis.anchor) <= lw))
                })
                .collect();
            (records, vec!["exposure computed from planned loads".into()])
        }
    };
    Ok(MitigationOutput {
        strategy: Some(strategy),
        records,
        metadata,
    })
}

fn subsequent_week(outcomes: &[AthleteOutcome], analysis: &WeeklyAnalysis) -> Vec<ExposureRecord> {
    let mut out = Vec::new();
    for o in outcomes {
        let pts = weekly_points(&o.realized, analysis, o.injury_day);
        for pair in pts.windows(2) {
            let ((prev_ws, prev), (ws, cur)) = (&pair[0], &pair[1]);
            if *ws != *prev_ws + Duration::days(7) {
                continue;
            }
            out.push(ExposureRecord {
                athlete_id: o.athlete_id.clone(),
                exposure: *prev,
                injured: o.injury_day == Some(cur.at),
                data_through: prev.at,
            });
        }
    }
    out
}

fn daily_records(
    o: &AthleteOutcome,
    acute_days: usize,
    chronic_days: usize,
    include_current_day: bool,
) -> Vec<ExposureRecord> {
    let days = o.realized.days();
    let mut prefix = Vec::with_capacity(days.len() + 1);
    prefix.push(0.0);
    for d in days {
        prefix.push(prefix.last().unwrap() + d.load);
    }
    let window = |end: usize, len: usize| (prefix[end + 1] - prefix[end + 1 - len]) / len as f64;

    let mut out = Vec::new();
    for (i, d) in days.iter().enumerate() {
        let end = if include_current_day {
            i
        } else if i == 0 {
            continue;
        } else {
            i - 1
        };
        if end + 1 < chronic_days {
            continue;
        }
        let loads = LoadRatio::new(window(end, acute_days), window(end, chronic_days));
        out.push(ExposureRecord {
            athlete_id: o.athlete_id.clone(),
            exposure: RatioPoint::new(d.date, loads, RatioMethod::RollingCoupled, true),
            injured: o.injury_day == Some(d.date),
            data_through: days[end].date,
        });
    }
    out
}

/// Cases of one calendar week with their elapsed fraction, and the
/// uninjured athlete-weeks available as comparators.
#[derive(Default)]
struct WeekGroup<'a> {
    cases: Vec<(ExposureRecord, f64)>,
    comparators: Vec<&'a AthleteOutcome>,
}

fn proportional_censoring(outcomes: &[AthleteOutcome], analysis: &WeeklyAnalysis) -> Vec<ExposureRecord> {
    let span = analysis.window.span_weeks();
    let mut weeks: BTreeMap<NaiveDate, WeekGroup> = BTreeMap::new();
    for o in outcomes {
        for (ws, p) in weekly_points(&o.realized, analysis, o.injury_day) {
            let entry = weeks.entry(ws).or_default();
            if o.injury_day == Some(p.at) {
                let fraction = o.injury_fraction_of_week.unwrap_or_else(|| {
                    let (elapsed, total) = scheduled_days(&o.planned, p.at, analysis.anchor);
                    elapsed as f64 / total.max(1) as f64
                });
                entry.cases.push((
                    ExposureRecord {
                        athlete_id: o.athlete_id.clone(),
                        exposure: p,
                        injured: true,
                        data_through: p.at,
                    },
                    fraction,
                ));
            } else {
                entry.comparators.push(o);
            }
        }
    }

    let mut out = Vec::new();
    for (
        ws,
        WeekGroup {
            mut cases,
            mut comparators,
        },
    ) in weeks
    {
        if cases.is_empty() {
            continue;
        }
        cases.sort_by(|a, b| a.0.athlete_id.cmp(&b.0.athlete_id));
        comparators.sort_by(|a, b| a.athlete_id.cmp(&b.athlete_id));
        for (j, o) in comparators.iter().enumerate() {
            let fraction = cases[j % cases.len()].1;
            let first = ws - Duration::weeks(span as i64 - 1);
            let base = o.realized.index_of(first).expect("week has full history");
            let loads: Vec<f64> = o.realized.loads().skip(base).take(span * 7).collect();
            let mut totals: Vec<f64> = loads.chunks(7).map(|c| c.iter().sum()).collect();
            *totals.last_mut().unwrap() *= fraction;
            let ratio = ratio_from_weekly_totals(&totals, analysis.window).expect("validated window");
            let week_end = ws + Duration::days(6);
            out.push(ExposureRecord {
                athlete_id: o.athlete_id.clone(),
                exposure: RatioPoint::new(week_end, ratio, RatioMethod::rolling(analysis.window.coupling), true),
                injured: false,
                data_through: week_end,
            });
        }
        out.extend(cases.into_iter().map(|c| c.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::fixtures::two_athlete_example;
    use crate::study::{simulate_cohort, CohortSpec, Hazard};

    #[test]
    fn proportional_censoring_on_worked_pair() {
        let (a1, a2) = two_athlete_example();
        let out = apply_mitigation(&[a1, a2], Mitigation::ProportionalCensoring, &WeeklyAnalysis::default()).unwrap();
        let comparator = out.records.iter().find(|r| r.athlete_id == "athlete-2").unwrap();
        // 2/7 of a 7 hour week
        assert!((comparator.exposure.acute - 2.0).abs() < 1e-12);
        assert!(out.metadata.iter().any(|m| m.contains("equal throughout the week")));
        let case = out.records.iter().find(|r| r.injured).unwrap();
        assert_eq!(case.exposure.acute, 4.0);
    }

    #[test]
    fn proportional_censoring_without_cases_is_empty() {
        let (_, a2) = two_athlete_example();
        let out = apply_mitigation(&[a2], Mitigation::ProportionalCensoring, &WeeklyAnalysis::default()).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn planned_proxy_without_deviation_matches_raw() {
        let spec = CohortSpec {
            n_athletes: 20,
            hazard: Hazard::Constant { p: 0.0 },
            horizon_weeks: 8,
            ..CohortSpec::default()
        };
        let out = simulate_cohort(&spec).unwrap();
        let a = WeeklyAnalysis::default();
        let proxy = apply_mitigation(&out, Mitigation::PlannedProxy, &a).unwrap();
        assert_eq!(proxy.records, raw_exposures(&out, &a).records);
    }

    #[test]
    fn planned_proxy_uses_full_planned_week() {
        let (a1, _) = two_athlete_example();
        let out = apply_mitigation(&[a1], Mitigation::PlannedProxy, &WeeklyAnalysis::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].injured);
        assert_eq!(out.records[0].exposure.acute, 14.0);
    }

    #[test]
    fn subsequent_week_attributes_injury_to_previous_week() {
        // five weeks so week 3 (complete) precedes the injury week 4
        let (a1, _) = two_athlete_example();
        let mut o = a1.clone();
        let shift = |s: &WorkloadSeries| {
            let mut loads = vec![1.0; 7];
            loads.extend(s.loads());
            WorkloadSeries::from_daily(s.athlete_id(), s.start().unwrap() - Duration::days(7), &loads).unwrap()
        };
        o.planned = shift(&a1.planned);
        o.realized = shift(&a1.realized);
        let out = apply_mitigation(&[o], Mitigation::SubsequentWeek, &WeeklyAnalysis::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert!(r.injured);
        assert_eq!(r.exposure.ratio.value(), Some(1.0));
        assert!(r.data_through < a1.injury_day.unwrap());
    }

    #[test]
    fn two_week_acute_softens_the_drop() {
        let (a1, _) = two_athlete_example();
        let out = apply_mitigation(&[a1], Mitigation::TwoWeekAcute, &WeeklyAnalysis::default()).unwrap();
        let r = &out.records[0];
        assert_eq!(r.exposure.acute, (7.0 + 4.0) / 2.0);
    }

    #[test]
    fn daily_moving_average_variants() {
        let (a1, _) = two_athlete_example();
        let daily = |include_current_day| {
            let m = Mitigation::DailyMovingAverage {
                acute_days: 7,
                chronic_days: 14,
                include_current_day,
            };
            let out = apply_mitigation(std::slice::from_ref(&a1), m, &WeeklyAnalysis::default()).unwrap();
            out.records.into_iter().find(|r| r.injured).unwrap()
        };
        let ex = daily(false);
        let inc = daily(true);
        assert_eq!(ex.exposure.at, a1.injury_day.unwrap());
        assert!(ex.data_through < ex.exposure.at);
        assert_eq!(inc.data_through, inc.exposure.at);
        assert!((ex.exposure.acute - 8.0 / 7.0).abs() < 1e-12);
        assert!((inc.exposure.acute - 9.0 / 7.0).abs() < 1e-12);
        // 22 days precede the injury, too few for a 28-day window
        let short = apply_mitigation(
            std::slice::from_ref(&a1),
            Mitigation::daily_default(),
            &WeeklyAnalysis::default(),
        )
        .unwrap();
        assert!(short.records.is_empty());
    }

    #[test]
    fn no_strategy_reads_past_the_injury() {
        let spec = CohortSpec {
            n_athletes: 300,
            hazard: Hazard::Constant { p: 0.02 },
            horizon_weeks: 10,
            ..CohortSpec::default()
        };
        let out = simulate_cohort(&spec).unwrap();
        let a = WeeklyAnalysis::default();
        let injury: BTreeMap<&str, NaiveDate> = out
            .iter()
            .filter_map(|o| o.injury_day.map(|d| (o.athlete_id.as_str(), d)))
            .collect();
        for m in [
            Mitigation::SubsequentWeek,
            Mitigation::TwoWeekAcute,
            Mitigation::daily_default(),
            Mitigation::ProportionalCensoring,
        ] {
            let res = apply_mitigation(&out, m, &a).unwrap();
            for r in res.records {
                if let Some(d) = injury.get(r.athlete_id.as_str()) {
                    assert!(
                        r.data_through <= *d,
                        "{m:?} used data after injury for {}",
                        r.athlete_id
                    );
                }
            }
        }
    }
}
