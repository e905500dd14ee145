//! Small hand-built cohorts.

use chrono::{Duration, NaiveDate};

use super::AthleteOutcome;
use crate::series::WorkloadSeries;

/// Monday 2024-01-01.
pub fn example_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date")
}

/// Two athletes with identical chronic load (three weeks at 1 h/day).
/// In week four athlete 1 plans 2 h/day and is injured at the end of
/// Tuesday's session; athlete 2 plans 1 h/day and finishes the week.
pub fn two_athlete_example() -> (AthleteOutcome, AthleteOutcome) {
    let start = example_start();
    let build = |id: &str, daily: f64| {
        let mut loads = vec![1.0; 21];
        loads.extend([daily; 7]);
        WorkloadSeries::from_daily(id, start, &loads).expect("valid loads")
    };
    let tuesday = start + Duration::days(22);

    let planned1 = build("athlete-1", 2.0);
    let injured = AthleteOutcome {
        athlete_id: "athlete-1".into(),
        schedule: "team".into(),
        realized: planned1.truncated_through(tuesday),
        planned: planned1,
        injury_day: Some(tuesday),
        injury_fraction_of_week: Some(2.0 / 7.0),
    };
    let planned2 = build("athlete-2", 1.0);
    let uninjured = AthleteOutcome {
        athlete_id: "athlete-2".into(),
        schedule: "team".into(),
        realized: planned2.clone(),
        planned: planned2,
        injury_day: None,
        injury_fraction_of_week: None,
    };
    (injured, uninjured)
}
