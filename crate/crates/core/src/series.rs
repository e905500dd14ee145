//! Daily workload histories and their weekly aggregation.
//!
//! A [`WorkloadSeries`] always covers a contiguous run of calendar days.
//! Days with no record are materialized with load 0 and `imputed = true`, so
//! computations treat them like rest days while audits can still tell them
//! apart.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayLoad {
    pub date: NaiveDate,
    pub load: f64,
    #[serde(default)]
    pub imputed: bool,
}

/// Ordered daily loads for one athlete, in arbitrary workload units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSeries {
    athlete_id: String,
    days: Vec<DayLoad>,
}

fn check_load(date: NaiveDate, load: f64) -> Result<()> {
    if load.is_finite() && load >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLoad { date, load })
    }
}

impl WorkloadSeries {
    pub fn empty(athlete_id: impl Into<String>) -> Self {
        Self {
            athlete_id: athlete_id.into(),
            days: Vec::new(),
        }
    }

    /// Consecutive daily loads starting at `start`.
    pub fn from_daily(athlete_id: impl Into<String>, start: NaiveDate, loads: &[f64]) -> Result<Self> {
        let mut days = Vec::with_capacity(loads.len());
        for (i, &load) in loads.iter().enumerate() {
            let date = start + Duration::days(i as i64);
            check_load(date, load)?;
            days.push(DayLoad {
                date,
                load,
                imputed: false,
            });
        }
        Ok(Self {
            athlete_id: athlete_id.into(),
            days,
        })
    }

    /// Dated records in strictly increasing order. Gaps between records are
    /// filled with imputed zero-load days.
    pub fn from_records<I>(athlete_id: impl Into<String>, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NaiveDate, f64)>,
    {
        let mut days: Vec<DayLoad> = Vec::new();
        for (date, load) in records {
            check_load(date, load)?;
            if let Some(last) = days.last() {
                if date <= last.date {
                    return Err(Error::UnorderedDates {
                        prev: last.date,
                        next: date,
                    });
                }
                let mut fill = last.date.succ_opt().expect("date overflow");
                while fill < date {
                    days.push(DayLoad {
                        date: fill,
                        load: 0.0,
                        imputed: true,
                    });
                    fill = fill.succ_opt().expect("date overflow");
                }
            }
            days.push(DayLoad {
                date,
                load,
                imputed: false,
            });
        }
        Ok(Self {
            athlete_id: athlete_id.into(),
            days,
        })
    }

    /// Rebuild from already-materialized days, checking contiguity.
    pub fn from_days(athlete_id: impl Into<String>, days: Vec<DayLoad>) -> Result<Self> {
        for pair in days.windows(2) {
            if pair[1].date != pair[0].date + Duration::days(1) {
                return Err(Error::UnorderedDates {
                    prev: pair[0].date,
                    next: pair[1].date,
                });
            }
        }
        for d in &days {
            check_load(d.date, d.load)?;
        }
        Ok(Self {
            athlete_id: athlete_id.into(),
            days,
        })
    }

    pub fn athlete_id(&self) -> &str {
        &self.athlete_id
    }

    pub fn days(&self) -> &[DayLoad] {
        &self.days
    }

    pub fn loads(&self) -> impl Iterator<Item = f64> + '_ {
        self.days.iter().map(|d| d.load)
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn start(&self) -> Option<NaiveDate> {
        self.days.first().map(|d| d.date)
    }

    pub fn end(&self) -> Option<NaiveDate> {
        self.days.last().map(|d| d.date)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let start = self.start()?;
        let offset = (date - start).num_days();
        if offset < 0 || offset as usize >= self.days.len() {
            None
        } else {
            Some(offset as usize)
        }
    }

    pub fn load_on(&self, date: NaiveDate) -> Option<f64> {
        self.index_of(date).map(|i| self.days[i].load)
    }

    pub fn total(&self) -> f64 {
        self.loads().sum()
    }

    pub fn imputed_dates(&self) -> Vec<NaiveDate> {
        self.days.iter().filter(|d| d.imputed).map(|d| d.date).collect()
    }

    /// Copy containing only days up to and including `date`.
    pub fn truncated_through(&self, date: NaiveDate) -> Self {
        let days = self.days.iter().copied().filter(|d| d.date <= date).collect();
        Self {
            athlete_id: self.athlete_id.clone(),
            days,
        }
    }

    /// Append `next`, which must start the day after this series ends.
    pub fn concat(&self, next: &WorkloadSeries) -> Result<Self> {
        let mut days = self.days.clone();
        if let (Some(end), Some(first)) = (self.end(), next.start()) {
            let expected = end + Duration::days(1);
            if first != expected {
                return Err(Error::DiscontinuousPlan { expected, got: first });
            }
        }
        days.extend_from_slice(&next.days);
        Ok(Self {
            athlete_id: self.athlete_id.clone(),
            days,
        })
    }

    pub fn shifted(&self, by_days: i64) -> Self {
        let days = self
            .days
            .iter()
            .map(|d| DayLoad {
                date: d.date + Duration::days(by_days),
                ..*d
            })
            .collect();
        Self {
            athlete_id: self.athlete_id.clone(),
            days,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let days = self
            .days
            .iter()
            .map(|d| DayLoad {
                load: d.load * factor,
                ..*d
            })
            .collect();
        Self {
            athlete_id: self.athlete_id.clone(),
            days,
        }
    }

    pub fn with_athlete_id(mut self, athlete_id: impl Into<String>) -> Self {
        self.athlete_id = athlete_id.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Chronic window includes the acute window.
    #[default]
    Coupled,
    /// Chronic window immediately precedes the acute window.
    Uncoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub acute_weeks: usize,
    pub chronic_weeks: usize,
    pub coupling: Coupling,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            acute_weeks: 1,
            chronic_weeks: 4,
            coupling: Coupling::Coupled,
        }
    }
}

impl WindowConfig {
    pub fn coupled(acute_weeks: usize, chronic_weeks: usize) -> Self {
        Self {
            acute_weeks,
            chronic_weeks,
            coupling: Coupling::Coupled,
        }
    }

    pub fn uncoupled(acute_weeks: usize, chronic_weeks: usize) -> Self {
        Self {
            acute_weeks,
            chronic_weeks,
            coupling: Coupling::Uncoupled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.acute_weeks == 0 || self.chronic_weeks == 0 {
            return Err(Error::param("window", "window lengths must be positive"));
        }
        if self.coupling == Coupling::Coupled && self.chronic_weeks <= self.acute_weeks {
            return Err(Error::param(
                "chronic_weeks",
                "coupled windows need chronic_weeks > acute_weeks",
            ));
        }
        Ok(())
    }

    /// Weeks of history needed to evaluate one ratio.
    pub fn span_weeks(&self) -> usize {
        match self.coupling {
            Coupling::Coupled => self.chronic_weeks,
            Coupling::Uncoupled => self.acute_weeks + self.chronic_weeks,
        }
    }
}

/// First day of the week containing `date`, for weeks starting on `anchor`.
pub fn week_start(date: NaiveDate, anchor: Weekday) -> NaiveDate {
    let back = (7 + date.weekday().num_days_from_monday() as i64 - anchor.num_days_from_monday() as i64) % 7;
    date - Duration::days(back)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeekBlock {
    pub week_start: NaiveDate,
    pub total: f64,
}

/// Days left out of the full-week blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialWeek {
    pub week_start: NaiveDate,
    pub days: usize,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyBlocks {
    pub anchor: Weekday,
    pub weeks: Vec<WeekBlock>,
    pub leading: Option<PartialWeek>,
    pub trailing: Option<PartialWeek>,
    pub diagnostic: Option<String>,
}

impl WeeklyBlocks {
    pub fn totals(&self) -> Vec<f64> {
        self.weeks.iter().map(|w| w.total).collect()
    }

    pub fn excluded_total(&self) -> f64 {
        self.leading.map_or(0.0, |p| p.total) + self.trailing.map_or(0.0, |p| p.total)
    }
}

/// Aggregate into full anchored weeks. Partial leading/trailing weeks are
/// reported separately and never folded into a block.
pub fn to_weekly_blocks(series: &WorkloadSeries, anchor: Weekday) -> WeeklyBlocks {
    let mut out = WeeklyBlocks {
        anchor,
        weeks: Vec::new(),
        leading: None,
        trailing: None,
        diagnostic: None,
    };
    let days = series.days();
    if days.is_empty() {
        out.diagnostic = Some("series is empty".into());
        return out;
    }

    let mut i = 0;
    while i < days.len() {
        let ws = week_start(days[i].date, anchor);
        let mut j = i;
        let mut total = 0.0;
        while j < days.len() && week_start(days[j].date, anchor) == ws {
            total += days[j].load;
            j += 1;
        }
        let count = j - i;
        if count == 7 {
            out.weeks.push(WeekBlock { week_start: ws, total });
        } else {
            let partial = PartialWeek {
                week_start: ws,
                days: count,
                total,
            };
            // contiguous series: a short week is either first or last
            if i == 0 {
                out.leading = Some(partial);
            } else {
                out.trailing = Some(partial);
            }
        }
        i = j;
    }
    if out.weeks.is_empty() {
        out.diagnostic = Some(format!(
            "series of {} days contains no full week anchored on {anchor}",
            days.len()
        ));
    }
    out
}

/// Mean daily load over the `window_days` ending at `at` (inclusive).
/// `None` when the window reaches before the start of the series.
pub fn rolling_daily_mean(series: &WorkloadSeries, window_days: usize, at: NaiveDate) -> Option<f64> {
    if window_days == 0 {
        return None;
    }
    let end = series.index_of(at)?;
    if end + 1 < window_days {
        return None;
    }
    let window = &series.days()[end + 1 - window_days..=end];
    Some(window.iter().map(|d| d.load).sum::<f64>() / window_days as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn two_full_weeks_from_monday() {
        // 2024-01-01 is a Monday
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 1), &[1.0; 14]).unwrap();
        let b = to_weekly_blocks(&s, Weekday::Mon);
        assert_eq!(b.totals(), vec![7.0, 7.0]);
        assert!(b.leading.is_none() && b.trailing.is_none());
    }

    #[test]
    fn saturday_start_truncates_two_days() {
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 6), &[1.0; 16]).unwrap();
        let b = to_weekly_blocks(&s, Weekday::Mon);
        assert_eq!(b.totals(), vec![7.0, 7.0]);
        assert_eq!(b.leading.unwrap().days, 2);
        assert!(b.trailing.is_none());
        assert_eq!(b.excluded_total(), 2.0);
    }

    #[test]
    fn injured_after_tuesday_has_partial_week_of_four_hours() {
        let mut loads = vec![1.0; 21];
        loads.extend([2.0, 2.0]);
        let s = WorkloadSeries::from_daily("athlete1", d(2024, 1, 1), &loads).unwrap();
        let b = to_weekly_blocks(&s, Weekday::Mon);
        let current = b.trailing.unwrap();
        assert_eq!(current.days, 2);
        assert_eq!(current.total, 4.0);
    }

    #[test]
    fn shorter_than_a_week_is_empty_with_diagnostic() {
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 3), &[1.0; 5]).unwrap();
        let b = to_weekly_blocks(&s, Weekday::Mon);
        assert!(b.weeks.is_empty());
        assert!(b.diagnostic.is_some());
    }

    #[test]
    fn custom_anchor() {
        // Sunday-anchored weeks starting 2024-01-07
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 1), &[1.0; 14]).unwrap();
        let b = to_weekly_blocks(&s, Weekday::Sun);
        assert_eq!(b.weeks.len(), 1);
        assert_eq!(b.weeks[0].week_start, d(2024, 1, 7));
        assert_eq!(b.leading.unwrap().days, 6);
        assert_eq!(b.trailing.unwrap().days, 1);
    }

    #[test]
    fn rolling_mean_examples() {
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 1), &[5.0; 10]).unwrap();
        assert_eq!(rolling_daily_mean(&s, 7, d(2024, 1, 10)), Some(5.0));

        let s = WorkloadSeries::from_daily("a", d(2024, 1, 1), &[0., 0., 0., 0., 0., 0., 7.]).unwrap();
        assert_eq!(rolling_daily_mean(&s, 7, d(2024, 1, 7)), Some(1.0));
        assert_eq!(rolling_daily_mean(&s, 1, d(2024, 1, 7)), Some(7.0));
        assert_eq!(rolling_daily_mean(&s, 1, d(2024, 1, 3)), Some(0.0));
    }

    #[test]
    fn rolling_mean_not_yet_defined() {
        let s = WorkloadSeries::from_daily("a", d(2024, 1, 1), &[5.0; 6]).unwrap();
        assert_eq!(rolling_daily_mean(&s, 7, d(2024, 1, 6)), None);
        assert_eq!(rolling_daily_mean(&s, 7, d(2025, 1, 6)), None);
    }

    #[test]
    fn gaps_are_imputed_and_flagged() {
        let s = WorkloadSeries::from_records("a", [(d(2024, 1, 1), 3.0), (d(2024, 1, 4), 2.0)]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.imputed_dates(), vec![d(2024, 1, 2), d(2024, 1, 3)]);
        assert_eq!(s.load_on(d(2024, 1, 2)), Some(0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            WorkloadSeries::from_daily("a", d(2024, 1, 1), &[1.0, -1.0]),
            Err(Error::InvalidLoad { .. })
        ));
        assert!(WorkloadSeries::from_daily("a", d(2024, 1, 1), &[f64::NAN]).is_err());
        assert!(matches!(
            WorkloadSeries::from_records("a", [(d(2024, 1, 2), 1.0), (d(2024, 1, 2), 1.0)]),
            Err(Error::UnorderedDates { .. })
        ));
    }

    #[test]
    fn coupled_window_validation() {
        assert!(WindowConfig::coupled(1, 4).validate().is_ok());
        assert!(WindowConfig::coupled(4, 4).validate().is_err());
        assert!(WindowConfig::uncoupled(4, 3).validate().is_ok());
        assert!(WindowConfig::uncoupled(0, 3).validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn quarter_loads(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
            // multiples of 0.25 keep every partial sum exact
            prop::collection::vec((0u32..400).prop_map(|q| q as f64 * 0.25), 1..max_len)
        }

        proptest! {
            #[test]
            fn aggregation_conserves_total(loads in quarter_loads(120), offset in 0i64..7) {
                let s = WorkloadSeries::from_daily("p", d(2024, 1, 1) + Duration::days(offset), &loads).unwrap();
                let b = to_weekly_blocks(&s, Weekday::Mon);
                let blocks: f64 = b.totals().iter().sum();
                prop_assert_eq!(blocks + b.excluded_total(), s.total());
            }

            #[test]
            fn rolling_mean_is_translation_invariant(loads in quarter_loads(60), shift in -400i64..400, window in 1usize..30) {
                let s = WorkloadSeries::from_daily("p", d(2024, 3, 1), &loads).unwrap();
                let moved = s.shifted(shift);
                for day in s.days() {
                    let a = rolling_daily_mean(&s, window, day.date);
                    let b = rolling_daily_mean(&moved, window, day.date + Duration::days(shift));
                    prop_assert_eq!(a, b);
                }
            }

            #[test]
            fn scaling_scales_blocks_and_means(loads in quarter_loads(60), c in 0.01f64..100.0) {
                let s = WorkloadSeries::from_daily("p", d(2024, 1, 1), &loads).unwrap();
                let scaled = s.scaled(c);
                let a = to_weekly_blocks(&s, Weekday::Mon).totals();
                let b = to_weekly_blocks(&scaled, Weekday::Mon).totals();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x * c - y).abs() <= 1e-9 * (1.0 + y.abs()));
                }
                let end = s.end().unwrap();
                if let (Some(m), Some(ms)) = (rolling_daily_mean(&s, 3, end), rolling_daily_mean(&scaled, 3, end)) {
                    prop_assert!((m * c - ms).abs() <= 1e-9 * (1.0 + ms.abs()));
                }
            }
        }
    }
}
