use chrono::{Duration, NaiveDate, Weekday};

use super::{LoadRatio, RatioMethod, RatioPoint};
use crate::error::{Error, Result};
use crate::series::{week_start, Coupling, WindowConfig, WorkloadSeries};

/// Ratio from weekly totals (most recent last), using the trailing weeks.
///
/// Acute is the mean weekly total over the acute window. Chronic is the mean
/// weekly total over the chronic window, which either contains the acute
/// window (coupled) or ends just before it (uncoupled).
pub fn ratio_from_weekly_totals(totals: &[f64], cfg: WindowConfig) -> Result<LoadRatio> {
    cfg.validate()?;
    let span = cfg.span_weeks();
    if totals.len() < span {
        return Err(Error::param(
            "weekly_totals",
            format!("need {span} weeks, got {}", totals.len()),
        ));
    }
    let n = totals.len();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let acute = mean(&totals[n - cfg.acute_weeks..]);
    let chronic = match cfg.coupling {
        Coupling::Coupled => mean(&totals[n - cfg.chronic_weeks..]),
        Coupling::Uncoupled => {
            let end = n - cfg.acute_weeks;
            mean(&totals[end - cfg.chronic_weeks..end])
        }
    };
    Ok(LoadRatio::new(acute, chronic))
}

/// Rolling-average ratio at `at`, with weeks taken as trailing 7-day blocks
/// ending on `at`.
pub fn acratio_rolling(series: &WorkloadSeries, cfg: WindowConfig, at: NaiveDate) -> Result<RatioPoint> {
    cfg.validate()?;
    let idx = series.index_of(at).ok_or(Error::DateOutOfRange(at))?;
    let span = cfg.span_weeks();
    let needed = span * 7;
    if idx + 1 < needed {
        return Err(Error::InsufficientHistory {
            at,
            needed,
            available: idx + 1,
        });
    }
    let days = series.days();
    let first = idx + 1 - needed;
    let totals: Vec<f64> = (0..span)
        .map(|w| days[first + 7 * w..first + 7 * (w + 1)].iter().map(|d| d.load).sum())
        .collect();
    let loads = ratio_from_weekly_totals(&totals, cfg)?;
    Ok(RatioPoint::new(at, loads, RatioMethod::rolling(cfg.coupling), true))
}

/// Rolling-average ratio on anchored calendar weeks. The week containing
/// `at` counts only the days up to and including `at`; earlier weeks are
/// complete.
pub fn acratio_calendar_week(
    series: &WorkloadSeries,
    cfg: WindowConfig,
    anchor: Weekday,
    at: NaiveDate,
) -> Result<RatioPoint> {
    cfg.validate()?;
    let idx = series.index_of(at).ok_or(Error::DateOutOfRange(at))?;
    let span = cfg.span_weeks();
    let current = week_start(at, anchor);
    let earliest = current - Duration::weeks(span as i64 - 1);
    let start = series.start().ok_or(Error::EmptySeries)?;
    if start > earliest {
        return Err(Error::InsufficientHistory {
            at,
            needed: (at - earliest).num_days() as usize + 1,
            available: idx + 1,
        });
    }
    let base = series.index_of(earliest).expect("earliest lies inside the series");
    let days = series.days();
    let totals: Vec<f64> = (0..span)
        .map(|w| {
            let lo = base + 7 * w;
            let hi = if w + 1 == span { idx + 1 } else { lo + 7 };
            days[lo..hi].iter().map(|d| d.load).sum()
        })
        .collect();
    let loads = ratio_from_weekly_totals(&totals, cfg)?;
    Ok(RatioPoint::new(at, loads, RatioMethod::rolling(cfg.coupling), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::RatioValue;

    fn monday() -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap()
    }

    fn weekly_series(totals: &[f64]) -> WorkloadSeries {
        // spread each weekly total evenly over its seven days
        let loads: Vec<f64> = totals.iter().flat_map(|&t| [t / 7.0; 7]).collect();
        WorkloadSeries::from_daily("a", monday(), &loads).unwrap()
    }

    #[test]
    fn zero_prior_weeks_give_four_for_any_magnitude() {
        for w in [1.0, 10.0, 1e6, 0.37] {
            let r = ratio_from_weekly_totals(&[0.0, 0.0, 0.0, w], WindowConfig::default()).unwrap();
            assert_eq!(r.ratio, RatioValue::Defined(4.0), "W = {w}");
        }
    }

    #[test]
    fn zero_prior_weeks_uncoupled_is_undefined() {
        let r = ratio_from_weekly_totals(&[0.0, 0.0, 0.0, 10.0], WindowConfig::uncoupled(1, 3)).unwrap();
        assert!(r.ratio.is_undefined());
        assert_eq!(r.chronic, 0.0);
    }

    #[test]
    fn thirty_thirty_thirty_fifty() {
        let r = ratio_from_weekly_totals(&[30.0, 30.0, 30.0, 50.0], WindowConfig::default()).unwrap();
        assert_eq!(r.acute, 50.0);
        assert_eq!(r.chronic, 35.0);
        assert!((r.ratio.value().unwrap() - 1.428_571_428_571_428_6).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_three_and_four_week_chronic() {
        let totals = [20.0, 10.0, 10.0, 10.0, 13.0];
        let four = ratio_from_weekly_totals(&totals, WindowConfig::uncoupled(1, 4)).unwrap();
        assert_eq!(four.chronic, 12.5);
        let three = ratio_from_weekly_totals(&totals, WindowConfig::uncoupled(1, 3)).unwrap();
        assert_eq!(three.chronic, 10.0);
        assert!((three.ratio.value().unwrap() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn two_week_acute_average() {
        let r = ratio_from_weekly_totals(&[10.0, 10.0, 20.0, 40.0], WindowConfig::coupled(2, 4)).unwrap();
        assert_eq!(r.acute, 30.0);
        assert_eq!(r.chronic, 20.0);
    }

    #[test]
    fn daily_series_matches_weekly_totals() {
        let s = weekly_series(&[0.0, 0.0, 0.0, 70.0]);
        let p = acratio_rolling(&s, WindowConfig::default(), s.end().unwrap()).unwrap();
        assert!((p.ratio.value().unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(p.method, RatioMethod::RollingCoupled);

        let p = acratio_rolling(&s, WindowConfig::uncoupled(1, 3), s.end().unwrap()).unwrap();
        assert!(p.ratio.is_undefined());
    }

    #[test]
    fn rolling_needs_full_history() {
        let s = weekly_series(&[7.0, 7.0, 7.0]);
        let err = acratio_rolling(&s, WindowConfig::default(), s.end().unwrap()).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientHistory {
                needed: 28,
                available: 21,
                ..
            }
        ));
        // uncoupled 1 + 4 weeks needs 35 days
        let s = weekly_series(&[7.0; 4]);
        assert!(acratio_rolling(&s, WindowConfig::uncoupled(1, 4), s.end().unwrap()).is_err());
        assert!(acratio_rolling(&s, WindowConfig::uncoupled(1, 3), s.end().unwrap()).is_ok());
    }

    #[test]
    fn calendar_week_uses_partial_current_week() {
        // three weeks at 1/day then 2/day through Tuesday
        let mut loads = vec![1.0; 21];
        loads.extend([2.0, 2.0]);
        let s = WorkloadSeries::from_daily("a", monday(), &loads).unwrap();
        let p = acratio_calendar_week(&s, WindowConfig::default(), Weekday::Mon, s.end().unwrap()).unwrap();
        assert_eq!(p.acute, 4.0);
        assert_eq!(p.chronic, 25.0 / 4.0);
    }

    #[test]
    fn calendar_week_on_sunday_equals_trailing() {
        let loads: Vec<f64> = (0..35).map(|i| (i % 5) as f64).collect();
        let s = WorkloadSeries::from_daily("a", monday(), &loads).unwrap();
        let sunday = s.end().unwrap();
        let a = acratio_calendar_week(&s, WindowConfig::default(), Weekday::Mon, sunday).unwrap();
        let b = acratio_rolling(&s, WindowConfig::default(), sunday).unwrap();
        assert_eq!(a, b);
    }
}
