//! Plot-ready data: same rolling ratio from different training patterns,
//! EWMA weight curves, and initial-value convergence traces.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::Result;
use crate::ratio::{
    acratio_ewma_coupled, acratio_rolling, compute_series, convergence_analysis, lambda_from_n, weight_table,
    ConvergenceReport, EwmaParams, InitialValue, MethodSpec, RatioPoint, RatioSeries,
};
use crate::series::{WindowConfig, WorkloadSeries};

pub fn figure_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date")
}

/// Three four-week daily profiles. Weekly totals differ but each sums to 140
/// with 50 in the final week.
pub fn same_ratio_profiles() -> Vec<WorkloadSeries> {
    let profiles: [(&str, [f64; 28]); 3] = [
        (
            "steady",
            [
                5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 0.0, //
                5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 0.0, //
                5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 0.0, //
                10.0, 5.0, 10.0, 5.0, 10.0, 10.0, 0.0,
            ],
        ),
        (
            "building",
            [
                0.0, 5.0, 0.0, 5.0, 0.0, 0.0, 0.0, //
                5.0, 0.0, 5.0, 0.0, 5.0, 5.0, 0.0, //
                10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 0.0, //
                5.0, 10.0, 5.0, 10.0, 10.0, 10.0, 0.0,
            ],
        ),
        (
            "front_loaded",
            [
                55.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0, //
                5.0, 5.0, 0.0, 5.0, 0.0, 5.0, 0.0, //
                0.0, 5.0, 0.0, 5.0, 0.0, 0.0, 0.0, //
                10.0, 10.0, 10.0, 10.0, 5.0, 5.0, 0.0,
            ],
        ),
    ];
    profiles
        .iter()
        .map(|(id, loads)| WorkloadSeries::from_daily(*id, figure_start(), loads).expect("valid profile"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SameRatioRow {
    pub profile: String,
    pub rolling: RatioPoint,
    pub ewma: RatioPoint,
}

/// Rolling coupled and default EWMA coupled ratio on the last day of each
/// profile.
pub fn same_ratio_rows() -> Result<Vec<SameRatioRow>> {
    let acute = EwmaParams::from_n(7);
    let chronic = EwmaParams::from_n(28);
    same_ratio_profiles()
        .into_iter()
        .map(|s| {
            let at = s.end().expect("profile is not empty");
            Ok(SameRatioRow {
                profile: s.athlete_id().to_string(),
                rolling: acratio_rolling(&s, WindowConfig::default(), at)?,
                ewma: acratio_ewma_coupled(&s, &acute, &chronic, at)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightPoint {
    pub n: u32,
    pub lambda: f64,
    /// 0 is the initial value, `t` the day of calculation.
    pub day: usize,
    pub weight: f64,
}

/// Expanded weights after `t` days for each time constant in `ns`.
pub fn weight_curves(ns: &[u32], t: usize) -> Result<Vec<WeightPoint>> {
    let mut out = Vec::new();
    for &n in ns {
        let lambda = lambda_from_n(n);
        let table = weight_table(lambda, t)?;
        out.extend(
            std::iter::once(table.w0)
                .chain(table.weights.iter().copied())
                .enumerate()
                .map(|(day, weight)| WeightPoint { n, lambda, day, weight }),
        );
    }
    Ok(out)
}

/// Coupled EWMA ratios for a profile repeated `repeats` times, started once
/// with the first load as E₀ and once from zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialValueScenario {
    pub profile: WorkloadSeries,
    pub from_first_load: RatioSeries,
    pub from_zero: RatioSeries,
    /// Chronic EWMA started at the first load versus zero, over the
    /// remaining records.
    pub chronic: ConvergenceReport,
}

pub fn initial_value_scenario(repeats: usize, epsilon: f64) -> Result<InitialValueScenario> {
    let base = same_ratio_profiles().pop().expect("three profiles");
    let loads: Vec<f64> = base.loads().collect::<Vec<_>>().repeat(repeats.max(1));
    let profile = WorkloadSeries::from_daily(base.athlete_id(), figure_start(), &loads)?;

    let run = |initial| {
        compute_series(
            &profile,
            &MethodSpec::EwmaCoupled {
                acute: EwmaParams::from_n(7).initial(initial),
                chronic: EwmaParams::from_n(28).initial(initial),
            },
        )
    };
    let rest = WorkloadSeries::from_daily(profile.athlete_id(), figure_start(), &loads[1..])?;
    let chronic = convergence_analysis(&rest, &EwmaParams::from_n(28), loads[0], 0.0, epsilon)?;
    Ok(InitialValueScenario {
        from_first_load: run(InitialValue::FirstLoad)?,
        from_zero: run(InitialValue::Zero)?,
        chronic,
        profile,
    })
}
