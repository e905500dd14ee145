use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{LoadRatio, RatioMethod, RatioPoint};
use crate::error::{Error, Result};
use crate::series::WorkloadSeries;

/// Decay constant for an N-day time constant: 2/(N+1).
pub fn lambda_from_n(n: u32) -> f64 {
    2.0 / (n as f64 + 1.0)
}

/// Where the recursion starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialValue {
    /// The first record becomes E₀; the second record is L₁.
    #[default]
    FirstLoad,
    Zero,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwmaParams {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_source: Option<u32>,
    #[serde(default)]
    pub initial: InitialValue,
    /// Number of leading outputs flagged as not yet converged.
    #[serde(default)]
    pub burn_in_days: usize,
}

impl EwmaParams {
    pub fn from_n(n: u32) -> Self {
        Self {
            lambda: lambda_from_n(n),
            n_source: Some(n),
            initial: InitialValue::FirstLoad,
            burn_in_days: 0,
        }
    }

    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            n_source: None,
            initial: InitialValue::FirstLoad,
            burn_in_days: 0,
        }
    }

    pub fn initial(mut self, initial: InitialValue) -> Self {
        self.initial = initial;
        self
    }

    pub fn burn_in(mut self, days: usize) -> Self {
        self.burn_in_days = days;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::param("lambda", format!("{} is not in (0, 1]", self.lambda)));
        }
        if let Some(n) = self.n_source {
            if n == 0 {
                return Err(Error::param("n_source", "must be positive"));
            }
            if self.lambda != lambda_from_n(n) {
                return Err(Error::param(
                    "lambda",
                    format!("{} does not equal 2/({n}+1)", self.lambda),
                ));
            }
        }
        if let InitialValue::Fixed(v) = self.initial {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param("initial", format!("{v} is not a nonnegative value")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwmaPoint {
    pub date: NaiveDate,
    pub value: f64,
    pub converged: bool,
}

/// E_t for t = 1..=n given E₀.
pub fn ewma_recursive(loads: &[f64], lambda: f64, e0: f64) -> Vec<f64> {
    let mut e = e0;
    loads
        .iter()
        .map(|&l| {
            e = lambda * l + (1.0 - lambda) * e;
            e
        })
        .collect()
}

/// Day-by-day EWMA, one output per record.
///
/// Under [`InitialValue::FirstLoad`] the first output is E₀ itself.
pub fn ewma(series: &WorkloadSeries, p: &EwmaParams) -> Result<Vec<EwmaPoint>> {
    p.validate()?;
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let days = series.days();
    let (e0, rest, lead) = match p.initial {
        InitialValue::FirstLoad => (days[0].load, &days[1..], Some(days[0].date)),
        InitialValue::Zero => (0.0, days, None),
        InitialValue::Fixed(v) => (v, days, None),
    };
    let loads: Vec<f64> = rest.iter().map(|d| d.load).collect();
    let values = ewma_recursive(&loads, p.lambda, e0);

    let dated = lead
        .map(|d| (d, e0))
        .into_iter()
        .chain(rest.iter().map(|d| d.date).zip(values));
    Ok(dated
        .enumerate()
        .map(|(i, (date, value))| EwmaPoint {
            date,
            value,
            converged: i >= p.burn_in_days,
        })
        .collect())
}

/// Coupled EWMA ratio: both streams run over the full history up to `at`.
pub fn acratio_ewma_coupled(
    series: &WorkloadSeries,
    acute: &EwmaParams,
    chronic: &EwmaParams,
    at: NaiveDate,
) -> Result<RatioPoint> {
    let idx = series.index_of(at).ok_or(Error::DateOutOfRange(at))?;
    let upto = series.truncated_through(at);
    let a = ewma(&upto, acute)?;
    let c = ewma(&upto, chronic)?;
    let (a, c) = (a[idx], c[idx]);
    Ok(RatioPoint::new(
        at,
        LoadRatio::new(a.value, c.value),
        RatioMethod::EwmaCoupled,
        a.converged && c.converged,
    ))
}

/// EWMA over a closed window with weights λ(1−λ)^(n−i) renormalized to
/// sum to one. No initial value is involved.
pub fn windowed_ewma(loads: &[f64], lambda: f64) -> f64 {
    let n = loads.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &l) in loads.iter().enumerate() {
        let w = lambda * (1.0 - lambda).powi((n - 1 - i) as i32);
        num += w * l;
        den += w;
    }
    num / den
}

/// Uncoupled EWMA ratio: acute over the trailing `acute_days`, chronic over
/// the `chronic_days` that end the day before the acute window starts.
pub fn acratio_ewma_uncoupled(
    series: &WorkloadSeries,
    acute_days: usize,
    chronic_days: usize,
    acute: &EwmaParams,
    chronic: &EwmaParams,
    at: NaiveDate,
) -> Result<RatioPoint> {
    acute.validate()?;
    chronic.validate()?;
    if acute_days == 0 || chronic_days == 0 {
        return Err(Error::param("window", "window lengths must be positive"));
    }
    let idx = series.index_of(at).ok_or(Error::DateOutOfRange(at))?;
    let needed = acute_days + chronic_days;
    if idx + 1 < needed {
        return Err(Error::InsufficientHistory {
            at,
            needed,
            available: idx + 1,
        });
    }
    let loads: Vec<f64> = series.loads().take(idx + 1).collect();
    let split = idx + 1 - acute_days;
    let acute_val = windowed_ewma(&loads[split..], acute.lambda);
    let chronic_val = windowed_ewma(&loads[split - chronic_days..split], chronic.lambda);
    Ok(RatioPoint::new(
        at,
        LoadRatio::new(acute_val, chronic_val),
        RatioMethod::EwmaUncoupled,
        true,
    ))
}
