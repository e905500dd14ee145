use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expanded EWMA weights after `t` days: E_t = w₀E₀ + Σ wᵢLᵢ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub lambda: f64,
    pub t: usize,
    /// Weight on the initial value, (1−λ)^t.
    pub w0: f64,
    /// w₁..w_t with wᵢ = λ(1−λ)^(t−i).
    pub weights: Vec<f64>,
}

impl WeightTable {
    pub fn w1(&self) -> f64 {
        self.weights[0]
    }

    /// w₁ − w₀; negative whenever the initial value outweighs the first load.
    pub fn first_difference(&self) -> f64 {
        self.w1() - self.w0
    }

    pub fn total(&self) -> f64 {
        self.w0 + self.weights.iter().sum::<f64>()
    }

    /// Weighted sum w₀E₀ + Σ wᵢLᵢ. `loads` must hold exactly `t` values.
    pub fn apply(&self, e0: f64, loads: &[f64]) -> f64 {
        assert_eq!(loads.len(), self.t, "weight table covers {} days", self.t);
        self.w0 * e0 + self.weights.iter().zip(loads).map(|(w, l)| w * l).sum::<f64>()
    }
}

fn check_open_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "lambda",
            format!("{lambda} is not in the open interval (0, 1)"),
        ))
    }
}

pub fn weight_table(lambda: f64, t: usize) -> Result<WeightTable> {
    check_open_lambda(lambda)?;
    if t == 0 {
        return Err(Error::param("t", "must be at least 1"));
    }
    let keep = 1.0 - lambda;
    let weights = (1..=t).map(|i| lambda * keep.powi((t - i) as i32)).collect();
    Ok(WeightTable {
        lambda,
        t,
        w0: keep.powi(t as i32),
        weights,
    })
}

/// True when the initial value carries strictly more weight than the first
/// load, which happens exactly when λ < 1/2.
pub fn initial_weight_dominates(lambda: f64) -> Result<bool> {
    check_open_lambda(lambda)?;
    Ok(lambda < 0.5)
}

/// w₀ / w_t = (1−λ)^t / λ: how many times the initial value outweighs the
/// most recent load.
pub fn chronic_ratio_contribution(lambda: f64, t: usize) -> Result<f64> {
    check_open_lambda(lambda)?;
    if t == 0 {
        return Err(Error::param("t", "must be at least 1"));
    }
    Ok((1.0 - lambda).powi(t as i32) / lambda)
}
