use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audit::ZoneScheme;
use crate::error::{Error, Result};
use crate::ratio::MethodSpec;
use crate::series::WindowConfig;
use crate::study::{CohortSpec, WeeklyAnalysis};

fn default_seed() -> u64 {
    CohortSpec::default().seed
}

fn default_required() -> usize {
    5
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_ratio_cap() -> f64 {
    1.3
}

/// Every tunable of a run. Missing keys take their defaults; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the cohort simulation; overrides `cohort.seed`.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: MethodSpec,
    #[serde(default)]
    pub analysis: WeeklyAnalysis,
    #[serde(default)]
    pub zones: ZoneScheme,
    #[serde(default)]
    pub cohort: CohortSpec,
    #[serde(default = "default_required")]
    pub events_per_cell: usize,
    #[serde(default = "default_epsilon")]
    pub convergence_epsilon: f64,
    #[serde(default = "default_ratio_cap")]
    pub max_acceptable_ratio: f64,
}

fn default_method() -> MethodSpec {
    MethodSpec::rolling(WindowConfig::default())
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            method: default_method(),
            analysis: WeeklyAnalysis::default(),
            zones: ZoneScheme::default(),
            cohort: CohortSpec::default(),
            events_per_cell: default_required(),
            convergence_epsilon: default_epsilon(),
            max_acceptable_ratio: default_ratio_cap(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        self.analysis.window.validate()?;
        self.zones.validate()?;
        self.cohort_spec().validate()?;
        if self.events_per_cell == 0 {
            return Err(Error::param("events_per_cell", "must be positive"));
        }
        if !(self.convergence_epsilon.is_finite() && self.convergence_epsilon > 0.0) {
            return Err(Error::param("convergence_epsilon", "must be positive"));
        }
        if !(self.max_acceptable_ratio.is_finite() && self.max_acceptable_ratio > 0.0) {
            return Err(Error::param("max_acceptable_ratio", "must be positive"));
        }
        Ok(())
    }

    /// Cohort settings with the run seed applied.
    pub fn cohort_spec(&self) -> CohortSpec {
        CohortSpec {
            seed: self.seed,
            ..self.cohort.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{EwmaParams, InitialValue};
    use crate::series::Coupling;
    use chrono::Weekday;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.analysis.window, WindowConfig::coupled(1, 4));
        assert_eq!(cfg.analysis.anchor, Weekday::Mon);
        assert_eq!(cfg.zones, ZoneScheme::default());
        assert_eq!(cfg.events_per_cell, 5);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig {
            method: MethodSpec::EwmaCoupled {
                acute: EwmaParams::from_n(7).initial(InitialValue::Fixed(3.5)).burn_in(50),
                chronic: EwmaParams::from_n(28),
            },
            analysis: WeeklyAnalysis {
                window: WindowConfig::uncoupled(1, 3),
                ..WeeklyAnalysis::default()
            },
            seed: 7,
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_sections() {
        let cfg = RunConfig::from_toml(
            r#"
seed = 42

[method]
kind = "rolling"
window = { acute_weeks = 1, chronic_weeks = 4, coupling = "uncoupled" }

[cohort]
n_athletes = 100
horizon_weeks = 8
"#,
        )
        .unwrap();
        assert_eq!(cfg.method, MethodSpec::rolling(WindowConfig::uncoupled(1, 4)));
        assert_eq!(cfg.cohort_spec().seed, 42);
        assert_eq!(cfg.cohort_spec().n_athletes, 100);
        assert_eq!(cfg.analysis.window.coupling, Coupling::Coupled);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(RunConfig::from_toml("sed = 1"), Err(Error::Config(_))));
        assert!(RunConfig::from_toml("events_per_cell = 0").is_err());
        assert!(RunConfig::from_toml("[analysis.window]\nacute_weeks = 4\nchronic_weeks = 4\n").is_err());
    }
}
