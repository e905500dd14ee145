//! Risk-zone labelling applied after modelling, and the events-per-cell
//! adequacy check for categorical exposures.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{RatioPoint, RatioValue};

pub const UNCLASSIFIED: &str = "Unclassified";

/// One zone: every value up to `upper` (inclusive if `upper_inclusive`)
/// not claimed by an earlier zone. The last zone has no upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub label: String,
    pub upper: Option<f64>,
    #[serde(default)]
    pub upper_inclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneScheme {
    pub zones: Vec<Zone>,
}

impl Default for ZoneScheme {
    /// Low (<0.8), Sweet [0.8, 1.3], Moderate (1.3, 1.5), Danger [1.5, ∞).
    fn default() -> Self {
        let zone = |label: &str, upper: Option<f64>, upper_inclusive| Zone {
            label: label.into(),
            upper,
            upper_inclusive,
        };
        Self {
            zones: vec![
                zone("Low", Some(0.8), false),
                zone("Sweet", Some(1.3), true),
                zone("Moderate", Some(1.5), false),
                zone("Danger", None, false),
            ],
        }
    }
}

impl ZoneScheme {
    pub fn validate(&self) -> Result<()> {
        let Some((last, rest)) = self.zones.split_last() else {
            return Err(Error::param("zones", "at least one zone is required"));
        };
        if last.upper.is_some() {
            return Err(Error::param("zones", "the last zone must be unbounded above"));
        }
        let mut prev = 0.0;
        for z in rest {
            let Some(u) = z.upper else {
                return Err(Error::param(
                    "zones",
                    format!("zone `{}` needs an upper bound", z.label),
                ));
            };
            if !(u.is_finite() && u > prev) {
                return Err(Error::param(
                    "zones",
                    "thresholds must be positive and strictly increasing",
                ));
            }
            prev = u;
        }
        if self.zones.iter().any(|z| z.label == UNCLASSIFIED) {
            return Err(Error::param("zones", "`Unclassified` is reserved"));
        }
        Ok(())
    }

    pub fn classify_value(&self, ratio: RatioValue) -> &str {
        let RatioValue::Defined(x) = ratio else {
            return UNCLASSIFIED;
        };
        self.zones
            .iter()
            .find(|z| match z.upper {
                None => true,
                Some(u) => x < u || (z.upper_inclusive && x == u),
            })
            .map_or(UNCLASSIFIED, |z| z.label.as_str())
    }
}

pub fn classify<'a>(ratio: &RatioPoint, scheme: &'a ZoneScheme) -> &'a str {
    scheme.classify_value(ratio.ratio)
}

/// Clamp range applied before labelling end-point ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clamp {
    pub low: f64,
    pub high: f64,
}

impl Default for Clamp {
    fn default() -> Self {
        Self { low: 0.5, high: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub at: NaiveDate,
    pub ratio: RatioValue,
    /// Value used for labelling (clamped when clamping is on).
    pub labeled_value: RatioValue,
    pub clamped: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedSeries {
    pub clamp: Option<Clamp>,
    pub points: Vec<LabeledPoint>,
}

/// Label a ratio series that has already been modelled on the continuous
/// scale.
pub fn discretize_after(ratios: &[RatioPoint], scheme: &ZoneScheme, clamp: Option<Clamp>) -> DiscretizedSeries {
    let points = ratios
        .iter()
        .map(|p| {
            let (labeled_value, clamped) = match (p.ratio, clamp) {
                (RatioValue::Defined(x), Some(c)) => {
                    let y = x.clamp(c.low, c.high);
                    (RatioValue::Defined(y), y != x)
                }
                (r, _) => (r, false),
            };
            LabeledPoint {
                at: p.at,
                ratio: p.ratio,
                labeled_value,
                clamped,
                label: scheme.classify_value(labeled_value).to_string(),
            }
        })
        .collect();
    DiscretizedSeries { clamp, points }
}

/// One observation for the sparse-data audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Covariate values, in the order of [`AuditDesign::covariates`].
    pub covariates: Vec<String>,
    pub exposure: String,
    pub injured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    pub levels: Vec<String>,
}

/// Declared levels. Cells are the full cross product, so the set of cells
/// does not depend on which participants happen to be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditDesign {
    pub exposure_levels: Vec<String>,
    #[serde(default)]
    pub covariates: Vec<Covariate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    pub covariates: Vec<String>,
    pub exposure: String,
    pub events: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseAudit {
    pub required_per_cell: usize,
    pub cells: Vec<AuditCell>,
    pub total_events: usize,
    pub pass: bool,
}

impl SparseAudit {
    pub fn failing(&self) -> impl Iterator<Item = &AuditCell> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

fn cross_product(covariates: &[Covariate]) -> Vec<Vec<String>> {
    covariates.iter().fold(vec![Vec::new()], |acc, cov| {
        acc.iter()
            .flat_map(|prefix| {
                cov.levels.iter().map(move |lvl| {
                    let mut v = prefix.clone();
                    v.push(lvl.clone());
                    v
                })
            })
            .collect()
    })
}

/// Count injuries in every covariate × exposure cell and check each
/// against `required` events. Only events are counted.
pub fn sparse_audit(events: &[EventRecord], design: &AuditDesign, required: usize) -> Result<SparseAudit> {
    if required == 0 {
        return Err(Error::param("required", "must be positive"));
    }
    if design.exposure_levels.is_empty() {
        return Err(Error::param("exposure_levels", "at least one level is required"));
    }
    let mut counts: BTreeMap<(Vec<String>, String), usize> = BTreeMap::new();
    for combo in cross_product(&design.covariates) {
        for lvl in &design.exposure_levels {
            counts.insert((combo.clone(), lvl.clone()), 0);
        }
    }
    for ev in events {
        if !design.exposure_levels.contains(&ev.exposure) {
            return Err(Error::UnknownLevel {
                field: "exposure".into(),
                value: ev.exposure.clone(),
            });
        }
        if ev.covariates.len() != design.covariates.len() {
            return Err(Error::param(
                "covariates",
                format!(
                    "expected {} covariate values, got {}",
                    design.covariates.len(),
                    ev.covariates.len()
                ),
            ));
        }
        for (value, cov) in ev.covariates.iter().zip(&design.covariates) {
            if !cov.levels.contains(value) {
                return Err(Error::UnknownLevel {
                    field: cov.name.clone(),
                    value: value.clone(),
                });
            }
        }
        if ev.injured {
            *counts
                .get_mut(&(ev.covariates.clone(), ev.exposure.clone()))
                .expect("cell declared") += 1;
        }
    }

    // keep declaration order for readability
    let mut cells = Vec::with_capacity(counts.len());
    for combo in cross_product(&design.covariates) {
        for lvl in &design.exposure_levels {
            let events = counts[&(combo.clone(), lvl.clone())];
            cells.push(AuditCell {
                covariates: combo.clone(),
                exposure: lvl.clone(),
                events,
                pass: events >= required,
            });
        }
    }
    Ok(SparseAudit {
        required_per_cell: required,
        total_events: cells.iter().map(|c| c.events).sum(),
        pass: cells.iter().all(|c| c.pass),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::RatioMethod;

    fn point(r: RatioValue) -> RatioPoint {
        RatioPoint {
            at: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            acute: 0.0,
            chronic: 0.0,
            ratio: r,
            method: RatioMethod::RollingCoupled,
            converged: true,
        }
    }

    #[test]
    fn classify_examples() {
        let s = ZoneScheme::default();
        assert_eq!(classify(&point(RatioValue::Defined(1.0)), &s), "Sweet");
        assert_eq!(classify(&point(RatioValue::Defined(1.6)), &s), "Danger");
        assert_eq!(classify(&point(RatioValue::Undefined), &s), UNCLASSIFIED);
    }

    #[test]
    fn boundaries_land_in_named_zones() {
        let s = ZoneScheme::default();
        let label = |x| s.classify_value(RatioValue::Defined(x)).to_string();
        assert_eq!(label(0.0), "Low");
        assert_eq!(label(0.799), "Low");
        assert_eq!(label(0.8), "Sweet");
        assert_eq!(label(1.3), "Sweet");
        assert_eq!(label(1.300001), "Moderate");
        assert_eq!(label(1.5), "Danger");
        assert_eq!(label(4.0), "Danger");
    }

    #[test]
    fn scheme_validation() {
        assert!(ZoneScheme::default().validate().is_ok());
        let mut s = ZoneScheme::default();
        s.zones.swap(0, 1);
        assert!(s.validate().is_err());
        assert!(ZoneScheme { zones: vec![] }.validate().is_err());
    }

    #[test]
    fn clamping() {
        let s = ZoneScheme::default();
        let pts = [
            point(RatioValue::Defined(2.7)),
            point(RatioValue::Defined(0.1)),
            point(RatioValue::Undefined),
        ];
        let clamped = discretize_after(&pts, &s, Some(Clamp::default()));
        assert_eq!(clamped.points[0].labeled_value, RatioValue::Defined(2.0));
        assert!(clamped.points[0].clamped);
        assert_eq!(clamped.points[0].ratio, RatioValue::Defined(2.7));
        assert_eq!(clamped.points[1].labeled_value, RatioValue::Defined(0.5));
        assert_eq!(clamped.points[2].label, UNCLASSIFIED);

        let raw = discretize_after(&pts[..1], &s, None);
        assert_eq!(raw.points[0].label, "Danger");
        assert_eq!(raw.points[0].labeled_value, RatioValue::Defined(2.7));
        assert!(!raw.points[0].clamped);

        assert!(discretize_after(&[], &s, None).points.is_empty());
    }

    fn levels() -> Vec<String> {
        ["low", "medium", "high"].map(String::from).to_vec()
    }

    fn injuries(counts: &[usize]) -> Vec<EventRecord> {
        levels()
            .iter()
            .zip(counts)
            .flat_map(|(lvl, &n)| {
                (0..n).map(move |_| EventRecord {
                    covariates: vec![],
                    exposure: lvl.clone(),
                    injured: true,
                })
            })
            .collect()
    }

    #[test]
    fn univariate_fifteen_events() {
        let design = AuditDesign {
            exposure_levels: levels(),
            covariates: vec![],
        };
        let a = sparse_audit(&injuries(&[5, 5, 5]), &design, 5).unwrap();
        assert!(a.pass);
        assert_eq!(a.total_events, 15);
        let a = sparse_audit(&injuries(&[4, 6, 5]), &design, 5).unwrap();
        assert!(!a.pass);
        assert_eq!(a.failing().next().unwrap().exposure, "low");
    }

    #[test]
    fn sex_by_level() {
        let design = AuditDesign {
            exposure_levels: levels(),
            covariates: vec![Covariate {
                name: "sex".into(),
                levels: vec!["F".into(), "M".into()],
            }],
        };
        let mut events = Vec::new();
        for sex in ["F", "M"] {
            for lvl in levels() {
                for _ in 0..5 {
                    events.push(EventRecord {
                        covariates: vec![sex.into()],
                        exposure: lvl.clone(),
                        injured: true,
                    });
                }
            }
        }
        let a = sparse_audit(&events, &design, 5).unwrap();
        assert_eq!(a.cells.len(), 6);
        assert!(a.pass);
        events.pop();
        assert!(!sparse_audit(&events, &design, 5).unwrap().pass);
    }

    #[test]
    fn unknown_levels_rejected() {
        let design = AuditDesign {
            exposure_levels: levels(),
            covariates: vec![],
        };
        let bad = vec![EventRecord {
            covariates: vec![],
            exposure: "extreme".into(),
            injured: true,
        }];
        assert!(matches!(
            sparse_audit(&bad, &design, 5),
            Err(Error::UnknownLevel { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn labels_partition_nonnegative_line(x in 0.0f64..50.0) {
                let s = ZoneScheme::default();
                let label = s.classify_value(RatioValue::Defined(x));
                let hits = ["Low", "Sweet", "Moderate", "Danger"].iter().filter(|l| **l == label).count();
                prop_assert_eq!(hits, 1);
            }

            #[test]
            fn clamp_then_classify_composes(x in 0.0f64..10.0) {
                let s = ZoneScheme::default();
                let out = discretize_after(&[point(RatioValue::Defined(x))], &s, Some(Clamp::default()));
                let direct = s.classify_value(RatioValue::Defined(x.clamp(0.5, 2.0)));
                prop_assert_eq!(out.points[0].label.as_str(), direct);
            }

            #[test]
            fn uninjured_rows_do_not_change_verdict(counts in prop::collection::vec(0usize..9, 3), extra in 0usize..50) {
                let design = AuditDesign { exposure_levels: levels(), covariates: vec![] };
                let mut events = injuries(&counts);
                let before = sparse_audit(&events, &design, 5).unwrap();
                for i in 0..extra {
                    events.push(EventRecord { covariates: vec![], exposure: levels()[i % 3].clone(), injured: false });
                }
                let after = sparse_audit(&events, &design, 5).unwrap();
                prop_assert_eq!(before, after);
            }
        }
    }
}
