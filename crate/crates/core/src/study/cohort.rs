use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{scheduled_days, AthleteOutcome, CohortSpec};
use crate::error::Result;
use crate::series::{DayLoad, WorkloadSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

pub fn simulate_cohort(spec: &CohortSpec) -> Result<Vec<AthleteOutcome>> {
    simulate_cohort_with(spec, Execution::Sequential)
}

/// Each athlete draws from its own ChaCha stream keyed by its index, so the
/// result does not depend on execution order.
pub fn simulate_cohort_with(spec: &CohortSpec, exec: Execution) -> Result<Vec<AthleteOutcome>> {
    spec.validate()?;
    let outcomes = match exec {
        Execution::Sequential => (0..spec.n_athletes).map(|i| simulate_athlete(spec, i)).collect(),
        Execution::Parallel => (0..spec.n_athletes)
            .into_par_iter()
            .map(|i| simulate_athlete(spec, i))
            .collect(),
    };
    Ok(outcomes)
}

fn athlete_id(index: usize) -> String {
    format!("A{:06}", index + 1)
}

fn simulate_athlete(spec: &CohortSpec, index: usize) -> AthleteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let jitter = spec.schedule.scale_jitter;
    let scale = if jitter > 0.0 {
        rng.gen_range(1.0 - jitter..=1.0 + jitter)
    } else {
        1.0
    };

    let cycle = &spec.schedule.weeks;
    let days: Vec<DayLoad> = (0..spec.horizon_weeks * 7)
        .map(|i| DayLoad {
            date: spec.start + Duration::days(i as i64),
            load: cycle[(i / 7) % cycle.len()][i % 7] * scale,
            imputed: false,
        })
        .collect();
    let id = athlete_id(index);
    let planned = WorkloadSeries::from_days(id.clone(), days).expect("generated plan is contiguous");

    // trailing sums for the coupled 7/28-day ratio fed to the hazard
    let loads: Vec<f64> = planned.loads().collect();
    let mut injury_idx = None;
    let (mut sum7, mut sum28) = (0.0, 0.0);
    for (i, &load) in loads.iter().enumerate() {
        sum7 += load;
        sum28 += load;
        if i >= 7 {
            sum7 -= loads[i - 7];
        }
        if i >= 28 {
            sum28 -= loads[i - 28];
        }
        if load <= 0.0 {
            continue;
        }
        let ratio = (i >= 27 && sum28 > 0.0).then(|| sum7 / (sum28 / 4.0));
        let p = spec.hazard.probability(load, ratio);
        let u: f64 = rng.gen();
        if u < p {
            injury_idx = Some(i);
            break;
        }
    }

    let (realized, injury_day, fraction) = match injury_idx {
        Some(i) => {
            let day = planned.days()[i].date;
            let (elapsed, total) = scheduled_days(&planned, day, spec.anchor);
            (
                planned.truncated_through(day),
                Some(day),
                Some(elapsed as f64 / total as f64),
            )
        }
        None => (planned.clone(), None, None),
    };

    AthleteOutcome {
        athlete_id: id,
        schedule: spec.schedule.name.clone(),
        planned,
        realized,
        injury_day,
        injury_fraction_of_week: fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::{Hazard, ScheduleGenerator};

    fn spec(hazard: Hazard) -> CohortSpec {
        CohortSpec {
            n_athletes: 200,
            hazard,
            horizon_weeks: 8,
            ..CohortSpec::default()
        }
    }

    #[test]
    fn zero_hazard_means_no_injuries() {
        let out = simulate_cohort(&spec(Hazard::Constant { p: 0.0 })).unwrap();
        assert!(out.iter().all(|a| !a.is_injured() && a.realized == a.planned));
    }

    #[test]
    fn certain_hazard_injures_on_first_training_day() {
        let mut s = spec(Hazard::Constant { p: 1.0 });
        s.schedule.weeks = vec![[0.0, 0.0, 5.0, 5.0, 5.0, 5.0, 0.0]];
        let out = simulate_cohort(&s).unwrap();
        for a in out {
            assert_eq!(a.injury_day, Some(s.start + Duration::days(2)));
            assert_eq!(a.realized.len(), 3);
            assert_eq!(a.injury_fraction_of_week, Some(0.25));
        }
    }

    #[test]
    fn realized_is_prefix_of_plan() {
        let out = simulate_cohort(&spec(Hazard::Constant { p: 0.05 })).unwrap();
        assert!(out.iter().any(|a| a.is_injured()));
        for a in &out {
            let n = a.realized.len();
            assert_eq!(a.realized.days(), &a.planned.days()[..n]);
            if let Some(day) = a.injury_day {
                assert_eq!(a.realized.end(), Some(day));
                let f = a.injury_fraction_of_week.unwrap();
                assert!(f > 0.0 && f <= 1.0);
            }
        }
    }

    #[test]
    fn seed_determines_cohort() {
        let s = spec(Hazard::Constant { p: 0.03 });
        let a = simulate_cohort(&s).unwrap();
        let b = simulate_cohort_with(&s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut other = s.clone();
        other.seed += 1;
        assert_ne!(a, simulate_cohort(&other).unwrap());
    }

    #[test]
    fn jitter_scales_individual_plans() {
        let mut s = spec(Hazard::Constant { p: 0.0 });
        s.schedule = ScheduleGenerator {
            scale_jitter: 0.2,
            ..ScheduleGenerator::constant("c", 10.0)
        };
        let out = simulate_cohort(&s).unwrap();
        let first: Vec<f64> = out.iter().map(|a| a.planned.days()[0].load).collect();
        assert!(first.iter().all(|x| (8.0..=12.0).contains(x)));
        assert!(first.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec(Hazard::Constant { p: 1.5 });
        assert!(simulate_cohort(&s).is_err());
        s.hazard = Hazard::Constant { p: 0.1 };
        s.start += Duration::days(1);
        assert!(simulate_cohort(&s).is_err());
    }

    #[test]
    fn hazards_stay_in_unit_interval() {
        let h = Hazard::Logistic {
            intercept: -3.0,
            load_coef: 0.01,
            ratio_coef: 2.0,
        };
        for load in [0.0, 10.0, 1e6] {
            for ratio in [None, Some(0.0), Some(4.0)] {
                let p = h.probability(load, ratio);
                assert!((0.0..=1.0).contains(&p));
            }
        }
        let p = Hazard::LoadProportional { rate: 0.01 }.probability(100.0, None);
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
