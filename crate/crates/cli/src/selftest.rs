//! Randomized agreement check between the Gramian rank decision and the
//! estimator's uniqueness verdict.

use std::fmt;

use obskit_core::{
    check_observable, cross_validate, estimate_initial_state, measure_scenario,
    PolynomialTrajectory, RankDecision, Scenario, Target, TimeGrid, Tolerances, Uniqueness, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scenarios whose ratio lies within this many decades of the tolerance are
/// left out of the agreement count.
const BOUNDARY_DECADES: f64 = 1.0;

#[derive(Debug, Default)]
pub struct Summary {
    pub seed: u64,
    pub generated: usize,
    pub near_boundary: usize,
    pub compared: usize,
    pub agreed: usize,
    pub observable: usize,
    pub round_trip_failures: usize,
    pub errors: usize,
}

impl Summary {
    pub fn agreement(&self) -> f64 {
        if self.compared == 0 {
            1.0
        } else {
            self.agreed as f64 / self.compared as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.agreement() >= 0.99 && self.round_trip_failures == 0 && self.errors == 0
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "scenarios: {}", self.generated)?;
        writeln!(f, "near tolerance boundary (skipped): {}", self.near_boundary)?;
        writeln!(f, "verdict agreement: {}/{} ({:.2}%)", self.agreed, self.compared, 100.0 * self.agreement())?;
        writeln!(f, "observable: {}, round-trip failures: {}", self.observable, self.round_trip_failures)?;
        writeln!(f, "analysis errors: {}", self.errors)?;
        writeln!(f, "result: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    loop {
        let span = rng.gen_range(1.0..5.0);
        let n_obs = rng.gen_range(1..=3usize);
        let coeffs = |rng: &mut ChaCha8Rng, order: usize, scale: f64| -> Vec<Vec2> {
            (0..=order)
                .map(|k| {
                    let s = scale / f64::powi(span, k as i32);
                    Vec2::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
                })
                .collect()
        };
        let mut oc = coeffs(rng, n_obs, 150.0);
        oc[0] = Vec2::zeros();
        let observer = PolynomialTrajectory::new(0.0, oc).expect("finite coefficients");
        let m = rng.gen_range(1..=3usize);
        let targets = (0..m)
            .map(|_| {
                let model_order = rng.gen_range(0..=n_obs);
                let mut c = coeffs(rng, model_order, 60.0);
                let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                c[0] += Vec2::new(angle.sin(), angle.cos()) * rng.gen_range(150.0..400.0);
                Target {
                    trajectory: PolynomialTrajectory::new(0.0, c).expect("finite coefficients").padded(n_obs),
                    tonal: None,
                    model_order,
                }
            })
            .collect();
        let s = Scenario {
            observer,
            targets,
            time: TimeGrid { start: 0.0, end: span, points: 101 },
            c: 1500.0,
            tolerances: Tolerances::default(),
        };
        if s.validate().is_ok() {
            return s;
        }
    }
}

pub fn run(seed: u64, count: usize, rank_tol: f64) -> Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = Summary { seed, ..Summary::default() };
    for _ in 0..count {
        let s = random_scenario(&mut rng);
        summary.generated += 1;
        let outcome = check_observable(&s, rank_tol).and_then(|report| {
            let history = measure_scenario(&s)?;
            let estimate = estimate_initial_state(&s.observer, &history, &s.model_orders(), rank_tol)?;
            Ok((report, estimate))
        });
        let Ok((report, estimate)) = outcome else {
            summary.errors += 1;
            continue;
        };
        if report.rank_decision == RankDecision::Observable {
            summary.observable += 1;
            if cross_validate(&s, &estimate) >= 1e-8 {
                summary.round_trip_failures += 1;
            }
        }
        if (report.sigma_ratio / rank_tol).log10().abs() <= BOUNDARY_DECADES {
            summary.near_boundary += 1;
            continue;
        }
        summary.compared += 1;
        let unique = estimate.uniqueness == Uniqueness::Unique;
        if unique == (report.rank_decision == RankDecision::Observable) {
            summary.agreed += 1;
        }
    }
    summary
}
