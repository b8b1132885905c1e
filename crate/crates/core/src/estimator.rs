//! Pseudo-linear least-squares recovery of the initial super state.
//!
//! For target `i` with bearing `theta` at time `t`, the absolute position
//! satisfies `cos(theta) x - sin(theta) y = cos(theta) x_ob - sin(theta) y_ob`.
//! Writing the position through the transition matrix gives one linear
//! equation in the target's initial derivatives per sample.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{angle_distance, bearing_of, measure_scenario, MeasurementHistory};
use crate::observability::{observation_rows, sorted_svd};
use crate::scenario::Scenario;
use crate::trajectory::{block_offsets, state_dim, PolynomialTrajectory};

/// Singular values below this fraction of the largest are dropped when solving.
const SOLVE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Uniqueness {
    Unique,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub ref_time: f64,
    pub orders: Vec<usize>,
    /// Absolute initial state `[x, y, x', y', ...]` per target, concatenated.
    pub x_initial_hat: Vec<f64>,
    pub residual_norm: f64,
    /// `sigma_max / sigma_min` of the normal matrix; absent when singular.
    pub condition_number: Option<f64>,
    /// `sigma_min / sigma_max` of the normal matrix.
    pub normal_sigma_ratio: f64,
    pub rank_tol: f64,
    pub uniqueness: Uniqueness,
    /// Unit vector spanning the weakest direction when degenerate.
    pub null_direction: Option<Vec<f64>>,
}

impl EstimateResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serialization is infallible")
    }

    /// Trajectories encoded by `x_initial_hat`.
    pub fn trajectories(&self) -> Vec<PolynomialTrajectory> {
        self.orders
            .iter()
            .zip(block_offsets(&self.orders))
            .map(|(&p, off)| {
                PolynomialTrajectory::from_state(
                    self.ref_time,
                    &self.x_initial_hat[off..off + 2 * (p + 1)],
                )
                .expect("state block has 2(p+1) finite entries")
            })
            .collect()
    }
}

pub fn estimate_initial_state(
    observer: &PolynomialTrajectory,
    history: &MeasurementHistory,
    orders: &[usize],
    rank_tol: f64,
) -> Result<EstimateResult> {
    if history.target_count() != orders.len() {
        return Err(Error::InvalidInput(format!(
            "history has {} targets, {} orders given",
            history.target_count(),
            orders.len()
        )));
    }
    let times = &history.times;
    let (Some(&t_i), Some(&t_f)) = (times.first(), times.last()) else {
        return Err(Error::DegenerateSystem("empty measurement history".into()));
    };
    if !(t_f > t_i) {
        return Err(Error::DegenerateSystem(format!(
            "measurement window has zero length (t_i = t_f = {t_i})"
        )));
    }
    if history.bearings.iter().any(|b| b.len() != times.len()) {
        return Err(Error::InvalidInput("bearing series length differs from times".into()));
    }

    let m = orders.len();
    let n = state_dim(orders);
    let mut a = DMatrix::zeros(m * times.len(), n);
    let mut b = DVector::zeros(m * times.len());
    for (k, &t) in times.iter().enumerate() {
        let thetas: Vec<f64> = history.bearings.iter().map(|series| series[k]).collect();
        let rows = observation_rows(&thetas, orders, t - t_i);
        let obs = observer.position(t);
        for (i, &theta) in thetas.iter().enumerate() {
            let r = k * m + i;
            a.row_mut(r).copy_from(&rows.row(i));
            b[r] = theta.cos() * obs.x - theta.sin() * obs.y;
        }
    }

    let (singular_values, vectors) = sorted_svd(&a);
    let s_max = singular_values[0];
    let s_min = *singular_values.last().expect("non-empty state");
    let normal_sigma_ratio = if s_max > 0.0 { (s_min / s_max).powi(2) } else { 0.0 };
    let uniqueness = if normal_sigma_ratio < rank_tol {
        Uniqueness::Degenerate
    } else {
        Uniqueness::Unique
    };

    let cutoff = SOLVE_CUTOFF * s_max;
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::DegenerateSystem(e.to_string()))?;
    let residual_norm = (&a * &x - &b).norm();

    Ok(EstimateResult {
        ref_time: t_i,
        orders: orders.to_vec(),
        x_initial_hat: x.iter().copied().collect(),
        residual_norm,
        condition_number: (normal_sigma_ratio > 0.0).then(|| 1.0 / normal_sigma_ratio),
        normal_sigma_ratio,
        rank_tol,
        uniqueness,
        null_direction: (uniqueness == Uniqueness::Degenerate)
            .then(|| vectors.last().expect("non-empty state").iter().copied().collect()),
    })
}

/// Largest angular distance between `history` and the bearings replayed
/// from `result`; a replayed target on top of the observer counts as pi.
pub fn replay_error(
    observer: &PolynomialTrajectory,
    history: &MeasurementHistory,
    result: &EstimateResult,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, traj) in result.trajectories().iter().enumerate() {
        for (k, &t) in history.times.iter().enumerate() {
            let s = traj.position(t) - observer.position(t);
            let d = if s.norm() > 0.0 {
                angle_distance(bearing_of(&s), history.bearings[i][k])
            } else {
                std::f64::consts::PI
            };
            worst = worst.max(d);
        }
    }
    worst
}

/// Replays `result` against the scenario's own noise-free bearings.
pub fn cross_validate(scenario: &Scenario, result: &EstimateResult) -> f64 {
    match measure_scenario(scenario) {
        Ok(history) => replay_error(&scenario.observer, &history, result),
        Err(_) => std::f64::consts::PI,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::scenario::{Target, Tolerances};
    use crate::trajectory::Vec2;

    fn poly(c: &[(f64, f64)]) -> PolynomialTrajectory {
        PolynomialTrajectory::new(0.0, c.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap()
    }

    fn scenario(observer: PolynomialTrajectory, targets: Vec<(PolynomialTrajectory, usize)>, end: f64) -> Scenario {
        Scenario {
            observer,
            targets: targets
                .into_iter()
                .map(|(trajectory, model_order)| Target { trajectory, tonal: None, model_order })
                .collect(),
            time: TimeGrid::new(0.0, end, 101).unwrap(),
            c: 1500.0,
            tolerances: Tolerances::default(),
        }
    }

    fn estimate(s: &Scenario) -> Result<EstimateResult> {
        let h = measure_scenario(s)?;
        estimate_initial_state(&s.observer, &h, &s.model_orders(), 1e-8)
    }

    #[test]
    fn static_target_from_maneuvering_observer() {
        let s = scenario(
            poly(&[(0.0, 0.0), (8.0, 0.0), (0.0, 0.6)]),
            vec![(poly(&[(1500.0, 3200.0), (0.0, 0.0), (0.0, 0.0)]), 0)],
            20.0,
        );
        let r = estimate(&s).unwrap();
        assert_eq!(r.uniqueness, Uniqueness::Unique);
        assert!((r.x_initial_hat[0] - 1500.0).abs() < 1e-6);
        assert!((r.x_initial_hat[1] - 3200.0).abs() < 1e-6);
        assert!(r.residual_norm < 1e-6);
        assert!(cross_validate(&s, &r) < 1e-8);
        assert!(r.null_direction.is_none());
    }

    #[test]
    fn constant_velocity_target_is_recovered() {
        let s = scenario(
            poly(&[(0.0, 0.0), (4.0, 1.0), (3.0, -2.0)]),
            vec![(poly(&[(60.0, 120.0), (-2.0, 1.0)]).padded(2), 1)],
            4.0,
        );
        let r = estimate(&s).unwrap();
        assert_eq!(r.uniqueness, Uniqueness::Unique);
        let truth = [60.0, 120.0, -2.0, 1.0];
        for (a, b) in r.x_initial_hat.iter().zip(truth) {
            assert!((a - b).abs() < 1e-6 * 120.0, "{a} vs {b}");
        }
        assert!(cross_validate(&s, &r) < 1e-8);
    }

    #[test]
    fn collinear_pair_is_degenerate() {
        let observer = poly(&[(0.0, 0.0), (15.0, 0.0), (0.0, 0.8)]);
        let t1 = poly(&[(2000.0, 4000.0), (0.0, 0.0), (0.0, 0.0)]);
        let t2 = poly(&[(3000.0, 6000.0), (-7.5, 0.0), (0.0, -0.4)]);
        let s = scenario(observer, vec![(t1, 0), (t2, 2)], 10.0);
        let r = estimate(&s).unwrap();
        assert_eq!(r.uniqueness, Uniqueness::Degenerate);
        assert!(r.residual_norm < 1e-6);
        let null = r.null_direction.as_ref().unwrap();
        assert_eq!(null.len(), 8);
        assert!(null[..2].iter().all(|v| v.abs() < 1e-6));
        assert!(r.condition_number.is_none_or(|c| c > 1e8));
    }

    #[test]
    fn zero_window_is_rejected() {
        let h = MeasurementHistory {
            times: vec![3.0, 3.0],
            bearings: vec![vec![0.1, 0.1]],
            dopplers: vec![None],
        };
        let err = estimate_initial_state(&poly(&[(0.0, 0.0)]), &h, &[0], 1e-8).unwrap_err();
        assert!(matches!(err, Error::DegenerateSystem(_)));
    }

    #[test]
    fn corrupted_estimate_fails_replay() {
        let s = scenario(
            poly(&[(0.0, 0.0), (8.0, 0.0), (0.0, 0.6)]),
            vec![(poly(&[(1500.0, 3200.0), (0.0, 0.0), (0.0, 0.0)]), 0)],
            20.0,
        );
        let mut r = estimate(&s).unwrap();
        r.x_initial_hat[0] += 50.0;
        assert!(cross_validate(&s, &r) > 1e-3);
    }

    #[test]
    fn result_json_round_trip() {
        let s = scenario(
            poly(&[(0.0, 0.0), (8.0, 0.0), (0.0, 0.6)]),
            vec![(poly(&[(1500.0, 3200.0), (0.0, 0.0), (0.0, 0.0)]), 0)],
            20.0,
        );
        let r = estimate(&s).unwrap();
        let back: EstimateResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
