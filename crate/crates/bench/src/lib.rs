//! Fixtures shared by the benchmarks.

use obskit_core::{PolynomialTrajectory, Scenario, Target, TimeGrid, Tolerances, Tonal, Vec2};

pub fn poly(coeffs: &[(f64, f64)]) -> PolynomialTrajectory {
    PolynomialTrajectory::new(0.0, coeffs.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
        .expect("finite coefficients")
}

/// Two maneuvering targets under a quartic observer, every target modeled
/// at order `p` (at most 3), sampled at `points` times over three seconds.
pub fn two_targets(p: usize, points: usize) -> Scenario {
    let observer = poly(&[(0.0, 0.0), (17.0, -3.0), (177.0, -87.0), (-130.0, 64.0), (23.0, -12.0)]);
    let motion = [
        [(-30.0, -30.0), (1.5, -1.0), (0.4, 0.3), (-0.1, 0.05)],
        [(-1.0, 39.0), (-1.0, 2.0), (-0.3, 0.2), (0.05, 0.08)],
    ];
    Scenario {
        observer,
        targets: motion
            .iter()
            .map(|m| Target { trajectory: poly(&m[..=p]).padded(4), tonal: Some(Tonal::new(400.0).expect("positive tonal")), model_order: p })
            .collect(),
        time: TimeGrid::new(0.0, 3.0, points).expect("valid grid"),
        c: 1500.0,
        tolerances: Tolerances::default(),
    }
}

pub fn ambiguity_observer() -> PolynomialTrajectory {
    poly(&[(0.0, 0.0), (6.0, 2.0), (0.1, -0.2)])
}

pub fn ambiguity_base() -> PolynomialTrajectory {
    poly(&[(4000.0, 9000.0), (-8.0, 3.0), (0.05, -0.02)])
}
