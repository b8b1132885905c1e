#![allow(dead_code)]

use obskit_core::{PolynomialTrajectory, Scenario, Target, TimeGrid, Tolerances, Tonal, Vec2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn poly(c: &[(f64, f64)]) -> PolynomialTrajectory {
    PolynomialTrajectory::new(0.0, c.iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap()
}

pub fn random_coeffs(rng: &mut ChaCha8Rng, order: usize, scale: f64, span: f64) -> Vec<Vec2> {
    (0..=order)
        .map(|k| {
            let s = scale / span.powi(k as i32);
            Vec2::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
        })
        .collect()
}

/// Random scenario with observer order 1..=3 and 1..=3 targets whose model
/// order never exceeds the observer's; `None` if a target passes too close.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Option<Scenario> {
    let span = rng.gen_range(1.0..5.0);
    let n_obs = rng.gen_range(1..=3usize);
    let mut oc = random_coeffs(rng, n_obs, 150.0, span);
    oc[0] = Vec2::zeros();
    let observer = PolynomialTrajectory::new(0.0, oc).unwrap();
    let m = rng.gen_range(1..=3usize);
    let targets = (0..m)
        .map(|_| {
            let model_order = rng.gen_range(0..=n_obs);
            let mut c = random_coeffs(rng, model_order, 60.0, span);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            c[0] += Vec2::new(angle.sin(), angle.cos()) * rng.gen_range(150.0..400.0);
            Target {
                trajectory: PolynomialTrajectory::new(0.0, c).unwrap().padded(n_obs),
                tonal: rng.gen_bool(0.5).then(|| Tonal::new(rng.gen_range(50.0..2000.0)).unwrap()),
                model_order,
            }
        })
        .collect();
    let s = Scenario {
        observer,
        targets,
        time: TimeGrid::new(0.0, span, 101).unwrap(),
        c: 1500.0,
        tolerances: Tolerances::default(),
    };
    let close = s.time.times().iter().any(|&t| {
        s.targets
            .iter()
            .any(|tg| (tg.trajectory.position(t) - s.observer.position(t)).norm() < 20.0)
    });
    (s.validate().is_ok() && !close).then_some(s)
}

/// Two targets on one line of sight: target 1 sits at `alpha` times target
/// 0's relative position, so it inherits the observer's order.
pub fn collinear_pair(alpha: f64) -> Scenario {
    let observer = poly(&[(0.0, 0.0), (15.0, 0.0), (0.0, 0.8)]);
    let t0 = poly(&[(2000.0, 4000.0), (-3.0, 1.0), (0.0, 0.0)]);
    let t1 = PolynomialTrajectory::new(
        0.0,
        observer
            .coeffs()
            .iter()
            .zip(t0.coeffs())
            .map(|(o, t)| o + (t - o) * alpha)
            .collect(),
    )
    .unwrap();
    Scenario {
        observer,
        targets: vec![
            Target { trajectory: t0, tonal: None, model_order: 1 },
            Target { trajectory: t1, tonal: None, model_order: 2 },
        ],
        time: TimeGrid::new(0.0, 10.0, 201).unwrap(),
        c: 1500.0,
        tolerances: Tolerances::default(),
    }
}

/// True absolute initial state of every target at its model order.
pub fn true_state(s: &Scenario) -> Vec<f64> {
    s.targets
        .iter()
        .flat_map(|t| t.trajectory.state_vector(t.model_order).iter().copied().collect::<Vec<_>>())
        .collect()
}

pub fn relative_error(estimate: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}
