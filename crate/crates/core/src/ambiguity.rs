//! Ambiguous trajectory pairs: two distinct motions that yield the same
//! Doppler history, the same bearing history, or both.
//!
//! Doppler equality `f_i (1 - r_i'/c) = f_j (1 - r_j'/c)` integrates to the
//! range relation
//!
//! ```text
//! r_i(t) = l' r_j(t) + b' + c (1 - l') (t - t_0),   l' = f_j / f_i
//! ```
//!
//! which leaves the direction of the line of sight free. The Doppler
//! generator picks that direction by rotating target `j`'s line of sight by
//! `psi(t)`, so that relative positions are linked by
//! `s_i = W(t) s_j` with `W(t) = R(psi(t)) r_i(t) / r_j(t)`.
//!
//! Equal bearings only force `s_i = alpha(t) s_j` with `alpha > 0`. A pair
//! that matches both histories therefore needs `s_j` to be an eigenvector of
//! `W(t)` with eigenvalue `alpha(t)`.

use nalgebra::{Matrix2, Rotation2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measurement::{angle_distance, bearing_of, doppler_from_range_rate};
use crate::scenario::Tolerances;
use crate::trajectory::{relative_state, PolynomialTrajectory, SampledTrajectory, Vec2};

/// Scalar function of time known at samples, linear in between and held
/// constant outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidInput(format!(
                "sampled function needs matching non-empty times/values ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "sampled function times must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled function values must be finite".into()));
        }
        Ok(SampledFunction { times, values })
    }

    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let times = grid.times();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    pub fn constant(grid: &TimeGrid, value: f64) -> Result<Self> {
        Self::from_fn(grid, |_| value)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        if t == t0 {
            return v0;
        }
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Serializable description of a scalar profile; `Polynomial` and `Sinusoid`
/// are functions of `t - t_start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Profile {
    /// Samples the profile on `grid`.
    pub fn sample(&self, grid: &TimeGrid) -> Result<SampledFunction> {
        let t0 = grid.start;
        match self {
            Profile::Constant { value } => SampledFunction::constant(grid, *value),
            Profile::Polynomial { coeffs } => SampledFunction::from_fn(grid, |t| {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * (t - t0) + c)
            }),
            Profile::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => SampledFunction::from_fn(grid, |t| {
                offset + amplitude * (omega * (t - t0) + phase).sin()
            }),
            Profile::Sampled { times, values } => {
                let f = SampledFunction::new(times.clone(), values.clone())?;
                SampledFunction::from_fn(grid, |t| f.eval(t))
            }
        }
    }
}

/// Parameters of a Doppler-ambiguous counterpart of a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DopplerAmbiguitySpec {
    /// Tonal ratio `f_j / f_i`.
    pub l_prime: f64,
    /// Range offset `r_i(t0) - l' r_j(t0)` in meters.
    pub b_prime: f64,
    /// Line-of-sight rotation `psi(t)` in radians.
    pub rotation: SampledFunction,
    pub c: f64,
}

impl DopplerAmbiguitySpec {
    pub fn new(l_prime: f64, b_prime: f64, rotation: SampledFunction, c: f64) -> Result<Self> {
        if !(l_prime > 0.0 && l_prime.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "l' must be positive, got {l_prime}"
            )));
        }
        if !b_prime.is_finite() {
            return Err(Error::InvalidInput("b' must be finite".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!("c must be positive, got {c}")));
        }
        Ok(DopplerAmbiguitySpec {
            l_prime,
            b_prime,
            rotation,
            c,
        })
    }

    /// Range of the counterpart at `t`, given the base range `r_j`.
    pub fn range(&self, r_j: f64, t: f64, t0: f64) -> f64 {
        self.l_prime * r_j + self.b_prime + self.c * (1.0 - self.l_prime) * (t - t0)
    }

    /// `W(t) = R(psi(t)) [l' + (b' + c (1 - l') (t - t0)) / r_j]`.
    pub fn transform(&self, r_j: f64, t: f64, t0: f64) -> Matrix2<f64> {
        rotation(self.rotation.eval(t)) * (self.range(r_j, t, t0) / r_j)
    }

    /// Tonal the counterpart must radiate, `f_j / l'`.
    pub fn counterpart_tonal(&self, f_j: f64) -> f64 {
        f_j / self.l_prime
    }
}

fn rotation(psi: f64) -> Matrix2<f64> {
    *Rotation2::new(psi).matrix()
}

fn base_relative(
    base: &PolynomialTrajectory,
    observer: &PolynomialTrajectory,
    t: f64,
    eps_range: f64,
) -> Result<(Vec2, Vec2, f64)> {
    let obs = observer.position(t);
    let rel = relative_state(base, observer, t, eps_range)?;
    Ok((obs, rel.position, rel.range))
}

/// Builds target `i` whose Doppler history matches `base` (target `j`)
/// when `i` radiates `f_j / l'`.
pub fn generate_doppler_ambiguous(
    base: &PolynomialTrajectory,
    observer: &PolynomialTrajectory,
    spec: &DopplerAmbiguitySpec,
    grid: &TimeGrid,
    eps_range: f64,
) -> Result<SampledTrajectory> {
    let times = grid.times();
    let mut positions = Vec::with_capacity(times.len());
    for &t in &times {
        let (obs, s_j, r_j) = base_relative(base, observer, t, eps_range)?;
        let r_i = spec.range(r_j, t, grid.start);
        if !(r_i > 0.0) {
            return Err(Error::NonPositiveRange { time: t, range: r_i });
        }
        let direction = rotation(spec.rotation.eval(t)) * (s_j / r_j);
        positions.push(obs + direction * r_i);
    }
    SampledTrajectory::new(times, positions)
}

/// Builds target `i` on target `j`'s line of sight at `alpha(t)` times its range.
pub fn generate_bearing_ambiguous(
    base: &PolynomialTrajectory,
    observer: &PolynomialTrajectory,
    alpha: &SampledFunction,
    grid: &TimeGrid,
    eps_range: f64,
) -> Result<SampledTrajectory> {
    let times = grid.times();
    let mut positions = Vec::with_capacity(times.len());
    for &t in &times {
        let a = alpha.eval(t);
        if !(a > 0.0) {
            return Err(Error::NonPositiveAlpha { time: t, value: a });
        }
        let (obs, s_j, _) = base_relative(base, observer, t, eps_range)?;
        positions.push(obs + s_j * a);
    }
    SampledTrajectory::new(times, positions)
}

/// Either a closed-form trajectory or one known only at grid samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Track {
    Polynomial(PolynomialTrajectory),
    Sampled(SampledTrajectory),
}

impl From<PolynomialTrajectory> for Track {
    fn from(t: PolynomialTrajectory) -> Self {
        Track::Polynomial(t)
    }
}

impl From<SampledTrajectory> for Track {
    fn from(t: SampledTrajectory) -> Self {
        Track::Sampled(t)
    }
}

impl Track {
    pub fn is_sampled(&self) -> bool {
        matches!(self, Track::Sampled(_))
    }

    pub fn positions_on(&self, grid: &TimeGrid) -> Result<Vec<Vec2>> {
        match self {
            Track::Polynomial(p) => Ok(grid.times().iter().map(|&t| p.position(t)).collect()),
            Track::Sampled(s) => {
                if s.len() != grid.points {
                    return Err(Error::GridMismatch(format!(
                        "trajectory has {} samples, grid has {}",
                        s.len(),
                        grid.points
                    )));
                }
                for (k, (&ts, tg)) in s.times().iter().zip(grid.times()).enumerate() {
                    if (ts - tg).abs() > 1e-9 * tg.abs().max(1.0) {
                        return Err(Error::GridMismatch(format!(
                            "sample {k} at t = {ts}, grid expects {tg}"
                        )));
                    }
                }
                Ok(s.positions().to_vec())
            }
        }
    }

    /// Range rates relative to `observer` on the grid; analytic for
    /// polynomials, second-order finite differences of the range otherwise.
    pub fn range_rates_on(
        &self,
        observer: &PolynomialTrajectory,
        grid: &TimeGrid,
        eps_range: f64,
    ) -> Result<Vec<f64>> {
        match self {
            Track::Polynomial(p) => grid
                .times()
                .iter()
                .map(|&t| relative_state(p, observer, t, eps_range).map(|r| r.range_rate))
                .collect(),
            Track::Sampled(_) => {
                let ranges = relative_ranges(self, observer, grid, eps_range)?;
                Ok(finite_difference(&ranges, grid.step()))
            }
        }
    }
}

fn relative_ranges(
    track: &Track,
    observer: &PolynomialTrajectory,
    grid: &TimeGrid,
    eps_range: f64,
) -> Result<Vec<f64>> {
    let positions = track.positions_on(grid)?;
    grid.times()
        .iter()
        .zip(positions)
        .map(|(&t, p)| {
            let r = (p - observer.position(t)).norm();
            if !(r >= eps_range) || r == 0.0 {
                Err(Error::ZeroRange { target: None, time: t })
            } else {
                Ok(r)
            }
        })
        .collect()
}

/// Central differences inside, second-order one-sided stencils at the ends.
pub(crate) fn finite_difference(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    match n {
        0 | 1 => vec![0.0; n],
        2 => vec![(y[1] - y[0]) / h; 2],
        _ => (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
                } else {
                    (y[k + 1] - y[k - 1]) / (2.0 * h)
                }
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Doppler,
    Bearing,
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ambiguous,
    Distinguishable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityPair {
    pub trajectory_i: Track,
    pub trajectory_j: Track,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityCertificate {
    pub regime: Regime,
    pub verdict: Verdict,
    pub grid: TimeGrid,
    pub c: f64,
    /// Radiated tonals `[f_i, f_j]` in Hz.
    pub tonals: [f64; 2],
    /// `max_t |f_D,i - f_D,j|` in Hz.
    pub residual_doppler: f64,
    /// `max_t` angular distance between the bearings, in radians.
    pub residual_bearing: f64,
    pub doppler_tolerance: f64,
    pub bearing_tolerance: f64,
    pub doppler_ambiguous: bool,
    pub bearing_ambiguous: bool,
    /// `max_t |s_i - s_j|` in meters.
    pub max_position_gap: f64,
    pub pair: AmbiguityPair,
}

impl AmbiguityCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization is infallible")
    }
}

/// Doppler equality threshold in Hz: relative tonal tolerance plus a
/// `dt^2` allowance when a range rate comes from finite differences.
pub fn doppler_threshold(tonals: [f64; 2], grid: &TimeGrid, sampled: bool, tol: &Tolerances) -> f64 {
    let base = tol.tol_f * tonals[0].max(tonals[1]);
    if sampled {
        base + tol.doppler_fd_slack * grid.step().powi(2)
    } else {
        base
    }
}

/// Compares the Doppler and bearing histories of two trajectories seen by
/// the same observer.
#[allow(clippy::too_many_arguments)]
pub fn verify_ambiguity(
    traj_i: &Track,
    traj_j: &Track,
    observer: &PolynomialTrajectory,
    tonals: [f64; 2],
    c: f64,
    grid: &TimeGrid,
    tol: &Tolerances,
    regime: Regime,
) -> Result<AmbiguityCertificate> {
    if !(tonals[0] > 0.0 && tonals[1] > 0.0) {
        return Err(Error::InvalidInput("tonals must be positive".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidInput("c must be positive".into()));
    }
    let times = grid.times();
    let pos_i = traj_i.positions_on(grid)?;
    let pos_j = traj_j.positions_on(grid)?;
    let rate_i = traj_i.range_rates_on(observer, grid, tol.eps_range)?;
    let rate_j = traj_j.range_rates_on(observer, grid, tol.eps_range)?;

    let mut residual_doppler: f64 = 0.0;
    let mut residual_bearing: f64 = 0.0;
    let mut max_position_gap: f64 = 0.0;
    for k in 0..times.len() {
        let obs = observer.position(times[k]);
        let (s_i, s_j) = (pos_i[k] - obs, pos_j[k] - obs);
        if s_i.norm() < tol.eps_range || s_j.norm() < tol.eps_range {
            return Err(Error::ZeroRange {
                target: None,
                time: times[k],
            });
        }
        let f_i = doppler_from_range_rate(tonals[0], rate_i[k], c);
        let f_j = doppler_from_range_rate(tonals[1], rate_j[k], c);
        residual_doppler = residual_doppler.max((f_i - f_j).abs());
        residual_bearing = residual_bearing.max(angle_distance(bearing_of(&s_i), bearing_of(&s_j)));
        max_position_gap = max_position_gap.max((pos_i[k] - pos_j[k]).norm());
    }

    let doppler_tolerance =
        doppler_threshold(tonals, grid, traj_i.is_sampled() || traj_j.is_sampled(), tol);
    let doppler_ambiguous = residual_doppler < doppler_tolerance;
    let bearing_ambiguous = residual_bearing < tol.tol_theta;
    let ambiguous = match regime {
        Regime::Doppler => doppler_ambiguous,
        Regime::Bearing => bearing_ambiguous,
        Regime::Combined => doppler_ambiguous && bearing_ambiguous,
    };
    Ok(AmbiguityCertificate {
        regime,
        verdict: if ambiguous {
            Verdict::Ambiguous
        } else {
            Verdict::Distinguishable
        },
        grid: *grid,
        c,
        tonals,
        residual_doppler,
        residual_bearing,
        doppler_tolerance,
        bearing_tolerance: tol.tol_theta,
        doppler_ambiguous,
        bearing_ambiguous,
        max_position_gap,
        pair: AmbiguityPair {
            trajectory_i: traj_i.clone(),
            trajectory_j: traj_j.clone(),
        },
    })
}

/// Where `W(t)` comes from in the eigenvector check.
#[derive(Clone, Copy, Debug)]
pub enum TransformModel<'a> {
    /// Rebuilt from a Doppler-ambiguity spec and target `j`'s range.
    Spec(&'a DopplerAmbiguitySpec),
    /// The rotation-scaling that carries `s_j(t)` onto `s_i(t)`.
    Geometry,
}

/// Rotation-scaling matrix mapping `s_j` onto `s_i`.
pub fn geometric_transform(s_i: &Vec2, s_j: &Vec2) -> Matrix2<f64> {
    let psi = s_j.perp(s_i).atan2(s_j.dot(s_i));
    rotation(psi) * (s_i.norm() / s_j.norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub times: Vec<f64>,
    /// Rayleigh quotient `s_j^T W s_j / |s_j|^2`.
    pub alpha: Vec<f64>,
    /// `|W s_j - alpha s_j| / |s_j|`.
    pub eigen_residual: Vec<f64>,
    pub max_eigen_residual: f64,
    pub max_alpha_deviation: f64,
    /// `max_t |(s_i - s_j) - (W - I) s_j| / |s_j|`.
    pub max_transform_residual: f64,
    pub eigenvector_holds: bool,
    pub alpha_is_one: bool,
    pub combined_ambiguous: bool,
}

/// Tests whether `s_j(t)` is an eigenvector of `W(t)` and whether the
/// eigenvalue is one at every grid time.
pub fn check_combined_condition(
    traj_i: &Track,
    traj_j: &Track,
    observer: &PolynomialTrajectory,
    model: TransformModel<'_>,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<EigenReport> {
    let times = grid.times();
    let pos_i = traj_i.positions_on(grid)?;
    let pos_j = traj_j.positions_on(grid)?;
    let mut alpha = Vec::with_capacity(times.len());
    let mut eigen_residual = Vec::with_capacity(times.len());
    let mut max_transform_residual: f64 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let obs = observer.position(t);
        let (s_i, s_j) = (pos_i[k] - obs, pos_j[k] - obs);
        let r_j = s_j.norm();
        if r_j < tol.eps_range || r_j == 0.0 {
            return Err(Error::ZeroRange { target: None, time: t });
        }
        let w = match model {
            TransformModel::Spec(spec) => spec.transform(r_j, t, grid.start),
            TransformModel::Geometry => {
                if s_i.norm() < tol.eps_range {
                    return Err(Error::ZeroRange { target: None, time: t });
                }
                geometric_transform(&s_i, &s_j)
            }
        };
        let ws = w * s_j;
        let a = s_j.dot(&ws) / (r_j * r_j);
        alpha.push(a);
        eigen_residual.push((ws - s_j * a).norm() / r_j);
        let predicted_gap = ws - s_j;
        max_transform_residual =
            max_transform_residual.max(((pos_i[k] - pos_j[k]) - predicted_gap).norm() / r_j);
    }
    let max_eigen_residual = eigen_residual.iter().copied().fold(0.0, f64::max);
    let max_alpha_deviation = alpha.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
    let eigenvector_holds = max_eigen_residual < tol.eigen_tol;
    let alpha_is_one = max_alpha_deviation < tol.eigen_tol;
    Ok(EigenReport {
        times,
        alpha,
        eigen_residual,
        max_eigen_residual,
        max_alpha_deviation,
        max_transform_residual,
        eigenvector_holds,
        alpha_is_one,
        combined_ambiguous: eigenvector_holds && alpha_is_one,
    })
}

/// `max_t |(s_i - s_j) - (W - I) s_j| / r_j` for a Doppler-ambiguity spec.
pub fn doppler_condition_residual(
    traj_i: &Track,
    traj_j: &Track,
    observer: &PolynomialTrajectory,
    spec: &DopplerAmbiguitySpec,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<f64> {
    check_combined_condition(traj_i, traj_j, observer, TransformModel::Spec(spec), grid, tol)
        .map(|r| r.max_transform_residual)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    /// Condition 1: equal radiated tonals.
    pub same_tonal: bool,
    /// Condition 2: the geometric `W(t)` is the identity.
    pub w_is_identity: bool,
    pub max_w_deviation: f64,
    /// Condition 3: equal relative positions.
    pub same_relative_position: bool,
    pub max_position_gap: f64,
    pub all_hold: bool,
    pub residual_doppler: f64,
    pub doppler_tolerance: f64,
    pub doppler_ambiguous: bool,
    /// False only if all three conditions hold yet the Doppler histories differ.
    pub implication_holds: bool,
}

/// Evaluates the three sufficient conditions for Doppler ambiguity on the
/// grid and checks that they imply equal Doppler histories.
#[allow(clippy::too_many_arguments)]
pub fn check_sufficiency(
    traj_i: &Track,
    traj_j: &Track,
    observer: &PolynomialTrajectory,
    tonals: [f64; 2],
    c: f64,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<SufficiencyReport> {
    let cert = verify_ambiguity(traj_i, traj_j, observer, tonals, c, grid, tol, Regime::Doppler)?;
    let pos_i = traj_i.positions_on(grid)?;
    let pos_j = traj_j.positions_on(grid)?;
    let mut max_w_deviation: f64 = 0.0;
    for (k, t) in grid.times().into_iter().enumerate() {
        let obs = observer.position(t);
        let w = geometric_transform(&(pos_i[k] - obs), &(pos_j[k] - obs));
        max_w_deviation = max_w_deviation.max((w - Matrix2::identity()).norm());
    }
    let same_tonal = (tonals[0] - tonals[1]).abs() <= tol.tol_f * tonals[0].max(tonals[1]);
    let w_is_identity = max_w_deviation < tol.eigen_tol;
    let same_relative_position = cert.max_position_gap < tol.position_tol;
    let all_hold = same_tonal && w_is_identity && same_relative_position;
    Ok(SufficiencyReport {
        same_tonal,
        w_is_identity,
        max_w_deviation,
        same_relative_position,
        max_position_gap: cert.max_position_gap,
        all_hold,
        residual_doppler: cert.residual_doppler,
        doppler_tolerance: cert.doppler_tolerance,
        doppler_ambiguous: cert.doppler_ambiguous,
        implication_holds: !all_hold || cert.doppler_ambiguous,
    })
}
