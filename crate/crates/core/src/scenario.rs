//! Scenario definition and its JSON file format.
//!
//! ```json
//! {
//!   "observer": { "coeffs": [[0, 0], [5, 0], [0, 1]] },
//!   "targets": [ { "coeffs": [[2000, 5000]], "tonal_hz": 1000.0 } ],
//!   "time": { "start": 0, "end": 20, "points": 201 },
//!   "c": 1500,
//!   "tolerances": { "rank_tol": 1e-8 }
//! }
//! ```
//!
//! Coefficients are Taylor coefficients about `time.start`. Targets whose
//! order is below the observer's are zero-padded to the observer order on
//! load. Each target also carries a `model_order`, the polynomial order of
//! the unknown absolute motion used by the observability and estimation
//! analyses; it defaults to the order as written in the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measurement::Tonal;
use crate::trajectory::{relative_state, PolynomialTrajectory, Vec2};

pub const DEFAULT_SOUND_SPEED: f64 = 1500.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative threshold on `sigma_min / sigma_max`.
    pub rank_tol: f64,
    /// Bearing separation (mod pi) below which two targets count as collinear.
    pub collinearity_tol: f64,
    /// Doppler equality threshold relative to the tonal (Hz per Hz).
    pub tol_f: f64,
    /// Bearing equality threshold in radians.
    pub tol_theta: f64,
    pub eps_range: f64,
    /// Allowance in Hz/s^2 for finite-difference range rates, scaled by `dt^2`.
    pub doppler_fd_slack: f64,
    /// Positions closer than this (meters) count as the same point.
    pub position_tol: f64,
    /// Tolerance on eigenvector residuals and on `alpha = 1` checks.
    pub eigen_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-8,
            collinearity_tol: 1e-3,
            tol_f: 1e-9,
            tol_theta: 1e-8,
            eps_range: 1e-9,
            doppler_fd_slack: 10.0,
            position_tol: 1e-6,
            eigen_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub trajectory: PolynomialTrajectory,
    pub tonal: Option<Tonal>,
    pub model_order: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub observer: PolynomialTrajectory,
    pub targets: Vec<Target>,
    pub time: TimeGrid,
    pub c: f64,
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn t_start(&self) -> f64 {
        self.time.start
    }

    pub fn model_orders(&self) -> Vec<usize> {
        self.targets.iter().map(|t| t.model_order).collect()
    }

    pub fn trajectories(&self) -> Vec<&PolynomialTrajectory> {
        self.targets.iter().map(|t| &t.trajectory).collect()
    }

    /// Checks every invariant; reports the first violation with its field path.
    pub fn validate(&self) -> Result<()> {
        let tol = &self.tolerances;
        if !(self.time.start.is_finite() && self.time.end.is_finite()) {
            return Err(Error::validation("time", "bounds must be finite"));
        }
        if !(self.time.end > self.time.start) {
            return Err(Error::validation(
                "time.end",
                format!(
                    "end {} must be after start {}",
                    self.time.end, self.time.start
                ),
            ));
        }
        if self.time.points < 2 {
            return Err(Error::validation("time.points", "need at least 2 points"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::validation("c", "propagation speed must be positive"));
        }
        if self.targets.is_empty() {
            return Err(Error::validation("targets", "at least one target required"));
        }
        for (name, v) in [
            ("tolerances.rank_tol", tol.rank_tol),
            ("tolerances.collinearity_tol", tol.collinearity_tol),
            ("tolerances.tol_f", tol.tol_f),
            ("tolerances.tol_theta", tol.tol_theta),
            ("tolerances.eps_range", tol.eps_range),
            ("tolerances.doppler_fd_slack", tol.doppler_fd_slack),
            ("tolerances.position_tol", tol.position_tol),
            ("tolerances.eigen_tol", tol.eigen_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(name, "must be finite and non-negative"));
            }
        }
        for (i, target) in self.targets.iter().enumerate() {
            if let Some(tonal) = target.tonal {
                if !(tonal.f0() > 0.0 && tonal.f0().is_finite()) {
                    return Err(Error::validation(
                        format!("targets[{i}].tonal_hz"),
                        "tonal must be positive",
                    ));
                }
            }
            for t in self.time.times() {
                if relative_state(&target.trajectory, &self.observer, t, tol.eps_range).is_err() {
                    return Err(Error::validation(
                        format!("targets[{i}]"),
                        format!("target coincides with the observer at t = {t}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.into_scenario()
    }

    /// Canonical JSON: fixed key order, all tolerances and model orders explicit.
    pub fn to_json(&self) -> String {
        let file = ScenarioFile::from(self);
        serde_json::to_string_pretty(&file).expect("scenario serialization is infallible")
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::validation(
            "path",
            format!("cannot read scenario {}: {e}", path.display()),
        )
    })?;
    Scenario::from_json(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let mut text = scenario.to_json();
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFile {
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    coeffs: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tonal_hz: Option<f64>,
    #[serde(default)]
    model_order: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeFile {
    start: f64,
    end: f64,
    points: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    observer: TrajectoryFile,
    targets: Vec<TargetFile>,
    time: TimeFile,
    #[serde(default = "default_c")]
    c: f64,
    #[serde(default)]
    tolerances: Tolerances,
}

fn default_c() -> f64 {
    DEFAULT_SOUND_SPEED
}

fn to_coeffs(field: &str, raw: &[[f64; 2]]) -> Result<Vec<Vec2>> {
    if raw.is_empty() {
        return Err(Error::validation(field, "needs at least one coefficient"));
    }
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::validation(field, "coefficients must be finite"));
    }
    Ok(raw.iter().map(|c| Vec2::new(c[0], c[1])).collect())
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let start = self.time.start;
        let observer = PolynomialTrajectory::new(
            start,
            to_coeffs("observer.coeffs", &self.observer.coeffs)?,
        )
        .map_err(|e| Error::validation("observer", e.to_string()))?;
        let observer_order = observer.order();

        let mut targets = Vec::with_capacity(self.targets.len());
        for (i, t) in self.targets.into_iter().enumerate() {
            let field = format!("targets[{i}].coeffs");
            let coeffs = to_coeffs(&field, &t.coeffs)?;
            let declared = coeffs.len() - 1;
            let trajectory = PolynomialTrajectory::new(start, coeffs)
                .map_err(|e| Error::validation(&field, e.to_string()))?
                .padded(observer_order);
            let tonal = match t.tonal_hz {
                Some(f) => Some(Tonal::new(f).map_err(|e| {
                    Error::validation(format!("targets[{i}].tonal_hz"), e.to_string())
                })?),
                None => None,
            };
            targets.push(Target {
                trajectory,
                tonal,
                model_order: t.model_order.unwrap_or(declared),
            });
        }

        let scenario = Scenario {
            observer,
            targets,
            time: TimeGrid {
                start,
                end: self.time.end,
                points: self.time.points,
            },
            c: self.c,
            tolerances: self.tolerances,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let coeffs = |t: &PolynomialTrajectory| t.coeffs().iter().map(|c| [c.x, c.y]).collect();
        ScenarioFile {
            observer: TrajectoryFile {
                coeffs: coeffs(&s.observer),
            },
            targets: s
                .targets
                .iter()
                .map(|t| TargetFile {
                    coeffs: coeffs(&t.trajectory),
                    tonal_hz: t.tonal.map(|f| f.f0()),
                    model_order: Some(t.model_order),
                })
                .collect(),
            time: TimeFile {
                start: s.time.start,
                end: s.time.end,
                points: s.time.points,
            },
            c: s.c,
            tolerances: s.tolerances,
        }
    }
}
