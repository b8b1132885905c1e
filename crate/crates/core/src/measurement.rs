//! Noise-free bearing and Doppler measurements and the pseudo-linear
//! measurement rows.
//!
//! Bearings are measured from the +y axis toward +x, `theta = atan2(x, y)`,
//! and wrapped to `(-pi, pi]`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::trajectory::{block_offsets, relative_state, state_dim, RelativeState, Vec2};

/// Narrowband frequency radiated by a target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tonal {
    f0: f64,
}

impl Tonal {
    pub fn new(f0: f64) -> Result<Self> {
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tonal frequency must be positive, got {f0}"
            )));
        }
        Ok(Tonal { f0 })
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut w = theta.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Absolute angular distance on the circle, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Bearing of a relative position vector.
pub fn bearing_of(s: &Vec2) -> f64 {
    let theta = s.x.atan2(s.y);
    if theta == -PI {
        PI
    } else {
        theta
    }
}

pub fn bearing(rel: &RelativeState) -> f64 {
    bearing_of(&rel.position)
}

/// Received frequency `f0 (1 - range_rate / c)`.
pub fn doppler(tonal: Tonal, rel: &RelativeState, c: f64) -> f64 {
    doppler_from_range_rate(tonal.f0, rel.range_rate, c)
}

pub fn doppler_from_range_rate(f0: f64, range_rate: f64, c: f64) -> f64 {
    f0 * (1.0 - range_rate / c)
}

/// `[cos theta, -sin theta, 0, ..., 0]` of length `2 (p + 1)`.
pub fn pseudo_row(theta: f64, p: usize) -> RowDVector<f64> {
    let mut row = RowDVector::zeros(2 * (p + 1));
    row[0] = theta.cos();
    row[1] = -theta.sin();
    row
}

/// Block-diagonal pseudo-measurement matrix, one row per target.
pub fn assemble_c(thetas: &[f64], orders: &[usize]) -> Result<DMatrix<f64>> {
    if thetas.len() != orders.len() {
        return Err(Error::InvalidInput(format!(
            "{} bearings for {} targets",
            thetas.len(),
            orders.len()
        )));
    }
    let mut c = DMatrix::zeros(thetas.len(), state_dim(orders));
    for (i, (&theta, off)) in thetas.iter().zip(block_offsets(orders)).enumerate() {
        c[(i, off)] = theta.cos();
        c[(i, off + 1)] = -theta.sin();
    }
    Ok(c)
}

/// Bearing (and optional Doppler) histories of every target on a common grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHistory {
    pub times: Vec<f64>,
    /// `bearings[i][k]`: target `i` at `times[k]`.
    pub bearings: Vec<Vec<f64>>,
    pub dopplers: Vec<Option<Vec<f64>>>,
}

impl MeasurementHistory {
    pub fn target_count(&self) -> usize {
        self.bearings.len()
    }

    /// Writes `t,target_id,bearing_rad,doppler_hz`, time-major, with an empty
    /// Doppler field for targets without a tonal.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["t", "target_id", "bearing_rad", "doppler_hz"])
            .map_err(io)?;
        for (k, t) in self.times.iter().enumerate() {
            for i in 0..self.target_count() {
                let doppler = self.dopplers[i]
                    .as_ref()
                    .map(|d| format_float(d[k]))
                    .unwrap_or_default();
                w.write_record([
                    format_float(*t),
                    i.to_string(),
                    format_float(self.bearings[i][k]),
                    doppler,
                ])
                .map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Shortest round-trip representation, identical across runs and platforms.
pub(crate) fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Bearings and Dopplers of every target at every scenario grid time.
pub fn measure_scenario(scenario: &Scenario) -> Result<MeasurementHistory> {
    let times = scenario.time.times();
    let eps = scenario.tolerances.eps_range;
    let mut bearings = Vec::with_capacity(scenario.targets.len());
    let mut dopplers = Vec::with_capacity(scenario.targets.len());
    for (i, target) in scenario.targets.iter().enumerate() {
        let mut b = Vec::with_capacity(times.len());
        let mut d = target.tonal.map(|_| Vec::with_capacity(times.len()));
        for &t in &times {
            let rel = relative_state(&target.trajectory, &scenario.observer, t, eps).map_err(
                |_| Error::ZeroRange {
                    target: Some(i),
                    time: t,
                },
            )?;
            b.push(bearing(&rel));
            if let (Some(d), Some(tonal)) = (d.as_mut(), target.tonal) {
                d.push(doppler(tonal, &rel, scenario.c));
            }
        }
        bearings.push(b);
        dopplers.push(d);
    }
    Ok(MeasurementHistory {
        times,
        bearings,
        dopplers,
    })
}
