//! Polynomial planar motion, relative geometry and the chain-integrator
//! transition matrix.
//!
//! A trajectory of order `p` is stored as Taylor coefficients about its
//! reference time `t0`:
//!
//! ```text
//! s(t) = sum_{k=0..p} a_k (t - t0)^k,      a_k = s^(k)(t0) / k!
//! ```
//!
//! State vectors hold raw derivatives `[x, y, x', y', ..., x^(p), y^(p)]`, so
//! the transition matrix carries the `1/k!` factors.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::format_float;

pub type Vec2 = Vector2<f64>;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Falling factorial `k! / (k - d)!`.
fn falling_factorial(k: usize, d: usize) -> f64 {
    ((k - d + 1)..=k).fold(1.0, |acc, m| acc * m as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialTrajectory {
    ref_time: f64,
    coeffs: Vec<Vec2>,
}

impl PolynomialTrajectory {
    pub fn new(ref_time: f64, coeffs: Vec<Vec2>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "trajectory needs at least one coefficient".into(),
            ));
        }
        if !ref_time.is_finite() || coeffs.iter().any(|c| !c.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput(
                "trajectory coefficients must be finite".into(),
            ));
        }
        Ok(PolynomialTrajectory { ref_time, coeffs })
    }

    pub fn stationary(ref_time: f64, position: Vec2) -> Self {
        PolynomialTrajectory {
            ref_time,
            coeffs: vec![position],
        }
    }

    /// Builds a trajectory from a raw-derivative state `[x, y, x', y', ...]`.
    pub fn from_state(ref_time: f64, state: &[f64]) -> Result<Self> {
        if state.is_empty() || !state.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "state length {} is not a positive multiple of 2",
                state.len()
            )));
        }
        let coeffs = state
            .chunks_exact(2)
            .enumerate()
            .map(|(k, d)| Vec2::new(d[0], d[1]) / factorial(k))
            .collect();
        Self::new(ref_time, coeffs)
    }

    pub fn ref_time(&self) -> f64 {
        self.ref_time
    }

    pub fn coeffs(&self) -> &[Vec2] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Same motion, expressed with trailing zero coefficients up to `order`.
    pub fn padded(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < order + 1 {
            coeffs.resize(order + 1, Vec2::zeros());
        }
        PolynomialTrajectory {
            ref_time: self.ref_time,
            coeffs,
        }
    }

    /// Raw-derivative state of length `2 (order + 1)`; higher terms are dropped.
    pub fn state_vector(&self, order: usize) -> DVector<f64> {
        let mut x = DVector::zeros(2 * (order + 1));
        for (k, a) in self.coeffs.iter().enumerate().take(order + 1) {
            let d = a * factorial(k);
            x[2 * k] = d.x;
            x[2 * k + 1] = d.y;
        }
        x
    }

    /// `d`-th time derivative at `t`; zero when `d` exceeds the order.
    pub fn eval(&self, t: f64, derivative_order: usize) -> Vec2 {
        let p = self.order();
        if derivative_order > p {
            return Vec2::zeros();
        }
        let tau = t - self.ref_time;
        let d = derivative_order;
        // Horner on b_m = a_{m+d} (m+d)!/m!
        let mut acc = Vec2::zeros();
        for k in (d..=p).rev() {
            acc = acc * tau + self.coeffs[k] * falling_factorial(k, d);
        }
        acc
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.eval(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Vec2 {
        self.eval(t, 1)
    }
}

/// Target position relative to the observer, with range and range rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub range: f64,
    pub range_rate: f64,
}

impl RelativeState {
    pub fn new(position: Vec2, velocity: Vec2, eps_range: f64, time: f64) -> Result<Self> {
        let range = position.norm();
        if !(range >= eps_range) || range == 0.0 {
            return Err(Error::ZeroRange { target: None, time });
        }
        Ok(RelativeState {
            position,
            velocity,
            range,
            range_rate: velocity.dot(&position) / range,
        })
    }
}

pub fn relative_state(
    target: &PolynomialTrajectory,
    observer: &PolynomialTrajectory,
    t: f64,
    eps_range: f64,
) -> Result<RelativeState> {
    RelativeState::new(
        target.position(t) - observer.position(t),
        target.velocity(t) - observer.velocity(t),
        eps_range,
        t,
    )
}

/// Positions known only at grid samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory {
    times: Vec<f64>,
    positions: Vec<Vec2>,
}

impl SampledTrajectory {
    pub fn new(times: Vec<f64>, positions: Vec<Vec2>) -> Result<Self> {
        if times.len() != positions.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} positions",
                times.len(),
                positions.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidInput(
                "sampled trajectory needs at least 2 samples".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(SampledTrajectory { times, positions })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,x,y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["t", "x", "y"]).map_err(io)?;
        for (t, p) in self.times.iter().zip(&self.positions) {
            w.write_record([format_float(*t), format_float(p.x), format_float(p.y)])
                .map_err(io)?;
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

/// Transition matrix of a chain of integrators, one block per target.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub orders: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Super-state dimension `2 * sum(p_i + 1)`.
pub fn state_dim(orders: &[usize]) -> usize {
    orders.iter().map(|p| 2 * (p + 1)).sum()
}

/// Column offset of each target's block in the super state.
pub fn block_offsets(orders: &[usize]) -> Vec<usize> {
    orders
        .iter()
        .scan(0, |off, p| {
            let here = *off;
            *off += 2 * (p + 1);
            Some(here)
        })
        .collect()
}

fn write_block(m: &mut DMatrix<f64>, offset: usize, p: usize, tau: f64) {
    for r in 0..=p {
        let mut coef = 1.0;
        for c in r..=p {
            // coef = tau^(c-r) / (c-r)!
            m[(offset + 2 * r, offset + 2 * c)] = coef;
            m[(offset + 2 * r + 1, offset + 2 * c + 1)] = coef;
            coef *= tau / (c - r + 1) as f64;
        }
    }
}

/// Single-target transition matrix `Phi(t, t_i)` of size `2(p+1)`.
///
/// Block `(r, c)` equals `(t - t_i)^(c-r) / (c-r)! * I2` for `c >= r`, so the
/// top block row reproduces the Taylor expansion of the position.
pub fn transition_matrix(p: usize, t: f64, t_i: f64) -> TransitionMatrix {
    assemble_block_transition(&[p], t, t_i)
}

pub fn assemble_block_transition(orders: &[usize], t: f64, t_i: f64) -> TransitionMatrix {
    let n = state_dim(orders);
    let mut matrix = DMatrix::zeros(n, n);
    let tau = t - t_i;
    for (&p, off) in orders.iter().zip(block_offsets(orders)) {
        write_block(&mut matrix, off, p, tau);
    }
    TransitionMatrix {
        orders: orders.to_vec(),
        matrix,
    }
}

fn chain_derivative(orders: &[usize], x: &DVector<f64>) -> DVector<f64> {
    let mut dx = DVector::zeros(x.len());
    for (&p, off) in orders.iter().zip(block_offsets(orders)) {
        for k in 0..p {
            dx[off + 2 * k] = x[off + 2 * (k + 1)];
            dx[off + 2 * k + 1] = x[off + 2 * (k + 1) + 1];
        }
    }
    dx
}

/// Fixed-step RK4 integration of the unforced chain-integrator system
/// `x' = E x` from `t_i` to `t_f`.
pub fn propagate_ode(
    orders: &[usize],
    x_initial: &DVector<f64>,
    t_i: f64,
    t_f: f64,
    steps: usize,
) -> Result<DVector<f64>> {
    if steps == 0 {
        return Err(Error::InvalidInput("propagate_ode needs steps >= 1".into()));
    }
    if x_initial.len() != state_dim(orders) {
        return Err(Error::InvalidInput(format!(
            "state has length {}, orders imply {}",
            x_initial.len(),
            state_dim(orders)
        )));
    }
    let h = (t_f - t_i) / steps as f64;
    let mut x = x_initial.clone();
    for _ in 0..steps {
        let k1 = chain_derivative(orders, &x);
        let k2 = chain_derivative(orders, &(&x + &k1 * (h / 2.0)));
        let k3 = chain_derivative(orders, &(&x + &k2 * (h / 2.0)));
        let k4 = chain_derivative(orders, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(x)
}
