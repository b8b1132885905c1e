//! Observability of the stacked multi-target pseudo-linear system.
//!
//! The Gramian
//!
//! ```text
//! G = integral over [t_i, t_f] of Phi(t, t_i)^T C(t)^T C(t) Phi(t, t_i) dt
//! ```
//!
//! is approximated with composite Simpson on the scenario grid, and the
//! system is declared observable when `sigma_min / sigma_max > rank_tol`.
//!
//! Because `C` and `Phi` are both block diagonal, the Gramian is block
//! diagonal too: the stacked system is observable exactly when every target
//! is. The bearing-separation and collinearity diagnostics are reported next
//! to the per-target blocks rather than folded into the verdict. A pair of
//! targets that stays on one line through the observer for the whole window
//! always produces a null direction (the difference of the two trajectories
//! lies along the shared line of sight); a transient alignment does not.

use std::fmt;

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::measurement::{bearing, MeasurementHistory};
use crate::measurement::measure_scenario;
use crate::scenario::Scenario;
use crate::trajectory::{block_offsets, relative_state, state_dim, PolynomialTrajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankDecision {
    Observable,
    Unobservable,
}

impl fmt::Display for RankDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankDecision::Observable => f.write_str("observable"),
            RankDecision::Unobservable => f.write_str("unobservable"),
        }
    }
}

/// Smallest bearing distance modulo pi over all pairs and grid times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSeparation {
    pub separation: f64,
    pub pair: (usize, usize),
    pub time: f64,
}

/// Maximal run of grid samples where a pair of targets is collinear with the observer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollinearityEvent {
    pub pair: (usize, usize),
    pub start: f64,
    pub end: f64,
    pub separation_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetBlock {
    pub target: usize,
    pub order: usize,
    pub sigma_ratio: f64,
    pub rank_decision: RankDecision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub orders: Vec<usize>,
    pub quadrature_nodes: usize,
    pub gramian: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub sigma_ratio: f64,
    pub rank_tol: f64,
    pub rank_decision: RankDecision,
    pub target_blocks: Vec<TargetBlock>,
    pub min_pairwise_separation: Option<PairSeparation>,
    pub collinearity_events: Vec<CollinearityEvent>,
    /// Right singular vector of `sigma_min`, present when unobservable.
    pub null_direction: Option<Vec<f64>>,
    /// `max_t |C Phi y| / |y|` for the null direction on the grid.
    pub null_witness_residual: Option<f64>,
}

impl ObservabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verdict: {} (sigma_min/sigma_max = {:.3e}, rank_tol = {:.1e})\n",
            self.rank_decision, self.sigma_ratio, self.rank_tol
        ));
        out.push_str(&format!(
            "state dimension: {} (orders {:?}), quadrature nodes: {}\n",
            self.singular_values.len(),
            self.orders,
            self.quadrature_nodes
        ));
        for b in &self.target_blocks {
            out.push_str(&format!(
                "  target {} (order {}): {} on its own, ratio {:.3e}\n",
                b.target, b.order, b.rank_decision, b.sigma_ratio
            ));
        }
        match &self.min_pairwise_separation {
            Some(s) => out.push_str(&format!(
                "min bearing separation mod pi: {:.6} rad, targets {:?} at t = {}\n",
                s.separation, s.pair, s.time
            )),
            None => out.push_str("min bearing separation mod pi: n/a (single target)\n"),
        }
        if self.collinearity_events.is_empty() {
            out.push_str("collinearity events: none\n");
        } else {
            out.push_str(&format!(
                "collinearity events: {}\n",
                self.collinearity_events.len()
            ));
            for e in &self.collinearity_events {
                out.push_str(&format!(
                    "  targets {:?}: t in [{}, {}], min separation {:.3e} rad\n",
                    e.pair, e.start, e.end, e.separation_min
                ));
            }
        }
        if let Some(r) = self.null_witness_residual {
            out.push_str(&format!("null direction residual: {r:.3e}\n"));
        }
        out
    }
}

/// `C(t) Phi(t, t_i)` for a set of targets seen from one observer.
pub(crate) struct ObservationModel<'a> {
    pub observer: &'a PolynomialTrajectory,
    pub targets: Vec<&'a PolynomialTrajectory>,
    pub orders: Vec<usize>,
    pub t_ref: f64,
    pub eps_range: f64,
}

impl<'a> ObservationModel<'a> {
    pub fn from_scenario(scenario: &'a Scenario) -> Self {
        ObservationModel {
            observer: &scenario.observer,
            targets: scenario.trajectories(),
            orders: scenario.model_orders(),
            t_ref: scenario.t_start(),
            eps_range: scenario.tolerances.eps_range,
        }
    }

    pub fn dim(&self) -> usize {
        state_dim(&self.orders)
    }

    pub fn bearings_at(&self, t: f64) -> Result<Vec<f64>> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, target)| {
                relative_state(target, self.observer, t, self.eps_range)
                    .map(|rel| bearing(&rel))
                    .map_err(|_| Error::ZeroRange {
                        target: Some(i),
                        time: t,
                    })
            })
            .collect()
    }

    pub fn rows_at(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(observation_rows(&self.bearings_at(t)?, &self.orders, t - self.t_ref))
    }

    pub fn gramian(&self, grid: &TimeGrid) -> Result<DMatrix<f64>> {
        let grid = grid.with_odd_nodes();
        let weights = grid.simpson_weights()?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (k, w) in weights.iter().enumerate() {
            let rows = self.rows_at(grid.time(k))?;
            g += rows.transpose() * &rows * *w;
        }
        Ok((&g + g.transpose()) * 0.5)
    }

    /// `max_t |C Phi y|` over the grid.
    pub fn witness_residual(&self, y: &DVector<f64>, grid: &TimeGrid) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in grid.times() {
            worst = worst.max((self.rows_at(t)? * y).norm());
        }
        Ok(worst)
    }
}

/// Rows of `C(t) Phi(t, t_i)` given bearings and `tau = t - t_i`; row `i`
/// holds `cos(theta_i) tau^k/k!` and `-sin(theta_i) tau^k/k!` in target
/// `i`'s block.
pub(crate) fn observation_rows(thetas: &[f64], orders: &[usize], tau: f64) -> DMatrix<f64> {
    let mut rows = DMatrix::zeros(thetas.len(), state_dim(orders));
    for (i, ((&theta, &p), off)) in thetas
        .iter()
        .zip(orders)
        .zip(block_offsets(orders))
        .enumerate()
    {
        let (s, c) = theta.sin_cos();
        let mut f = 1.0;
        for k in 0..=p {
            rows[(i, off + 2 * k)] = c * f;
            rows[(i, off + 2 * k + 1)] = -s * f;
            f *= tau / (k + 1) as f64;
        }
    }
    rows
}

/// Singular values in descending order with the matching right singular vectors.
pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut pairs: Vec<(f64, DVector<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, v_t.row(k).transpose()))
        .collect();
    // a wide matrix has fewer singular values than columns; the rest are zero
    if pairs.len() < m.ncols() {
        let full = SVD::new(m.transpose() * m, false, true);
        let v_t = full.v_t.expect("requested right singular vectors");
        let mut extra: Vec<(f64, DVector<f64>)> = full
            .singular_values
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, v_t.row(k).transpose()))
            .collect();
        extra.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, v) in extra.into_iter().take(m.ncols() - pairs.len()) {
            pairs.push((0.0, v));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

pub(crate) fn sigma_ratio(singular_values: &[f64]) -> f64 {
    match (singular_values.first(), singular_values.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

pub(crate) fn decide(ratio: f64, rank_tol: f64) -> RankDecision {
    if ratio > rank_tol {
        RankDecision::Observable
    } else {
        RankDecision::Unobservable
    }
}

/// Composite-Simpson Gramian over the scenario window using `quadrature_nodes`
/// nodes (one node is added when the count is even).
pub fn gramian(scenario: &Scenario, quadrature_nodes: usize) -> Result<DMatrix<f64>> {
    if quadrature_nodes < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 quadrature nodes, got {quadrature_nodes}"
        )));
    }
    let grid = TimeGrid::new(scenario.time.start, scenario.time.end, quadrature_nodes)?;
    ObservationModel::from_scenario(scenario).gramian(&grid)
}

pub fn check_observable(scenario: &Scenario, rank_tol: f64) -> Result<ObservabilityReport> {
    let model = ObservationModel::from_scenario(scenario);
    let nodes = scenario.time.with_odd_nodes().points;
    let g = gramian(scenario, nodes)?;
    let (singular_values, vectors) = sorted_svd(&g);
    let ratio = sigma_ratio(&singular_values);
    let rank_decision = decide(ratio, rank_tol);

    let target_blocks = model
        .orders
        .iter()
        .zip(block_offsets(&model.orders))
        .enumerate()
        .map(|(i, (&p, off))| {
            let n = 2 * (p + 1);
            let block = g.view((off, off), (n, n)).into_owned();
            let (sv, _) = sorted_svd(&block);
            let r = sigma_ratio(&sv);
            TargetBlock {
                target: i,
                order: p,
                sigma_ratio: r,
                rank_decision: decide(r, rank_tol),
            }
        })
        .collect();

    let history = measure_scenario(scenario)?;
    let min_pairwise_separation = bearing_separation_mod_pi(&history);
    let collinearity_events = detect_collinearity(&history, scenario.tolerances.collinearity_tol);

    let (null_direction, null_witness_residual) = match rank_decision {
        RankDecision::Observable => (None, None),
        RankDecision::Unobservable => {
            let y = vectors.last().expect("non-empty state").clone();
            let residual = model.witness_residual(&y, &scenario.time)? / y.norm();
            (Some(y.iter().copied().collect()), Some(residual))
        }
    };

    Ok(ObservabilityReport {
        orders: model.orders.clone(),
        quadrature_nodes: nodes,
        gramian: g.row_iter().map(|r| r.iter().copied().collect()).collect(),
        singular_values,
        sigma_ratio: ratio,
        rank_tol,
        rank_decision,
        target_blocks,
        min_pairwise_separation,
        collinearity_events,
        null_direction,
        null_witness_residual,
    })
}

/// Signed bearing difference reduced modulo pi to `[-pi/2, pi/2]`.
fn signed_mod_pi(theta_i: f64, theta_j: f64) -> f64 {
    let d = theta_j - theta_i;
    d - std::f64::consts::PI * (d / std::f64::consts::PI).round()
}

/// `min_k |theta_j - theta_i - k pi|`, in `[0, pi/2]`.
pub fn separation_mod_pi(theta_i: f64, theta_j: f64) -> f64 {
    signed_mod_pi(theta_i, theta_j).abs()
}

/// Minimum over pairs and grid times; `None` for a single target.
pub fn bearing_separation_mod_pi(history: &MeasurementHistory) -> Option<PairSeparation> {
    let m = history.target_count();
    let mut best: Option<PairSeparation> = None;
    for i in 0..m {
        for j in (i + 1)..m {
            for (k, &t) in history.times.iter().enumerate() {
                let sep = separation_mod_pi(history.bearings[i][k], history.bearings[j][k]);
                if best.is_none_or(|b| sep < b.separation) {
                    best = Some(PairSeparation {
                        separation: sep,
                        pair: (i, j),
                        time: t,
                    });
                }
            }
        }
    }
    best
}

/// Maximal grid runs per pair where the separation drops below `collinearity_tol`.
///
/// A sign change of the signed separation between two neighbouring samples
/// is an alignment between grid points; both samples join the event and its
/// minimum separation is taken as zero.
pub fn detect_collinearity(
    history: &MeasurementHistory,
    collinearity_tol: f64,
) -> Vec<CollinearityEvent> {
    let m = history.target_count();
    let n = history.times.len();
    let mut events = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let signed: Vec<f64> = (0..n)
                .map(|k| signed_mod_pi(history.bearings[i][k], history.bearings[j][k]))
                .collect();
            let mut flagged: Vec<bool> = signed.iter().map(|d| d.abs() < collinearity_tol).collect();
            let mut crossing = vec![false; n];
            for k in 0..n.saturating_sub(1) {
                let (a, b) = (signed[k], signed[k + 1]);
                let quarter = std::f64::consts::FRAC_PI_4;
                if a * b < 0.0 && a.abs() < quarter && b.abs() < quarter {
                    flagged[k] = true;
                    flagged[k + 1] = true;
                    crossing[k] = true;
                }
            }
            let mut k = 0;
            while k < n {
                if !flagged[k] {
                    k += 1;
                    continue;
                }
                let first = k;
                let mut min_sep = f64::INFINITY;
                while k < n && flagged[k] {
                    min_sep = min_sep.min(signed[k].abs());
                    if crossing[k] {
                        min_sep = 0.0;
                    }
                    k += 1;
                }
                events.push(CollinearityEvent {
                    pair: (i, j),
                    start: history.times[first],
                    end: history.times[k - 1],
                    separation_min: min_sep,
                });
            }
        }
    }
    events
}

/// Determinant of `[[cos ti, -sin ti], [cos tj, -sin tj]]`, equal to `sin(ti - tj)`.
pub fn m_submatrix_det(theta_i: f64, theta_j: f64) -> f64 {
    let (si, ci) = theta_i.sin_cos();
    let (sj, cj) = theta_j.sin_cos();
    ci * (-sj) - (-si) * cj
}
