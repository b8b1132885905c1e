use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid over `[start, end]` with `points` samples, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInput("grid bounds must be finite".into()));
        }
        if end < start {
            return Err(Error::InvalidInput(format!(
                "grid end {end} precedes start {start}"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points, got {points}"
            )));
        }
        Ok(TimeGrid { start, end, points })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }

    pub fn step(&self) -> f64 {
        self.span() / (self.points - 1) as f64
    }

    /// k-th sample; the last sample is exactly `end`.
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.end
        } else {
            self.start + self.span() * k as f64 / (self.points - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.time(k)).collect()
    }

    /// Same interval with one extra node if needed so that Simpson's rule applies.
    pub fn with_odd_nodes(&self) -> TimeGrid {
        if self.points % 2 == 1 {
            *self
        } else {
            TimeGrid {
                points: self.points + 1,
                ..*self
            }
        }
    }

    /// Composite Simpson weights `h/3 * [1, 4, 2, 4, ..., 4, 1]`.
    pub fn simpson_weights(&self) -> Result<Vec<f64>> {
        let n = self.points;
        if n.is_multiple_of(2) {
            return Err(Error::OddIntervals { nodes: n });
        }
        let h = self.step();
        Ok((0..n)
            .map(|k| {
                let w = if k == 0 || k == n - 1 {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = TimeGrid::new(0.1, 0.7, 7).unwrap();
        assert_eq!(g.time(0), 0.1);
        assert_eq!(g.time(6), 0.7);
        assert_eq!(g.times().len(), 7);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(1.0, 0.0, 5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 1.0, 3).is_err());
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        let g = TimeGrid::new(-1.0, 2.0, 9).unwrap();
        let w = g.simpson_weights().unwrap();
        let integral: f64 = g
            .times()
            .iter()
            .zip(&w)
            .map(|(t, w)| w * (t * t * t - 2.0 * t + 0.5))
            .sum();
        // x^4/4 - x^2 + x/2 on [-1, 2]
        let exact = (4.0 - 4.0 + 1.0) - (0.25 - 1.0 - 0.5);
        assert!((integral - exact).abs() < 1e-12);
    }

    #[test]
    fn even_node_count_is_rejected_and_padded() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            g.simpson_weights(),
            Err(Error::OddIntervals { nodes: 4 })
        ));
        let padded = g.with_odd_nodes();
        assert_eq!(padded.points, 5);
        assert!(padded.simpson_weights().is_ok());
    }

    #[test]
    fn zero_length_grid_has_zero_weights() {
        let g = TimeGrid::new(3.0, 3.0, 5).unwrap();
        assert!(g.simpson_weights().unwrap().iter().all(|&w| w == 0.0));
    }
}
