//! Strictly positive scale-factor grids and trapezoid quadrature weights.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TfrwError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingMode {
    LogUniform,
    Uniform,
    Explicit,
}

/// Ordered scale-factor sample points `a_i`, all strictly positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleGrid {
    points: Vec<f64>,
    spacing_mode: SpacingMode,
}

impl PartialEq for ScaleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl ScaleGrid {
    fn validate(points: &[f64]) -> Result<()> {
        if points.len() < 3 {
            return Err(TfrwError::InvalidArgument(format!(
                "grid needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points[0] <= 0.0 {
            return Err(TfrwError::Singularity);
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TfrwError::InvalidArgument(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// `n` geometrically spaced points from `a_min` to `a_max` inclusive.
    pub fn log_uniform(a_min: f64, a_max: f64, n: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_max > 0.0) {
            return Err(TfrwError::InvalidArgument(
                "grid bounds must be positive".into(),
            ));
        }
        if a_min >= a_max {
            return Err(TfrwError::InvalidArgument(
                "grid requires a_min < a_max".into(),
            ));
        }
        if n < 3 {
            return Err(TfrwError::InvalidArgument(
                "grid needs at least 3 points".into(),
            ));
        }
        let ratio = a_max / a_min;
        let mut points: Vec<f64> = (0..n)
            .map(|i| a_min * ratio.powf(i as f64 / (n - 1) as f64))
            .collect();
        points[n - 1] = a_max;
        Self::validate(&points)?;
        Ok(Self {
            points,
            spacing_mode: SpacingMode::LogUniform,
        })
    }

    /// `n` linearly spaced points from `a_min` to `a_max` inclusive.
    pub fn uniform(a_min: f64, a_max: f64, n: usize) -> Result<Self> {
        if !(a_min > 0.0 && a_max > 0.0) {
            return Err(TfrwError::InvalidArgument(
                "grid bounds must be positive".into(),
            ));
        }
        if a_min >= a_max {
            return Err(TfrwError::InvalidArgument(
                "grid requires a_min < a_max".into(),
            ));
        }
        if n < 3 {
            return Err(TfrwError::InvalidArgument(
                "grid needs at least 3 points".into(),
            ));
        }
        let step = (a_max - a_min) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| a_min + step * i as f64).collect();
        points[n - 1] = a_max;
        Self::validate(&points)?;
        Ok(Self {
            points,
            spacing_mode: SpacingMode::Uniform,
        })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        Self::validate(&points)?;
        Ok(Self {
            points,
            spacing_mode: SpacingMode::Explicit,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing_mode(&self) -> SpacingMode {
        self.spacing_mode
    }

    pub fn a_min(&self) -> f64 {
        self.points[0]
    }

    pub fn a_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Trapezoid quadrature weights for this (possibly nonuniform) grid.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (self.points[i + 1] - self.points[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        w
    }

    /// Constant step in `ln a`, when the grid is log-uniform to round-off.
    pub fn log_step(&self) -> Option<f64> {
        let n = self.points.len();
        let step = (self.points[n - 1] / self.points[0]).ln() / (n - 1) as f64;
        let uniform = self
            .points
            .windows(2)
            .all(|w| ((w[1] / w[0]).ln() - step).abs() <= 1e-9 * step.abs().max(1e-300));
        uniform.then_some(step)
    }

    /// Local grid step around the point nearest to `a`.
    pub fn step_near(&self, a: f64) -> f64 {
        let i = match self
            .points
            .binary_search_by(|p| p.partial_cmp(&a).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.min(self.points.len() - 1),
        };
        if i == 0 {
            self.points[1] - self.points[0]
        } else {
            self.points[i] - self.points[i - 1]
        }
    }
}

/// Geometric grid from `a_min` to `a_max` with `n` points.
pub fn make_log_grid(a_min: f64, a_max: f64, n: usize) -> Result<ScaleGrid> {
    ScaleGrid::log_uniform(a_min, a_max, n)
}
