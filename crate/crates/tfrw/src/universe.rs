//! The discretized universe wavefunction `h(a)` and its statistics.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, TfrwError};
use crate::grid::ScaleGrid;
use crate::interp::CubicSpline;

/// Complex amplitudes over a [`ScaleGrid`]; `∫|h(a)|² da` is the total
/// probability, computed with trapezoid weights on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseWavefunction {
    grid: ScaleGrid,
    amplitudes: Vec<Complex64>,
}

/// Density statistics of `|h(a)|²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub mean_a: f64,
    pub std_a: f64,
    /// Full width at half maximum, linearly interpolated between grid points.
    /// For multimodal densities this is the widest bracketing interval.
    pub fwhm_a: f64,
    pub multimodal: bool,
}

impl UniverseWavefunction {
    pub fn new(grid: ScaleGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(TfrwError::InvalidArgument(format!(
                "amplitude count {} does not match grid size {}",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `∫ |h(a)|² da` by the trapezoid rule.
    pub fn norm_squared(&self) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(&self.amplitudes)
            .map(|(w, h)| w * h.norm_sqr())
            .sum()
    }

    /// Normalized copy plus the squared norm of the input.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm_before = self.norm_squared();
        if !(norm_before > 0.0) || !norm_before.is_finite() {
            return Err(TfrwError::DegenerateState);
        }
        let scale = 1.0 / norm_before.sqrt();
        let amplitudes = self.amplitudes.iter().map(|h| h * scale).collect();
        Ok((
            Self {
                grid: self.grid.clone(),
                amplitudes,
            },
            norm_before,
        ))
    }

    /// `∫ h1*(a) h2(a) da` on a shared grid.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(TfrwError::GridMismatch);
        }
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.amplitudes.iter().zip(&other.amplitudes))
            .map(|(w, (h1, h2))| h1.conj() * h2 * *w)
            .sum())
    }

    /// L2 distance between two wavefunctions on the same grid.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(TfrwError::GridMismatch);
        }
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.amplitudes.iter().zip(&other.amplitudes))
            .map(|(w, (h1, h2))| w * (h1 - h2).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn moments(&self) -> Moments {
        let points = self.grid.points();
        let weights = self.grid.weights();
        let density: Vec<f64> = self.amplitudes.iter().map(|h| h.norm_sqr()).collect();
        let mass: f64 = weights.iter().zip(&density).map(|(w, d)| w * d).sum();
        let mean: f64 = weights
            .iter()
            .zip(points.iter().zip(&density))
            .map(|(w, (a, d))| w * a * d)
            .sum::<f64>()
            / mass;
        let var: f64 = weights
            .iter()
            .zip(points.iter().zip(&density))
            .map(|(w, (a, d))| w * (a - mean).powi(2) * d)
            .sum::<f64>()
            / mass;
        let (fwhm, multimodal) = fwhm_of(points, &density);
        Moments {
            mean_a: mean,
            std_a: var.max(0.0).sqrt(),
            fwhm_a: fwhm,
            multimodal,
        }
    }

    /// Cubic-spline interpolant of the amplitudes against `ln a`.
    pub fn log_spline(&self) -> CubicSpline {
        let logs: Vec<f64> = self.grid.points().iter().map(|a| a.ln()).collect();
        CubicSpline::new(&logs, &self.amplitudes)
    }
}

fn fwhm_of(points: &[f64], density: &[f64]) -> (f64, bool) {
    let peak = density.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return (0.0, false);
    }
    let half = 0.5 * peak;
    let mut crossings = Vec::new();
    for i in 0..density.len() - 1 {
        let (d0, d1) = (density[i] - half, density[i + 1] - half);
        if d0 == 0.0 {
            crossings.push(points[i]);
        } else if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            crossings.push(points[i] + t * (points[i + 1] - points[i]));
        }
    }
    if *density.last().unwrap() - half == 0.0 {
        crossings.push(*points.last().unwrap());
    }
    match crossings.len() {
        0 => (points[points.len() - 1] - points[0], false),
        1 => {
            // Half-max plateau clipped by the grid edge.
            let above_first = density[0] > half;
            if above_first {
                (crossings[0] - points[0], false)
            } else {
                (points[points.len() - 1] - crossings[0], false)
            }
        }
        2 => (crossings[1] - crossings[0], false),
        _ => (
            crossings[crossings.len() - 1] - crossings[0],
            true,
        ),
    }
}

/// Normalized Gaussian packet `h(a) ∝ exp(−(a−a0)²/(4σ²))`; the density
/// `|h|²` then has standard deviation `σ`.
pub fn gaussian_packet(grid: &ScaleGrid, a0: f64, sigma: f64) -> Result<UniverseWavefunction> {
    if sigma <= 0.0 {
        return Err(TfrwError::InvalidArgument("sigma must be positive".into()));
    }
    if a0 < grid.a_min() || a0 > grid.a_max() {
        return Err(TfrwError::InvalidArgument(format!(
            "packet center {a0} lies outside the grid [{}, {}]",
            grid.a_min(),
            grid.a_max()
        )));
    }
    let amplitudes: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&a| Complex64::new((-(a - a0).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0))
        .collect();
    let (psi, _) = UniverseWavefunction::new(grid.clone(), amplitudes)?.normalize()?;
    Ok(psi)
}
