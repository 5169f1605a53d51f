//! Coordinate-frequency wavepacket shapes for photon emission (`f`) and
//! absorption (`g`).
//!
//! The Lorentzian form is the Weisskopf–Wigner spontaneous-emission shape
//! `f(ω) = i γ* / (Γ/2 − i(ω − ω_c))`; absorption profiles enter the kernels
//! through their conjugate. `NearDelta` is a unit-norm Lorentzian of
//! linewidth `ε`, standing in for the exact delta-function measurement limit
//! which is only meaningful as `ε → 0` on a grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, TfrwError};
use crate::quad;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralProfile {
    Lorentzian {
        gamma: Complex64,
        #[serde(rename = "Gamma")]
        linewidth: f64,
        omega_c: f64,
    },
    Gaussian {
        amp: Complex64,
        sigma: f64,
        omega_c: f64,
    },
    Tabulated {
        points: Vec<(f64, Complex64)>,
    },
    NearDelta {
        omega_c: f64,
        epsilon: f64,
    },
}

impl SpectralProfile {
    pub fn lorentzian(gamma: Complex64, linewidth: f64, omega_c: f64) -> Result<Self> {
        if linewidth <= 0.0 {
            return Err(TfrwError::InvalidArgument(
                "Lorentzian linewidth must be positive".into(),
            ));
        }
        Ok(Self::Lorentzian {
            gamma,
            linewidth,
            omega_c,
        })
    }

    pub fn gaussian(amp: Complex64, sigma: f64, omega_c: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(TfrwError::InvalidArgument(
                "Gaussian sigma must be positive".into(),
            ));
        }
        Ok(Self::Gaussian { amp, sigma, omega_c })
    }

    pub fn near_delta(omega_c: f64, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(TfrwError::InvalidArgument(
                "NearDelta epsilon must be positive".into(),
            ));
        }
        Ok(Self::NearDelta { omega_c, epsilon })
    }

    pub fn tabulated(mut points: Vec<(f64, Complex64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(TfrwError::InvalidArgument(
                "tabulated profile needs at least 2 points".into(),
            ));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TfrwError::InvalidArgument(
                "tabulated frequencies must be distinct".into(),
            ));
        }
        Ok(Self::Tabulated { points })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Lorentzian { linewidth, .. } if linewidth <= 0.0 => Err(
                TfrwError::InvalidArgument("Lorentzian linewidth must be positive".into()),
            ),
            Self::Gaussian { sigma, .. } if sigma <= 0.0 => Err(TfrwError::InvalidArgument(
                "Gaussian sigma must be positive".into(),
            )),
            Self::NearDelta { epsilon, .. } if epsilon <= 0.0 => Err(
                TfrwError::InvalidArgument("NearDelta epsilon must be positive".into()),
            ),
            Self::Tabulated { ref points } if points.len() < 2 => Err(
                TfrwError::InvalidArgument("tabulated profile needs at least 2 points".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Pointwise value. Negative frequencies are allowed; tabulated profiles
    /// are zero outside their table range.
    pub fn evaluate(&self, omega: f64) -> Complex64 {
        match self {
            Self::Lorentzian {
                gamma,
                linewidth,
                omega_c,
            } => lorentzian_value(*gamma, *linewidth, *omega_c, omega),
            Self::Gaussian { amp, sigma, omega_c } => {
                amp * (-(omega - omega_c).powi(2) / (4.0 * sigma * sigma)).exp()
            }
            Self::Tabulated { points } => {
                let n = points.len();
                if omega < points[0].0 || omega > points[n - 1].0 {
                    return Complex64::default();
                }
                let i = match points
                    .binary_search_by(|p| p.0.partial_cmp(&omega).unwrap())
                {
                    Ok(i) => return points[i].1,
                    Err(i) => i - 1,
                };
                let (x0, y0) = points[i];
                let (x1, y1) = points[i + 1];
                let t = (omega - x0) / (x1 - x0);
                y0 * (1.0 - t) + y1 * t
            }
            Self::NearDelta { omega_c, epsilon } => {
                // Unit-norm Lorentzian: |gamma|^2 = eps / (2 pi).
                let gamma = Complex64::new((epsilon / (2.0 * PI)).sqrt(), 0.0);
                lorentzian_value(gamma, *epsilon, *omega_c, omega)
            }
        }
    }

    /// `sqrt(∫ |p(ω)|² dω)` by adaptive quadrature over the whole line.
    pub fn l2_norm(&self) -> Result<f64> {
        let scale = self.frequency_scale();
        let r = quad::integrate_real_line(
            |w| Complex64::new(self.evaluate(w).norm_sqr(), 0.0),
            scale,
            1e-11,
        )?;
        Ok(r.value.re.max(0.0).sqrt())
    }

    /// Matched absorption profile for a scaling `s`: `g(ω) = √s · f(sω)`.
    pub fn matched_profile(&self, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(TfrwError::InvalidArgument(
                "scaling s must be positive".into(),
            ));
        }
        let rs = s.sqrt();
        Ok(match self {
            Self::Lorentzian {
                gamma,
                linewidth,
                omega_c,
            } => Self::Lorentzian {
                gamma: gamma / rs,
                linewidth: linewidth / s,
                omega_c: omega_c / s,
            },
            Self::Gaussian { amp, sigma, omega_c } => Self::Gaussian {
                amp: amp * rs,
                sigma: sigma / s,
                omega_c: omega_c / s,
            },
            Self::Tabulated { points } => Self::Tabulated {
                points: points.iter().map(|&(w, v)| (w / s, v * rs)).collect(),
            },
            Self::NearDelta { omega_c, epsilon } => Self::NearDelta {
                omega_c: omega_c / s,
                epsilon: epsilon / s,
            },
        })
    }

    /// Characteristic frequency magnitude, used to scale quadrature
    /// substitutions. Homogeneous of degree one under frequency rescaling.
    pub fn frequency_scale(&self) -> f64 {
        match self {
            Self::Lorentzian {
                linewidth, omega_c, ..
            } => omega_c.abs() + linewidth.abs(),
            Self::Gaussian { sigma, omega_c, .. } => omega_c.abs() + sigma.abs(),
            Self::Tabulated { points } => points
                .iter()
                .map(|p| p.0.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE),
            Self::NearDelta { omega_c, epsilon } => omega_c.abs() + epsilon.abs(),
        }
    }
}

fn lorentzian_value(gamma: Complex64, linewidth: f64, omega_c: f64, omega: f64) -> Complex64 {
    Complex64::new(0.0, 1.0) * gamma.conj()
        / Complex64::new(0.5 * linewidth, -(omega - omega_c))
}
