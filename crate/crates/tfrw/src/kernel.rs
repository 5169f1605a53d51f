//! The measurement back-action kernel `q(a, c)`.
//!
//! `q(a, c) = (ac)^{-1/2} ∫ g*(ω/a) f(ω/c) dω` weights pairs of final and
//! initial scale factors after a photon emitted with profile `f` is detected
//! with profile `g`. A change of variables shows `q` depends only on the
//! ratio `r = a/c`. For Lorentzian profile pairs the integral has the closed
//! form `2π γ0* γ1 √r / ((Γ0/2 + iω0) + (Γ1/2 − iω1) r)`, which serves as the
//! independent oracle for the quadrature route.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Result, TfrwError};
use crate::interp::CubicSpline;
use crate::profiles::SpectralProfile;
use crate::quad;

pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum KernelBackend {
    /// Adaptive quadrature against a pair of spectral profiles.
    Quadrature {
        f: SpectralProfile,
        g: SpectralProfile,
        rel_tol: f64,
    },
    /// Exact Lorentzian-pair closed form.
    LorentzianClosed {
        gamma0: Complex64,
        gamma1: Complex64,
        linewidth0: f64,
        linewidth1: f64,
        omega0: f64,
        omega1: f64,
    },
    /// Cubic interpolation of the base kernel in `ln r`.
    TabulatedRatio {
        log_r: Vec<f64>,
        spline: CubicSpline,
    },
}

/// `q(r)^k`: the back-action kernel raised to the number of identical
/// photon measurements.
#[derive(Debug, Clone)]
pub struct MeasurementKernel {
    pub backend: KernelBackend,
    pub power: u32,
}

/// Result of the peak search on `|q(r)|`.
#[derive(Debug, Clone, Copy)]
pub struct KernelPeak {
    pub r_star: f64,
    pub q_abs_max: f64,
}

/// `q` for an arbitrary pair `(a, c)`; the quadrature scale is homogeneous in
/// `(a, c)`, so the result depends on `a/c` to round-off.
pub fn q_numeric_pair(
    f: &SpectralProfile,
    g: &SpectralProfile,
    a: f64,
    c: f64,
) -> Result<Complex64> {
    q_numeric_pair_tol(f, g, a, c, DEFAULT_REL_TOL)
}

pub fn q_numeric_pair_tol(
    f: &SpectralProfile,
    g: &SpectralProfile,
    a: f64,
    c: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if !(a > 0.0 && c > 0.0) {
        return Err(TfrwError::InvalidArgument(
            "scale factors must be positive".into(),
        ));
    }
    let scale = (c * f.frequency_scale()).max(a * g.frequency_scale());
    let integral = quad::integrate_real_line(
        |w| g.evaluate(w / a).conj() * f.evaluate(w / c),
        scale,
        rel_tol,
    )?;
    Ok(integral.value / (a * c).sqrt())
}

/// `q(r)` by adaptive quadrature, evaluated at `(a, c) = (r, 1)`.
pub fn q_numeric(f: &SpectralProfile, g: &SpectralProfile, r: f64) -> Result<Complex64> {
    q_numeric_pair(f, g, r, 1.0)
}

/// Closed-form `q` for the Lorentzian pair.
#[allow(clippy::too_many_arguments)]
pub fn q_lorentzian_closed(
    gamma0: Complex64,
    gamma1: Complex64,
    linewidth0: f64,
    linewidth1: f64,
    omega0: f64,
    omega1: f64,
    r: f64,
) -> Complex64 {
    let denom = Complex64::new(0.5 * linewidth0, omega0)
        + Complex64::new(0.5 * linewidth1, -omega1) * r;
    2.0 * PI * gamma0.conj() * gamma1 * r.sqrt() / denom
}

/// Lorentzian-equivalent parameters of a profile, when it has any.
fn lorentzian_params(p: &SpectralProfile) -> Option<(Complex64, f64, f64)> {
    match *p {
        SpectralProfile::Lorentzian {
            gamma,
            linewidth,
            omega_c,
        } => Some((gamma, linewidth, omega_c)),
        SpectralProfile::NearDelta { omega_c, epsilon } => Some((
            Complex64::new((epsilon / (2.0 * PI)).sqrt(), 0.0),
            epsilon,
            omega_c,
        )),
        _ => None,
    }
}

impl MeasurementKernel {
    /// Kernel for an emission/absorption profile pair; Lorentzian-like pairs
    /// get the exact closed-form backend.
    pub fn for_profiles(f: &SpectralProfile, g: &SpectralProfile) -> Self {
        if let (Some((g0, l0, w0)), Some((g1, l1, w1))) =
            (lorentzian_params(f), lorentzian_params(g))
        {
            return Self {
                backend: KernelBackend::LorentzianClosed {
                    gamma0: g0,
                    gamma1: g1,
                    linewidth0: l0,
                    linewidth1: l1,
                    omega0: w0,
                    omega1: w1,
                },
                power: 1,
            };
        }
        Self {
            backend: KernelBackend::Quadrature {
                f: f.clone(),
                g: g.clone(),
                rel_tol: DEFAULT_REL_TOL,
            },
            power: 1,
        }
    }

    /// Base kernel value `q(r)` (power not applied).
    pub fn eval_base(&self, r: f64) -> Result<Complex64> {
        if !(r > 0.0) {
            return Err(TfrwError::InvalidArgument("ratio must be positive".into()));
        }
        match &self.backend {
            KernelBackend::Quadrature { f, g, rel_tol } => {
                q_numeric_pair_tol(f, g, r, 1.0, *rel_tol)
            }
            KernelBackend::LorentzianClosed {
                gamma0,
                gamma1,
                linewidth0,
                linewidth1,
                omega0,
                omega1,
            } => Ok(q_lorentzian_closed(
                *gamma0, *gamma1, *linewidth0, *linewidth1, *omega0, *omega1, r,
            )),
            KernelBackend::TabulatedRatio { spline, .. } => Ok(spline.eval(r.ln())),
        }
    }

    /// `q(r)^power`.
    pub fn eval(&self, r: f64) -> Result<Complex64> {
        Ok(self.eval_base(r)?.powi(self.power as i32))
    }

    /// Same kernel with the power multiplied by `times`.
    pub fn kernel_power(&self, times: u32) -> Result<Self> {
        if times < 1 {
            return Err(TfrwError::InvalidArgument(
                "kernel power must be at least 1".into(),
            ));
        }
        Ok(Self {
            backend: self.backend.clone(),
            power: self.power * times,
        })
    }

    /// Precompute the base kernel on a log-spaced ratio grid and switch to
    /// the interpolating backend. Dense pipeline loops use this to avoid one
    /// quadrature per grid pair.
    pub fn tabulate(&self, r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && n >= 4) {
            return Err(TfrwError::InvalidArgument(
                "tabulation needs 0 < r_min < r_max and n >= 4".into(),
            ));
        }
        let log_r: Vec<f64> = (0..n)
            .map(|i| r_min.ln() + (r_max / r_min).ln() * i as f64 / (n - 1) as f64)
            .collect();
        let values = crate::exec::map_indices(n, |i| self.eval_base(log_r[i].exp()));
        let values: Result<Vec<Complex64>> = values.into_iter().collect();
        let values = values?;
        let spline = CubicSpline::new(&log_r, &values);
        Ok(Self {
            backend: KernelBackend::TabulatedRatio { log_r, spline },
            power: self.power,
        })
    }

    /// Maximize `|q(r)|` on `[r_lo, r_hi]` by golden-section search after a
    /// coarse unimodality scan.
    pub fn peak_ratio(&self, r_lo: f64, r_hi: f64) -> Result<KernelPeak> {
        if !(r_lo > 0.0 && r_hi > r_lo) {
            return Err(TfrwError::InvalidArgument(
                "search interval must satisfy 0 < r_lo < r_hi".into(),
            ));
        }
        const SCAN: usize = 256;
        let xs: Vec<f64> = (0..SCAN)
            .map(|i| r_lo.ln() + (r_hi / r_lo).ln() * i as f64 / (SCAN - 1) as f64)
            .collect();
        let mut vals = Vec::with_capacity(SCAN);
        for &x in &xs {
            vals.push(self.eval_base(x.exp())?.norm());
        }
        // Interior local maxima of the coarse scan.
        let mut maxima = Vec::new();
        for i in 1..SCAN - 1 {
            if vals[i] > vals[i - 1] && vals[i] >= vals[i + 1] {
                maxima.push(i);
            }
        }
        if vals[0] > vals[1] {
            maxima.insert(0, 0);
        }
        if vals[SCAN - 1] > vals[SCAN - 2] {
            maxima.push(SCAN - 1);
        }
        if maxima.len() > 1 {
            let brackets = maxima
                .iter()
                .map(|&i| {
                    (
                        xs[i.saturating_sub(1)].exp(),
                        xs[(i + 1).min(SCAN - 1)].exp(),
                    )
                })
                .collect();
            return Err(TfrwError::NonUnimodal { brackets });
        }
        let peak_idx = maxima.first().copied().unwrap_or_else(|| {
            vals.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        });
        let mut lo = xs[peak_idx.saturating_sub(1)];
        let mut hi = xs[(peak_idx + 1).min(SCAN - 1)];
        // Golden-section maximization in ln r.
        let phi = 0.5 * (5.0f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = self.eval_base(x1.exp())?.norm();
        let mut f2 = self.eval_base(x2.exp())?.norm();
        while (hi - lo) > 1e-10 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = self.eval_base(x2.exp())?.norm();
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = self.eval_base(x1.exp())?.norm();
            }
        }
        let r_star = (0.5 * (lo + hi)).exp();
        Ok(KernelPeak {
            r_star,
            q_abs_max: self.eval_base(r_star)?.norm(),
        })
    }
}
