//! Cavity-mirror analogue of the expanding toy universe.
//!
//! A mirror at `x` closing a cavity of mode index `n` filled with `N`
//! photons feels the radiation-pressure force `ħnπcN/(2x²)`; in the scaled
//! coordinate `a_OM = x/x0` this is exactly the `ä ∝ a⁻²` law of a dust-like
//! expansion. The two-cavity rotating-frame construction maps a mirror
//! displacement to a scale factor via `a_OM = Δ/(Δ + Gx)` and turns a
//! constant Hubble rate into a constant conformal-time mirror velocity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, TfrwError};
use crate::evolution::EvolutionKernel;
use crate::grid::ScaleGrid;
use crate::pipeline::{measure_once, MeasurementEvent};
use crate::universe::UniverseWavefunction;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    #[default]
    Free,
    Harmonic {
        #[serde(rename = "Omega")]
        omega: f64,
        x_eq: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptomechParams {
    /// Mirror mass.
    pub m: f64,
    /// Reference length; `a_om = x / x0`.
    pub x0: f64,
    /// Cavity mode index.
    pub n_mode: u32,
    /// Mean photon number (classical radiation-pressure parameter).
    pub n_photons: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub c_light: f64,
    #[serde(default)]
    pub potential: Potential,
}

impl OptomechParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.x0 > 0.0) {
            return Err(TfrwError::InvalidArgument(
                "mirror mass and reference length must be positive".into(),
            ));
        }
        if self.n_mode < 1 {
            return Err(TfrwError::InvalidArgument(
                "cavity mode index must be at least 1".into(),
            ));
        }
        if !(self.n_photons >= 0.0) {
            return Err(TfrwError::InvalidArgument(
                "photon number must be nonnegative".into(),
            ));
        }
        if !(self.hbar > 0.0 && self.c_light > 0.0) {
            return Err(TfrwError::InvalidArgument(
                "physical constants must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `K` in `ä = K / a²`.
    fn force_constant(&self) -> f64 {
        self.hbar * self.n_mode as f64 * PI * self.c_light * self.n_photons
            / (2.0 * self.x0.powi(3) * self.m)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptomechState {
    pub a_om: f64,
    pub a_dot: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationMethod {
    #[default]
    VelocityVerlet,
    Rk4,
}

/// `ä_OM` of the free (or harmonically trapped) mirror.
pub fn free_mirror_accel(s: &OptomechState, p: &OptomechParams) -> Result<f64> {
    if s.a_om <= 0.0 {
        return Err(TfrwError::Singularity);
    }
    let mut acc = p.force_constant() / (s.a_om * s.a_om);
    if let Potential::Harmonic { omega, x_eq } = p.potential {
        let x = s.a_om * p.x0;
        acc -= omega * omega * (x - x_eq) / p.x0;
    }
    Ok(acc)
}

/// `E = ½ M x0² ȧ² + ħnπcN/(2 x0 a) + V_mech(x)`.
pub fn mechanical_energy(s: &OptomechState, p: &OptomechParams) -> f64 {
    let kinetic = 0.5 * p.m * p.x0 * p.x0 * s.a_dot * s.a_dot;
    let cavity = p.hbar * p.n_mode as f64 * PI * p.c_light * p.n_photons
        / (2.0 * p.x0 * s.a_om);
    let mech = match p.potential {
        Potential::Free => 0.0,
        Potential::Harmonic { omega, x_eq } => {
            let x = s.a_om * p.x0;
            0.5 * p.m * omega * omega * (x - x_eq) * (x - x_eq)
        }
    };
    kinetic + cavity + mech
}

pub fn integrate_trajectory(
    s0: &OptomechState,
    p: &OptomechParams,
    dt: f64,
    steps: usize,
    method: IntegrationMethod,
) -> Result<Vec<OptomechState>> {
    p.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TfrwError::InvalidArgument("timestep must be positive".into()));
    }
    if s0.a_om <= 0.0 {
        return Err(TfrwError::Singularity);
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*s0);
    let mut s = *s0;
    let mut acc = free_mirror_accel(&s, p)?;
    for step in 1..=steps {
        match method {
            IntegrationMethod::VelocityVerlet => {
                let a_new = s.a_om + s.a_dot * dt + 0.5 * acc * dt * dt;
                if a_new <= 0.0 {
                    return Err(TfrwError::Collapse { step });
                }
                let probe = OptomechState {
                    a_om: a_new,
                    a_dot: s.a_dot,
                    t: s.t + dt,
                };
                let acc_new = free_mirror_accel(&probe, p)?;
                s = OptomechState {
                    a_om: a_new,
                    a_dot: s.a_dot + 0.5 * (acc + acc_new) * dt,
                    t: s.t + dt,
                };
                acc = acc_new;
            }
            IntegrationMethod::Rk4 => {
                let deriv = |a: f64, v: f64| -> Result<(f64, f64)> {
                    let st = OptomechState { a_om: a, a_dot: v, t: 0.0 };
                    Ok((v, free_mirror_accel(&st, p)?))
                };
                let guard = |a: f64| -> Result<f64> {
                    if a <= 0.0 {
                        Err(TfrwError::Collapse { step })
                    } else {
                        Ok(a)
                    }
                };
                let (k1a, k1v) = deriv(s.a_om, s.a_dot)?;
                let (k2a, k2v) = deriv(guard(s.a_om + 0.5 * dt * k1a)?, s.a_dot + 0.5 * dt * k1v)?;
                let (k3a, k3v) = deriv(guard(s.a_om + 0.5 * dt * k2a)?, s.a_dot + 0.5 * dt * k2v)?;
                let (k4a, k4v) = deriv(guard(s.a_om + dt * k3a)?, s.a_dot + dt * k3v)?;
                let a_new = guard(s.a_om + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a))?;
                s = OptomechState {
                    a_om: a_new,
                    a_dot: s.a_dot + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
                    t: s.t + dt,
                };
                acc = free_mirror_accel(&s, p)?;
            }
        }
        out.push(s);
    }
    Ok(out)
}

/// Two-cavity rotating-frame configuration: each cavity has resonance
/// `ω_k(x) = ω_k0 + G_k x` and drive detuning `Δ_k`; the construction
/// requires `Δ_k / G_k` identical across cavities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CavityConfig {
    pub omega0: f64,
    /// Frequency pull `∂ω_k/∂x`.
    #[serde(rename = "G")]
    pub g_pull: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RotatingFrameConfig {
    pub cavities: [CavityConfig; 2],
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotatingFrameFrequencies {
    pub nu: [f64; 2],
    pub omega_tilde: [f64; 2],
}

impl RotatingFrameConfig {
    /// Reference ratio `ρ = Δ/G` of the first cavity.
    pub fn delta_over_g(&self) -> f64 {
        self.cavities[0].delta / self.cavities[0].g_pull
    }

    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.cavities.iter().enumerate() {
            if c.g_pull == 0.0 {
                return Err(TfrwError::Configuration(format!(
                    "cavity {} has zero frequency pull",
                    k + 1
                )));
            }
            if c.delta == 0.0 {
                return Err(TfrwError::Configuration(format!(
                    "cavity {} has zero detuning (zero effective frequency)",
                    k + 1
                )));
            }
        }
        let r0 = self.cavities[0].delta / self.cavities[0].g_pull;
        let r1 = self.cavities[1].delta / self.cavities[1].g_pull;
        if (r0 - r1).abs() > 1e-12 * r0.abs().max(r1.abs()).max(1.0) {
            return Err(TfrwError::Configuration(format!(
                "detuning-to-pull ratios differ: {r0} vs {r1}"
            )));
        }
        Ok(())
    }
}

/// `a_OM(x) = Δ/(Δ + Gx) = ρ/(ρ + x)`.
pub fn a_om_of_x(x: f64, cfg: &RotatingFrameConfig) -> Result<f64> {
    cfg.validate()?;
    let rho = cfg.delta_over_g();
    let a = rho / (rho + x);
    if !(a > 0.0) || !a.is_finite() {
        return Err(TfrwError::InvalidRange(format!(
            "displacement {x} crosses the pole at {}",
            -rho
        )));
    }
    Ok(a)
}

/// Inverse map `x = ρ(1/a − 1)`.
pub fn x_of_a_om(a_om: f64, cfg: &RotatingFrameConfig) -> Result<f64> {
    cfg.validate()?;
    if !(a_om > 0.0) {
        return Err(TfrwError::InvalidRange(format!(
            "scale factor must be positive, got {a_om}"
        )));
    }
    Ok(cfg.delta_over_g() * (1.0 / a_om - 1.0))
}

/// Rotating-frame drive frequencies `ν_k = ω_k0 + (G_k/G)Δ` and effective
/// frequencies `ω̃_k = −Δ_k`.
pub fn rotating_frame_frequencies(cfg: &RotatingFrameConfig) -> Result<RotatingFrameFrequencies> {
    cfg.validate()?;
    let g = cfg.cavities[0].g_pull;
    let delta = cfg.cavities[0].delta;
    let mut nu = [0.0; 2];
    let mut omega_tilde = [0.0; 2];
    for k in 0..2 {
        let c = cfg.cavities[k];
        let residual = c.delta - c.g_pull / g * delta;
        if residual.abs() > 1e-12 * c.delta.abs().max(1.0) {
            return Err(TfrwError::Configuration(format!(
                "rotating frame leaves a constant term {residual} in cavity {}",
                k + 1
            )));
        }
        nu[k] = c.omega0 + c.g_pull / g * delta;
        omega_tilde[k] = -c.delta;
    }
    Ok(RotatingFrameFrequencies { nu, omega_tilde })
}

/// Constant conformal-time mirror velocity `∂x/∂η = (−Δ/G) H`.
pub fn hubble_mirror_velocity(h: f64, cfg: &RotatingFrameConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(-cfg.delta_over_g() * h)
}

/// Conformal trajectory under a constant Hubble rate, starting at `a0`:
/// `x(η) = x(a0) + (−Δ/G) H η`, `a(η) = a_OM(x(η))`.
pub fn hubble_trajectory(
    h: f64,
    cfg: &RotatingFrameConfig,
    a0: f64,
    eta_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    if samples < 2 {
        return Err(TfrwError::InvalidArgument(
            "trajectory needs at least two samples".into(),
        ));
    }
    let v = hubble_mirror_velocity(h, cfg)?;
    let x_start = x_of_a_om(a0, cfg)?;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let eta = eta_max * i as f64 / (samples - 1) as f64;
        let x = x_start + v * eta;
        out.push((eta, x, a_om_of_x(x, cfg)?));
    }
    Ok(out)
}

/// Wavefunction over mirror displacement on a strictly increasing `x` grid.
#[derive(Debug, Clone)]
pub struct MirrorWavefunction {
    xs: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

impl MirrorWavefunction {
    pub fn new(xs: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if xs.len() < 3 || xs.len() != amplitudes.len() {
            return Err(TfrwError::InvalidArgument(
                "mirror grid needs at least 3 points matching the amplitudes".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TfrwError::InvalidArgument(
                "mirror grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { xs, amplitudes })
    }

    pub fn gaussian(xs: Vec<f64>, x_center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(TfrwError::InvalidArgument("sigma must be positive".into()));
        }
        let amps = xs
            .iter()
            .map(|&x| {
                Complex64::new(
                    (-(x - x_center) * (x - x_center) / (4.0 * sigma * sigma)).exp(),
                    0.0,
                )
            })
            .collect();
        let psi = Self::new(xs, amps)?;
        psi.normalize()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn weights(&self) -> Vec<f64> {
        let n = self.xs.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (self.xs[i + 1] - self.xs[i]);
            w[i] += half;
            w[i + 1] += half;
        }
        w
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(self.weights())
            .map(|(z, w)| z.norm_sqr() * w)
            .sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_squared();
        if n2 <= 0.0 {
            return Err(TfrwError::DegenerateState);
        }
        let scale = 1.0 / n2.sqrt();
        Ok(Self {
            xs: self.xs.clone(),
            amplitudes: self.amplitudes.iter().map(|z| z * scale).collect(),
        })
    }

    /// Mean, standard deviation, and density peak of `|ψ(x)|²`.
    pub fn statistics(&self) -> (f64, f64, f64) {
        let w = self.weights();
        let norm: f64 = self.norm_squared();
        let mean: f64 = self
            .amplitudes
            .iter()
            .zip(&w)
            .zip(&self.xs)
            .map(|((z, w), x)| z.norm_sqr() * w * x)
            .sum::<f64>()
            / norm;
        let var: f64 = self
            .amplitudes
            .iter()
            .zip(&w)
            .zip(&self.xs)
            .map(|((z, w), x)| z.norm_sqr() * w * (x - mean) * (x - mean))
            .sum::<f64>()
            / norm;
        let peak = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(i, _)| self.xs[i])
            .unwrap();
        (mean, var.max(0.0).sqrt(), peak)
    }
}

/// Photon back-action on the mirror wavefunction.
///
/// The state is mapped to scale-factor space through `a_OM(x)` with a
/// discrete Jacobian that preserves the norm exactly, reduced by the event
/// kernel, and mapped back. By default the kernel is referenced to the
/// resonant point `a = 1` at `x = 0` (single-position reduction); passing an
/// evolution kernel instead runs the full one-photon pipeline in `a`.
pub fn mirror_posterior_update(
    psi: &MirrorWavefunction,
    cfg: &RotatingFrameConfig,
    ev: &MeasurementEvent,
    evolution: Option<&EvolutionKernel>,
) -> Result<(MirrorWavefunction, f64)> {
    cfg.validate()?;
    ev.validate()?;
    let n = psi.xs.len();
    let a_vals: Result<Vec<f64>> = psi.xs.iter().map(|&x| a_om_of_x(x, cfg)).collect();
    let a_vals = a_vals?;

    // a(x) is monotonic on the valid range; order the a-grid ascending.
    let ascending = a_vals[1] > a_vals[0];
    let reorder = |i: usize| if ascending { i } else { n - 1 - i };
    let a_sorted: Vec<f64> = (0..n).map(|i| a_vals[reorder(i)]).collect();
    let grid = ScaleGrid::from_points(a_sorted)?;

    let w_x = psi.weights();
    let w_a = grid.weights();
    // Discrete Jacobian √(w_x/w_a): the x→a change of variables then
    // conserves the trapezoid norm identically.
    let amps_a: Vec<Complex64> = (0..n)
        .map(|i| {
            let ix = reorder(i);
            psi.amplitudes[ix] * (w_x[ix] / w_a[i]).sqrt()
        })
        .collect();
    let h_a = UniverseWavefunction::new(grid.clone(), amps_a)?;

    let (post_a, weight) = match evolution {
        Some(b) => {
            let res = measure_once(&h_a, b, ev)?;
            (res.posterior, res.detect_weight)
        }
        None => {
            let q = ev.kernel();
            let amps: Result<Vec<Complex64>> = h_a
                .amplitudes()
                .iter()
                .zip(grid.points())
                .map(|(z, &a)| Ok(z * q.eval(a)?))
                .collect();
            let h_tilde = UniverseWavefunction::new(grid.clone(), amps?)?;
            let weight = h_tilde.norm_squared();
            if weight == 0.0 {
                return Err(TfrwError::NoDetection);
            }
            let (p, _) = h_tilde.normalize()?;
            (p, weight)
        }
    };

    let amps_x: Vec<Complex64> = (0..n)
        .map(|i| {
            let ix = reorder(i);
            // inverse of the forward Jacobian at the same point
            post_a.amplitudes()[i] * (w_a[i] / w_x[ix]).sqrt()
        })
        .collect();
    let mut ordered = vec![Complex64::default(); n];
    for i in 0..n {
        ordered[reorder(i)] = amps_x[i];
    }
    let out = MirrorWavefunction::new(psi.xs.clone(), ordered)?.normalize()?;
    Ok((out, weight))
}
