//! Emission–evolution–detection updates of the universe wavefunction.
//!
//! A detected photon post-selects the universe state: the unnormalized
//! posterior is `h̃(a) = ∫ q(a/c) B(a, c) h0(c) dc`, where `q` is the
//! back-action kernel of the event and `B` the evolution between emission
//! and detection. `detect_weight = ∫|h̃|² da` is the relative weight of the
//! detected branch; zero-weight branches are thrown out.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TfrwError};
use crate::evolution::EvolutionKernel;
use crate::exec::map_indices;
use crate::kernel::{KernelBackend, MeasurementKernel};
use crate::profiles::SpectralProfile;
use crate::quad;
use crate::universe::{Moments, UniverseWavefunction};

/// One photon: its emission profile `f` and detection profile `g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementEvent {
    pub emit_profile: SpectralProfile,
    pub detect_profile: SpectralProfile,
}

impl MeasurementEvent {
    pub fn new(emit_profile: SpectralProfile, detect_profile: SpectralProfile) -> Result<Self> {
        emit_profile.validate()?;
        detect_profile.validate()?;
        Ok(Self {
            emit_profile,
            detect_profile,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.emit_profile.validate()?;
        self.detect_profile.validate()
    }

    /// The back-action kernel `q` of this event.
    pub fn kernel(&self) -> MeasurementKernel {
        MeasurementKernel::for_profiles(&self.emit_profile, &self.detect_profile)
    }
}

/// Posterior statistics after a given number of photons.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistoryEntry {
    pub step: usize,
    #[serde(flatten)]
    pub moments: Moments,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub posterior: UniverseWavefunction,
    pub detect_weight: f64,
    pub history: Vec<HistoryEntry>,
}

/// One photon measurement: emission, evolution by `b`, detection.
pub fn measure_once(
    h0: &UniverseWavefunction,
    b: &EvolutionKernel,
    ev: &MeasurementEvent,
) -> Result<PipelineResult> {
    measure_with_kernel(h0, b, &ev.kernel())
}

/// `k` identical photons against a single mid-chain evolution: the kernel
/// enters as `q^k`. History records the posterior statistics after each
/// photon count up to `k`.
pub fn measure_k(
    h0: &UniverseWavefunction,
    b_mid: &EvolutionKernel,
    ev: &MeasurementEvent,
    k: u32,
) -> Result<PipelineResult> {
    if k < 1 {
        return Err(TfrwError::InvalidArgument(
            "photon count must be at least 1".into(),
        ));
    }
    let base = ev.kernel();
    let mut history = Vec::with_capacity(k as usize);
    let mut last = None;
    for j in 1..=k {
        let res = measure_with_kernel(h0, b_mid, &base.kernel_power(j)?)?;
        history.push(HistoryEntry {
            step: j as usize,
            moments: res.posterior.moments(),
        });
        last = Some(res);
    }
    let mut out = last.unwrap();
    out.history = history;
    Ok(out)
}

/// Core update against an explicit kernel (already carrying its power).
pub fn measure_with_kernel(
    h0: &UniverseWavefunction,
    b: &EvolutionKernel,
    q: &MeasurementKernel,
) -> Result<PipelineResult> {
    let (posterior, weight) = if let Some(s) = b.delta_scale() {
        // B = δ(a − s c) pins the ratio: q enters as the constant q(s) and
        // the posterior is just the scaled prior.
        let qv = q.eval(s)?;
        let w = qv.norm_sqr() * h0.norm_squared() / s;
        if w == 0.0 {
            return Err(TfrwError::NoDetection);
        }
        // Normalization removes |q(s)| but the posterior keeps its phase.
        let phase = qv / qv.norm();
        let scaled = b.apply(h0)?;
        let amps = scaled.amplitudes().iter().map(|z| z * phase).collect();
        (
            UniverseWavefunction::new(scaled.grid().clone(), amps)?,
            w,
        )
    } else {
        let h_tilde = contract_dense(h0, b, q)?;
        let weight = h_tilde.norm_squared();
        if weight == 0.0 {
            return Err(TfrwError::NoDetection);
        }
        let (posterior, _) = h_tilde.normalize()?;
        (posterior, weight)
    };
    let history = vec![HistoryEntry {
        step: 1,
        moments: posterior.moments(),
    }];
    Ok(PipelineResult {
        posterior,
        detect_weight: weight,
        history,
    })
}

/// `h̃_i = Σ_j w_j q(a_i/c_j) B(a_i, c_j) h0_j` for smooth `B`.
fn contract_dense(
    h0: &UniverseWavefunction,
    b: &EvolutionKernel,
    q: &MeasurementKernel,
) -> Result<UniverseWavefunction> {
    let grid = h0.grid();
    let a = grid.points();
    let w = grid.weights();
    let amp = h0.amplitudes();
    let n = a.len();

    let b_value = |i: usize, j: usize| -> Result<Complex64> {
        match b {
            EvolutionKernel::BroadenedScaling { s, width } => Ok(Complex64::new(
                EvolutionKernel::broadened_value(*s, *width, a[i], a[j]),
                0.0,
            )),
            EvolutionKernel::DenseMatrix {
                grid: kgrid,
                entries,
            } => {
                if kgrid != grid {
                    Err(TfrwError::GridMismatch)
                } else {
                    Ok(entries[i * n + j])
                }
            }
            _ => unreachable!("delta kernels handled by the caller"),
        }
    };
    // Probe once so grid mismatch surfaces before the parallel loop.
    b_value(0, 0)?;

    if let Some(step) = grid.log_step() {
        // Log-uniform grid: a_i/c_j depends only on i − j, so one diagonal
        // table of 2n − 1 kernel values covers every pair.
        let diag: Result<Vec<Complex64>> =
            map_indices(2 * n - 1, |d| q.eval(((d as f64 - (n - 1) as f64) * step).exp()))
                .into_iter()
                .collect();
        let diag = diag?;
        let rows: Result<Vec<Complex64>> = map_indices(n, |i| {
            let mut acc = Complex64::default();
            for j in 0..n {
                acc += diag[i + (n - 1) - j] * b_value(i, j)? * w[j] * amp[j];
            }
            Ok(acc)
        })
        .into_iter()
        .collect();
        UniverseWavefunction::new(grid.clone(), rows?)
    } else {
        // General grid: interpolate quadrature-backed kernels so the n²
        // pair loop stays cheap.
        let q_eff = match q.backend {
            KernelBackend::Quadrature { .. } => {
                let r_min = a[0] / a[n - 1];
                let r_max = a[n - 1] / a[0];
                q.tabulate(r_min / 1.05, r_max * 1.05, 4096.max(8 * n))?
            }
            _ => q.clone(),
        };
        let rows: Result<Vec<Complex64>> = map_indices(n, |i| {
            let mut acc = Complex64::default();
            for j in 0..n {
                acc += q_eff.eval(a[i] / a[j])? * b_value(i, j)? * w[j] * amp[j];
            }
            Ok(acc)
        })
        .into_iter()
        .collect();
        UniverseWavefunction::new(grid.clone(), rows?)
    }
}

/// Direct closed pipeline for pure scaling,
/// `h1(a) ∝ (1/(a√s)) (∫ g*(ω/a) f(sω/a) dω) h0(a/s)`,
/// kept as an independent oracle for `measure_once` with a scaling kernel.
pub fn simple_example_direct(
    h0: &UniverseWavefunction,
    s: f64,
    f: &SpectralProfile,
    g: &SpectralProfile,
) -> Result<UniverseWavefunction> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(TfrwError::InvalidArgument(
            "scaling factor must be positive and finite".into(),
        ));
    }
    let grid = h0.grid();
    let a = grid.points();
    let n = a.len();
    let (lo, hi) = (a[0], a[n - 1]);
    let spline = h0.log_spline();
    let values: Result<Vec<Complex64>> = map_indices(n, |i| {
        let ai = a[i];
        let c = ai / s;
        if c < lo || c > hi {
            return Ok(Complex64::default());
        }
        let scale = ai * g.frequency_scale().max(f.frequency_scale() / s);
        let overlap = quad::integrate_real_line(
            |omega| g.evaluate(omega / ai).conj() * f.evaluate(s * omega / ai),
            scale,
            crate::kernel::DEFAULT_REL_TOL,
        )?;
        Ok(overlap.value * spline.eval(c.ln()) / (ai * s.sqrt()))
    })
    .into_iter()
    .collect();
    let (out, norm) = UniverseWavefunction::new(grid.clone(), values?)?.normalize()?;
    if norm == 0.0 {
        return Err(TfrwError::NoDetection);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScaleGrid;
    use crate::universe::gaussian_packet;

    fn reference_event() -> MeasurementEvent {
        let one = Complex64::new(1.0, 0.0);
        MeasurementEvent::new(
            SpectralProfile::lorentzian(one, 1.0, 10.0).unwrap(),
            SpectralProfile::lorentzian(one, 1.0, 5.0).unwrap(),
        )
        .unwrap()
    }

    fn wide_prior() -> UniverseWavefunction {
        let grid = ScaleGrid::log_uniform(0.2, 20.0, 1501).unwrap();
        gaussian_packet(&grid, 1.0, 0.3).unwrap()
    }

    #[test]
    fn near_delta_event_scales_posterior_center() {
        let h0 = wide_prior();
        let ev = MeasurementEvent::new(
            SpectralProfile::near_delta(10.0, 1e-3).unwrap(),
            SpectralProfile::near_delta(5.0, 1e-3).unwrap(),
        )
        .unwrap();
        let b = EvolutionKernel::uniform_scaling(2.0).unwrap();
        let res = measure_once(&h0, &b, &ev).unwrap();
        let m = res.posterior.moments();
        assert!((m.mean_a - 2.0).abs() < 2.0 * h0.grid().step_near(2.0), "{}", m.mean_a);
        assert!(res.detect_weight > 0.0);
    }

    #[test]
    fn identity_with_symmetric_event_keeps_mean() {
        let h0 = wide_prior();
        let gamma = Complex64::new(1.0, 0.0);
        let f = SpectralProfile::lorentzian(gamma, 1.0, 8.0).unwrap();
        let ev = MeasurementEvent::new(f.clone(), f).unwrap();
        let res = measure_once(&h0, &EvolutionKernel::Identity, &ev).unwrap();
        let m0 = h0.moments();
        let m1 = res.posterior.moments();
        assert!((m1.mean_a - m0.mean_a).abs() < h0.grid().step_near(m0.mean_a));
    }

    #[test]
    fn uniform_scaling_matches_direct_oracle() {
        let h0 = wide_prior();
        let ev = reference_event();
        for s in [1.0, 1.5, 2.0] {
            let b = EvolutionKernel::uniform_scaling(s).unwrap();
            let res = measure_once(&h0, &b, &ev).unwrap();
            let direct =
                simple_example_direct(&h0, s, &ev.emit_profile, &ev.detect_profile).unwrap();
            let d = res.posterior.l2_distance(&direct).unwrap();
            assert!(d < 1e-8, "s={s}: L2 distance {d}");
        }
    }

    #[test]
    fn direct_oracle_s1_matched_profiles() {
        let h0 = wide_prior();
        let gamma = Complex64::new(1.0, 0.0);
        let f = SpectralProfile::lorentzian(gamma, 1.0, 10.0).unwrap();
        let res = measure_once(&h0, &EvolutionKernel::uniform_scaling(1.0).unwrap(),
            &MeasurementEvent::new(f.clone(), f.clone()).unwrap()).unwrap();
        let direct = simple_example_direct(&h0, 1.0, &f, &f).unwrap();
        assert!(res.posterior.l2_distance(&direct).unwrap() < 1e-8);
    }

    #[test]
    fn measure_k_reduces_to_measure_once() {
        let h0 = wide_prior();
        let ev = reference_event();
        let b = EvolutionKernel::broadened_scaling(2.0, 0.3).unwrap();
        let once = measure_once(&h0, &b, &ev).unwrap();
        let k1 = measure_k(&h0, &b, &ev, 1).unwrap();
        assert!(once.posterior.l2_distance(&k1.posterior).unwrap() < 1e-14);
        assert!((once.detect_weight - k1.detect_weight).abs() < 1e-14 * once.detect_weight);
    }

    #[test]
    fn measure_k_narrows_posterior() {
        let grid = ScaleGrid::log_uniform(0.3, 8.0, 1201).unwrap();
        let h0 = gaussian_packet(&grid, 1.0, 0.005).unwrap();
        let ev = reference_event();
        let b = EvolutionKernel::broadened_scaling(2.0, 0.5).unwrap();
        let res = measure_k(&h0, &b, &ev, 16).unwrap();
        let stds: Vec<f64> = res.history.iter().map(|h| h.moments.std_a).collect();
        assert!(stds[15] < stds[3] && stds[3] < stds[0], "{stds:?}");
        let ratio = stds[15] / stds[3];
        assert!((0.4..=0.6).contains(&ratio), "std(16)/std(4) = {ratio}");
    }

    #[test]
    fn matched_filter_weight_peaks_at_scaled_center() {
        // Scan detector centers at fixed linewidth ratio; the weight under
        // pure scaling by s is |q(s)|^2/s and peaks where g matches f/s.
        let h0 = wide_prior();
        let gamma = Complex64::new(1.0, 0.0);
        let f = SpectralProfile::lorentzian(gamma, 1.0, 10.0).unwrap();
        let s = 2.0;
        let b = EvolutionKernel::uniform_scaling(s).unwrap();
        let mut best = (0.0f64, f64::NAN);
        let mut w_at_5 = 0.0;
        let mut omega1 = 3.0;
        while omega1 <= 7.0001 {
            let g = SpectralProfile::lorentzian(gamma, 0.5, omega1).unwrap();
            let res = measure_once(&h0, &b, &MeasurementEvent::new(f.clone(), g).unwrap()).unwrap();
            if res.detect_weight > best.0 {
                best = (res.detect_weight, omega1);
            }
            if (omega1 - 5.0).abs() < 1e-9 {
                w_at_5 = res.detect_weight;
            }
            omega1 += 0.02;
        }
        assert!((best.1 - 5.0).abs() < 0.011, "peak at {}", best.1);
        assert!(best.0 <= w_at_5 * (1.0 + 1e-12));
    }

    #[test]
    fn zero_kernel_is_no_detection() {
        let h0 = wide_prior();
        let ev = MeasurementEvent::new(
            SpectralProfile::lorentzian(Complex64::default(), 1.0, 10.0).unwrap(),
            SpectralProfile::lorentzian(Complex64::new(1.0, 0.0), 1.0, 5.0).unwrap(),
        )
        .unwrap();
        let b = EvolutionKernel::uniform_scaling(2.0).unwrap();
        assert!(matches!(
            measure_once(&h0, &b, &ev),
            Err(TfrwError::NoDetection)
        ));
    }

    #[test]
    fn detect_weight_bounded_by_profile_norms() {
        let h0 = wide_prior();
        let ev = reference_event();
        let bound = ev.emit_profile.l2_norm().unwrap().powi(2)
            * ev.detect_profile.l2_norm().unwrap().powi(2);
        for s in [1.0, 1.7, 3.0] {
            let b = EvolutionKernel::uniform_scaling(s).unwrap();
            let res = measure_once(&h0, &b, &ev).unwrap();
            // |q(s)|^2/s <= ||f||^2 ||g||^2 / s <= bound * grid measure scale
            assert!(res.detect_weight <= bound / s * (1.0 + 1e-9), "s={s}");
        }
    }
}
