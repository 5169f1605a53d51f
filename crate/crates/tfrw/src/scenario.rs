//! Scenario configuration and the subcommand runners behind the CLI.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, TfrwError};
use crate::evolution::EvolutionKernel;
use crate::grid::{ScaleGrid, SpacingMode};
use crate::kernel::MeasurementKernel;
use crate::optomech::{
    self, IntegrationMethod, MirrorWavefunction, OptomechParams, OptomechState,
    RotatingFrameConfig,
};
use crate::pipeline::{measure_k, MeasurementEvent};
use crate::profiles::SpectralProfile;
use crate::universe::{gaussian_packet, UniverseWavefunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a_min: f64,
    pub a_max: f64,
    pub n: usize,
    #[serde(default = "default_spacing")]
    pub spacing: SpacingMode,
}

fn default_spacing() -> SpacingMode {
    SpacingMode::LogUniform
}

impl GridSpec {
    pub fn build(&self) -> Result<ScaleGrid> {
        match self.spacing {
            SpacingMode::LogUniform => ScaleGrid::log_uniform(self.a_min, self.a_max, self.n),
            SpacingMode::Uniform => ScaleGrid::uniform(self.a_min, self.a_max, self.n),
            SpacingMode::Explicit => Err(TfrwError::Configuration(
                "explicit grids are not expressible in scenario files".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    Gaussian { a0: f64, sigma: f64 },
}

impl PriorSpec {
    pub fn build(&self, grid: &ScaleGrid) -> Result<UniverseWavefunction> {
        match *self {
            Self::Gaussian { a0, sigma } => gaussian_packet(grid, a0, sigma),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePair {
    pub emit: SpectralProfile,
    pub detect: SpectralProfile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelScan {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptomechRun {
    pub params: OptomechParams,
    pub state0: OptomechState,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub method: IntegrationMethod,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbleRun {
    pub h: f64,
    pub a0: f64,
    pub eta_max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorRun {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub x_center: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionKernel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<ProfilePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionKernel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_scan: Option<KernelScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optomech: Option<OptomechRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotating_frame: Option<RotatingFrameConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hubble: Option<HubbleRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<MirrorRun>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| TfrwError::Configuration(format!("cannot read {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| TfrwError::Configuration(format!("parse error in {path:?}: {e}")))
    }

    fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| TfrwError::Configuration(format!("missing \"{name}\" section")))
    }

    /// Every invariant violation in the file, without running anything.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(g) = &self.grid {
            if g.a_min <= 0.0 {
                out.push(format!(
                    "grid: the scale factor must be strictly positive, got a_min = {}",
                    g.a_min
                ));
            } else if let Err(e) = g.build() {
                out.push(format!("grid: {e}"));
            }
        }
        if let Some(p) = &self.profiles {
            if let Err(e) = p.emit.validate() {
                out.push(format!("profiles.emit: {e}"));
            }
            if let Err(e) = p.detect.validate() {
                out.push(format!("profiles.detect: {e}"));
            }
        }
        if let Some(ev) = &self.evolution {
            if let Err(e) = ev.validate() {
                out.push(format!("evolution: {e}"));
            }
        }
        if let Some(PriorSpec::Gaussian { a0, sigma }) = &self.prior {
            if !(*a0 > 0.0 && *sigma > 0.0) {
                out.push("prior: center and width must be positive".into());
            }
        }
        if self.k == Some(0) {
            out.push("k: photon count must be at least 1".into());
        }
        if let Some(o) = &self.optomech {
            if let Err(e) = o.params.validate() {
                out.push(format!("optomech.params: {e}"));
            }
            if o.state0.a_om <= 0.0 {
                out.push("optomech.state0: the scale factor must be strictly positive".into());
            }
            if o.dt <= 0.0 {
                out.push("optomech.dt: timestep must be positive".into());
            }
        }
        if let Some(rf) = &self.rotating_frame {
            if let Err(e) = rf.validate() {
                out.push(format!(
                    "rotating_frame: {e} (the construction requires a common Delta/G ratio)"
                ));
            } else if let Some(m) = &self.mirror {
                // Δ + G x must keep the sign of Δ over the declared range.
                for x in [m.x_min, m.x_max] {
                    if optomech::a_om_of_x(x, rf).is_err() {
                        out.push(format!(
                            "mirror: x = {x} leaves the valid range (Delta + G·x changes sign)"
                        ));
                    }
                }
            }
        }
        if let Some(m) = &self.mirror {
            if m.n < 3 || m.x_max <= m.x_min || m.sigma <= 0.0 {
                out.push("mirror: need x_min < x_max, n >= 3, sigma > 0".into());
            }
            if let Some(ev) = &m.evolution {
                if let Err(e) = ev.validate() {
                    out.push(format!("mirror.evolution: {e}"));
                }
            }
        }
        out
    }

    fn summary_base(&self) -> serde_json::Value {
        json!({
            "version": crate::VERSION,
            "config": self,
        })
    }

    pub fn run_kernel(&self, out_dir: &Path) -> Result<()> {
        let profiles = Self::require(&self.profiles, "profiles")?;
        let scan = Self::require(&self.kernel_scan, "kernel_scan")?;
        if !(scan.r_min > 0.0 && scan.r_max > scan.r_min && scan.n >= 2) {
            return Err(TfrwError::Configuration(
                "kernel_scan: need 0 < r_min < r_max and n >= 2".into(),
            ));
        }
        let kernel = MeasurementKernel::for_profiles(&profiles.emit, &profiles.detect);
        let mut rows = Vec::with_capacity(scan.n);
        for i in 0..scan.n {
            let r = scan.r_min * (scan.r_max / scan.r_min).powf(i as f64 / (scan.n - 1) as f64);
            let q = kernel.eval(r)?;
            rows.push(vec![r, q.re, q.im, q.norm()]);
        }
        crate::output::write_csv(
            &out_dir.join("kernel.csv"),
            &["r", "q_re", "q_im", "q_abs"],
            &rows,
        )?;
        let peak = kernel.peak_ratio(scan.r_min, scan.r_max)?;
        let mut summary = self.summary_base();
        summary["peak"] = json!({ "r_star": peak.r_star, "q_abs_max": peak.q_abs_max });
        crate::output::write_json(&out_dir.join("summary.json"), &summary)
    }

    pub fn run_measure(&self, out_dir: &Path) -> Result<()> {
        let grid = Self::require(&self.grid, "grid")?.build()?;
        let prior = Self::require(&self.prior, "prior")?.build(&grid)?;
        let profiles = Self::require(&self.profiles, "profiles")?;
        let evolution = Self::require(&self.evolution, "evolution")?;
        let k = self.k.unwrap_or(1);
        let ev = MeasurementEvent::new(profiles.emit.clone(), profiles.detect.clone())?;
        let res = measure_k(&prior, evolution, &ev, k)?;
        let rows: Vec<Vec<f64>> = grid
            .points()
            .iter()
            .zip(res.posterior.amplitudes())
            .map(|(&a, z)| vec![a, z.re, z.im, z.norm_sqr()])
            .collect();
        crate::output::write_csv(
            &out_dir.join("posterior.csv"),
            &["a", "h_re", "h_im", "density"],
            &rows,
        )?;
        let m = res.posterior.moments();
        let mut summary = self.summary_base();
        summary["detect_weight"] = json!(res.detect_weight);
        summary["mean_a"] = json!(m.mean_a);
        summary["std_a"] = json!(m.std_a);
        summary["fwhm_a"] = json!(m.fwhm_a);
        summary["multimodal"] = json!(m.multimodal);
        summary["history"] = serde_json::to_value(&res.history)
            .map_err(|e| TfrwError::InvalidArgument(e.to_string()))?;
        crate::output::write_json(&out_dir.join("summary.json"), &summary)
    }

    pub fn run_optomech(&self, out_dir: &Path) -> Result<()> {
        let run = Self::require(&self.optomech, "optomech")?;
        let traj =
            optomech::integrate_trajectory(&run.state0, &run.params, run.dt, run.steps, run.method)?;
        let rows: Vec<Vec<f64>> = traj
            .iter()
            .map(|s| {
                vec![
                    s.t,
                    s.a_om,
                    s.a_dot,
                    optomech::mechanical_energy(s, &run.params),
                ]
            })
            .collect();
        crate::output::write_csv(
            &out_dir.join("trajectory.csv"),
            &["t", "a_om", "a_dot", "energy"],
            &rows,
        )?;
        let e0 = rows[0][3];
        let max_drift = rows
            .iter()
            .map(|r| (r[3] - e0).abs() / e0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        let last = traj.last().unwrap();
        let mut summary = self.summary_base();
        summary["final_state"] = serde_json::to_value(last)
            .map_err(|e| TfrwError::InvalidArgument(e.to_string()))?;
        summary["energy_initial"] = json!(e0);
        summary["max_relative_energy_drift"] = json!(max_drift);
        crate::output::write_json(&out_dir.join("summary.json"), &summary)
    }

    pub fn run_hubble(&self, out_dir: &Path) -> Result<()> {
        let cfg = Self::require(&self.rotating_frame, "rotating_frame")?;
        let run = Self::require(&self.hubble, "hubble")?;
        let traj = optomech::hubble_trajectory(run.h, cfg, run.a0, run.eta_max, run.samples)?;
        let rows: Vec<Vec<f64>> = traj.iter().map(|&(e, x, a)| vec![e, x, a]).collect();
        crate::output::write_csv(&out_dir.join("trajectory.csv"), &["eta", "x", "a_om"], &rows)?;
        let fr = optomech::rotating_frame_frequencies(cfg)?;
        let mut summary = self.summary_base();
        summary["mirror_velocity"] = json!(optomech::hubble_mirror_velocity(run.h, cfg)?);
        summary["frequencies"] = serde_json::to_value(fr)
            .map_err(|e| TfrwError::InvalidArgument(e.to_string()))?;
        crate::output::write_json(&out_dir.join("summary.json"), &summary)
    }

    pub fn run_mirror_measure(&self, out_dir: &Path) -> Result<()> {
        let cfg = Self::require(&self.rotating_frame, "rotating_frame")?;
        let run = Self::require(&self.mirror, "mirror")?;
        let profiles = Self::require(&self.profiles, "profiles")?;
        if run.n < 3 || run.x_max <= run.x_min {
            return Err(TfrwError::Configuration(
                "mirror: need x_min < x_max and n >= 3".into(),
            ));
        }
        let xs: Vec<f64> = (0..run.n)
            .map(|i| run.x_min + (run.x_max - run.x_min) * i as f64 / (run.n - 1) as f64)
            .collect();
        let prior = MirrorWavefunction::gaussian(xs, run.x_center, run.sigma)?;
        let ev = MeasurementEvent::new(profiles.emit.clone(), profiles.detect.clone())?;
        let (post, weight) =
            optomech::mirror_posterior_update(&prior, cfg, &ev, run.evolution.as_ref())?;
        let dump = |psi: &MirrorWavefunction| -> Vec<Vec<f64>> {
            psi.xs()
                .iter()
                .zip(psi.amplitudes())
                .map(|(&x, z)| vec![x, z.re, z.im, z.norm_sqr()])
                .collect()
        };
        let cols = ["x", "psi_re", "psi_im", "density"];
        crate::output::write_csv(&out_dir.join("prior.csv"), &cols, &dump(&prior))?;
        crate::output::write_csv(&out_dir.join("posterior.csv"), &cols, &dump(&post))?;
        let (mean_prior, std_prior, peak_prior) = prior.statistics();
        let (mean_post, std_post, peak_post) = post.statistics();
        let mut summary = self.summary_base();
        summary["detect_weight"] = json!(weight);
        summary["prior"] = json!({ "mean_x": mean_prior, "std_x": std_prior, "peak_x": peak_prior });
        summary["posterior"] = json!({ "mean_x": mean_post, "std_x": std_post, "peak_x": peak_post });
        crate::output::write_json(&out_dir.join("summary.json"), &summary)
    }
}

/// Shared by the unit tests and the CLI smoke tests.
pub fn example_kernel_scenario() -> Scenario {
    let one = Complex64::new(1.0, 0.0);
    Scenario {
        grid: None,
        prior: None,
        profiles: Some(ProfilePair {
            emit: SpectralProfile::lorentzian(one, 1.0, 10.0).unwrap(),
            detect: SpectralProfile::lorentzian(one, 1.0, 5.0).unwrap(),
        }),
        evolution: None,
        k: None,
        kernel_scan: Some(KernelScan {
            r_min: 0.2,
            r_max: 5.0,
            n: 200,
        }),
        optomech: None,
        rotating_frame: None,
        hubble: None,
        mirror: None,
    }
}
