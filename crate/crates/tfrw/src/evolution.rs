//! Deterministic evolution of the universe wavefunction between photon
//! events, expressed as kernels `B(a, c)` mapping the amplitude at an earlier
//! scale factor `c` to a later one `a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, TfrwError};
use crate::exec::map_indices;
use crate::grid::ScaleGrid;
use crate::universe::UniverseWavefunction;

/// Relative probability mass that may silently fall off the grid when a
/// scaling kernel shifts the support.
const TRUNCATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvolutionKernel {
    /// `B(a, c) = δ(a − c)`.
    Identity,
    /// `B(a, c) = δ(a − s c)`: pure expansion (or contraction) by `s`.
    UniformScaling { s: f64 },
    /// Expansion by `s` with a log-normal spread of `width` in `ln a`.
    BroadenedScaling { s: f64, width: f64 },
    /// Explicit kernel matrix on a fixed grid, row-major `n × n`,
    /// `h1_i = Σ_j B_ij w_j h0_j`.
    DenseMatrix {
        grid: ScaleGrid,
        entries: Vec<Complex64>,
    },
}

impl EvolutionKernel {
    pub fn uniform_scaling(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(TfrwError::InvalidArgument(
                "scaling factor must be positive and finite".into(),
            ));
        }
        Ok(Self::UniformScaling { s })
    }

    pub fn broadened_scaling(s: f64, width: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(TfrwError::InvalidArgument(
                "scaling factor must be positive and finite".into(),
            ));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(TfrwError::InvalidArgument(
                "broadening width must be positive and finite".into(),
            ));
        }
        Ok(Self::BroadenedScaling { s, width })
    }

    pub fn dense_matrix(grid: ScaleGrid, entries: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        if entries.len() != n * n {
            return Err(TfrwError::InvalidArgument(format!(
                "dense kernel needs {} entries for a {n}-point grid, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Self::DenseMatrix { grid, entries })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Identity => Ok(()),
            Self::UniformScaling { s } => Self::uniform_scaling(*s).map(|_| ()),
            Self::BroadenedScaling { s, width } => {
                Self::broadened_scaling(*s, *width).map(|_| ())
            }
            Self::DenseMatrix { grid, entries } => {
                Self::dense_matrix(grid.clone(), entries.clone()).map(|_| ())
            }
        }
    }

    /// For delta-type kernels, the scale factor ratio they impose.
    pub fn delta_scale(&self) -> Option<f64> {
        match self {
            Self::Identity => Some(1.0),
            Self::UniformScaling { s } => Some(*s),
            _ => None,
        }
    }

    /// Smooth kernel value `B(a, c)` for the broadened kernel.
    pub fn broadened_value(s: f64, width: f64, a: f64, c: f64) -> f64 {
        let z = (a / (s * c)).ln() / width;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * width * a)
    }

    /// Apply the kernel and renormalize the result.
    pub fn apply(&self, h: &UniverseWavefunction) -> Result<UniverseWavefunction> {
        match self {
            Self::Identity => Ok(h.clone()),
            Self::UniformScaling { s } => apply_uniform(*s, h),
            Self::BroadenedScaling { s, width } => apply_broadened(*s, *width, h),
            Self::DenseMatrix { grid, entries } => apply_dense(grid, entries, h),
        }
    }

    /// Kernel equivalent to applying `self` first, then `later`.
    pub fn compose(&self, later: &EvolutionKernel) -> Result<EvolutionKernel> {
        use EvolutionKernel::*;
        match (self, later) {
            (Identity, k) | (k, Identity) => Ok(k.clone()),
            (UniformScaling { s: s1 }, UniformScaling { s: s2 }) => {
                Self::uniform_scaling(s1 * s2)
            }
            (UniformScaling { s: s1 }, BroadenedScaling { s: s2, width })
            | (BroadenedScaling { s: s1, width }, UniformScaling { s: s2 }) => {
                Self::broadened_scaling(s1 * s2, *width)
            }
            (
                BroadenedScaling { s: s1, width: w1 },
                BroadenedScaling { s: s2, width: w2 },
            ) => Self::broadened_scaling(s1 * s2, (w1 * w1 + w2 * w2).sqrt()),
            (
                DenseMatrix {
                    grid: g1,
                    entries: b1,
                },
                DenseMatrix {
                    grid: g2,
                    entries: b2,
                },
            ) => {
                if g1 != g2 {
                    return Err(TfrwError::GridMismatch);
                }
                let n = g1.len();
                let w = g1.weights();
                // C_ik = sum_j B2_ij w_j B1_jk (B1 acts first).
                let entries = map_indices(n * n, |idx| {
                    let (i, k) = (idx / n, idx % n);
                    (0..n)
                        .map(|j| b2[i * n + j] * w[j] * b1[j * n + k])
                        .sum::<Complex64>()
                });
                Self::dense_matrix(g1.clone(), entries)
            }
            _ => Err(TfrwError::InvalidArgument(
                "cannot compose a dense kernel with a scaling kernel".into(),
            )),
        }
    }
}

fn apply_uniform(s: f64, h: &UniverseWavefunction) -> Result<UniverseWavefunction> {
    let grid = h.grid();
    let a = grid.points();
    // Sampled source support is [a_min/s, a_max/s]; mass of h outside it is lost.
    let (lo, hi) = (a[0] / s, a[a.len() - 1] / s);
    let norm0 = h.norm_squared();
    if norm0 <= 0.0 {
        return Err(TfrwError::DegenerateState);
    }
    let mut lost = 0.0;
    let amp = h.amplitudes();
    for i in 0..a.len() - 1 {
        let seg = 0.5 * (amp[i].norm_sqr() + amp[i + 1].norm_sqr()) * (a[i + 1] - a[i]);
        if a[i + 1] <= lo || a[i] >= hi {
            lost += seg;
        }
    }
    if lost / norm0 > TRUNCATION_TOL {
        return Err(TfrwError::SupportTruncation {
            lost_mass: lost / norm0,
        });
    }
    let spline = h.log_spline();
    let values = map_indices(a.len(), |i| {
        let c = a[i] / s;
        if c < lo || c > hi {
            Complex64::default()
        } else {
            spline.eval(c.ln()) / s
        }
    });
    let (out, _) = UniverseWavefunction::new(grid.clone(), values)?.normalize()?;
    Ok(out)
}

fn apply_broadened(s: f64, width: f64, h: &UniverseWavefunction) -> Result<UniverseWavefunction> {
    let grid = h.grid();
    let a = grid.points();
    let w = grid.weights();
    let amp = h.amplitudes();
    let n = a.len();
    let values = map_indices(n, |i| {
        (0..n)
            .map(|j| amp[j] * (EvolutionKernel::broadened_value(s, width, a[i], a[j]) * w[j]))
            .sum::<Complex64>()
    });
    let (out, _) = UniverseWavefunction::new(grid.clone(), values)?.normalize()?;
    Ok(out)
}

fn apply_dense(
    grid: &ScaleGrid,
    entries: &[Complex64],
    h: &UniverseWavefunction,
) -> Result<UniverseWavefunction> {
    if grid != h.grid() {
        return Err(TfrwError::GridMismatch);
    }
    let n = grid.len();
    let w = grid.weights();
    let amp = h.amplitudes();
    let values = map_indices(n, |i| {
        (0..n)
            .map(|j| entries[i * n + j] * w[j] * amp[j])
            .sum::<Complex64>()
    });
    let (out, _) = UniverseWavefunction::new(grid.clone(), values)?.normalize()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::gaussian_packet;

    fn packet() -> UniverseWavefunction {
        let grid = ScaleGrid::log_uniform(0.2, 20.0, 2001).unwrap();
        gaussian_packet(&grid, 1.0, 0.05).unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let h = packet();
        let out = EvolutionKernel::Identity.apply(&h).unwrap();
        assert!(h.l2_distance(&out).unwrap() == 0.0);
    }

    #[test]
    fn uniform_scaling_shifts_mean() {
        let h = packet();
        let out = EvolutionKernel::uniform_scaling(3.0)
            .unwrap()
            .apply(&h)
            .unwrap();
        let m = out.moments();
        assert!((m.mean_a - 3.0).abs() < 1e-3, "{}", m.mean_a);
        assert!((m.std_a - 0.15).abs() < 2e-3);
        assert!((out.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_scaling_round_trip() {
        let h = packet();
        let fwd = EvolutionKernel::uniform_scaling(2.0).unwrap();
        let back = EvolutionKernel::uniform_scaling(0.5).unwrap();
        let out = back.apply(&fwd.apply(&h).unwrap()).unwrap();
        assert!(h.l2_distance(&out).unwrap() < 1e-6);
    }

    #[test]
    fn scaling_off_grid_truncates() {
        let h = packet();
        match EvolutionKernel::uniform_scaling(200.0).unwrap().apply(&h) {
            Err(TfrwError::SupportTruncation { lost_mass }) => assert!(lost_mass > 0.5),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn broadened_scaling_widens_in_log_a() {
        let grid = ScaleGrid::log_uniform(0.05, 50.0, 3001).unwrap();
        let h = gaussian_packet(&grid, 1.0, 0.02).unwrap();
        let w = 0.3;
        let out = EvolutionKernel::broadened_scaling(2.0, w)
            .unwrap()
            .apply(&h)
            .unwrap();
        // Amplitude in u = ln a: Gaussian of width W = √(w² + 2σ²) centered
        // at ln(2 a0); the 1/a prefactor tilts the density, so p(u) is a
        // Gaussian with std W/√2 and mean shifted down by W²/2.
        let a = grid.points();
        let wts = grid.weights();
        let p: Vec<f64> = out
            .amplitudes()
            .iter()
            .zip(wts.iter())
            .map(|(z, w)| z.norm_sqr() * w)
            .collect();
        let mean_log: f64 = p.iter().zip(a).map(|(p, a)| p * a.ln()).sum();
        let var_log: f64 = p
            .iter()
            .zip(a)
            .map(|(p, a)| p * (a.ln() - mean_log).powi(2))
            .sum();
        let big_w2 = w * w + 2.0 * 0.02f64.powi(2);
        assert!(
            (mean_log - (2.0f64.ln() - 0.5 * big_w2)).abs() < 1e-3,
            "{mean_log}"
        );
        assert!(
            (var_log.sqrt() - (big_w2 / 2.0).sqrt()).abs() < 0.01,
            "{}",
            var_log.sqrt()
        );
    }

    #[test]
    fn dense_matrix_reproduces_identity() {
        let grid = ScaleGrid::log_uniform(0.5, 4.0, 301).unwrap();
        let h = gaussian_packet(&grid, 1.3, 0.1).unwrap();
        let n = grid.len();
        let w = grid.weights();
        let mut entries = vec![Complex64::default(); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0 / w[i], 0.0);
        }
        let k = EvolutionKernel::dense_matrix(grid.clone(), entries).unwrap();
        let out = k.apply(&h).unwrap();
        assert!(h.l2_distance(&out).unwrap() < 1e-12);
    }

    #[test]
    fn dense_matrix_grid_mismatch() {
        let grid = ScaleGrid::log_uniform(0.5, 4.0, 101).unwrap();
        let other = ScaleGrid::log_uniform(0.5, 4.0, 102).unwrap();
        let n = grid.len();
        let k = EvolutionKernel::dense_matrix(grid, vec![Complex64::default(); n * n]).unwrap();
        let h = gaussian_packet(&other, 1.3, 0.1).unwrap();
        assert!(matches!(k.apply(&h), Err(TfrwError::GridMismatch)));
    }

    #[test]
    fn compose_rules() {
        let u2 = EvolutionKernel::uniform_scaling(2.0).unwrap();
        let u3 = EvolutionKernel::uniform_scaling(3.0).unwrap();
        match u2.compose(&u3).unwrap() {
            EvolutionKernel::UniformScaling { s } => assert!((s - 6.0).abs() < 1e-15),
            k => panic!("{k:?}"),
        }
        let b = EvolutionKernel::broadened_scaling(2.0, 0.3).unwrap();
        match u3.compose(&b).unwrap() {
            EvolutionKernel::BroadenedScaling { s, width } => {
                assert!((s - 6.0).abs() < 1e-15 && (width - 0.3).abs() < 1e-15);
            }
            k => panic!("{k:?}"),
        }
        let b2 = EvolutionKernel::broadened_scaling(1.0, 0.4).unwrap();
        match b.compose(&b2).unwrap() {
            EvolutionKernel::BroadenedScaling { s, width } => {
                assert!((s - 2.0).abs() < 1e-15);
                assert!((width - 0.5).abs() < 1e-15);
            }
            k => panic!("{k:?}"),
        }
        match EvolutionKernel::Identity.compose(&u2).unwrap() {
            EvolutionKernel::UniformScaling { s } => assert_eq!(s, 2.0),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn compose_agrees_with_sequential_application() {
        let grid = ScaleGrid::log_uniform(0.05, 50.0, 2001).unwrap();
        let h = gaussian_packet(&grid, 1.0, 0.03).unwrap();
        let b1 = EvolutionKernel::broadened_scaling(1.5, 0.2).unwrap();
        let b2 = EvolutionKernel::broadened_scaling(2.0, 0.25).unwrap();
        let seq = b2.apply(&b1.apply(&h).unwrap()).unwrap();
        let joint = b1.compose(&b2).unwrap().apply(&h).unwrap();
        assert!(seq.l2_distance(&joint).unwrap() < 1e-4);
    }

    #[test]
    fn dense_compose_matches_sequential() {
        let grid = ScaleGrid::log_uniform(0.5, 4.0, 121).unwrap();
        let n = grid.len();
        let a = grid.points().to_vec();
        let mk = |s: f64, w: f64| {
            let entries: Vec<Complex64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    Complex64::new(EvolutionKernel::broadened_value(s, w, a[i], a[j]), 0.0)
                })
                .collect();
            EvolutionKernel::dense_matrix(grid.clone(), entries).unwrap()
        };
        let (k1, k2) = (mk(1.2, 0.15), mk(1.1, 0.2));
        let h = gaussian_packet(&grid, 1.0, 0.08).unwrap();
        let seq = k2.apply(&k1.apply(&h).unwrap()).unwrap();
        let joint = k1.compose(&k2).unwrap().apply(&h).unwrap();
        assert!(seq.l2_distance(&joint).unwrap() < 1e-10);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(EvolutionKernel::uniform_scaling(0.0).is_err());
        assert!(EvolutionKernel::uniform_scaling(-1.0).is_err());
        assert!(EvolutionKernel::broadened_scaling(2.0, 0.0).is_err());
        let grid = ScaleGrid::log_uniform(0.5, 4.0, 11).unwrap();
        assert!(EvolutionKernel::dense_matrix(grid, vec![Complex64::default(); 5]).is_err());
    }
}
