//! Property tests for the structural invariants of the kernel and pipelines.

use num_complex::Complex64;
use proptest::prelude::*;

use tfrw::evolution::EvolutionKernel;
use tfrw::grid::ScaleGrid;
use tfrw::kernel::{q_lorentzian_closed, q_numeric};
use tfrw::optomech::{self, CavityConfig, RotatingFrameConfig};
use tfrw::profiles::SpectralProfile;
use tfrw::universe::gaussian_packet;

fn lorentzian_strategy() -> impl Strategy<Value = SpectralProfile> {
    (0.2f64..3.0, 1.0f64..20.0, -1.5f64..1.5, -1.5f64..1.5).prop_map(|(gam, wc, re, im)| {
        SpectralProfile::lorentzian(Complex64::new(re + 2.0, im), gam, wc).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The kernel magnitude is bounded by the L2 norms of the two profiles
    /// (Cauchy-Schwarz on the overlap integral).
    #[test]
    fn kernel_bounded_by_profile_norms(
        f in lorentzian_strategy(),
        g in lorentzian_strategy(),
        r in 0.1f64..10.0,
    ) {
        let q = q_numeric(&f, &g, r).unwrap();
        let bound = f.l2_norm().unwrap() * g.l2_norm().unwrap();
        prop_assert!(q.norm() <= bound * (1.0 + 1e-9),
            "|q| = {} exceeds the Cauchy-Schwarz bound {bound}", q.norm());
    }

    /// Swapping emit and detect profiles inverts the ratio and conjugates:
    /// q_{g,f}(1/r) = conj(q_{f,g}(r)).
    #[test]
    fn kernel_swap_symmetry(
        f in lorentzian_strategy(),
        g in lorentzian_strategy(),
        r in 0.2f64..5.0,
    ) {
        let forward = q_numeric(&f, &g, r).unwrap();
        let swapped = q_numeric(&g, &f, 1.0 / r).unwrap();
        prop_assert!((swapped - forward.conj()).norm() < 1e-8 * forward.norm().max(1.0),
            "q_gf(1/r) = {swapped}, conj(q_fg(r)) = {}", forward.conj());
    }

    /// The closed Lorentzian form also obeys the swap symmetry exactly.
    #[test]
    fn closed_form_swap_symmetry(
        gam0 in 0.2f64..3.0,
        gam1 in 0.2f64..3.0,
        w0 in 1.0f64..20.0,
        w1 in 1.0f64..20.0,
        r in 0.2f64..5.0,
    ) {
        let one = Complex64::new(1.0, 0.0);
        let forward = q_lorentzian_closed(one, one, gam0, gam1, w0, w1, r);
        let swapped = q_lorentzian_closed(one, one, gam1, gam0, w1, w0, 1.0 / r);
        prop_assert!((swapped - forward.conj()).norm() < 1e-12 * forward.norm().max(1.0));
    }

    /// Matched detection profile construction preserves the L2 norm.
    #[test]
    fn matched_profile_preserves_norm(f in lorentzian_strategy(), s in 0.3f64..4.0) {
        let g = f.matched_profile(s).unwrap();
        let nf = f.l2_norm().unwrap();
        let ng = g.l2_norm().unwrap();
        prop_assert!((nf - ng).abs() < 1e-9 * nf, "norms {nf} vs {ng}");
    }

    /// Scaling up then down returns the original state (within spline
    /// resampling error) whenever the support stays on the grid.
    #[test]
    fn uniform_scaling_round_trip(s in 1.05f64..1.6, sigma in 0.05f64..0.15) {
        let grid = ScaleGrid::log_uniform(0.2, 20.0, 1201).unwrap();
        let h0 = gaussian_packet(&grid, 1.3, sigma).unwrap();
        let up = EvolutionKernel::uniform_scaling(s).unwrap();
        let down = EvolutionKernel::uniform_scaling(1.0 / s).unwrap();
        let h1 = down.apply(&up.apply(&h0).unwrap()).unwrap();
        let d = h1.l2_distance(&h0).unwrap();
        prop_assert!(d < 1e-5, "round-trip L2 distance {d}");
    }

    /// Evolution output always stays normalized.
    #[test]
    fn evolution_preserves_normalization(s in 0.8f64..2.0, width in 0.1f64..0.6) {
        let grid = ScaleGrid::log_uniform(0.05, 80.0, 601).unwrap();
        let h0 = gaussian_packet(&grid, 1.0, 0.2).unwrap();
        let b = EvolutionKernel::broadened_scaling(s, width).unwrap();
        let h1 = b.apply(&h0).unwrap();
        prop_assert!((h1.norm_squared() - 1.0).abs() < 1e-10);
    }

    /// The displacement-to-scale map is a bijection on its domain.
    #[test]
    fn mirror_scale_map_bijective(
        rho_mag in 0.2f64..5.0,
        frac in -0.9f64..20.0,
    ) {
        let cfg = RotatingFrameConfig {
            cavities: [
                CavityConfig { omega0: 10.0, g_pull: 1.0, delta: -rho_mag },
                CavityConfig { omega0: 20.0, g_pull: 2.0, delta: -2.0 * rho_mag },
            ],
        };
        // Stay on the physical side of the pole at x = -rho.
        let rho = cfg.delta_over_g();
        let x = -rho * frac / (1.0 + frac.abs()) * 0.9;
        let a = optomech::a_om_of_x(x, &cfg).unwrap();
        let back = optomech::x_of_a_om(a, &cfg).unwrap();
        prop_assert!((back - x).abs() < 1e-10 * x.abs().max(1.0));
    }
}
