//! The general photon chain: `N` emissions, then `N` detections, with an
//! arbitrary evolution kernel in each of the `2N − 1` intervals.
//!
//! The nested integral is evaluated as a small tensor network over grid
//! axes. Each intermediate scale factor `c_m` is a variable living on some
//! axis with an accumulated ratio: delta-type kernels alias the variable onto
//! the existing axis (no new integral survives), smooth kernels open a new
//! axis. Photon `j` couples `c_j` and `c_{N+j}` through `q_j(c_{N+j}/c_j)`.
//! An axis is summed out (trapezoid weights) as soon as nothing refers to it.

use num_complex::Complex64;

use crate::error::{Result, TfrwError};
use crate::evolution::EvolutionKernel;
use crate::kernel::{KernelBackend, MeasurementKernel};
use crate::pipeline::{HistoryEntry, MeasurementEvent, PipelineResult};
use crate::universe::UniverseWavefunction;

/// Dense tensor over grid-sized axes, row-major in `axes` order.
struct Tensor {
    axes: Vec<usize>,
    data: Vec<Complex64>,
    n: usize,
}

impl Tensor {
    fn from_vec(axis: usize, data: Vec<Complex64>) -> Self {
        let n = data.len();
        Self {
            axes: vec![axis],
            data,
            n,
        }
    }

    fn pos(&self, axis: usize) -> usize {
        self.axes.iter().position(|&a| a == axis).expect("axis present")
    }

    /// Stride of the axis at position `p`.
    fn stride(&self, p: usize) -> usize {
        self.n.pow((self.axes.len() - 1 - p) as u32)
    }

    /// Multiply elementwise by a factor of two axis indices.
    fn scale_pair<F: FnMut(usize, usize) -> Complex64>(&mut self, ax1: usize, ax2: usize, mut f: F) {
        let (p1, p2) = (self.pos(ax1), self.pos(ax2));
        let (s1, s2) = (self.stride(p1), self.stride(p2));
        for (idx, v) in self.data.iter_mut().enumerate() {
            *v *= f((idx / s1) % self.n, (idx / s2) % self.n);
        }
    }

    /// Append a new axis whose factor couples it to an existing axis:
    /// `T'(.., p_old, .., p_new) = T(.., p_old, ..) · f(p_new, p_old)`.
    fn expand<F: Fn(usize, usize) -> Complex64>(&mut self, old_axis: usize, new_axis: usize, f: F) {
        let p_old = self.pos(old_axis);
        let s_old = self.stride(p_old);
        let mut out = Vec::with_capacity(self.data.len() * self.n);
        for (idx, &v) in self.data.iter().enumerate() {
            let q_old = (idx / s_old) % self.n;
            for p_new in 0..self.n {
                out.push(v * f(p_new, q_old));
            }
        }
        // New axis has stride 1; reorder means: out[idx * n + p_new].
        // That matches pushing the axis last in row-major order only if the
        // old layout is traversed outermost-first, which `enumerate` does.
        self.axes.push(new_axis);
        self.data = out;
    }

    /// Sum the axis against quadrature weights.
    fn contract(&mut self, axis: usize, w: &[f64]) {
        let p = self.pos(axis);
        let stride = self.stride(p);
        let outer = self.data.len() / (self.n * stride);
        let mut out = vec![Complex64::default(); self.data.len() / self.n];
        for o in 0..outer {
            for q in 0..self.n {
                let src = (o * self.n + q) * stride;
                let dst = o * stride;
                for s in 0..stride {
                    out[dst + s] += self.data[src + s] * w[q];
                }
            }
        }
        self.axes.remove(p);
        self.data = out;
    }
}

/// Variable `c_m`: which axis carries it and the fixed ratio to that axis's
/// grid values.
#[derive(Clone, Copy)]
struct Var {
    axis: usize,
    scale: f64,
}

/// Back-action kernel made cheap to evaluate pairwise: quadrature backends
/// are tabulated over the ratio range the grid can produce.
fn pairwise_kernel(ev: &MeasurementEvent, r_min: f64, r_max: f64, n: usize) -> Result<MeasurementKernel> {
    let k = ev.kernel();
    match k.backend {
        KernelBackend::Quadrature { .. } => k.tabulate(r_min / 1.05, r_max * 1.05, 2048.max(4 * n)),
        _ => Ok(k),
    }
}

/// Full chain: `events.len() = N` photons, `kernels.len() = 2N − 1`
/// evolution intervals, photon `j` emitted after interval `j` and detected
/// after interval `N + j`.
pub fn general_chain(
    h0: &UniverseWavefunction,
    kernels: &[EvolutionKernel],
    events: &[MeasurementEvent],
) -> Result<PipelineResult> {
    let n_ph = events.len();
    if n_ph == 0 {
        return Err(TfrwError::InvalidArgument(
            "at least one measurement event is required".into(),
        ));
    }
    if kernels.len() != 2 * n_ph - 1 {
        return Err(TfrwError::InvalidArgument(format!(
            "{n_ph} photons need {} evolution kernels, got {}",
            2 * n_ph - 1,
            kernels.len()
        )));
    }
    for k in kernels {
        k.validate()?;
    }
    for ev in events {
        ev.validate()?;
    }

    let grid = h0.grid();
    let a = grid.points();
    let w = grid.weights();
    let n = a.len();
    let total = 2 * n_ph; // variables c_0 .. c_{2N-1}

    let mut tensor = Tensor::from_vec(0, h0.amplitudes().to_vec());
    let mut vars: Vec<Var> = Vec::with_capacity(total);
    vars.push(Var { axis: 0, scale: 1.0 });
    let mut next_axis = 1usize;
    // Outstanding references per axis: each variable is used once as the
    // source of the next kernel (except the last) and once inside its
    // photon's q factor.
    let mut pending = vec![0usize; total + 1];
    let uses_of = |m: usize| -> usize {
        // One use as the source of the next kernel (except the last
        // variable), one inside the photon q factor.
        usize::from(m < total - 1) + 1
    };
    pending[0] = uses_of(0);

    let contract_done = |t: &mut Tensor, pending: &[usize], keep: Option<usize>| {
        let done: Vec<usize> = t
            .axes
            .iter()
            .copied()
            .filter(|&ax| pending[ax] == 0 && Some(ax) != keep)
            .collect();
        for ax in done {
            t.contract(ax, &w);
        }
    };

    for m in 1..total {
        let kern = &kernels[m - 1];
        let src = vars[m - 1];
        pending[src.axis] -= 1; // kernel-source use of c_{m-1}
        let var = if let Some(s) = kern.delta_scale() {
            Var {
                axis: src.axis,
                scale: src.scale * s,
            }
        } else {
            let new_axis = next_axis;
            next_axis += 1;
            match kern {
                EvolutionKernel::BroadenedScaling { s, width } => {
                    let (s, width) = (*s, *width);
                    tensor.expand(src.axis, new_axis, |p_new, p_old| {
                        Complex64::new(
                            EvolutionKernel::broadened_value(s, width, a[p_new], src.scale * a[p_old]),
                            0.0,
                        )
                    });
                }
                EvolutionKernel::DenseMatrix {
                    grid: kgrid,
                    entries,
                } => {
                    if kgrid != grid {
                        return Err(TfrwError::GridMismatch);
                    }
                    if (src.scale - 1.0).abs() > 1e-12 {
                        return Err(TfrwError::InvalidArgument(
                            "matrix kernels cannot follow an unresolved scaling; \
                             compose the scaling into the matrix first"
                                .into(),
                        ));
                    }
                    tensor.expand(src.axis, new_axis, |p_new, p_old| {
                        entries[p_new * n + p_old]
                    });
                }
                _ => unreachable!(),
            }
            Var {
                axis: new_axis,
                scale: 1.0,
            }
        };
        vars.push(var);
        pending[var.axis] += uses_of(m);

        if m >= n_ph {
            // Detection of photon j = m − N: apply q_j(c_m / c_j).
            let j = m - n_ph;
            let emit = vars[j];
            let ratio = var.scale / emit.scale;
            if emit.axis == var.axis {
                // Same axis: the ratio is pinned, q enters as a constant.
                let q_const = events[j].kernel().eval(ratio)?;
                for v in tensor.data.iter_mut() {
                    *v *= q_const;
                }
                pending[var.axis] -= 1; // q use of c_j (same axis twice)
            } else {
                let r_lo = ratio * a[0] / a[n - 1];
                let r_hi = ratio * a[n - 1] / a[0];
                let qk = pairwise_kernel(&events[j], r_lo, r_hi, n)?;
                let mut q_err = None;
                tensor.scale_pair(var.axis, emit.axis, |p_det, p_emit| {
                    match qk.eval(ratio * a[p_det] / a[p_emit]) {
                        Ok(v) => v,
                        Err(e) => {
                            q_err = Some(e);
                            Complex64::default()
                        }
                    }
                });
                if let Some(e) = q_err {
                    return Err(e);
                }
                pending[emit.axis] -= 1;
            }
            // q use assigned to the detection variable itself.
            pending[var.axis] -= 1;
        }

        let keep = if m == total - 1 { Some(var.axis) } else { None };
        contract_done(&mut tensor, &pending, keep);
    }

    let out_var = vars[total - 1];
    debug_assert_eq!(tensor.axes, vec![out_var.axis]);

    // T[p] = h̃(out_scale · a_p) up to the delta Jacobians on the output
    // chain, which contribute exactly 1/out_scale in total.
    let rho = out_var.scale;
    let values: Vec<Complex64> = if (rho - 1.0).abs() < 1e-15 {
        tensor.data
    } else {
        let logs: Vec<f64> = a.iter().map(|&x| (rho * x).ln()).collect();
        let spline = crate::interp::CubicSpline::new(&logs, &tensor.data);
        let (lo, hi) = (rho * a[0], rho * a[n - 1]);
        a.iter()
            .map(|&ai| {
                if ai < lo || ai > hi {
                    Complex64::default()
                } else {
                    spline.eval(ai.ln()) / rho
                }
            })
            .collect()
    };
    let h_tilde = UniverseWavefunction::new(grid.clone(), values)?;
    let weight = h_tilde.norm_squared();
    if weight == 0.0 {
        return Err(TfrwError::NoDetection);
    }
    let (posterior, _) = h_tilde.normalize()?;
    let history = vec![HistoryEntry {
        step: n_ph,
        moments: posterior.moments(),
    }];
    Ok(PipelineResult {
        posterior,
        detect_weight: weight,
        history,
    })
}
