//! Deterministic simulator for a toy FRW cosmology with a quantized scale
//! factor, and for the optomechanical cavity systems that emulate it.
//!
//! The universe state is a complex wavefunction `h(a)` over a strictly
//! positive scale-factor grid. Photon emission followed by detection acts as
//! a weak measurement of the scale factor: the back-action is encoded in a
//! suppression kernel `q(a, c)` that depends only on the ratio `a/c` of final
//! to initial scale factor. The crate provides:
//!
//! * [`grid`]/[`universe`] — the discretized universe wavefunction,
//! * [`profiles`] — emission/absorption frequency wavepackets,
//! * [`kernel`] — the back-action kernel `q`, by quadrature or closed form,
//! * [`evolution`] — the universe propagator `B(a, ã)`,
//! * [`pipeline`] — single- and multi-photon measurement updates,
//! * [`optomech`] — moving-mirror cavity dynamics and the rotating-frame
//!   Hubble construction,
//! * [`scenario`] — JSON-driven scenario runs behind the `tfrw` CLI.
//!
//! Dense inner loops run on rayon when the default `parallel` feature is
//! enabled; disabling it yields a fully sequential build with identical
//! results.

pub mod chain;
pub mod error;
pub mod evolution;
mod exec;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod optomech;
pub mod output;
pub mod pipeline;
pub mod profiles;
pub mod quad;
pub mod scenario;
pub mod universe;

pub use error::TfrwError;
pub use evolution::EvolutionKernel;
pub use grid::ScaleGrid;
pub use kernel::MeasurementKernel;
pub use pipeline::{MeasurementEvent, PipelineResult};
pub use profiles::SpectralProfile;
pub use universe::UniverseWavefunction;

/// Tool version string embedded in summary outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
