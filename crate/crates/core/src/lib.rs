//! Super-resolution of point sources from low-frequency Fourier samples by
//! total-variation minimization, with the supporting machinery: interpolation
//! kernels and dual certificates, a first-order SDP solver for the dual
//! problem, discrete l1 solvers, time-band spectra, and experiment harnesses.

pub mod certificate;
pub mod discrete;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod matching;
pub mod model;
pub mod sdp;
pub mod slepian;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use model::{AtomicMeasure, Geometry, Locations, SampleVector};
