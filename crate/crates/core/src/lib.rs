//! Simulation of the seven-spin NMR order-finding experiment for N = 15:
//! circuits, peephole optimization, pulse lowering, density-matrix dynamics
//! with amplitude and phase damping, effective pure state preparation,
//! spectrum synthesis and the classical post-processing.

pub mod channels;
pub mod circuit;
pub mod compiler;
pub mod error;
pub mod linalg;
pub mod molecule;
pub mod pipeline;
pub mod postproc;
pub mod prep;
pub mod readout;
pub mod spinsys;

pub use error::{Error, Result};
pub use pipeline::{run_shor, Level, RunConfig, RunOutput, Summary};
