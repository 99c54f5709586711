//! Discrete-time quantum walks on the N-cycle and the random-sampling
//! protocols built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! - [`coin`], [`dist`] and [`walk`]: coin operators, probability vectors and
//!   exact state-vector dynamics of the coined walk.
//! - [`spectral`]: momentum-block eigensystem of the step operator, Cesàro
//!   averages and the limiting time-averaged distribution.
//! - [`protocols`]: transition kernels, cyclic convolution and the direct,
//!   Cesàro (random-time) and measure-and-reset samplers.
//! - [`analysis`]: entropy, total variation, Fourier coefficients, the
//!   Diaconis–Shahshahani entropy bound, ergodicity and lag statistics.
//! - [`io`] and [`cli`]: CSV/JSON formats and the `qwalk` command line.

// Index loops read better than iterator chains in the 2x2 and N×N kernels.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod coin;
pub mod dist;
pub mod error;
pub mod io;
pub mod protocols;
pub mod spectral;
pub mod walk;

pub use coin::{CoinOperator, CoinState};
pub use dist::ProbDist;
pub use error::{Error, Result};
pub use protocols::{RandomSource, SampleSequence, TransitionKernel};
pub use spectral::SpectralDecomposition;
pub use walk::{CycleConfig, WalkerState};
