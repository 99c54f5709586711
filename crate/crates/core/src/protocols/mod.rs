//! Transition kernels, cyclic convolution and the three sampling protocols.

mod kernel;
mod rng;
mod sampling;

pub use kernel::{convolve, iterated_kernel, marginal, transition_kernel, TransitionKernel};
pub use rng::{InverseCdf, RandomSource, RNG_ALGORITHM};
pub use sampling::{
    run_cesaro_protocol, run_direct_protocol, run_reset_protocol, run_reset_protocol_with, Protocol, ResetTarget,
    SampleSequence, SequenceMeta,
};
