use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::kernel::transition_kernel;
use super::rng::{InverseCdf, RandomSource};
use crate::coin::CoinState;
use crate::dist::ProbDist;
use crate::error::{Error, Result};
use crate::walk::{position_weights, step_into, CycleConfig, WalkerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// i.i.d. draws from the position distribution after a fixed time.
    Direct,
    /// i.i.d. draws at a uniformly random time in `0..=T`.
    Cesaro,
    /// Measure, reset the coin, restart from the measured vertex.
    Reset,
    /// Measure, reset the coin, restart from a uniformly random vertex.
    ResetUniform,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Direct => "direct",
            Protocol::Cesaro => "cesaro",
            Protocol::Reset => "reset",
            Protocol::ResetUniform => "reset-uniform",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Protocol::Direct),
            "cesaro" => Ok(Protocol::Cesaro),
            "reset" => Ok(Protocol::Reset),
            "reset-uniform" => Ok(Protocol::ResetUniform),
            other => Err(Error::validation(format!("unknown protocol '{other}'"))),
        }
    }
}

/// Generation metadata carried with every sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub protocol: Protocol,
    pub nodes: usize,
    /// `m` for the reset protocols, `T` for direct and random-time sampling.
    pub steps: usize,
    /// Coin tag as accepted by `CoinOperator::from_str`.
    pub coin: String,
    pub seed: u64,
    pub length: usize,
}

/// Measured vertices `x_1..x_S` together with how they were produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSequence {
    values: Vec<usize>,
    meta: SequenceMeta,
}

impl SampleSequence {
    /// Checks that every value is a vertex and that `meta.length` matches.
    pub fn new(values: Vec<usize>, meta: SequenceMeta) -> Result<Self> {
        if meta.length != values.len() {
            return Err(Error::validation(format!(
                "metadata length {} does not match {} values",
                meta.length,
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v >= meta.nodes) {
            return Err(Error::validation(format!(
                "value {v} at position {i} is not a vertex of the {}-cycle",
                meta.nodes
            )));
        }
        Ok(Self { values, meta })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    pub fn nodes(&self) -> usize {
        self.meta.nodes
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn meta(protocol: Protocol, config: &CycleConfig, steps: usize, rng: &RandomSource, length: usize) -> SequenceMeta {
    SequenceMeta {
        protocol,
        nodes: config.nodes(),
        steps,
        coin: config.coin().to_string(),
        seed: rng.seed(),
        length,
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::validation("samples must be >= 1"));
    }
    Ok(())
}

/// Where the walker restarts after each measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResetTarget {
    /// At the measured vertex (no external randomness; outputs are correlated).
    #[default]
    Measured,
    /// At a vertex drawn uniformly from `rng` (outputs are independent).
    Uniform,
}

/// Measure-and-reset sampling with `x₀ = 0`.
///
/// Each round evolves `|c₀⟩ ⊗ |x_{n−1}⟩` for `m` steps and measures the
/// position. Because the dynamics commute with translations, the outcome is
/// `x_{n−1} ⊕ d` with displacement `d ~ μ`; `d` is drawn by inverse CDF over
/// `0..N` from one uniform per round.
pub fn run_reset_protocol(
    config: &CycleConfig,
    steps: usize,
    coin0: CoinState,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<SampleSequence> {
    run_reset_protocol_with(config, steps, coin0, samples, ResetTarget::Measured, rng)
}

/// Reset protocol with an explicit restart rule. With
/// [`ResetTarget::Uniform`] each round first consumes one uniform for the
/// restart vertex, then one for the displacement.
pub fn run_reset_protocol_with(
    config: &CycleConfig,
    steps: usize,
    coin0: CoinState,
    samples: usize,
    target: ResetTarget,
    rng: &mut RandomSource,
) -> Result<SampleSequence> {
    check_samples(samples)?;
    let kernel = transition_kernel(config, steps, coin0)?;
    let sampler = InverseCdf::new(kernel.mu());
    let n = config.nodes();
    let mut x = 0usize;
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let start = match target {
            ResetTarget::Measured => x,
            ResetTarget::Uniform => rng.uniform_index(n),
        };
        x = (start + sampler.sample(rng)) % n;
        values.push(x);
    }
    let protocol = match target {
        ResetTarget::Measured => Protocol::Reset,
        ResetTarget::Uniform => Protocol::ResetUniform,
    };
    SampleSequence::new(values, meta(protocol, config, steps, rng, samples))
}

/// i.i.d. draws from the position distribution of `|c₀⟩ ⊗ |x₀⟩` after `T` steps.
pub fn run_direct_protocol(
    config: &CycleConfig,
    horizon: usize,
    coin0: CoinState,
    x0: usize,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<SampleSequence> {
    check_samples(samples)?;
    if horizon == 0 {
        return Err(Error::validation("direct sampling needs T >= 1"));
    }
    let dist = WalkerState::localized(*config, x0, coin0)?
        .evolve(horizon)
        .position_distribution();
    let sampler = InverseCdf::new(&dist);
    let values = (0..samples).map(|_| sampler.sample(rng)).collect();
    SampleSequence::new(values, meta(Protocol::Direct, config, horizon, rng, samples))
}

/// Random-time sampling: per draw, `t` is uniform on `{0, 1, …, T}` (one
/// uniform), then the position is measured at time `t` (a second uniform).
/// `T = 0` is accepted and always returns `x₀`.
pub fn run_cesaro_protocol(
    config: &CycleConfig,
    horizon: usize,
    coin0: CoinState,
    x0: usize,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<SampleSequence> {
    check_samples(samples)?;
    let initial = WalkerState::localized(*config, x0, coin0)?;

    let mut samplers = Vec::with_capacity(horizon + 1);
    let mut cur = initial.amplitudes().to_vec();
    let mut next = cur.clone();
    samplers.push(InverseCdf::new(&initial.position_distribution()));
    for _ in 0..horizon {
        step_into(config, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        samplers.push(InverseCdf::new(&ProbDist::new(position_weights(config, &cur))?));
    }

    let values = (0..samples)
        .map(|_| {
            let t = rng.uniform_index(horizon + 1);
            samplers[t].sample(rng)
        })
        .collect();
    SampleSequence::new(values, meta(Protocol::Cesaro, config, horizon, rng, samples))
}
