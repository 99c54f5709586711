//! Exact state-vector dynamics of the coined walk on the N-cycle.
//!
//! Amplitudes are stored coin-major: entry `(c, x)` lives at index `c·N + x`
//! with `c = 0` for ↑ and `c = 1` for ↓. One step applies the coin at every
//! vertex and then moves ↑ amplitudes to `x + 1` and ↓ amplitudes to `x − 1`
//! (mod N). No renormalization is ever applied; norm drift is left visible.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coin::{CoinOperator, CoinState};
use crate::dist::ProbDist;
use crate::error::{Error, Result};

/// Allowed deviation of a state's ℓ² norm from one on construction.
pub const NORM_TOL: f64 = 1e-10;

/// Smallest accepted cycle length.
pub const MIN_NODES: usize = 3;

/// Cycle length and coin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleConfig {
    nodes: usize,
    coin: CoinOperator,
}

impl CycleConfig {
    pub fn new(nodes: usize, coin: CoinOperator) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::validation(format!(
                "cycle needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        Ok(Self { nodes, coin })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn coin(&self) -> &CoinOperator {
        &self.coin
    }

    /// Dimension of the coin ⊗ position space, `2N`.
    pub fn dim(&self) -> usize {
        2 * self.nodes
    }

    pub fn index(&self, coin: usize, x: usize) -> usize {
        coin * self.nodes + x
    }
}

/// A walker state `|Ψ⟩` on coin ⊗ position space.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    config: CycleConfig,
    amplitudes: Vec<Complex64>,
}

impl WalkerState {
    /// Checks the length (`2N`) and the norm (to [`NORM_TOL`]).
    pub fn new(config: CycleConfig, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != config.dim() {
            return Err(Error::validation(format!(
                "state needs {} amplitudes, got {}",
                config.dim(),
                amplitudes.len()
            )));
        }
        let state = Self { config, amplitudes };
        let norm = state.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::validation(format!("state norm is {norm}, expected 1")));
        }
        Ok(state)
    }

    /// `|coin0⟩ ⊗ |x0⟩`.
    pub fn localized(config: CycleConfig, x0: usize, coin0: CoinState) -> Result<Self> {
        let n = config.nodes();
        if x0 >= n {
            return Err(Error::Index {
                what: "vertex",
                index: x0,
                len: n,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); config.dim()];
        amplitudes[config.index(0, x0)] = coin0.up();
        amplitudes[config.index(1, x0)] = coin0.down();
        Ok(Self { config, amplitudes })
    }

    pub(crate) fn from_raw(config: CycleConfig, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), config.dim());
        Self { config, amplitudes }
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, coin: usize, x: usize) -> Complex64 {
        self.amplitudes[self.config.index(coin, x)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// One application of `Û = Ŝ (Ĉ ⊗ I)`.
    pub fn apply_step(&self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        step_into(&self.config, &self.amplitudes, &mut out);
        Self::from_raw(self.config, out)
    }

    /// `Û^t |Ψ⟩`.
    pub fn evolve(&self, t: usize) -> Self {
        let mut cur = self.amplitudes.clone();
        let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
        for _ in 0..t {
            step_into(&self.config, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Self::from_raw(self.config, cur)
    }

    /// Born-rule position marginal `p(x) = |ψ(↑,x)|² + |ψ(↓,x)|²`.
    pub fn position_distribution(&self) -> ProbDist {
        ProbDist::new(position_weights(&self.config, &self.amplitudes))
            .expect("unitary evolution keeps the position marginal normalized")
    }
}

pub(crate) fn position_weights(config: &CycleConfig, amplitudes: &[Complex64]) -> Vec<f64> {
    let n = config.nodes();
    (0..n)
        .map(|x| amplitudes[x].norm_sqr() + amplitudes[n + x].norm_sqr())
        .collect()
}

pub(crate) fn step_into(config: &CycleConfig, src: &[Complex64], dst: &mut [Complex64]) {
    let n = config.nodes();
    let coin = config.coin();
    let (ups, downs) = dst.split_at_mut(n);
    for x in 0..n {
        let (u, d) = coin.apply(src[x], src[n + x]);
        ups[if x + 1 == n { 0 } else { x + 1 }] = u;
        downs[if x == 0 { n - 1 } else { x - 1 }] = d;
    }
}

/// Dense `2N × 2N` matrix of `Û` in the coin-major basis.
pub fn step_operator_matrix(config: &CycleConfig) -> DMatrix<Complex64> {
    let n = config.nodes();
    let m = config.coin().entries();
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for x in 0..n {
        let right = (x + 1) % n;
        let left = (x + n - 1) % n;
        for c in 0..2 {
            let col = config.index(c, x);
            u[(config.index(0, right), col)] += m[0][c];
            u[(config.index(1, left), col)] += m[1][c];
        }
    }
    u
}
