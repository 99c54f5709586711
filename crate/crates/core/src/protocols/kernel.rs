use crate::coin::CoinState;
use crate::dist::ProbDist;
use crate::error::{Error, Result};
use crate::walk::{CycleConfig, WalkerState};

/// Displacement distribution `μ(x) = P(X₁ = x | X₀ = 0)` after `m` steps.
///
/// By translation invariance of the cycle, the walker reset at `y` lands at
/// `y ⊕ x` with probability `μ(x)`, so `μ` generates a circulant Markov chain.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionKernel {
    mu: ProbDist,
    config: CycleConfig,
    steps: usize,
    coin0: CoinState,
}

impl TransitionKernel {
    pub fn mu(&self) -> &ProbDist {
        &self.mu
    }

    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coin0(&self) -> CoinState {
        self.coin0
    }
}

pub fn transition_kernel(config: &CycleConfig, steps: usize, coin0: CoinState) -> Result<TransitionKernel> {
    if steps == 0 {
        return Err(Error::validation(
            "steps must be >= 1 (m >= 1); m = 0 gives a point-mass kernel",
        ));
    }
    let mu = WalkerState::localized(*config, 0, coin0)?
        .evolve(steps)
        .position_distribution();
    Ok(TransitionKernel {
        mu,
        config: *config,
        steps,
        coin0,
    })
}

/// Cyclic convolution `(p ⋆ q)(x) = Σ_j p(x ⊖ j) q(j)`, summed directly.
pub fn convolve(p: &ProbDist, q: &ProbDist) -> Result<ProbDist> {
    let n = p.len();
    if q.len() != n {
        return Err(Error::validation(format!(
            "cannot convolve distributions of sizes {n} and {}",
            q.len()
        )));
    }
    let (pw, qw) = (p.weights(), q.weights());
    let out = (0..n)
        .map(|x| qw.iter().enumerate().map(|(j, &qj)| pw[(x + n - j) % n] * qj).sum())
        .collect();
    ProbDist::new(out)
}

/// `μ^{⋆n}` by repeated convolution.
pub fn iterated_kernel(kernel: &TransitionKernel, n: usize) -> Result<ProbDist> {
    if n == 0 {
        return Err(Error::validation("convolution power n must be >= 1"));
    }
    let mu = kernel.mu();
    let mut acc = mu.clone();
    for _ in 1..n {
        acc = convolve(mu, &acc)?;
    }
    Ok(acc)
}

/// Marginal law `P(X_n) = μ^{⋆n}` of the `n`-th output of the reset protocol
/// started at vertex 0.
pub fn marginal(kernel: &TransitionKernel, n: usize) -> Result<ProbDist> {
    iterated_kernel(kernel, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::CoinOperator;

    fn kernel(n: usize, m: usize) -> TransitionKernel {
        let config = CycleConfig::new(n, CoinOperator::symmetric()).unwrap();
        transition_kernel(&config, m, CoinState::balanced()).unwrap()
    }

    #[test]
    fn single_step_kernel() {
        for n in [3, 8, 25] {
            let k = kernel(n, 1);
            assert!((k.mu().get(1) - 0.5).abs() < 1e-15);
            assert!((k.mu().get(n - 1) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_steps_rejected() {
        let config = CycleConfig::new(5, CoinOperator::symmetric()).unwrap();
        let err = transition_kernel(&config, 0, CoinState::balanced()).unwrap_err();
        assert!(err.to_string().contains("m >= 1"));
    }

    #[test]
    fn convolution_identities() {
        let p = kernel(9, 3).mu().clone();
        let delta0 = ProbDist::point_mass(9, 0).unwrap();
        assert_eq!(convolve(&p, &delta0).unwrap(), p);
        let u = ProbDist::uniform(9);
        for (a, b) in convolve(&u, &p).unwrap().weights().iter().zip(u.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
        let da = ProbDist::point_mass(9, 7).unwrap();
        let db = ProbDist::point_mass(9, 5).unwrap();
        assert_eq!(convolve(&da, &db).unwrap(), ProbDist::point_mass(9, 3).unwrap());
        assert!(convolve(&p, &ProbDist::uniform(8)).is_err());
    }

    #[test]
    fn second_marginal_by_direct_summation() {
        let k = kernel(25, 10);
        let mu = k.mu().weights();
        let two = marginal(&k, 2).unwrap();
        for x in 0..25 {
            let direct: f64 = (0..25).map(|j| mu[(x + 25 - j) % 25] * mu[j]).sum();
            assert!((two.get(x) - direct).abs() < 1e-15);
        }
        assert_eq!(marginal(&k, 1).unwrap(), *k.mu());
        assert!(marginal(&k, 0).is_err());
    }

    #[test]
    fn m10_kernel_shape() {
        // Even displacements within ±10, peaks at ±6.
        let k = kernel(25, 10);
        let mu = k.mu();
        let support = mu.support(1e-12);
        assert_eq!(support, vec![0, 2, 4, 6, 8, 10, 15, 17, 19, 21, 23]);
        let peak = (0..25).max_by(|&a, &b| mu.get(a).total_cmp(&mu.get(b))).unwrap();
        assert!(peak == 6 || peak == 19);
        assert!((mu.get(6) - mu.get(19)).abs() < 1e-12);
        assert!(mu.get(6) > 0.25);
    }

    #[test]
    fn m100_kernel_is_smooth() {
        let k = kernel(25, 100);
        let max = k.mu().weights().iter().cloned().fold(0.0, f64::max);
        assert_eq!(k.mu().support(1e-12).len(), 25);
        assert!(max < 0.08, "max weight {max}");
    }
}
