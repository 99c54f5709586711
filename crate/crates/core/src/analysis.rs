//! Diagnostics on distributions and generated sequences.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::CoinState;
use crate::dist::ProbDist;
use crate::error::{Error, Result};
use crate::protocols::SampleSequence;
use crate::walk::{position_weights, step_into, CycleConfig, WalkerState};

/// Default support cutoff for the ergodicity check.
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    let h: f64 = p.weights().iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum();
    h.max(0.0)
}

/// `½ Σ |p − q|`.
pub fn total_variation(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::validation(format!(
            "total variation needs equal sizes, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5
        * p.weights()
            .iter()
            .zip(q.weights())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Distance to the uniform distribution on the same number of vertices.
pub fn tv_to_uniform(p: &ProbDist) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.weights().iter().map(|w| (w - u).abs()).sum::<f64>()
}

/// `μ̂(k) = Σ_s μ(s) e^{−i2πks/N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    coefficients: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `max_{k≠0} |μ̂(k)|`.
    pub fn max_nontrivial_modulus(&self) -> f64 {
        self.coefficients.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `μ(s) = (1/N) Σ_k μ̂(k) e^{i2πks/N}` (real part).
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.coefficients.len();
        let roots = unit_roots(n);
        (0..n)
            .map(|s| {
                let z: Complex64 = self
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * roots[(k * s) % n])
                    .sum();
                z.re / n as f64
            })
            .collect()
    }
}

fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect()
}

pub fn fourier_coefficients(mu: &ProbDist) -> FourierSpectrum {
    let n = mu.len();
    let roots = unit_roots(n);
    let coefficients = (0..n)
        .map(|k| {
            mu.weights()
                .iter()
                .enumerate()
                .map(|(s, &w)| roots[(k * s) % n].conj() * w)
                .sum()
        })
        .collect();
    FourierSpectrum { coefficients }
}

/// Diaconis–Shahshahani lower bound on `H(μ^{⋆n})`:
/// `log₂N − (log₂N + 1) · sqrt(Σ_{k=1}^{N−1} |μ̂(k)|^{2n})`.
///
/// Not clamped; for kernels far from uniform the bound is negative.
pub fn ds_entropy_bound(spectrum: &FourierSpectrum, n: u32) -> f64 {
    let log_n = (spectrum.len() as f64).log2();
    let tail: f64 = spectrum
        .coefficients
        .iter()
        .skip(1)
        .map(|z| z.norm_sqr().powf(n as f64))
        .sum();
    log_n - (log_n + 1.0) * tail.sqrt()
}

/// `TV(μ^{⋆n}, uniform)` evaluated from the Fourier side,
/// `μ^{⋆n}(x) − 1/N = (1/N) Σ_{k≠0} μ̂(k)^n e^{i2πkx/N}`.
///
/// The deviation is summed directly instead of subtracting `1/N` from a
/// convolved distribution, so the value keeps its relative precision below
/// the ~1e-14 round-off floor of repeated convolution.
pub fn power_tv_to_uniform(spectrum: &FourierSpectrum, n: u32) -> f64 {
    let len = spectrum.len();
    let roots = unit_roots(len);
    let powers: Vec<Complex64> = spectrum.coefficients.iter().map(|z| z.powu(n)).collect();
    let total: f64 = (0..len)
        .map(|x| {
            let dev: Complex64 = powers
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, p)| p * roots[(k * x) % len])
                .sum();
            dev.re.abs()
        })
        .sum();
    0.5 * total / len as f64
}

/// A coset `r + dℤ_N` of a proper subgroup containing the support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetWitness {
    pub divisor: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityVerdict {
    pub ergodic: bool,
    pub witness: Option<CosetWitness>,
    pub support_threshold: f64,
}

/// Checks whether the support `{x : μ(x) > ε}` lies in a coset of a proper
/// subgroup `dℤ_N` (`d | N`, `1 < d`). Divisors are tried in increasing
/// order, so the witness names the largest such subgroup. A single-point
/// support is reported with `d = N` (the trivial subgroup).
pub fn check_ergodicity(mu: &ProbDist, epsilon: f64) -> Result<ErgodicityVerdict> {
    let n = mu.len();
    if !(0.0..1.0 / n as f64).contains(&epsilon) {
        return Err(Error::validation(format!(
            "support threshold must satisfy 0 <= epsilon < 1/N, got {epsilon}"
        )));
    }
    let support = mu.support(epsilon);
    let Some(&first) = support.first() else {
        return Err(Error::validation("distribution has empty support"));
    };
    let witness = (2..=n).filter(|&d| n.is_multiple_of(d)).find_map(|d| {
        let r = first % d;
        support
            .iter()
            .all(|&x| x % d == r)
            .then_some(CosetWitness { divisor: d, offset: r })
    });
    Ok(ErgodicityVerdict {
        ergodic: witness.is_none(),
        witness,
        support_threshold: epsilon,
    })
}

/// Counts of `(x_n, x_{n+ℓ})` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LagJoint {
    nodes: usize,
    lag: usize,
    counts: Vec<u64>,
}

impl LagJoint {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.nodes + b]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Rows of raw counts, `rows[a][b]`.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.nodes).map(<[u64]>::to_vec).collect()
    }

    /// Rows of counts divided by the total.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        let total = self.total().max(1) as f64;
        self.counts
            .chunks(self.nodes)
            .map(|row| row.iter().map(|&c| c as f64 / total).collect())
            .collect()
    }

    /// Counts of `x_{n+ℓ} ⊖ x_n`.
    pub fn displacement_counts(&self) -> Vec<u64> {
        let n = self.nodes;
        let mut out = vec![0; n];
        for a in 0..n {
            for b in 0..n {
                out[(b + n - a) % n] += self.count(a, b);
            }
        }
        out
    }
}

pub fn lag_joint(seq: &SampleSequence, lag: usize) -> Result<LagJoint> {
    if lag == 0 {
        return Err(Error::validation("lag must be >= 1"));
    }
    if seq.len() <= lag {
        return Err(Error::validation(format!(
            "sequence of length {} is too short for lag {lag}",
            seq.len()
        )));
    }
    let n = seq.nodes();
    let mut counts = vec![0u64; n * n];
    for (a, b) in seq.values().iter().zip(&seq.values()[lag..]) {
        counts[a * n + b] += 1;
    }
    Ok(LagJoint { nodes: n, lag, counts })
}

/// Plug-in mutual information (bits) of the normalized joint counts.
pub fn mutual_information(joint: &LagJoint) -> f64 {
    let n = joint.nodes;
    let total = joint.total();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            let p = joint.count(a, b) as f64 / total;
            rows[a] += p;
            cols[b] += p;
        }
    }
    let mut mi = 0.0;
    for a in 0..n {
        for b in 0..n {
            let c = joint.count(a, b);
            if c > 0 {
                let p = c as f64 / total;
                mi += p * (p / (rows[a] * cols[b])).log2();
            }
        }
    }
    mi.max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

/// Visit counts per vertex.
pub fn vertex_counts(seq: &SampleSequence) -> Vec<u64> {
    let mut counts = vec![0u64; seq.nodes()];
    for &x in seq.values() {
        counts[x] += 1;
    }
    counts
}

pub fn empirical_distribution(seq: &SampleSequence) -> Result<ProbDist> {
    ProbDist::from_counts(&vertex_counts(seq))
}

/// Pearson statistic against the uniform law; requires `S ≥ 5N`.
pub fn chi_square_uniformity(seq: &SampleSequence) -> Result<ChiSquare> {
    let n = seq.nodes();
    if seq.len() < 5 * n {
        return Err(Error::validation(format!(
            "chi-square uniformity needs at least 5N = {} samples, got {}",
            5 * n,
            seq.len()
        )));
    }
    let expected = seq.len() as f64 / n as f64;
    let statistic = vertex_counts(seq)
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    Ok(ChiSquare { statistic, dof: n - 1 })
}

/// Pearson statistic of observed counts against a distribution. Cells with
/// expected probability at most `epsilon` are dropped from the sum and the
/// degrees of freedom; an observation in such a cell yields `+∞`.
pub fn chi_square_goodness_of_fit(observed: &[u64], expected: &ProbDist, epsilon: f64) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::validation("observed and expected sizes differ"));
    }
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(expected.weights()) {
        if p <= epsilon {
            if o > 0 {
                statistic = f64::INFINITY;
            }
            continue;
        }
        let e = total * p;
        statistic += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    Ok(ChiSquare {
        statistic,
        dof: cells.saturating_sub(1),
    })
}

/// Pooled test of the Markov transition law: for every current vertex `a`
/// with at least one successor, the successor counts are compared with
/// `μ(· ⊖ a)`; statistics and degrees of freedom are summed over rows.
pub fn transition_chi_square(joint: &LagJoint, mu: &ProbDist, epsilon: f64) -> Result<ChiSquare> {
    let n = joint.nodes;
    if mu.len() != n {
        return Err(Error::validation("kernel size does not match the sequence"));
    }
    let mut pooled = ChiSquare { statistic: 0.0, dof: 0 };
    for (a, row) in joint.rows().iter().enumerate() {
        if row.iter().sum::<u64>() == 0 {
            continue;
        }
        let part = chi_square_goodness_of_fit(row, &mu.shifted(a), epsilon)?;
        pooled.statistic += part.statistic;
        pooled.dof += part.dof;
    }
    Ok(pooled)
}

/// Upper `1 − α` quantile of χ²(dof) via the Wilson–Hilferty cube
/// approximation, given the standard normal quantile `z` of `1 − α`.
pub fn chi_square_quantile_wh(dof: usize, z: f64) -> f64 {
    let k = dof as f64;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Standard normal quantile of 0.999.
pub const Z_999: f64 = 3.090_232_306_167_813;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// Entropy of `p_T`.
    Direct,
    /// Entropy of the average of `p_1..p_T`.
    Cesaro,
}

/// `(T, H)` for `T = 1..=T_max`, from exact distributions.
pub fn entropy_scan(
    config: &CycleConfig,
    coin0: CoinState,
    x0: usize,
    t_max: usize,
    mode: ScanMode,
) -> Result<Vec<(usize, f64)>> {
    if t_max == 0 {
        return Err(Error::validation("entropy scan needs T_max >= 1"));
    }
    let initial = WalkerState::localized(*config, x0, coin0)?;
    let mut cur = initial.amplitudes().to_vec();
    let mut next = cur.clone();
    let mut running = vec![0.0; config.nodes()];
    let mut out = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        step_into(config, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        let p = position_weights(config, &cur);
        let dist = match mode {
            ScanMode::Direct => ProbDist::new(p)?,
            ScanMode::Cesaro => {
                for (r, w) in running.iter_mut().zip(&p) {
                    *r += w;
                }
                ProbDist::new(running.iter().map(|r| r / t as f64).collect())?
            }
        };
        out.push((t, shannon_entropy(&dist)));
    }
    Ok(out)
}

/// The `(T, H)` pair of largest entropy (earliest on ties).
pub fn scan_maximum(scan: &[(usize, f64)]) -> Option<(usize, f64)> {
    scan.iter().copied().fold(None, |best, cur| match best {
        Some(b) if b.1 >= cur.1 => Some(b),
        _ => Some(cur),
    })
}
