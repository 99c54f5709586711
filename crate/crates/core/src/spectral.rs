//! Momentum-space eigensystem of the step operator.
//!
//! On the cycle the step operator commutes with translations, so it is block
//! diagonal in the momentum states `|χ_k⟩ = N^{-1/2} Σ_v e^{i2πkv/N} |v⟩`. A
//! shift by +1 multiplies `|χ_k⟩` by `e^{-i2πk/N}`, so the block acting on the
//! coin factor of `|γ⟩ ⊗ |χ_k⟩` is
//!
//! ```text
//! H_k = diag(e^{-i2πk/N}, e^{+i2πk/N}) · C
//! ```
//!
//! and every eigenpair `(λ, |γ⟩)` of `H_k` gives an eigenvector
//! `|γ⟩ ⊗ |χ_k⟩` of the full operator with the same eigenvalue. For the
//! symmetric coin the characteristic polynomial is
//! `λ² − √2 cos(2πk/N) λ + 1`, so `cos θ_k = cos(2πk/N)/√2` and blocks `k`
//! and `N − k` share their spectrum.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coin::{CoinKind, CoinState, Mat2};
use crate::dist::ProbDist;
use crate::error::{Error, Result};
use crate::walk::{position_weights, CycleConfig, WalkerState};

/// Two eigenphases closer than this (in radians) are treated as one eigenvalue.
pub const PHASE_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e^{i2πj/N}` for `j = 0..N`. Exponents are reduced mod N by the caller.
fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect()
}

/// Momentum state `|χ_k⟩` as a vector over the `N` vertices.
pub fn momentum_state(k: usize, n: usize) -> Result<Vec<Complex64>> {
    if k >= n {
        return Err(Error::Index {
            what: "momentum",
            index: k,
            len: n,
        });
    }
    let w = roots_of_unity(n);
    let scale = 1.0 / (n as f64).sqrt();
    Ok((0..n).map(|v| w[(k * v) % n] * scale).collect())
}

/// Identifies one of the `2N` eigenpairs: momentum `k` and branch
/// (`0` for `λ⁺`, `1` for `λ⁻`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EigenIndex {
    pub k: usize,
    pub branch: usize,
}

/// The 2×2 problem at fixed momentum.
#[derive(Clone, Debug)]
pub struct MomentumBlock {
    k: usize,
    matrix: Mat2,
    eigenvalues: [Complex64; 2],
    eigenvectors: [[Complex64; 2]; 2],
}

impl MomentumBlock {
    fn new(k: usize, n: usize, coin: &Mat2) -> Self {
        let phase = Complex64::from_polar(1.0, -TAU * k as f64 / n as f64);
        let diag = [phase, phase.conj()];
        let mut matrix = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                matrix[r][c] = diag[r] * coin[r][c];
            }
        }
        let (eigenvalues, eigenvectors) = eigen_2x2(&matrix);
        Self {
            k,
            matrix,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// `[λ⁺, λ⁻]`, with `λ⁺` the eigenvalue of larger argument in (−π, π].
    pub fn eigenvalues(&self) -> &[Complex64; 2] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[[Complex64; 2]; 2] {
        &self.eigenvectors
    }

    /// Eigenphases in `[0, 2π)`.
    pub fn phases(&self) -> [f64; 2] {
        self.eigenvalues.map(phase_of)
    }
}

fn phase_of(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn normalized(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Makes the first non-negligible component real and positive.
fn fix_phase(v: [Complex64; 2]) -> [Complex64; 2] {
    let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
    let rot = lead.conj() / lead.norm();
    [v[0] * rot, v[1] * rot]
}

/// Eigen-decomposition of a 2×2 unitary (normal) matrix.
fn eigen_2x2(m: &Mat2) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
    let [[a, b], [c, d]] = *m;
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let (mut l0, mut l1) = (half_tr + disc, half_tr - disc);
    if l1.arg() > l0.arg() {
        std::mem::swap(&mut l0, &mut l1);
    }

    if (l0 - l1).norm() < 1e-12 {
        // A normal matrix with a single eigenvalue is a multiple of I.
        return ([l0, l1], [[ONE, ZERO], [ZERO, ONE]]);
    }

    let eigvec = |l: Complex64| {
        let from_row0 = [b, l - a];
        let from_row1 = [l - d, c];
        let n0 = from_row0[0].norm_sqr() + from_row0[1].norm_sqr();
        let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
        normalized(if n0 >= n1 { from_row0 } else { from_row1 })
    };
    let v0 = fix_phase(eigvec(l0));
    let mut v1 = eigvec(l1);
    let overlap = inner(&v0, &v1);
    v1 = [v1[0] - overlap * v0[0], v1[1] - overlap * v0[1]];
    let v1 = fix_phase(normalized(v1));
    ([l0, l1], [v0, v1])
}

/// All `2N` eigenpairs of the step operator, grouped by eigenvalue.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    config: CycleConfig,
    blocks: Vec<MomentumBlock>,
    groups: Vec<Vec<EigenIndex>>,
    roots: Vec<Complex64>,
}

/// Builds the per-momentum eigensystem and the eigenvalue groups.
pub fn decompose(config: &CycleConfig) -> SpectralDecomposition {
    let n = config.nodes();
    let blocks: Vec<MomentumBlock> = (0..n)
        .map(|k| MomentumBlock::new(k, n, config.coin().entries()))
        .collect();
    let groups = group_by_phase(&blocks);
    SpectralDecomposition {
        config: *config,
        blocks,
        groups,
        roots: roots_of_unity(n),
    }
}

fn group_by_phase(blocks: &[MomentumBlock]) -> Vec<Vec<EigenIndex>> {
    let mut items: Vec<(f64, EigenIndex)> = blocks
        .iter()
        .flat_map(|b| {
            let phases = b.phases();
            (0..2).map(move |branch| (phases[branch], EigenIndex { k: b.k, branch }))
        })
        .collect();
    items.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut groups: Vec<Vec<EigenIndex>> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (phase, idx) in &items {
        match groups.last_mut() {
            Some(g) if phase - prev <= PHASE_TOL => g.push(*idx),
            _ => groups.push(vec![*idx]),
        }
        prev = *phase;
    }
    // Phases just below 2π coincide with phases just above 0.
    if groups.len() > 1 {
        let first = items.first().map(|i| i.0).unwrap_or(0.0);
        let last = items.last().map(|i| i.0).unwrap_or(0.0);
        if first + TAU - last <= PHASE_TOL {
            let tail = groups.pop().unwrap_or_default();
            groups[0].extend(tail);
        }
    }
    for g in &mut groups {
        g.sort();
    }
    groups.sort();
    groups
}

impl SpectralDecomposition {
    pub fn config(&self) -> &CycleConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[MomentumBlock] {
        &self.blocks
    }

    /// Classes of eigenpairs sharing an eigenvalue (within [`PHASE_TOL`]).
    pub fn groups(&self) -> &[Vec<EigenIndex>] {
        &self.groups
    }

    pub fn eigenvalue(&self, idx: EigenIndex) -> Complex64 {
        self.blocks[idx.k].eigenvalues[idx.branch]
    }

    /// Full eigenvector `|γ_k^±⟩ ⊗ |χ_k⟩` in the coin-major layout.
    pub fn eigenvector(&self, idx: EigenIndex) -> Vec<Complex64> {
        let n = self.config.nodes();
        let gamma = self.blocks[idx.k].eigenvectors[idx.branch];
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = vec![ZERO; 2 * n];
        for c in 0..2 {
            for v in 0..n {
                out[c * n + v] = gamma[c] * self.roots[(idx.k * v) % n] * scale;
            }
        }
        out
    }

    fn check_config(&self, state: &WalkerState) -> Result<()> {
        if state.config() != &self.config {
            return Err(Error::validation(
                "state and decomposition use different cycle configurations",
            ));
        }
        Ok(())
    }

    /// Coin-resolved momentum amplitudes `⟨χ_k|ψ_c⟩` of a coin-major vector.
    fn to_momentum(&self, amplitudes: &[Complex64]) -> Vec<[Complex64; 2]> {
        let n = self.config.nodes();
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                let mut acc = [ZERO; 2];
                for v in 0..n {
                    let w = self.roots[(k * v) % n].conj();
                    acc[0] += w * amplitudes[v];
                    acc[1] += w * amplitudes[n + v];
                }
                [acc[0] * scale, acc[1] * scale]
            })
            .collect()
    }

    fn momentum_to_position(&self, momentum: &[[Complex64; 2]]) -> Vec<Complex64> {
        let n = self.config.nodes();
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = vec![ZERO; 2 * n];
        for v in 0..n {
            let mut acc = [ZERO; 2];
            for (k, m) in momentum.iter().enumerate() {
                let w = self.roots[(k * v) % n];
                acc[0] += w * m[0];
                acc[1] += w * m[1];
            }
            out[v] = acc[0] * scale;
            out[n + v] = acc[1] * scale;
        }
        out
    }

    /// Eigenbasis coefficients `a_{k,±} = ⟨φ_k^±|Ψ⟩`, indexed `[k][branch]`.
    pub fn coefficients(&self, state: &WalkerState) -> Result<Vec<[Complex64; 2]>> {
        self.check_config(state)?;
        let momentum = self.to_momentum(state.amplitudes());
        Ok(momentum
            .iter()
            .zip(&self.blocks)
            .map(|(psi_k, block)| {
                [
                    inner(&block.eigenvectors[0], psi_k),
                    inner(&block.eigenvectors[1], psi_k),
                ]
            })
            .collect())
    }

    /// `Û^t |Ψ⟩ = Σ_n λ_n^t a_n |φ_n⟩`; cost does not depend on `t`.
    pub fn evolve(&self, initial: &WalkerState, t: u64) -> Result<WalkerState> {
        let coeffs = self.coefficients(initial)?;
        let momentum: Vec<[Complex64; 2]> = coeffs
            .iter()
            .zip(&self.blocks)
            .map(|(a, block)| {
                let mut out = [ZERO; 2];
                for branch in 0..2 {
                    let lambda = block.eigenvalues[branch];
                    let power = Complex64::from_polar(lambda.norm().powf(t as f64), lambda.arg() * t as f64);
                    let coeff = power * a[branch];
                    let gamma = block.eigenvectors[branch];
                    out[0] += coeff * gamma[0];
                    out[1] += coeff * gamma[1];
                }
                out
            })
            .collect();
        Ok(WalkerState::from_raw(self.config, self.momentum_to_position(&momentum)))
    }

    /// Long-time average `π(v) = Σ_c Σ_{λ_n = λ_m} a_n a_m* ⟨c,v|φ_n⟩⟨φ_m|c,v⟩`,
    /// evaluated group by group as `Σ_c |P_λ Ψ(c, v)|²`.
    pub fn limiting_distribution(&self, initial: &WalkerState) -> Result<ProbDist> {
        let coeffs = self.coefficients(initial)?;
        let n = self.config.nodes();
        let mut weights = vec![0.0; n];
        let mut projected = vec![ZERO; 2 * n];
        for group in &self.groups {
            projected.iter_mut().for_each(|z| *z = ZERO);
            for &idx in group {
                let a = coeffs[idx.k][idx.branch];
                for (p, e) in projected.iter_mut().zip(self.eigenvector(idx)) {
                    *p += a * e;
                }
            }
            for (w, p) in weights.iter_mut().zip(position_weights(&self.config, &projected)) {
                *w += p;
            }
        }
        ProbDist::new(weights)
    }

    /// `Σ_n λ_n |φ_n⟩⟨φ_n|` as a dense matrix.
    pub fn reconstruct_operator(&self) -> DMatrix<Complex64> {
        let dim = self.config.dim();
        let mut u = DMatrix::zeros(dim, dim);
        for block in &self.blocks {
            for branch in 0..2 {
                let idx = EigenIndex { k: block.k, branch };
                let v = self.eigenvector(idx);
                let lambda = block.eigenvalues[branch];
                for r in 0..dim {
                    for c in 0..dim {
                        u[(r, c)] += lambda * v[r] * v[c].conj();
                    }
                }
            }
        }
        u
    }
}

/// Free-function form of [`SpectralDecomposition::evolve`].
pub fn evolve_spectral(decomp: &SpectralDecomposition, initial: &WalkerState, t: u64) -> Result<WalkerState> {
    decomp.evolve(initial, t)
}

/// Free-function form of [`SpectralDecomposition::limiting_distribution`].
pub fn limiting_distribution(decomp: &SpectralDecomposition, initial: &WalkerState) -> Result<ProbDist> {
    decomp.limiting_distribution(initial)
}

/// Which time steps a Cesàro average covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimeRange {
    /// `t = 1..=T`.
    #[default]
    OneToT,
    /// `t = 0..T`, i.e. including the initial state.
    ZeroToTMinusOne,
}

/// `(1/T) Σ_{t=1}^{T} p_t`, the time-averaged position distribution.
pub fn cesaro_average(initial: &WalkerState, horizon: usize) -> Result<ProbDist> {
    cesaro_average_with(initial, horizon, TimeRange::OneToT)
}

pub fn cesaro_average_with(initial: &WalkerState, horizon: usize, range: TimeRange) -> Result<ProbDist> {
    if horizon == 0 {
        return Err(Error::validation("Cesàro horizon T must be >= 1"));
    }
    let config = *initial.config();
    let mut acc = vec![0.0; config.nodes()];
    let mut cur = initial.amplitudes().to_vec();
    let mut next = vec![ZERO; cur.len()];
    let accumulate = |acc: &mut [f64], amps: &[Complex64]| {
        for (a, p) in acc.iter_mut().zip(position_weights(&config, amps)) {
            *a += p;
        }
    };
    if range == TimeRange::ZeroToTMinusOne {
        accumulate(&mut acc, &cur);
    }
    let steps = match range {
        TimeRange::OneToT => horizon,
        TimeRange::ZeroToTMinusOne => horizon - 1,
    };
    for _ in 0..steps {
        crate::walk::step_into(&config, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        accumulate(&mut acc, &cur);
    }
    ProbDist::new(acc.into_iter().map(|a| a / horizon as f64).collect())
}

/// Closed-form limiting distribution together with the discarded imaginary part.
#[derive(Clone, Debug)]
pub struct ClosedFormLimit {
    pub distribution: ProbDist,
    /// Largest `|Im π(v)|` before taking the real part.
    pub imaginary_residue: f64,
}

/// Limiting time-averaged distribution for the symmetric coin on an odd
/// cycle, starting from `|coin0⟩ ⊗ |0⟩`:
///
/// ```text
/// π(v) = 1/N + (1/N²) Σ_{n=1}^{N-1} e^{-i4πnv/N} Σ_± ⟨γ_n|γ_{N-n}⟩⟨γ_{N-n}|Π₀|γ_n⟩
/// ```
///
/// where `Π₀ = |coin0⟩⟨coin0|` and each `γ_n` is paired with the eigenvector
/// of block `N − n` carrying the same eigenvalue.
pub fn limiting_correction_closed_form(config: &CycleConfig, coin0: CoinState) -> Result<ClosedFormLimit> {
    let n = config.nodes();
    if n.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "closed-form limit requires an odd number of nodes and the symmetric coin (got N = {n})"
        )));
    }
    if config.coin().kind() != CoinKind::Symmetric {
        return Err(Error::Unsupported(
            "closed-form limit requires an odd number of nodes and the symmetric coin".into(),
        ));
    }
    let decomp = decompose(config);
    let c0 = coin0.as_array();
    let roots = &decomp.roots;

    // Per-n coefficient of e^{-i4πnv/N}.
    let mut coeff = vec![ZERO; n];
    for (m, slot) in coeff.iter_mut().enumerate().skip(1) {
        let block = &decomp.blocks[m];
        let partner = &decomp.blocks[n - m];
        for branch in 0..2 {
            let lambda = block.eigenvalues[branch];
            let pb = (0..2)
                .min_by(|&x, &y| {
                    (partner.eigenvalues[x] - lambda)
                        .norm()
                        .total_cmp(&(partner.eigenvalues[y] - lambda).norm())
                })
                .unwrap_or(branch);
            let gap = (partner.eigenvalues[pb] - lambda).norm();
            if gap > PHASE_TOL {
                return Err(Error::Unsupported(format!(
                    "blocks {m} and {} are not degenerate (gap {gap:e})",
                    n - m
                )));
            }
            let g = &block.eigenvectors[branch];
            let h = &partner.eigenvectors[pb];
            // ⟨γ_n|γ_{N-n}⟩ ⟨γ_{N-n}|c0⟩ ⟨c0|γ_n⟩
            *slot += inner(g, h) * inner(h, &c0) * inner(&c0, g);
        }
    }

    let nf = n as f64;
    let mut residue = 0.0_f64;
    let weights: Vec<f64> = (0..n)
        .map(|v| {
            let mut acc = ZERO;
            for (m, c) in coeff.iter().enumerate().skip(1) {
                acc += roots[(2 * m * v) % n].conj() * c;
            }
            let value = Complex64::new(1.0 / nf, 0.0) + acc / (nf * nf);
            residue = residue.max(value.im.abs());
            value.re
        })
        .collect();
    Ok(ClosedFormLimit {
        distribution: ProbDist::new(weights)?,
        imaginary_residue: residue,
    })
}

/// Analytic eigenphase of the symmetric coin block: `cos θ_k = cos(2πk/N)/√2`,
/// with `θ_k ∈ [π/4, 3π/4]`.
pub fn symmetric_coin_theta(k: usize, n: usize) -> f64 {
    ((TAU * k as f64 / n as f64).cos() / 2f64.sqrt())
        .acos()
        .clamp(PI / 4.0, 3.0 * PI / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::CoinOperator;

    fn cfg(n: usize, coin: CoinOperator) -> CycleConfig {
        CycleConfig::new(n, coin).unwrap()
    }

    #[test]
    fn momentum_state_examples() {
        let chi0 = momentum_state(0, 4).unwrap();
        assert!(chi0.iter().all(|z| (z - Complex64::new(0.5, 0.0)).norm() < 1e-15));
        let chi1 = momentum_state(1, 4).unwrap();
        let expected = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, -0.5),
        ];
        for (z, e) in chi1.iter().zip(expected) {
            assert!((z - e).norm() < 1e-15);
        }
        let a = momentum_state(2, 25).unwrap();
        let b = momentum_state(3, 25).unwrap();
        let overlap: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        assert!(overlap.norm() < 1e-12);
        assert!(matches!(momentum_state(4, 4), Err(Error::Index { .. })));
    }

    #[test]
    fn symmetric_coin_k0_eigenvalues() {
        let d = decompose(&cfg(25, CoinOperator::symmetric()));
        let [plus, minus] = *d.blocks()[0].eigenvalues();
        let e = Complex64::from_polar(1.0, PI / 4.0);
        assert!((plus - e).norm() < 1e-12);
        assert!((minus - e.conj()).norm() < 1e-12);
    }

    #[test]
    fn symmetric_coin_eigenphase_relation() {
        let n = 25;
        let d = decompose(&cfg(n, CoinOperator::symmetric()));
        for block in d.blocks() {
            let theta = symmetric_coin_theta(block.k(), n);
            let [p, m] = block.phases();
            assert!((p - theta).abs() < 1e-10, "k={} {p} {theta}", block.k());
            assert!((m - (TAU - theta)).abs() < 1e-10);
        }
    }

    #[test]
    fn block_eigenpairs() {
        for coin in [
            CoinOperator::symmetric(),
            CoinOperator::hadamard(),
            CoinOperator::identity(),
        ] {
            let d = decompose(&cfg(7, coin));
            for b in d.blocks() {
                for s in 0..2 {
                    let l = b.eigenvalues()[s];
                    let v = b.eigenvectors()[s];
                    assert!((l.norm() - 1.0).abs() < 1e-12);
                    for r in 0..2 {
                        let hv = b.matrix()[r][0] * v[0] + b.matrix()[r][1] * v[1];
                        assert!((hv - l * v[r]).norm() < 1e-10);
                    }
                }
                let [v0, v1] = b.eigenvectors();
                assert!(inner(v0, v1).norm() < 1e-10);
                assert!((inner(v0, v0).re - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_convention_first_component_positive() {
        let d = decompose(&cfg(9, CoinOperator::hadamard()));
        for b in d.blocks() {
            for v in b.eigenvectors() {
                let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
                assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
            }
        }
    }

    #[test]
    fn symmetric_odd_grouping_pairs_k_with_n_minus_k() {
        let n = 25;
        let d = decompose(&cfg(n, CoinOperator::symmetric()));
        let pairs: Vec<_> = d.groups().iter().filter(|g| g.len() == 2).collect();
        let singles: Vec<_> = d.groups().iter().filter(|g| g.len() == 1).collect();
        assert_eq!(pairs.len(), n - 1);
        assert_eq!(singles.len(), 2);
        assert!(singles.iter().all(|g| g[0].k == 0));
        for g in pairs {
            assert_eq!(g[0].k + g[1].k, n);
            assert_eq!(g[0].branch, g[1].branch);
        }
    }

    #[test]
    fn identity_coin_enlarged_degeneracy() {
        // H_k = diag(e^{-iα}, e^{iα}); (k, ↑) pairs with (N-k, ↓).
        let d = decompose(&cfg(6, CoinOperator::identity()));
        let total: usize = d.groups().iter().map(Vec::len).sum();
        assert_eq!(total, 12);
        assert!(d.groups().iter().any(|g| g.len() >= 2));
    }

    #[test]
    fn closed_form_rejects_unsupported() {
        let even = cfg(6, CoinOperator::symmetric());
        assert!(matches!(
            limiting_correction_closed_form(&even, CoinState::balanced()),
            Err(Error::Unsupported(_))
        ));
        let hadamard = cfg(7, CoinOperator::hadamard());
        assert!(matches!(
            limiting_correction_closed_form(&hadamard, CoinState::balanced()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn cesaro_single_term() {
        let s = WalkerState::localized(cfg(11, CoinOperator::hadamard()), 0, CoinState::balanced()).unwrap();
        let avg = cesaro_average(&s, 1).unwrap();
        assert_eq!(avg, s.apply_step().position_distribution());
        let avg0 = cesaro_average_with(&s, 1, TimeRange::ZeroToTMinusOne).unwrap();
        assert_eq!(avg0, s.position_distribution());
        assert!(cesaro_average(&s, 0).is_err());
    }

    #[test]
    fn non_degenerate_limit_is_diagonal_sum() {
        // Hadamard on odd N has a simple spectrum: π(v) = Σ_n |a_n|² Σ_c |⟨c,v|φ_n⟩|².
        let config = cfg(9, CoinOperator::hadamard());
        let d = decompose(&config);
        assert!(d.groups().iter().all(|g| g.len() == 1));
        let s = WalkerState::localized(config, 4, CoinState::up_state()).unwrap();
        let a = d.coefficients(&s).unwrap();
        let mut diag = vec![0.0; 9];
        for k in 0..9 {
            for b in 0..2 {
                let phi = d.eigenvector(EigenIndex { k, branch: b });
                for (v, w) in position_weights(&config, &phi).into_iter().enumerate() {
                    diag[v] += a[k][b].norm_sqr() * w;
                }
            }
        }
        let pi = d.limiting_distribution(&s).unwrap();
        for (x, y) in pi.weights().iter().zip(&diag) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
