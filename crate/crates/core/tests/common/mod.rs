//! Independent oracles and property runners shared by the integration tests
//! and the acceptance binary.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};

use qwalk::analysis::fourier_coefficients;
use qwalk::cli;
use qwalk::protocols::{convolve, transition_kernel};
use qwalk::{CoinOperator, CoinState, CycleConfig, ProbDist, WalkerState};

// ------------------------------------------------------------------ oracles

/// Dense 2N×2N step matrix written out from the definition: coin on the
/// internal state, then ↑ moves to x+1 and ↓ to x−1. Coin-major indexing.
pub fn dense_step(n: usize, coin: &CoinOperator) -> DMatrix<Complex64> {
    let c = coin.entries();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for x in 0..n {
        for cin in 0..2 {
            for cout in 0..2 {
                let target = if cout == 0 { (x + 1) % n } else { (x + n - 1) % n };
                m[(cout * n + target, cin * n + x)] += c[cout][cin];
            }
        }
    }
    m
}

/// `U^t ψ` by repeated squaring.
pub fn dense_evolve(u: &DMatrix<Complex64>, psi: &[Complex64], t: u64) -> Vec<Complex64> {
    let mut base = u.clone();
    let mut acc = DVector::from_column_slice(psi);
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            acc = &base * acc;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc.iter().copied().collect()
}

pub fn max_amplitude_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Circulant matrix `M[x][j] = μ(x − j)`, so `M^{n−1} μ = μ^⋆n`.
pub fn circulant(mu: &[f64]) -> DMatrix<f64> {
    let n = mu.len();
    DMatrix::from_fn(n, n, |x, j| mu[(x + n - j) % n])
}

pub fn circulant_powers(mu: &[f64], max_n: usize) -> Vec<Vec<f64>> {
    let m = circulant(mu);
    let mut cur = DVector::from_column_slice(mu);
    let mut out = vec![cur.iter().copied().collect()];
    for _ in 1..max_n {
        cur = &m * cur;
        out.push(cur.iter().copied().collect());
    }
    out
}

pub fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// --------------------------------------------------------------- strategies

/// `e^{iα} [[e^{iβ}cos θ, e^{iγ}sin θ], [−e^{−iγ}sin θ, e^{−iβ}cos θ]]`.
pub fn coin_strategy() -> impl Strategy<Value = CoinOperator> {
    let angle = -std::f64::consts::PI..std::f64::consts::PI;
    (angle.clone(), angle.clone(), angle.clone(), angle).prop_map(|(a, b, g, th)| {
        let ph = Complex64::from_polar(1.0, a);
        let m = [
            [
                ph * Complex64::from_polar(th.cos(), b),
                ph * Complex64::from_polar(th.sin(), g),
            ],
            [
                -ph * Complex64::from_polar(th.sin(), -g),
                ph * Complex64::from_polar(th.cos(), -b),
            ],
        ];
        CoinOperator::new(m).expect("constructed unitary")
    })
}

pub fn coin_state_strategy() -> impl Strategy<Value = CoinState> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            CoinState::new(
                Complex64::new(v[0] / norm, v[1] / norm),
                Complex64::new(v[2] / norm, v[3] / norm),
            )
            .expect("normalized")
        })
}

pub fn dist_strategy(n: usize) -> impl Strategy<Value = ProbDist> {
    prop::collection::vec(0.0f64..1.0, n)
        .prop_filter("non-zero mass", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| {
            let s: f64 = w.iter().sum();
            ProbDist::new(w.into_iter().map(|x| x / s).collect()).expect("normalized")
        })
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

// --------------------------------------------------------------- properties

pub fn prop_unitarity_drift(cases: u32) -> Result<(), String> {
    let strat = (
        3usize..40,
        coin_strategy(),
        coin_state_strategy(),
        0usize..40,
        0usize..=10_000,
    );
    finish(runner(cases).run(&strat, |(n, coin, c0, x0, t)| {
        let config = CycleConfig::new(n, coin).unwrap();
        let s = WalkerState::localized(config, x0 % n, c0).unwrap().evolve(t);
        let drift = (s.norm() - 1.0).abs();
        check(drift <= 1e-8, || format!("N={n} t={t}: drift {drift:e}"))
    }))
}

pub fn prop_probdist_validity(cases: u32) -> Result<(), String> {
    let strat = (3usize..40, coin_strategy(), coin_state_strategy(), 0usize..2000);
    finish(runner(cases).run(&strat, |(n, coin, c0, t)| {
        let config = CycleConfig::new(n, coin).unwrap();
        let p = WalkerState::localized(config, 0, c0)
            .unwrap()
            .evolve(t)
            .position_distribution();
        let sum: f64 = p.weights().iter().sum();
        check(p.len() == n, || "wrong length".into())?;
        check(p.weights().iter().all(|&w| w >= 0.0), || "negative weight".into())?;
        check((sum - 1.0).abs() <= 1e-10, || format!("sum {sum}"))?;
        // Re-validation of the emitted weights must succeed.
        check(ProbDist::new(p.weights().to_vec()).is_ok(), || {
            "re-validation failed".into()
        })?;
        // Perturbations beyond tolerance are rejected.
        let mut bad = p.weights().to_vec();
        bad[0] += 1e-6;
        check(ProbDist::new(bad).is_err(), || "mass defect accepted".into())?;
        // Same total mass, one weight pushed below zero.
        let mut neg = p.weights().to_vec();
        neg[0] += neg[1] + 1e-6;
        neg[1] = -1e-6;
        check(ProbDist::new(neg).is_err(), || "negative weight accepted".into())
    }))
}

pub fn prop_translation_covariance(cases: u32) -> Result<(), String> {
    let strat = (
        3usize..40,
        coin_strategy(),
        coin_state_strategy(),
        0usize..40,
        0usize..40,
        0usize..300,
    );
    finish(runner(cases).run(&strat, |(n, coin, c0, x0, d, t)| {
        let config = CycleConfig::new(n, coin).unwrap();
        let (x0, d) = (x0 % n, d % n);
        let base = WalkerState::localized(config, x0, c0)
            .unwrap()
            .evolve(t)
            .position_distribution();
        let moved = WalkerState::localized(config, (x0 + d) % n, c0)
            .unwrap()
            .evolve(t)
            .position_distribution();
        let gap = max_abs_gap(moved.weights(), base.shifted(d).weights());
        check(gap <= 1e-12, || format!("N={n} d={d} t={t}: gap {gap:e}"))
    }))
}

pub fn prop_parity_even_n(cases: u32) -> Result<(), String> {
    let strat = (2usize..20, coin_strategy(), coin_state_strategy(), 0usize..400);
    finish(runner(cases).run(&strat, |(half, coin, c0, t)| {
        let n = 2 * half;
        let config = CycleConfig::new(n, coin).unwrap();
        let p = WalkerState::localized(config, 0, c0)
            .unwrap()
            .evolve(t)
            .position_distribution();
        for (x, &w) in p.weights().iter().enumerate() {
            check(x % 2 == t % 2 || w == 0.0, || {
                format!("N={n} t={t}: mass {w:e} at x={x}")
            })?;
        }
        Ok(())
    }))
}

pub fn prop_reflection_symmetry(cases: u32) -> Result<(), String> {
    let strat = (3usize..50, 0usize..1000);
    finish(runner(cases).run(&strat, |(n, t)| {
        let config = CycleConfig::new(n, CoinOperator::symmetric()).unwrap();
        let p = WalkerState::localized(config, 0, CoinState::balanced())
            .unwrap()
            .evolve(t)
            .position_distribution();
        for x in 1..n {
            let gap = (p.get(x) - p.get(n - x)).abs();
            check(gap <= 1e-10, || format!("N={n} t={t} x={x}: gap {gap:e}"))?;
        }
        if t >= 1 {
            let mu = transition_kernel(&config, t, CoinState::balanced()).unwrap();
            for x in 1..n {
                let gap = (mu.mu().get(x) - mu.mu().get(n - x)).abs();
                check(gap <= 1e-10, || format!("kernel N={n} m={t} x={x}: gap {gap:e}"))?;
            }
        }
        Ok(())
    }))
}

pub fn prop_convolution_algebra(cases: u32) -> Result<(), String> {
    let strat = (3usize..24).prop_flat_map(|n| (dist_strategy(n), dist_strategy(n), dist_strategy(n)));
    finish(runner(cases).run(&strat, |(p, q, r)| {
        let n = p.len();
        let delta = ProbDist::point_mass(n, 0).unwrap();
        let pq = convolve(&p, &q).unwrap();
        let qp = convolve(&q, &p).unwrap();
        check(
            max_abs_gap(convolve(&p, &delta).unwrap().weights(), p.weights()) <= 1e-15,
            || "identity".into(),
        )?;
        check(max_abs_gap(pq.weights(), qp.weights()) <= 1e-12, || {
            "commutativity".into()
        })?;
        let left = convolve(&pq, &r).unwrap();
        let right = convolve(&p, &convolve(&q, &r).unwrap()).unwrap();
        check(max_abs_gap(left.weights(), right.weights()) <= 1e-12, || {
            "associativity".into()
        })?;
        let (fp, fq, fpq) = (
            fourier_coefficients(&p),
            fourier_coefficients(&q),
            fourier_coefficients(&pq),
        );
        for k in 0..n {
            let gap = (fpq.coefficients()[k] - fp.coefficients()[k] * fq.coefficients()[k]).norm();
            check(gap <= 1e-10, || format!("Fourier factorization k={k}: {gap:e}"))?;
        }
        Ok(())
    }))
}

#[derive(Clone, Debug)]
pub enum ManifestCase {
    Sample {
        protocol: &'static str,
        n: usize,
        time: usize,
        samples: usize,
        seed: u64,
        json: bool,
    },
    Kernel {
        n: usize,
        m: usize,
        json: bool,
    },
    Scan {
        n: usize,
        t: usize,
        cesaro: bool,
        json: bool,
    },
    Spectrum {
        n: usize,
        hadamard: bool,
        json: bool,
    },
}

impl ManifestCase {
    fn argv(&self, out: &str) -> Vec<String> {
        let fmt = |json: bool| if json { "json" } else { "csv" }.to_string();
        let mut v: Vec<String> = match self {
            ManifestCase::Sample {
                protocol,
                n,
                time,
                samples,
                seed,
                json,
            } => {
                let flag = if protocol.starts_with("reset") {
                    "--steps"
                } else {
                    "--t-max"
                };
                vec![
                    "sample".into(),
                    protocol.to_string(),
                    "--nodes".into(),
                    n.to_string(),
                    flag.into(),
                    time.to_string(),
                    "--samples".into(),
                    samples.to_string(),
                    "--seed".into(),
                    seed.to_string(),
                    "--format".into(),
                    fmt(*json),
                ]
            }
            ManifestCase::Kernel { n, m, json } => vec![
                "kernel".into(),
                "--nodes".into(),
                n.to_string(),
                "--steps".into(),
                m.to_string(),
                "--ds-max".into(),
                "20".into(),
                "--format".into(),
                fmt(*json),
            ],
            ManifestCase::Scan { n, t, cesaro, json } => vec![
                "scan".into(),
                "--nodes".into(),
                n.to_string(),
                "--t-max".into(),
                t.to_string(),
                "--mode".into(),
                if *cesaro { "cesaro" } else { "direct" }.into(),
                "--format".into(),
                fmt(*json),
            ],
            ManifestCase::Spectrum { n, hadamard, json } => vec![
                "spectrum".into(),
                "--nodes".into(),
                n.to_string(),
                "--coin".into(),
                if *hadamard { "hadamard" } else { "symmetric" }.into(),
                "--format".into(),
                fmt(*json),
            ],
        };
        v.insert(0, "qwalk".into());
        v.push("--out".into());
        v.push(out.into());
        v
    }
}

pub fn manifest_case_strategy() -> impl Strategy<Value = ManifestCase> {
    prop_oneof![
        (
            prop::sample::select(vec!["direct", "cesaro", "reset", "reset-uniform"]),
            3usize..30,
            1usize..60,
            1usize..500,
            any::<u64>(),
            any::<bool>()
        )
            .prop_map(|(protocol, n, time, samples, seed, json)| ManifestCase::Sample {
                protocol,
                n,
                time,
                samples,
                seed,
                json
            }),
        (3usize..30, 1usize..60, any::<bool>()).prop_map(|(n, m, json)| ManifestCase::Kernel { n, m, json }),
        (3usize..30, 1usize..80, any::<bool>(), any::<bool>()).prop_map(|(n, t, cesaro, json)| ManifestCase::Scan {
            n,
            t,
            cesaro,
            json
        }),
        (3usize..30, any::<bool>(), any::<bool>()).prop_map(|(n, hadamard, json)| ManifestCase::Spectrum {
            n,
            hadamard,
            json
        }),
    ]
}

/// Runs each case with `--out`, replays its manifest into a second file and
/// compares the bytes.
pub fn prop_manifest_reproducibility(cases: u32) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = dir.path().join("first.out");
    let second = dir.path().join("second.out");
    finish(runner(cases).run(&manifest_case_strategy(), |case| {
        cli::run(case.argv(first.to_str().unwrap())).map_err(|e| TestCaseError::fail(format!("{case:?}: {e}")))?;
        let manifest = cli::manifest_path(&first);
        cli::run([
            "qwalk",
            "replay",
            manifest.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ])
        .map_err(|e| TestCaseError::fail(format!("replay {case:?}: {e}")))?;
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        check(a == b, || format!("{case:?}: replay output differs"))
    }))
}
