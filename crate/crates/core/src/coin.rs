//! Coin operators and coin states.
//!
//! The coin space uses the ordered basis (|↑⟩, |↓⟩); index 0 is ↑ and
//! index 1 is ↓ everywhere in the crate.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Maximum entry of `C†C − I` accepted for a coin operator.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Tolerance on `|up|² + |down|² − 1` for a coin state.
pub const COIN_STATE_TOL: f64 = 1e-12;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry of `M†M − I` in absolute value.
pub fn unitarity_defect(m: &Mat2) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                acc += m[k][i].conj() * m[k][j];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Named families of coins recognised by [`CoinOperator::kind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoinKind {
    /// `(I + iσ₁)/√2`.
    Symmetric,
    /// `(σ₁ + σ₃)/√2`.
    Hadamard,
    Custom,
}

/// A 2×2 unitary acting on the walker's coin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinOperator {
    entries: Mat2,
}

impl CoinOperator {
    /// Validates unitarity to [`UNITARITY_TOL`].
    pub fn new(entries: Mat2) -> Result<Self> {
        if entries.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("coin entries must be finite"));
        }
        let defect = unitarity_defect(&entries);
        if defect > UNITARITY_TOL {
            return Err(Error::validation(format!(
                "coin is not unitary: max |C†C - I| = {defect:e} > {UNITARITY_TOL:e}"
            )));
        }
        Ok(Self { entries })
    }

    /// The unbiased coin `(I + iσ₁)/√2 = [[1, i], [i, 1]]/√2`.
    pub fn symmetric() -> Self {
        let s = FRAC_1_SQRT_2;
        Self {
            entries: [[c(s, 0.0), c(0.0, s)], [c(0.0, s), c(s, 0.0)]],
        }
    }

    /// The Hadamard coin `(σ₁ + σ₃)/√2 = [[1, 1], [1, -1]]/√2`.
    pub fn hadamard() -> Self {
        let s = FRAC_1_SQRT_2;
        Self {
            entries: [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        }
    }

    pub fn identity() -> Self {
        Self {
            entries: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        }
    }

    pub fn entries(&self) -> &Mat2 {
        &self.entries
    }

    #[inline]
    pub fn apply(&self, up: Complex64, down: Complex64) -> (Complex64, Complex64) {
        let m = &self.entries;
        (m[0][0] * up + m[0][1] * down, m[1][0] * up + m[1][1] * down)
    }

    /// Identifies the named coin this operator equals (entrywise to 1e-12).
    pub fn kind(&self) -> CoinKind {
        let close = |other: &CoinOperator| {
            self.entries
                .iter()
                .flatten()
                .zip(other.entries.iter().flatten())
                .all(|(a, b)| (a - b).norm() <= 1e-12)
        };
        if close(&Self::symmetric()) {
            CoinKind::Symmetric
        } else if close(&Self::hadamard()) {
            CoinKind::Hadamard
        } else {
            CoinKind::Custom
        }
    }
}

/// Text form used on the command line and in sequence metadata:
/// `symmetric`, `hadamard`, or `custom:` followed by eight comma-separated
/// floats `re00,im00,re01,im01,re10,im10,re11,im11` (row-major).
impl fmt::Display for CoinOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            CoinKind::Symmetric => f.write_str("symmetric"),
            CoinKind::Hadamard => f.write_str("hadamard"),
            CoinKind::Custom => {
                let parts: Vec<String> = self
                    .entries
                    .iter()
                    .flatten()
                    .flat_map(|z| [crate::io::fmt_f64(z.re), crate::io::fmt_f64(z.im)])
                    .collect();
                write!(f, "custom:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for CoinOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "symmetric" => Ok(Self::symmetric()),
            "hadamard" => Ok(Self::hadamard()),
            other => {
                let Some(rest) = other.strip_prefix("custom:") else {
                    return Err(Error::validation(format!(
                        "unknown coin '{other}' (expected symmetric, hadamard or custom:<8 floats>)"
                    )));
                };
                let v = parse_floats(rest, 8, "custom coin")?;
                Self::new([[c(v[0], v[1]), c(v[2], v[3])], [c(v[4], v[5]), c(v[6], v[7])]])
            }
        }
    }
}

pub(crate) fn parse_floats(s: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::validation(format!("{what}: {e}")))?;
    if values.len() != expected {
        return Err(Error::validation(format!(
            "{what}: expected {expected} comma-separated numbers, got {}",
            values.len()
        )));
    }
    Ok(values)
}

/// A normalized coin state `up|↑⟩ + down|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinState {
    up: Complex64,
    down: Complex64,
}

impl CoinState {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm_sqr = up.norm_sqr() + down.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > COIN_STATE_TOL {
            return Err(Error::validation(format!(
                "coin state must be normalized: |up|^2 + |down|^2 = {norm_sqr}"
            )));
        }
        Ok(Self { up, down })
    }

    /// `(|↑⟩ + |↓⟩)/√2`, the reset coin of the measure-and-reset protocol.
    pub fn balanced() -> Self {
        Self {
            up: c(FRAC_1_SQRT_2, 0.0),
            down: c(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn up_state() -> Self {
        Self {
            up: c(1.0, 0.0),
            down: c(0.0, 0.0),
        }
    }

    pub fn down_state() -> Self {
        Self {
            up: c(0.0, 0.0),
            down: c(1.0, 0.0),
        }
    }

    pub fn up(&self) -> Complex64 {
        self.up
    }

    pub fn down(&self) -> Complex64 {
        self.down
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.up, self.down]
    }
}

/// `re_up,im_up,re_down,im_down`.
impl fmt::Display for CoinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::io::fmt_f64;
        write!(
            f,
            "{},{},{},{}",
            fmt_f64(self.up.re),
            fmt_f64(self.up.im),
            fmt_f64(self.down.re),
            fmt_f64(self.down.im)
        )
    }
}

impl FromStr for CoinState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = parse_floats(s, 4, "coin state")?;
        Self::new(c(v[0], v[1]), c(v[2], v[3]))
    }
}
