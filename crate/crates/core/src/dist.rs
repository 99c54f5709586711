use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries down to this negative value are treated as round-off and clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-12;

/// Allowed deviation of the total mass from one.
pub const SUM_TOL: f64 = 1e-10;

/// A probability vector over the cycle vertices `0..N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("distribution must have at least one entry"));
        }
        for (x, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::validation(format!("weight at {x} is not finite")));
            }
            if *w < -NEGATIVE_TOL {
                return Err(Error::validation(format!("weight at {x} is negative: {w:e}")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::validation(format!(
                "weights sum to {total}, expected 1 within {SUM_TOL:e}"
            )));
        }
        Ok(Self { weights })
    }

    /// Normalizes non-negative counts into a distribution.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::validation("cannot normalize all-zero counts"));
        }
        let total = total as f64;
        Self::new(counts.iter().map(|&c| c as f64 / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs n > 0");
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::Index {
                what: "vertex",
                index: at,
                len: n,
            });
        }
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Ok(Self { weights })
    }

    /// Mean of several distributions on the same support size.
    pub fn mean<'a>(dists: impl IntoIterator<Item = &'a ProbDist>) -> Result<Self> {
        let mut acc: Option<Vec<f64>> = None;
        let mut count = 0usize;
        for d in dists {
            let a = acc.get_or_insert_with(|| vec![0.0; d.len()]);
            if a.len() != d.len() {
                return Err(Error::validation("cannot average distributions of different sizes"));
            }
            for (s, w) in a.iter_mut().zip(&d.weights) {
                *s += w;
            }
            count += 1;
        }
        let acc = acc.ok_or_else(|| Error::validation("mean of zero distributions"))?;
        Self::new(acc.into_iter().map(|s| s / count as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    /// `result[x] = self[(x - d) mod N]`: the distribution moved `d` sites clockwise.
    pub fn shifted(&self, d: usize) -> Self {
        let n = self.len();
        let d = d % n;
        let weights = (0..n).map(|x| self.weights[(x + n - d) % n]).collect();
        Self { weights }
    }

    /// Vertices with weight above `epsilon`.
    pub fn support(&self, epsilon: f64) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > epsilon)
            .map(|(x, _)| x)
            .collect()
    }
}

impl<'de> Deserialize<'de> for ProbDist {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<f64>::deserialize(deserializer)?;
        ProbDist::new(weights).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_round_off_negatives() {
        let p = ProbDist::new(vec![0.5 + 1e-13, -1e-13, 0.5]).unwrap();
        assert_eq!(p.get(1), 0.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(ProbDist::new(vec![]).is_err());
        assert!(ProbDist::new(vec![0.6, 0.6]).is_err());
        assert!(ProbDist::new(vec![1.1, -0.1]).is_err());
        assert!(ProbDist::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbDist::from_counts(&[0, 0]).is_err());
        assert!(ProbDist::point_mass(3, 3).is_err());
    }

    #[test]
    fn shift_moves_mass_clockwise() {
        let p = ProbDist::point_mass(5, 4).unwrap().shifted(3);
        assert_eq!(p.get(2), 1.0);
    }

    #[test]
    fn json_deserialization_validates() {
        let p: ProbDist = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(p.weights(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<ProbDist>("[0.25,0.25]").is_err());
    }
}
