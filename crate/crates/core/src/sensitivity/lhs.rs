//! Latin hypercube designs driven by a seeded ChaCha8 generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

impl ParamRange {
    pub fn new(name: impl Into<String>, low: f64, high: f64) -> Self {
        ParamRange {
            name: name.into(),
            low,
            high,
        }
    }
}

/// `samples[i][j]` is parameter `j` in sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsDesign {
    pub ranges: Vec<ParamRange>,
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
}

impl LhsDesign {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|row| row[j]).collect()
    }
}

/// Draws `n` samples such that each parameter has exactly one value in each
/// of the `n` equal-width strata of its range.
pub fn lhs_sample(ranges: &[ParamRange], n: usize, seed: u64) -> Result<LhsDesign> {
    if n < 2 {
        return Err(Error::Config(format!("latin hypercube needs n >= 2, got {n}")));
    }
    for r in ranges {
        if !(r.low.is_finite() && r.high.is_finite() && r.low < r.high) {
            return Err(Error::InvalidRange {
                name: r.name.clone(),
                low: r.low,
                high: r.high,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![vec![0.0; ranges.len()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for (j, r) in ranges.iter().enumerate() {
        strata.shuffle(&mut rng);
        let width = (r.high - r.low) / n as f64;
        for (row, &k) in samples.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            row[j] = r.low + (k as f64 + u) * width;
        }
    }
    Ok(LhsDesign {
        ranges: ranges.to_vec(),
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sample_per_stratum() {
        let d = lhs_sample(&[ParamRange::new("x", 0.0, 1.0)], 4, 7).unwrap();
        let mut col = d.column(0);
        col.sort_by(f64::total_cmp);
        for (k, v) in col.iter().enumerate() {
            assert!(*v >= k as f64 * 0.25 && *v < (k + 1) as f64 * 0.25 + 1e-15, "{col:?}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let ranges = [ParamRange::new("a", -1.0, 3.0), ParamRange::new("b", 10.0, 20.0)];
        assert_eq!(
            lhs_sample(&ranges, 50, 42).unwrap(),
            lhs_sample(&ranges, 50, 42).unwrap()
        );
        assert_ne!(
            lhs_sample(&ranges, 50, 42).unwrap(),
            lhs_sample(&ranges, 50, 43).unwrap()
        );
    }

    #[test]
    fn mean_near_midpoint() {
        let ranges = [ParamRange::new("a", 2.0, 6.0), ParamRange::new("b", 0.0, 0.1)];
        let d = lhs_sample(&ranges, 1000, 1).unwrap();
        for (j, r) in ranges.iter().enumerate() {
            let col = d.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let mid = (r.low + r.high) / 2.0;
            assert!((mean - mid).abs() < 0.02 * mid, "{mean} vs {mid}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            lhs_sample(&[ParamRange::new("x", 1.0, 1.0)], 10, 0),
            Err(Error::InvalidRange { .. })
        ));
        assert!(lhs_sample(&[ParamRange::new("x", 0.0, 1.0)], 1, 0).is_err());
    }
}
