//! Chi-square goodness-of-fit helpers.

use std::collections::BTreeMap;
use std::hash::Hash;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A chi-square statistic with its degrees of freedom and upper-tail
/// p-value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquare {
    fn new(statistic: f64, dof: usize) -> ChiSquare {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .map(|d| d.sf(statistic))
                .unwrap_or(f64::NAN)
        };
        ChiSquare {
            statistic,
            dof,
            p_value,
        }
    }

    /// Upper-tail test at level `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }

    /// Two-sided test at level `alpha`.
    pub fn passes_two_sided(&self, alpha: f64) -> bool {
        self.p_value >= alpha / 2.0 && self.p_value <= 1.0 - alpha / 2.0
    }
}

/// Goodness of fit of `counts` against probabilities `probs`.
pub fn chi_square_expected(counts: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let stat = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    ChiSquare::new(stat, counts.len().saturating_sub(1))
}

/// Goodness of fit of `counts` against the uniform law on its cells.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquare {
    let p = 1.0 / counts.len() as f64;
    chi_square_expected(counts, &vec![p; counts.len()])
}

/// Homogeneity of two samples over the same cells; cells empty in both are
/// dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let t = (x + y) as f64;
        if t == 0.0 {
            continue;
        }
        cells += 1;
        let ea = t * na / (na + nb);
        let eb = t * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    ChiSquare::new(stat, cells.saturating_sub(1))
}

/// Tally observations and align two tallies on the union of their keys.
pub fn aligned_counts<K: Ord + Clone + Hash>(a: &[K], b: &[K]) -> (Vec<u64>, Vec<u64>) {
    let mut m: BTreeMap<K, (u64, u64)> = BTreeMap::new();
    for x in a {
        m.entry(x.clone()).or_default().0 += 1;
    }
    for x in b {
        m.entry(x.clone()).or_default().1 += 1;
    }
    m.into_values().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_pass() {
        let c = chi_square_uniform(&[100, 100, 100, 100]);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.dof, 3);
        assert!(c.passes(1e-3));
        let bad = chi_square_uniform(&[400, 0, 0, 0]);
        assert!(!bad.passes(1e-3));
    }

    #[test]
    fn p_value_matches_table() {
        // 95th percentile of chi-square with 10 dof is 18.307
        let c = ChiSquare::new(18.307, 10);
        assert!((c.p_value - 0.05).abs() < 1e-4);
    }

    #[test]
    fn two_sample_alignment() {
        let (a, b) = aligned_counts(&["x", "y", "y"], &["y", "z"]);
        assert_eq!(a, vec![1, 2, 0]);
        assert_eq!(b, vec![0, 1, 1]);
        let c = chi_square_two_sample(&[50, 50], &[50, 50]);
        assert_eq!(c.statistic, 0.0);
    }
}
