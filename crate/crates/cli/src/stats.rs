// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Order statistics over run timings.

use serde::{Deserialize, Serialize};

/// Percentile `p` in `[0, 100]` of sorted samples, interpolating linearly
/// between closest ranks.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of no samples");
    let pos = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub median: f64,
    pub mean: f64,
    pub p1: f64,
    pub p99: f64,
    /// `(p99 - p1) / p1`
    pub spread: f64,
}

impl Stats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let p1 = percentile(&sorted, 1.0);
        let p99 = percentile(&sorted, 99.0);
        Self {
            n: sorted.len(),
            median: percentile(&sorted, 50.0),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p1,
            p99,
            spread: if p1 > 0.0 { (p99 - p1) / p1 } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_between_ranks() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&s, 0.0), 1.0);
        assert_eq!(percentile(&s, 100.0), 4.0);
        assert_eq!(percentile(&s, 50.0), 2.5);
        // rank 0.03 of 3 intervals
        assert!((percentile(&s, 1.0) - 1.03).abs() < 1e-12);
        assert!((percentile(&s, 99.0) - 3.97).abs() < 1e-12);
        assert_eq!(percentile(&[5.0], 99.0), 5.0);
    }

    #[test]
    fn summary_of_unsorted_samples() {
        let st = Stats::from_samples(&[3.0, 1.0, 2.0]);
        assert_eq!(st.median, 2.0);
        assert_eq!(st.mean, 2.0);
        assert_eq!(st.n, 3);
        assert!((st.spread - (2.98 - 1.02) / 1.02).abs() < 1e-12);
    }
}
