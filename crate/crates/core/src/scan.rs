//! Deciding whether a sampled quantity stays bounded as the scan parameter
//! approaches the boundary.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Values above this are treated as infinite.
pub const BLOWUP: f64 = 1e9;
/// Allowed growth of the running maximum over the last quartile.
pub const STABLE_GROWTH: f64 = 0.05;

/// Classify a series ordered towards the boundary.
///
/// Unbounded if any value is non-finite or exceeds [`BLOWUP`]; Bounded if the
/// running maximum grows by at most 5% over the last quartile; Unbounded if the
/// last quartile is strictly increasing; Inconclusive otherwise.
pub fn classify(values: &[f64]) -> ScanVerdict {
    if values.is_empty() {
        return ScanVerdict::Inconclusive;
    }
    if values.iter().any(|v| !v.is_finite() || *v > BLOWUP) {
        return ScanVerdict::Unbounded;
    }
    let n = values.len();
    let q = (n / 4).max(2).min(n);
    let start = n - q;
    let before = values[..=start].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let after = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if after <= before * (1.0 + STABLE_GROWTH) || after <= 0.0 {
        return ScanVerdict::Bounded;
    }
    if values[start..].windows(2).all(|w| w[1] > w[0]) {
        return ScanVerdict::Unbounded;
    }
    ScanVerdict::Inconclusive
}

/// Running maximum of a series.
pub fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}
