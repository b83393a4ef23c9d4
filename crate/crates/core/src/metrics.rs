//! Distribution summaries: population moments, coefficient of variation,
//! Gini index and histograms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// `std / mean`; absent when the mean is zero.
    pub cv: Option<f64>,
    pub skewness: f64,
    /// Pearson kurtosis; a normal sample gives 3.
    pub kurtosis: f64,
    /// Absent when any value is negative.
    pub gini: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Population moments and inequality of `values`.
pub fn summary(values: &[f64]) -> Result<SummaryStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain("summary", format!("non-finite value {bad}")));
    }
    let nf = n as f64;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });

    let (mean, std, skewness, kurtosis) = if is_constant(values) {
        (values[0], 0.0, 0.0, 3.0)
    } else {
        let mean = values.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        (mean, m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2))
    };
    let cv = (mean != 0.0).then(|| std / mean.abs());
    let gini = if min >= 0.0 && max > 0.0 {
        Some(gini(values)?)
    } else {
        None
    };

    Ok(SummaryStats {
        n,
        mean,
        std,
        cv,
        skewness,
        kurtosis,
        gini,
        min,
        max,
        histogram: histogram(values),
    })
}

/// Gini index via the sorted form `sum (2i - n - 1) x_(i) / (n sum x)`.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if let Some(neg) = values.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(
            "gini",
            format!("values must be finite and >= 0, got {neg}"),
        ));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::domain("gini", "all values are zero"));
    }
    if is_constant(values) {
        return Ok(0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

const MIN_BINS: usize = 30;
const MAX_BINS: usize = 500;

/// Freedman-Diaconis binning with at least 30 bins.
pub fn histogram(values: &[f64]) -> Histogram {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Histogram {
            edges: vec![lo, hi],
            counts: vec![values.len() as u64],
        };
    }
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    let fd_bins = if width > 0.0 {
        ((hi - lo) / width).ceil() as usize
    } else {
        MIN_BINS
    };
    let bins = fd_bins.clamp(MIN_BINS, MAX_BINS);
    let step = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|b| if b == bins { hi } else { lo + b as f64 * step })
        .collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = (((v - lo) / step) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Histogram { edges, counts }
}
