use serde::Serialize;

use super::model::CoincidenceModel;
use crate::error::{HbtError, Result};
use crate::real::Real;

pub const MIN_BINS: usize = 8;
pub const DEFAULT_BINS: usize = 128;
/// Default half-range in units of the marginal's direct-term width.
pub const DEFAULT_RANGE_WIDTHS: f64 = 4.0;

/// Coincidence counts binned in `x₁ - x₂`. Bins are half-open `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceHistogram<T> {
    pub bin_edges: Vec<T>,
    pub counts: Vec<u64>,
    /// Sum of `counts`.
    pub n_total: u64,
    pub underflow: u64,
    pub overflow: u64,
    /// Proposals spent to produce the samples; equals the sample count for
    /// data that did not come from the rejection sampler.
    pub proposals: u64,
}

impl<T: Real> CoincidenceHistogram<T> {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Every sample seen, including those outside the range.
    pub fn n_samples(&self) -> u64 {
        self.n_total + self.underflow + self.overflow
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.n_samples() as f64 / self.proposals as f64
    }

    pub fn range(&self) -> (T, T) {
        (self.bin_edges[0], self.bin_edges[self.bins()])
    }

    pub fn bin_width(&self) -> T {
        let (lo, hi) = self.range();
        (hi - lo) / T::from_usize(self.bins()).unwrap()
    }

    pub fn bin_centers(&self) -> Vec<T> {
        self.bin_edges
            .windows(2)
            .map(|w| T::lit(0.5) * (w[0] + w[1]))
            .collect()
    }

    /// Adds another histogram with identical edges.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bin_edges != other.bin_edges {
            return Err(HbtError::InvalidArgument(
                "cannot merge histograms with different bin edges".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n_total += other.n_total;
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.proposals += other.proposals;
        Ok(())
    }

    /// Expected counts per bin for `n_samples` draws from `model`.
    pub fn expected_counts<M: CoincidenceModel<T>>(&self, model: &M) -> Vec<T> {
        let shape = model.marginal();
        let norm = T::from_u64(self.n_samples()).unwrap() / shape.integral();
        self.bin_edges
            .windows(2)
            .map(|w| norm * shape.bin_integral(w[0], w[1]))
            .collect()
    }
}

/// Default symmetric range: four widths of the direct-term marginal,
/// `√(d_std² + d_offset²)`, on each side of zero.
pub fn default_range<T: Real, M: CoincidenceModel<T>>(model: &M) -> (T, T) {
    let g = model.proposal();
    let half = T::lit(DEFAULT_RANGE_WIDTHS) * (g.d_std * g.d_std + g.d_offset * g.d_offset).sqrt();
    (-half, half)
}

/// Bins `x₁ - x₂` over `range` into `bins` equal bins.
pub fn histogram_dx<T: Real>(
    samples: &[(T, T)],
    bins: usize,
    range: (T, T),
) -> Result<CoincidenceHistogram<T>> {
    if bins < MIN_BINS {
        return Err(HbtError::InvalidArgument(format!(
            "at least {MIN_BINS} bins required, got {bins}"
        )));
    }
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(HbtError::InvalidArgument(format!(
            "invalid histogram range ({lo}, {hi})"
        )));
    }
    if samples.is_empty() {
        return Err(HbtError::EmptySamples);
    }
    let nb = T::from_usize(bins).unwrap();
    let width = (hi - lo) / nb;
    let bin_edges: Vec<T> = (0..=bins)
        .map(|j| {
            if j == bins {
                hi
            } else {
                lo + width * T::from_usize(j).unwrap()
            }
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let (mut underflow, mut overflow) = (0u64, 0u64);
    for &(x1, x2) in samples {
        let d = x1 - x2;
        if d < lo {
            underflow += 1;
        } else if d >= hi {
            overflow += 1;
        } else {
            let mut j = ((d - lo) / width)
                .floor()
                .to_usize()
                .unwrap_or(0)
                .min(bins - 1);
            // keep floating rounding consistent with the stored edges
            if d < bin_edges[j] {
                j -= 1;
            } else if d >= bin_edges[j + 1] {
                j += 1;
            }
            counts[j] += 1;
        }
    }
    Ok(CoincidenceHistogram {
        n_total: counts.iter().sum(),
        bin_edges,
        counts,
        underflow,
        overflow,
        proposals: samples.len() as u64,
    })
}
