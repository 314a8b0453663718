use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::histogram::{histogram_dx, CoincidenceHistogram};
use super::model::CoincidenceModel;
use crate::error::{invalid, HbtError, Result};
use crate::real::Real;

/// Accepted samples per generator stream.
pub const CHUNK_SAMPLES: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProposalKind {
    /// Equal-weight mixture of the two direct Gaussian terms.
    GaussianMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig<T> {
    pub n_samples: u64,
    pub seed: u64,
    pub proposal: ProposalKind,
    pub max_rejection_factor: T,
}

impl<T: Real> SamplerConfig<T> {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        SamplerConfig {
            n_samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        if !(self.max_rejection_factor >= T::lit(2.0)) {
            return Err(invalid(
                "max_rejection_factor",
                format!(
                    "the exchange term can double the direct density, so the factor must be at least 2 (got {})",
                    self.max_rejection_factor
                ),
            ));
        }
        Ok(())
    }
}

impl<T: Real> Default for SamplerConfig<T> {
    fn default() -> Self {
        SamplerConfig {
            n_samples: 1_000_000,
            seed: 0,
            proposal: ProposalKind::GaussianMixture,
            max_rejection_factor: T::lit(2.0),
        }
    }
}

/// Accepted detector pairs in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    pub pairs: Vec<(T, T)>,
    pub proposals: u64,
}

impl<T: Real> SampleSet<T> {
    pub fn acceptance_rate(&self) -> f64 {
        self.pairs.len() as f64 / self.proposals as f64
    }

    /// Histogram of `x₁ - x₂` carrying this set's acceptance rate.
    pub fn histogram_dx(&self, bins: usize, range: (T, T)) -> Result<CoincidenceHistogram<T>> {
        let mut h = histogram_dx(&self.pairs, bins, range)?;
        h.proposals = self.proposals;
        Ok(h)
    }
}

/// Rejection-samples detector pairs from `model`.
///
/// Proposals come from the mixture of the two direct Gaussian terms and are
/// accepted with probability `interference_ratio / max_rejection_factor`.
/// The seed is expanded into one ChaCha stream per chunk of
/// [`CHUNK_SAMPLES`] accepted pairs, so the output does not depend on the
/// number of worker threads.
pub fn sample_pairs<T: Real, M: CoincidenceModel<T>>(
    model: &M,
    cfg: &SamplerConfig<T>,
) -> Result<SampleSet<T>> {
    cfg.validate()?;
    let factor = cfg.max_rejection_factor;
    let threshold = 1.0 / (10.0 * factor.as_f64());
    let chunks = cfg.n_samples.div_ceil(CHUNK_SAMPLES);
    let results: Vec<ChunkResult<T>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_SAMPLES;
            let quota = CHUNK_SAMPLES.min(cfg.n_samples - start);
            sample_chunk(model, cfg.seed, chunk, quota, factor, threshold)
        })
        .collect();

    let mut pairs = Vec::with_capacity(cfg.n_samples as usize);
    let mut proposals = 0u64;
    let mut exhausted = false;
    for r in results {
        pairs.extend(r.pairs);
        proposals += r.proposals;
        exhausted |= r.exhausted;
    }
    let acceptance = pairs.len() as f64 / proposals as f64;
    if exhausted || acceptance < threshold {
        return Err(HbtError::EnvelopeFailure {
            acceptance,
            threshold,
            proposals,
        });
    }
    Ok(SampleSet { pairs, proposals })
}

struct ChunkResult<T> {
    pairs: Vec<(T, T)>,
    proposals: u64,
    exhausted: bool,
}

fn sample_chunk<T: Real, M: CoincidenceModel<T>>(
    model: &M,
    seed: u64,
    chunk: u64,
    quota: u64,
    factor: T,
    threshold: f64,
) -> ChunkResult<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let g = model.proposal();
    let half = T::lit(0.5);
    // far more proposals than an envelope at the failure threshold would need
    let budget = (4.0 * quota as f64 / threshold) as u64 + 1000;
    let mut pairs = Vec::with_capacity(quota as usize);
    let mut proposals = 0u64;
    while (pairs.len() as u64) < quota {
        if proposals >= budget {
            return ChunkResult {
                pairs,
                proposals,
                exhausted: true,
            };
        }
        proposals += 1;
        let s = g.s_std * T::sample_standard_normal(&mut rng);
        let centered = g.d_std * T::sample_standard_normal(&mut rng);
        let d = if T::sample_unit(&mut rng) < half {
            centered + g.d_offset
        } else {
            centered - g.d_offset
        };
        let u = T::sample_unit(&mut rng);
        let (x1, x2) = (half * (s + d), half * (s - d));
        let ratio = model.interference_ratio(x1, x2);
        debug_assert!(
            ratio <= factor * T::lit(1.0 + 1e-12),
            "density exceeds the proposal envelope at ({x1}, {x2}): ratio {ratio}"
        );
        if u * factor < ratio {
            pairs.push((x1, x2));
        }
    }
    ChunkResult {
        pairs,
        proposals,
        exhausted: false,
    }
}
