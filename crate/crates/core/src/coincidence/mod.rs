//! Monte Carlo coincidence counting: rejection sampling of detector pairs,
//! histograms in `x₁ - x₂`, and fringe fits.

mod fit;
mod histogram;
mod model;
mod sampler;

pub use fit::{
    fit_fringes, FringeFit, FringeModel, MIN_FIT_COUNTS, MIN_PERIODS, VISIBILITY_TOLERANCE,
};
pub use histogram::{
    default_range, histogram_dx, CoincidenceHistogram, DEFAULT_BINS, DEFAULT_RANGE_WIDTHS, MIN_BINS,
};
pub use model::{CoincidenceModel, GaussianMixture, MarginalShape};
pub use sampler::{sample_pairs, ProposalKind, SampleSet, SamplerConfig, CHUNK_SAMPLES};
