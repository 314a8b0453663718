//! Two-particle interference in the Hanbury Brown–Twiss setting.
//!
//! The crate covers the classical two-source intensity correlation, label-free
//! states of identical particles, freely spreading Gaussian wave packets,
//! momentum-entangled pairs, and a Monte Carlo coincidence counter that
//! measures fringe period and visibility from sampled detector pairs.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*F64` aliases are the usual entry points.
//! Units are natural, `ħ = m = 1`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod coincidence;
pub mod epr;
pub mod error;
pub mod exchange;
pub mod labelfree;
pub mod real;
pub mod spectral;
pub mod wavepacket;

pub use classical::{ClassicalParams, McEstimate, PathLengths, PhaseMode};
pub use coincidence::{
    fit_fringes, histogram_dx, sample_pairs, CoincidenceHistogram, CoincidenceModel, FringeFit,
    FringeModel, SampleSet, SamplerConfig,
};
pub use epr::{EntanglementDiagnostic, EntanglementRegime, EprParams};
pub use error::{HbtError, Result};
pub use exchange::Exchange;
pub use labelfree::{OneParticleOperator, SingleParticleState, TwoParticleState};
pub use real::Real;
pub use spectral::{GridSpec, SpectralField};
pub use wavepacket::{JointPdfSample, PacketParams, PropagationInput};

pub type ClassicalParamsF64 = ClassicalParams<f64>;
pub type EprParamsF64 = EprParams<f64>;
pub type PacketParamsF64 = PacketParams<f64>;
pub type PropagationInputF64 = PropagationInput<f64>;
pub type SingleParticleStateF64 = SingleParticleState<f64>;
pub type TwoParticleStateF64 = TwoParticleState<f64>;
pub type GridSpecF64 = GridSpec<f64>;
pub type SamplerConfigF64 = SamplerConfig<f64>;
pub type CoincidenceHistogramF64 = CoincidenceHistogram<f64>;
pub type FringeFitF64 = FringeFit<f64>;
