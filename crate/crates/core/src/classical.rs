//! Classical two-source interference and intensity correlations.
//!
//! Sources A and B sit at `+x₀` and `-x₀`, a distance `L` from the screen,
//! with relative phase `φ`. Path lengths are exact, `√(L² + (x ∓ x₀)²)`; the
//! far-field form is only used to check the correspondence with the
//! quantum fringe spacing.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, HbtError, Result};
use crate::real::Real;

/// Fewest phase draws accepted by the Monte Carlo averages.
pub const MIN_DRAWS: u64 = 100;

/// Draws per independently positioned generator chunk.
const CHUNK_DRAWS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhaseMode<T> {
    Fixed(T),
    RandomUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalParams<T> {
    alpha: T,
    beta: T,
    k: T,
    source_separation: T,
    screen_distance: T,
    phase: PhaseMode<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathLengths<T> {
    pub r_a: T,
    pub r_b: T,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub draws: u64,
}

impl<T: Real> ClassicalParams<T> {
    pub fn new(
        alpha: T,
        beta: T,
        k: T,
        source_separation: T,
        screen_distance: T,
        phase: PhaseMode<T>,
    ) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(invalid(
                "alpha",
                format!("must be non-negative, got {alpha}"),
            ));
        }
        if !(beta >= T::zero()) || !beta.is_finite() {
            return Err(invalid("beta", format!("must be non-negative, got {beta}")));
        }
        if !(k > T::zero()) || !k.is_finite() {
            return Err(invalid("k", format!("must be positive, got {k}")));
        }
        if !(source_separation >= T::zero()) || !source_separation.is_finite() {
            return Err(invalid(
                "source_separation",
                format!("must be non-negative, got {source_separation}"),
            ));
        }
        if !(screen_distance > T::zero()) || !screen_distance.is_finite() {
            return Err(invalid(
                "screen_distance",
                format!("must be positive, got {screen_distance}"),
            ));
        }
        if let PhaseMode::Fixed(phi) = phase {
            if !phi.is_finite() {
                return Err(invalid("phi", "must be finite"));
            }
        }
        Ok(ClassicalParams {
            alpha,
            beta,
            k,
            source_separation,
            screen_distance,
            phase,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn source_separation(&self) -> T {
        self.source_separation
    }

    pub fn screen_distance(&self) -> T {
        self.screen_distance
    }

    pub fn phase(&self) -> PhaseMode<T> {
        self.phase
    }

    pub fn path_lengths(&self, x: T) -> PathLengths<T> {
        let x0 = T::lit(0.5) * self.source_separation;
        let l = self.screen_distance;
        PathLengths {
            r_a: l.hypot(x - x0),
            r_b: l.hypot(x + x0),
        }
    }

    /// `|α e^{ikr_A} + β e^{ikr_B - iφ}|²`
    pub fn intensity(&self, x: T, phi: T) -> T {
        let r = self.path_lengths(x);
        let two = T::lit(2.0);
        self.alpha * self.alpha
            + self.beta * self.beta
            + two * self.alpha * self.beta * (self.k * (r.r_a - r.r_b) + phi).cos()
    }

    /// Intensity under the configured phase mode; a random phase averages to `α² + β²`.
    pub fn intensity_for_mode(&self, x: T) -> T {
        match self.phase {
            PhaseMode::Fixed(phi) => self.intensity(x, phi),
            PhaseMode::RandomUniform => self.alpha * self.alpha + self.beta * self.beta,
        }
    }

    /// `k(r_A1 - r_B1 - r_A2 + r_B2)`
    pub fn cosine_argument(&self, x1: T, x2: T) -> T {
        let r1 = self.path_lengths(x1);
        let r2 = self.path_lengths(x2);
        self.k * ((r1.r_a - r1.r_b) - (r2.r_a - r2.r_b))
    }

    /// Small-angle limit of [`cosine_argument`](Self::cosine_argument):
    /// `-2k x₀ (x₁ - x₂)/L`.
    pub fn far_field_argument(&self, x1: T, x2: T) -> T {
        let x0 = T::lit(0.5) * self.source_separation;
        -T::lit(2.0) * self.k * x0 * (x1 - x2) / self.screen_distance
    }

    /// Phase-averaged intensity correlation
    /// `(α² + β²)² + 2(αβ)² cos(k(r_A1 - r_B1 - r_A2 + r_B2))`.
    pub fn correlation_analytic(&self, x1: T, x2: T) -> T {
        let total = self.alpha * self.alpha + self.beta * self.beta;
        let ab = self.alpha * self.beta;
        total * total + T::lit(2.0) * ab * ab * self.cosine_argument(x1, x2).cos()
    }

    /// `2(αβ)²/(α² + β²)²`, at most 1/2.
    pub fn classical_visibility(&self) -> Result<T> {
        let total = self.alpha * self.alpha + self.beta * self.beta;
        if total == T::zero() {
            return Err(HbtError::InvalidArgument(
                "visibility undefined for zero total amplitude".into(),
            ));
        }
        let ab = self.alpha * self.beta;
        Ok(T::lit(2.0) * ab * ab / (total * total))
    }

    /// Monte Carlo average of `I(x₁, φ) I(x₂, φ)` over `n` uniform phases.
    pub fn correlation_mc(&self, x1: T, x2: T, n: u64, seed: u64) -> Result<McEstimate<T>> {
        phase_average(n, seed, |phi| {
            self.intensity(x1, phi) * self.intensity(x2, phi)
        })
    }

    /// Monte Carlo average of `I(x, φ)` over `n` uniform phases.
    pub fn intensity_mc(&self, x: T, n: u64, seed: u64) -> Result<McEstimate<T>> {
        phase_average(n, seed, |phi| self.intensity(x, phi))
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy)]
struct Welford<T> {
    count: u64,
    mean: T,
    m2: T,
}

impl<T: Real> Welford<T> {
    fn new() -> Self {
        Welford {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::from_u64(self.count).unwrap();
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (
            T::from_u64(self.count).unwrap(),
            T::from_u64(other.count).unwrap(),
            T::from_u64(count).unwrap(),
        );
        let delta = other.mean - self.mean;
        Welford {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }
}

/// Uniform on `[0, 1)` from the top 53 bits of one 64-bit word.
fn unit_from_bits<T: Real>(bits: u64) -> T {
    T::lit((bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
}

/// Generator positioned at draw `start` of the serial phase stream for `seed`.
/// Every draw consumes exactly one 64-bit output (two ChaCha words).
pub(crate) fn phase_stream_at(seed: u64, start: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * start as u128);
    rng
}

fn phase_average<T: Real>(n: u64, seed: u64, f: impl Fn(T) -> T + Sync) -> Result<McEstimate<T>> {
    if n < MIN_DRAWS {
        return Err(HbtError::TooFewSamples {
            got: n,
            min: MIN_DRAWS,
        });
    }
    let chunks = n.div_ceil(CHUNK_DRAWS);
    let partials: Vec<Welford<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_DRAWS;
            let len = CHUNK_DRAWS.min(n - start);
            let mut rng = phase_stream_at(seed, start);
            let mut acc = Welford::new();
            for _ in 0..len {
                let phi = T::TAU() * unit_from_bits::<T>(rng.next_u64());
                acc.push(f(phi));
            }
            acc
        })
        .collect();
    let total = partials.into_iter().fold(Welford::new(), Welford::merge);
    let count = T::from_u64(total.count).unwrap();
    let variance = total.m2 / (count - T::one());
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / count).sqrt(),
        draws: total.count,
    })
}
