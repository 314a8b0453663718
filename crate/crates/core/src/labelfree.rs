//! Label-free algebra of two identical particles.
//!
//! A two-particle state `|φ,ψ⟩` is a holistic pair: nothing here reports
//! which particle occupies which single-particle state. The only physical
//! content is the amplitude
//!
//! ```text
//! ⟨α,β|φ,ψ⟩ = ⟨α|φ⟩⟨β|ψ⟩ + η ⟨α|ψ⟩⟨β|φ⟩
//! ```
//!
//! evaluated with closed-form Gaussian and plane-wave overlaps. Units are
//! natural (ħ = m = 1).

use num_complex::Complex;

use crate::error::{invalid, HbtError, Result};
use crate::exchange::Exchange;
use crate::real::Real;

/// Smallest `1 + η|⟨φ|ψ⟩|²` accepted before a state is called degenerate.
const DEGENERACY_FLOOR: f64 = 1e-12;

/// A single-particle wavefunction.
///
/// Gaussians are stored in the unnormalized form
/// `exp(-(x - center)² / width²) · exp(i · momentum_shift · x)`; plane waves
/// are delta-normalized, `exp(i p x) / √(2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleParticleState<T> {
    Gaussian {
        center: T,
        width: T,
        momentum_shift: T,
    },
    PlaneWave {
        momentum: T,
    },
}

/// One-particle observables whose two-particle expectation is available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OneParticleOperator {
    Position,
    Momentum,
    KineticEnergy,
}

/// `exp(-a (x - c)^2 + i k x)` with its L² normalization.
#[derive(Debug, Clone, Copy)]
struct GaussianKernel<T> {
    a: T,
    center: T,
    k: T,
    norm: T,
}

/// Zeroth, first and second moments of `exp(-A x² + B x + C)` over the real line.
struct Moments<T> {
    m0: Complex<T>,
    m1: Complex<T>,
    m2: Complex<T>,
}

impl<T: Real> Moments<T> {
    fn new(quad: T, linear: Complex<T>, constant: T) -> Self {
        let four = T::lit(4.0);
        let two = T::lit(2.0);
        let m0 = (linear * linear / (four * quad) + constant).exp() * (T::PI() / quad).sqrt();
        let mean = linear / (two * quad);
        let m1 = mean * m0;
        let m2 = (mean * mean + (T::one() / (two * quad))) * m0;
        Moments { m0, m1, m2 }
    }

    /// `∫ conj(bra) · ket` moments for two Gaussian kernels (norms excluded).
    fn between(bra: &GaussianKernel<T>, ket: &GaussianKernel<T>) -> Self {
        let two = T::lit(2.0);
        let quad = bra.a + ket.a;
        let linear = Complex::new(
            two * (bra.a * bra.center + ket.a * ket.center),
            ket.k - bra.k,
        );
        let constant = -(bra.a * bra.center * bra.center + ket.a * ket.center * ket.center);
        Moments::new(quad, linear, constant)
    }
}

impl<T: Real> SingleParticleState<T> {
    pub fn gaussian(center: T, width: T, momentum_shift: T) -> Result<Self> {
        let state = SingleParticleState::Gaussian {
            center,
            width,
            momentum_shift,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn plane_wave(momentum: T) -> Self {
        SingleParticleState::PlaneWave { momentum }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SingleParticleState::Gaussian {
                center,
                width,
                momentum_shift,
            } => {
                if !(width > T::zero()) || !width.is_finite() {
                    return Err(invalid("width", format!("must be positive, got {width}")));
                }
                if !center.is_finite() || !momentum_shift.is_finite() {
                    return Err(invalid("center", "gaussian parameters must be finite"));
                }
            }
            SingleParticleState::PlaneWave { momentum } => {
                if !momentum.is_finite() {
                    return Err(invalid("momentum", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Position representation in the stored (unnormalized) form.
    pub fn wavefunction(&self, x: T) -> Complex<T> {
        match *self {
            SingleParticleState::Gaussian {
                center,
                width,
                momentum_shift,
            } => {
                let u = (x - center) / width;
                Complex::from_polar((-u * u).exp(), momentum_shift * x)
            }
            SingleParticleState::PlaneWave { momentum } => {
                Complex::from_polar(T::one() / T::TAU().sqrt(), momentum * x)
            }
        }
    }

    /// Constant that L²-normalizes [`wavefunction`](Self::wavefunction).
    /// Plane waves have none.
    pub fn normalization(&self) -> Option<T> {
        match *self {
            SingleParticleState::Gaussian { width, .. } => {
                Some((T::lit(2.0) / (T::PI() * width * width)).powf(T::lit(0.25)))
            }
            SingleParticleState::PlaneWave { .. } => None,
        }
    }

    fn kernel(&self) -> Option<GaussianKernel<T>> {
        match *self {
            SingleParticleState::Gaussian {
                center,
                width,
                momentum_shift,
            } => Some(GaussianKernel {
                a: T::one() / (width * width),
                center,
                k: momentum_shift,
                norm: self.normalization()?,
            }),
            SingleParticleState::PlaneWave { .. } => None,
        }
    }

    /// `⟨self|other⟩` with Gaussians normalized.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        match (self.kernel(), other.kernel()) {
            (Some(bra), Some(ket)) => Ok(Moments::between(&bra, &ket).m0 * (bra.norm * ket.norm)),
            (None, Some(ket)) => Ok(plane_gaussian_overlap(self.plane_momentum(), &ket)),
            (Some(bra), None) => Ok(plane_gaussian_overlap(other.plane_momentum(), &bra).conj()),
            (None, None) => Err(HbtError::Unnormalizable("plane-wave/plane-wave overlap")),
        }
    }

    /// `⟨self|A other⟩` for normalized Gaussians.
    pub fn matrix_element(&self, op: OneParticleOperator, other: &Self) -> Result<Complex<T>> {
        let (bra, ket) = match (self.kernel(), other.kernel()) {
            (Some(bra), Some(ket)) => (bra, ket),
            _ => return Err(HbtError::Unnormalizable("one-particle matrix element")),
        };
        let m = Moments::between(&bra, &ket);
        let two = T::lit(2.0);
        let i = Complex::<T>::i();
        let value = match op {
            OneParticleOperator::Position => m.m1,
            OneParticleOperator::Momentum => {
                // -i d/dx acting on the ket
                i * (m.m1 - m.m0 * ket.center) * (two * ket.a) + m.m0 * ket.k
            }
            OneParticleOperator::KineticEnergy => {
                // ½ ∫ conj(bra') ket' with bra' = (u₁x + v₁) bra, ket' = (u₂x + v₂) ket
                let u1 = -two * bra.a;
                let v1 = Complex::new(two * bra.a * bra.center, bra.k).conj();
                let u2 = -two * ket.a;
                let v2 = Complex::new(two * ket.a * ket.center, ket.k);
                (m.m2 * (u1 * u2) + m.m1 * (v2 * u1 + v1 * u2) + m.m0 * v1 * v2) * T::lit(0.5)
            }
        };
        Ok(value * (bra.norm * ket.norm))
    }

    fn plane_momentum(&self) -> T {
        match *self {
            SingleParticleState::PlaneWave { momentum } => momentum,
            SingleParticleState::Gaussian { .. } => unreachable!("not a plane wave"),
        }
    }
}

/// `⟨p|g⟩` for a normalized Gaussian `g` and a delta-normalized plane wave.
fn plane_gaussian_overlap<T: Real>(p: T, g: &GaussianKernel<T>) -> Complex<T> {
    let two = T::lit(2.0);
    let linear = Complex::new(two * g.a * g.center, g.k - p);
    let m = Moments::new(g.a, linear, -g.a * g.center * g.center);
    m.m0 * (g.norm / T::TAU().sqrt())
}

/// Holistic two-particle state `|φ,ψ⟩` of identical particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoParticleState<T> {
    phi: SingleParticleState<T>,
    psi: SingleParticleState<T>,
    exchange: Exchange,
}

impl<T: Real> TwoParticleState<T> {
    pub fn new(
        phi: SingleParticleState<T>,
        psi: SingleParticleState<T>,
        exchange: Exchange,
    ) -> Result<Self> {
        phi.validate()?;
        psi.validate()?;
        Ok(TwoParticleState { phi, psi, exchange })
    }

    pub fn exchange(&self) -> Exchange {
        self.exchange
    }

    /// `⟨x₁,x₂|φ,ψ⟩ = φ(x₁)ψ(x₂) + η ψ(x₁)φ(x₂)` in the stored (unnormalized)
    /// single-particle forms. `x₁`, `x₂` are detector positions, not particle labels.
    pub fn position_amplitude(&self, x1: T, x2: T) -> Complex<T> {
        let eta: T = self.exchange.sign();
        self.phi.wavefunction(x1) * self.psi.wavefunction(x2)
            + self.psi.wavefunction(x1) * self.phi.wavefunction(x2) * eta
    }

    /// `⟨self|ket⟩` with normalized single-particle states.
    pub fn inner_product(&self, ket: &Self) -> Result<Complex<T>> {
        if self.exchange != ket.exchange {
            return Err(HbtError::InvalidArgument(format!(
                "exchange sign mismatch: bra η = {}, ket η = {}",
                self.exchange.as_i32(),
                ket.exchange.as_i32()
            )));
        }
        let eta: T = self.exchange.sign();
        let (alpha, beta) = (&self.phi, &self.psi);
        Ok(alpha.overlap(&ket.phi)? * beta.overlap(&ket.psi)?
            + alpha.overlap(&ket.psi)? * beta.overlap(&ket.phi)? * eta)
    }

    /// `1 + η|⟨φ|ψ⟩|²`, the squared norm of `|φ,ψ⟩` built from normalized factors.
    pub fn norm_sqr(&self) -> Result<T> {
        let eta: T = self.exchange.sign();
        let q = T::one() + eta * self.phi.overlap(&self.psi)?.norm_sqr();
        if q <= T::lit(DEGENERACY_FLOOR) {
            return Err(HbtError::DegenerateState(format!(
                "1 + η|⟨φ|ψ⟩|² = {q}; the antisymmetric state vanishes"
            )));
        }
        Ok(q)
    }

    /// `1/√(1 + η|⟨φ|ψ⟩|²)`.
    pub fn normalization_constant(&self) -> Result<T> {
        Ok(self.norm_sqr()?.sqrt().recip())
    }

    /// Expectation of a one-particle operator acting as `|Aφ,ψ⟩ + |φ,Aψ⟩`.
    pub fn one_particle_expectation(&self, op: OneParticleOperator) -> Result<T> {
        let eta: T = self.exchange.sign();
        let (phi, psi) = (&self.phi, &self.psi);
        let norm = self.norm_sqr()?;
        let direct = phi.matrix_element(op, phi)? + psi.matrix_element(op, psi)?;
        let exchange = phi.overlap(psi)? * psi.matrix_element(op, phi)?
            + psi.overlap(phi)? * phi.matrix_element(op, psi)?;
        Ok((direct + exchange * eta).re / norm)
    }
}

/// Conventional labeled (anti)symmetrization, kept as an independent check
/// of the label-free construction.
pub mod oracle {
    use super::*;

    /// Labeled product `φ(x_a) ψ(x_b)`: particle "1" in `φ`, particle "2" in `ψ`.
    struct LabeledProduct<'a, T> {
        particle_1: &'a SingleParticleState<T>,
        particle_2: &'a SingleParticleState<T>,
    }

    impl<T: Real> LabeledProduct<'_, T> {
        fn eval(&self, coord_1: T, coord_2: T) -> Complex<T> {
            self.particle_1.wavefunction(coord_1) * self.particle_2.wavefunction(coord_2)
        }
    }

    /// `(1 + η P₁₂) φ₁ψ₂` evaluated at `(x₁, x₂)`, with `P₁₂` swapping the
    /// particle coordinates.
    pub fn labeled_oracle_amplitude<T: Real>(
        state: &TwoParticleState<T>,
        x1: T,
        x2: T,
    ) -> Complex<T> {
        let labeled = LabeledProduct {
            particle_1: &state.phi,
            particle_2: &state.psi,
        };
        let eta: T = state.exchange.sign();
        labeled.eval(x1, x2) + labeled.eval(x2, x1) * eta
    }

    /// The single-particle factors with their labels attached, for building
    /// labeled quadrature oracles.
    pub fn labeled_factors<T: Copy>(
        state: &TwoParticleState<T>,
    ) -> (SingleParticleState<T>, SingleParticleState<T>) {
        (state.phi, state.psi)
    }
}
