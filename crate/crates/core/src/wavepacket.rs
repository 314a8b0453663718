//! Free evolution of two independent Gaussian packets and their joint
//! detection density.
//!
//! Two identical particles leave sources at `+x₀` and `-x₀` as Gaussians
//! `exp(-(x ∓ x₀)²/ε²)`. Transverse free evolution for a time `t` is fully
//! described by the spread parameter `Δ = 2ħt/m` (natural units: `Δ = 2t`),
//! equivalently `Δ = λL/π` for a wavelength `λ` and a propagation length `L`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{invalid, HbtError, Result};
use crate::exchange::Exchange;
use crate::real::{direct_pair, exchange_pair, exchange_pair_amplitude, Real};

/// Narrowest packet width accepted.
pub const MIN_WIDTH: f64 = 1e-9;

/// How far the packets have propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationInput<T> {
    /// The spread parameter `Δ` itself (length²).
    Spread(T),
    /// Wavelength `λ` and propagation distance `L`: `Δ = λL/π`.
    Optical { wavelength: T, distance: T },
    /// Elapsed time with `ħ = m = 1`: `Δ = 2t`.
    Time(T),
}

impl<T: Real> PropagationInput<T> {
    pub fn spread(&self) -> Result<T> {
        let delta = match *self {
            PropagationInput::Spread(delta) => delta,
            PropagationInput::Optical {
                wavelength,
                distance,
            } => {
                if !(wavelength > T::zero()) {
                    return Err(invalid(
                        "wavelength",
                        format!("must be positive, got {wavelength}"),
                    ));
                }
                if !(distance >= T::zero()) {
                    return Err(invalid(
                        "distance",
                        format!("must be non-negative, got {distance}"),
                    ));
                }
                wavelength * distance / T::PI()
            }
            PropagationInput::Time(t) => T::lit(2.0) * t,
        };
        if !(delta >= T::zero()) || !delta.is_finite() {
            return Err(invalid(
                "delta",
                format!("must be finite and non-negative, got {delta}"),
            ));
        }
        Ok(delta)
    }
}

/// Source geometry and packet shape for the independent-particle scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketParams<T> {
    epsilon: T,
    x0: T,
    exchange: Exchange,
    delta: T,
}

/// One evaluation of the joint detection density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointPdfSample<T> {
    pub x1: T,
    pub x2: T,
    pub density: T,
}

impl<T: Real> PacketParams<T> {
    pub fn new(
        epsilon: T,
        x0: T,
        exchange: Exchange,
        propagation: PropagationInput<T>,
    ) -> Result<Self> {
        let delta = propagation.spread()?;
        if !(epsilon >= T::lit(MIN_WIDTH)) || !epsilon.is_finite() {
            return Err(invalid(
                "epsilon",
                format!("packet width must be at least {MIN_WIDTH:e}, got {epsilon}"),
            ));
        }
        if !(x0 >= T::zero()) || !x0.is_finite() {
            return Err(invalid(
                "x0",
                format!("must be finite and non-negative, got {x0}"),
            ));
        }
        if exchange == Exchange::Fermion && x0 == T::zero() {
            return Err(invalid(
                "x0",
                "fermions from coincident sources form an identically vanishing state",
            ));
        }
        Ok(PacketParams {
            epsilon,
            x0,
            exchange,
            delta,
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn exchange(&self) -> Exchange {
        self.exchange
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Same sources and packets, different propagation.
    pub fn with_propagation(&self, propagation: PropagationInput<T>) -> Result<Self> {
        Self::new(self.epsilon, self.x0, self.exchange, propagation)
    }

    pub fn with_exchange(&self, exchange: Exchange) -> Result<Self> {
        Self::new(
            self.epsilon,
            self.x0,
            exchange,
            PropagationInput::Spread(self.delta),
        )
    }

    /// `ε⁴ + Δ²`
    fn spread_denominator(&self) -> T {
        let e2 = self.epsilon * self.epsilon;
        e2 * e2 + self.delta * self.delta
    }

    /// Sum of squared distances of the detectors from the "direct" and
    /// "exchanged" source assignments: `(x₁ - x₀)² + (x₂ + x₀)²` and
    /// `(x₁ + x₀)² + (x₂ - x₀)²`.
    fn path_sums(&self, x1: T, x2: T) -> (T, T) {
        let x0 = self.x0;
        let sq = |v: T| v * v;
        (sq(x1 - x0) + sq(x2 + x0), sq(x1 + x0) + sq(x2 - x0))
    }

    /// The two path sums written as `S ∓ 2x₀(x₁ - x₂)`; returns `(S, 2x₀(x₁ - x₂))`.
    fn path_sum_parts(&self, x1: T, x2: T) -> (T, T) {
        let two = T::lit(2.0);
        let x0 = self.x0;
        (x1 * x1 + x2 * x2 + two * x0 * x0, two * x0 * (x1 - x2))
    }

    /// Two-particle wavefunction at `t = 0`:
    /// `(1/√π ε) (φ_A(x₁)φ_B(x₂) + η φ_B(x₁)φ_A(x₂))`.
    pub fn initial_amplitude(&self, x1: T, x2: T) -> Complex<T> {
        let eta: T = self.exchange.sign();
        let e2 = self.epsilon * self.epsilon;
        let (direct, exchanged) = self.path_sums(x1, x2);
        let pref = T::one() / (T::PI().sqrt() * self.epsilon);
        Complex::from(pref * ((-direct / e2).exp() + eta * (-exchanged / e2).exp()))
    }

    /// Wavefunction after free evolution with spread `Δ`.
    pub fn evolved_amplitude(&self, x1: T, x2: T) -> Complex<T> {
        let eta: T = self.exchange.sign();
        let eps = self.epsilon;
        let q_inv = Complex::new(eps * eps, self.delta).inv();
        let alpha = (Complex::new(eps, self.delta / eps) * T::PI().sqrt()).inv();
        let (mean, half_gap) = self.path_sum_parts(x1, x2);
        alpha * exchange_pair_amplitude(-q_inv * mean, q_inv * half_gap, eta)
    }

    /// Joint detection density `|ψ(x₁, x₂, t)|²` in closed form.
    ///
    /// Written out it is
    /// `(2/πσ²) e^{-E} cosh B (1 + η cos C / cosh B)` with `σ² = ε² + Δ²/ε²`,
    /// `E = 2ε²(x₁² + x₂² + 2x₀²)/(ε⁴+Δ²)`, `B = 4ε²(x₁-x₂)x₀/(ε⁴+Δ²)` and
    /// `C = 4Δ(x₁-x₂)x₀/(ε⁴+Δ²)`. The `e^{-E}cosh B` product is evaluated as the
    /// two direct Gaussians `e^{-E±B}` so it never overflows, and in half-angle
    /// form near `x₁ = x₂` so the exchange cancellation keeps relative precision.
    pub fn joint_pdf(&self, x1: T, x2: T) -> T {
        let eta: T = self.exchange.sign();
        let (e, b, c) = self.exponents(x1, x2);
        self.pdf_prefactor() * exchange_pair(e, b, c, eta)
    }

    /// The joint density with the exchange (interference) terms removed.
    pub fn direct_pdf(&self, x1: T, x2: T) -> T {
        let (e, b, _) = self.exponents(x1, x2);
        self.pdf_prefactor() * direct_pair(e, b)
    }

    pub fn joint_pdf_sample(&self, x1: T, x2: T) -> JointPdfSample<T> {
        JointPdfSample {
            x1,
            x2,
            density: self.joint_pdf(x1, x2),
        }
    }

    /// `1/(πσ²)`
    fn pdf_prefactor(&self) -> T {
        let e2 = self.epsilon * self.epsilon;
        e2 / (T::PI() * self.spread_denominator())
    }

    /// `(E, B, C)` of the closed-form density.
    fn exponents(&self, x1: T, x2: T) -> (T, T, T) {
        let scale = T::lit(2.0) * self.epsilon * self.epsilon / self.spread_denominator();
        let (mean, _) = self.path_sum_parts(x1, x2);
        let dx = x1 - x2;
        (
            scale * mean,
            self.envelope_rate() * dx,
            self.fringe_wavenumber() * dx,
        )
    }

    /// `density / direct density = 1 + η cos C / cosh B`.
    pub fn interference_ratio(&self, x1: T, x2: T) -> T {
        let eta: T = self.exchange.sign();
        let dx = x1 - x2;
        T::one() + eta * (self.fringe_wavenumber() * dx).cos() / (self.envelope_rate() * dx).cosh()
    }

    /// Angular wavenumber of the fringes in `x₁ - x₂`: `4Δx₀/(ε⁴+Δ²)`.
    pub fn fringe_wavenumber(&self) -> T {
        T::lit(4.0) * self.delta * self.x0 / self.spread_denominator()
    }

    /// Growth rate of the visibility-limiting cosh in `x₁ - x₂`: `4ε²x₀/(ε⁴+Δ²)`.
    pub fn envelope_rate(&self) -> T {
        T::lit(4.0) * self.epsilon * self.epsilon * self.x0 / self.spread_denominator()
    }

    /// Period of the fringes in `x₁ - x₂`: `π(ε⁴+Δ²)/(2Δx₀)`.
    pub fn fringe_period(&self) -> Result<T> {
        if self.x0 == T::zero() || self.delta == T::zero() {
            return Err(HbtError::NoFringes(format!(
                "fringe period needs x0 > 0 and delta > 0 (x0 = {}, delta = {})",
                self.x0, self.delta
            )));
        }
        Ok(T::PI() * self.spread_denominator() / (T::lit(2.0) * self.delta * self.x0))
    }

    /// `1/cosh(4ε²·dx·x₀/(ε⁴+Δ²))`, the largest fringe contrast available at
    /// detector separation `dx`.
    pub fn visibility_envelope(&self, dx: T) -> T {
        (self.envelope_rate() * dx).cosh().recip()
    }

    /// `∫∫ |ψ|² dx₁ dx₂ = 1 + η e^{-4x₀²/ε²}`; independent of `Δ`.
    pub fn total_probability(&self) -> T {
        let eta: T = self.exchange.sign();
        let u = self.x0 / self.epsilon;
        T::one() + eta * (T::lit(-4.0) * u * u).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(eps: f64, x0: f64, eta: Exchange, delta: f64) -> PacketParams<f64> {
        PacketParams::new(eps, x0, eta, PropagationInput::Spread(delta)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn propagation_inputs_convert() {
        let pi = std::f64::consts::PI;
        assert_eq!(PropagationInput::Spread(3.0).spread().unwrap(), 3.0);
        assert_eq!(PropagationInput::Time(1.5).spread().unwrap(), 3.0);
        let optical = PropagationInput::Optical {
            wavelength: 0.5,
            distance: 2.0 * pi,
        };
        assert!((optical.spread().unwrap() - 1.0).abs() < 1e-15);
        assert!(PropagationInput::Optical {
            wavelength: 0.0,
            distance: 1.0
        }
        .spread()
        .is_err());
        assert!(PropagationInput::Optical {
            wavelength: 1.0,
            distance: -1.0
        }
        .spread()
        .is_err());
        assert!(PropagationInput::Spread(-1.0).spread().is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        let s = PropagationInput::Spread(1.0);
        assert!(PacketParams::new(0.0, 1.0, Exchange::Boson, s).is_err());
        assert!(PacketParams::new(1e-10, 1.0, Exchange::Boson, s).is_err());
        assert!(PacketParams::new(1.0, -1.0, Exchange::Boson, s).is_err());
        assert!(PacketParams::new(1.0, 0.0, Exchange::Fermion, s).is_err());
        assert!(PacketParams::new(1.0, 0.0, Exchange::Boson, s).is_ok());
        assert!(
            PacketParams::new(1.0, 1.0, Exchange::Fermion, PropagationInput::Spread(0.0)).is_ok()
        );
    }

    #[test]
    fn zero_spread_is_the_initial_state() {
        let p = params(0.8, 1.1, Exchange::Fermion, 0.0);
        for &(x1, x2) in &[(0.0, 0.0), (0.3, -1.2), (2.0, 1.9)] {
            let d = p.evolved_amplitude(x1, x2) - p.initial_amplitude(x1, x2);
            assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn fermion_density_is_exactly_zero_on_the_diagonal() {
        for &(eps, x0, delta) in &[(1.0, 2.0, 10.0), (0.3, 0.1, 0.0), (2.0, 5.0, 1e4)] {
            let p = params(eps, x0, Exchange::Fermion, delta);
            for x in [-7.0, -0.5, 0.0, 0.25, 3.0] {
                assert_eq!(p.joint_pdf(x, x), 0.0);
                assert_eq!(p.evolved_amplitude(x, x).norm(), 0.0);
            }
        }
    }

    #[test]
    fn boson_density_doubles_on_the_diagonal() {
        let p = params(1.0, 2.0, Exchange::Boson, 10.0);
        for x in [-3.0, 0.0, 0.7, 4.0] {
            assert_eq!(p.joint_pdf(x, x), 2.0 * p.direct_pdf(x, x));
        }
    }

    #[test]
    fn coincident_boson_sources_have_no_fringes() {
        let p = params(1.0, 0.0, Exchange::Boson, 3.0);
        for &(x1, x2) in &[(0.0, 1.0), (-2.0, 0.5), (1.5, 1.5)] {
            assert!(rel(p.joint_pdf(x1, x2), 2.0 * p.direct_pdf(x1, x2)) < 1e-15);
        }
        assert!(p.fringe_period().is_err());
    }

    #[test]
    fn fringe_period_values() {
        let p = params(1.0, 2.0, Exchange::Boson, 10.0);
        let expected = std::f64::consts::PI * 101.0 / 40.0;
        assert!(rel(p.fringe_period().unwrap(), expected) < 1e-15);
        let doubled = params(1.0, 4.0, Exchange::Boson, 10.0);
        assert!(rel(doubled.fringe_period().unwrap(), expected / 2.0) < 1e-15);
        assert!(params(1.0, 2.0, Exchange::Boson, 0.0)
            .fringe_period()
            .is_err());
    }

    #[test]
    fn fringe_period_located_from_density_maxima() {
        // first side maximum of the boson density along x1 - x2 at x1 + x2 = 0;
        // the broad Gaussian envelope pulls it slightly inward
        let p = params(1.0, 3.0, Exchange::Boson, 100.0);
        let f = |dx: f64| p.joint_pdf(0.5 * dx, -0.5 * dx);
        let h = 1e-3;
        let mut dx = h;
        let mut first = None;
        while dx < 120.0 {
            if f(dx) > f(dx - h) && f(dx) >= f(dx + h) {
                first = Some(dx);
                break;
            }
            dx += h;
        }
        let first = first.expect("no side maximum");
        assert!(rel(first, p.fringe_period().unwrap()) < 0.05, "{first}");
    }

    #[test]
    fn classical_limit_period() {
        let p = params(1.0, 3.0, Exchange::Boson, 1e4);
        let classical = std::f64::consts::PI * 1e4 / 6.0;
        assert!(rel(p.fringe_period().unwrap(), classical) < 1e-7);
    }

    #[test]
    fn visibility_envelope_bounds() {
        let p = params(1.0, 2.0, Exchange::Boson, 1.0);
        assert_eq!(p.visibility_envelope(0.0), 1.0);
        let mut last = 1.0;
        for dx in [0.1, 0.5, 1.0, 5.0, 50.0, 1e3] {
            let v = p.visibility_envelope(dx);
            assert!(v < last && v > 0.0 || v == 0.0);
            assert_eq!(v, p.visibility_envelope(-dx));
            last = v;
        }
        assert_eq!(p.visibility_envelope(1e6), 0.0);
    }

    #[test]
    fn fringe_period_from_interference_zeros() {
        // the exchange term vanishes exactly where cos C = 0, half a period apart
        let p = params(1.0, 2.0, Exchange::Boson, 10.0);
        let g = |dx: f64| p.joint_pdf(0.5 * dx, -0.5 * dx) - p.direct_pdf(0.5 * dx, -0.5 * dx);
        let mut zeros = Vec::new();
        let h = 1e-2;
        let mut dx = 0.0;
        while zeros.len() < 3 {
            if g(dx).signum() != g(dx + h).signum() {
                let (mut lo, mut hi) = (dx, dx + h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo).signum() == g(mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                zeros.push(0.5 * (lo + hi));
            }
            dx += h;
        }
        let period = p.fringe_period().unwrap();
        assert!(rel(zeros[2] - zeros[0], period) < 1e-9, "{zeros:?}");
    }

    #[test]
    fn visibility_envelope_from_density_extrema() {
        // (max - min)/(max + min) of the density over one fringe period, with the
        // slowly varying direct density divided out, at fixed x1 + x2 = 0
        let p = params(1.0, 500.0, Exchange::Boson, 2000.0);
        let period = p.fringe_period().unwrap();
        let b = p.envelope_rate();
        for centre in [0.25 / b, 1.0 / b, 2.0 / b] {
            let centre = (centre / period).round() * period;
            let n = 20_000;
            let (mut hi, mut lo) = (f64::MIN, f64::MAX);
            for j in 0..=n {
                let dx = centre - 0.5 * period + period * j as f64 / n as f64;
                let (x1, x2) = (0.5 * dx, -0.5 * dx);
                let v = p.joint_pdf(x1, x2) / p.direct_pdf(x1, x2);
                hi = hi.max(v);
                lo = lo.min(v);
            }
            let measured = (hi - lo) / (hi + lo);
            let expected = p.visibility_envelope(centre);
            assert!(
                (measured - expected).abs() < 1e-3,
                "{measured} vs {expected}"
            );
        }
    }

    proptest! {
        #[test]
        fn closed_form_density_is_amplitude_squared(
            eps in 0.2..3.0f64, x0 in 0.0..4.0f64, delta in 0.0..30.0f64,
            fermion in any::<bool>(), x1 in -8.0..8.0f64, x2 in -8.0..8.0f64,
        ) {
            let eta = if fermion && x0 > 0.0 { Exchange::Fermion } else { Exchange::Boson };
            let p = params(eps, x0, eta, delta);
            let a = p.evolved_amplitude(x1, x2).norm_sqr();
            let b = p.joint_pdf(x1, x2);
            prop_assert!((a - b).abs() <= 1e-10 * a.max(b) + 1e-300, "{a} vs {b}");
        }

        #[test]
        fn density_is_exchange_symmetric(
            eps in 0.2..3.0f64, x0 in 0.01..4.0f64, delta in 0.0..30.0f64,
            fermion in any::<bool>(), x1 in -8.0..8.0f64, x2 in -8.0..8.0f64,
        ) {
            let eta = if fermion { Exchange::Fermion } else { Exchange::Boson };
            let p = params(eps, x0, eta, delta);
            prop_assert!(rel(p.joint_pdf(x1, x2), p.joint_pdf(x2, x1)) < 1e-13);
            prop_assert!(p.joint_pdf(x1, x2) >= 0.0);
        }

        #[test]
        fn interference_ratio_is_bounded(
            eps in 0.2..3.0f64, x0 in 0.01..4.0f64, delta in 0.0..30.0f64,
            fermion in any::<bool>(), x1 in -8.0..8.0f64, x2 in -8.0..8.0f64,
        ) {
            let eta = if fermion { Exchange::Fermion } else { Exchange::Boson };
            let p = params(eps, x0, eta, delta);
            let r = p.interference_ratio(x1, x2);
            prop_assert!((0.0..=2.0).contains(&r));
            prop_assert!((r - 1.0).abs() <= p.visibility_envelope(x1 - x2) + 1e-6);
            let direct = p.direct_pdf(x1, x2);
            if direct > 1e-250 {
                prop_assert!((p.joint_pdf(x1, x2) - r * direct).abs() <= 1e-12 * direct);
            }
        }
    }
}
