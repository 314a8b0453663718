//! Momentum-entangled pairs of identical particles.
//!
//! The generalized EPR state has relative-momentum spread `σ` and
//! centre-of-mass localization `Ω`. In position space
//!
//! ```text
//! Ψ(x₁,x₂) = √(σ/πΩ) e^{-(x₁+x₂)²/4Ω²} (e^{-(x₁-x₂-2x₀)²σ²} + η e^{-(x₁-x₂+2x₀)²σ²})
//! ```
//!
//! which is a product state exactly when `2Ωσ = 1`. Free evolution is
//! parametrized by `δ = 4ħt/m = 2λL/π`, twice the single-packet spread `Δ`.
//!
//! The η = -1 branch is accepted for symmetry checks only; nothing here
//! claims it corresponds to a physical fermionic preparation.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{invalid, HbtError, Result};
use crate::exchange::Exchange;
use crate::real::{direct_pair, exchange_pair, exchange_pair_amplitude, Real};
use crate::wavepacket::{PacketParams, PropagationInput};

/// `|2Ωσ - 1|` below which the state is treated as a product state.
pub const PRODUCT_STATE_TOLERANCE: f64 = 1e-9;

/// Strong entanglement: `1/σ⁴ ≤ STRONG_ENTANGLEMENT_RATIO · δ²`.
pub const STRONG_ENTANGLEMENT_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprParams<T> {
    sigma: T,
    omega: T,
    x0: T,
    exchange: Exchange,
    delta_e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntanglementRegime {
    Product,
    Entangled,
    StrongEntangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementDiagnostic<T> {
    /// `2Ωσ`; one for a product state.
    pub ratio: T,
    pub regime: EntanglementRegime,
}

impl<T: Real> EprParams<T> {
    pub fn new(sigma: T, omega: T, x0: T, exchange: Exchange, delta_e: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        if !(x0 >= T::zero()) || !x0.is_finite() {
            return Err(invalid(
                "x0",
                format!("must be finite and non-negative, got {x0}"),
            ));
        }
        if !(delta_e >= T::zero()) || !delta_e.is_finite() {
            return Err(invalid(
                "delta_e",
                format!("must be finite and non-negative, got {delta_e}"),
            ));
        }
        if exchange == Exchange::Fermion && x0 == T::zero() {
            return Err(invalid(
                "x0",
                "antisymmetric pair from coincident sources vanishes identically",
            ));
        }
        Ok(EprParams {
            sigma,
            omega,
            x0,
            exchange,
            delta_e,
        })
    }

    /// Builds the spread from the same propagation inputs as the independent
    /// packets: `δ = 2Δ`.
    pub fn with_propagation(
        sigma: T,
        omega: T,
        x0: T,
        exchange: Exchange,
        propagation: PropagationInput<T>,
    ) -> Result<Self> {
        let delta = propagation.spread()?;
        Self::new(sigma, omega, x0, exchange, T::lit(2.0) * delta)
    }

    /// The unentangled state equal to the given independent packets:
    /// `4Ω² = 1/σ² = 2ε²`, `δ = 2Δ`.
    pub fn product_state(packets: &PacketParams<T>) -> Self {
        let eps = packets.epsilon();
        let root2 = T::SQRT_2();
        EprParams {
            sigma: T::one() / (eps * root2),
            omega: eps / root2,
            x0: packets.x0(),
            exchange: packets.exchange(),
            delta_e: T::lit(2.0) * packets.delta(),
        }
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn exchange(&self) -> Exchange {
        self.exchange
    }

    pub fn delta_e(&self) -> T {
        self.delta_e
    }

    pub fn with_delta_e(&self, delta_e: T) -> Result<Self> {
        Self::new(self.sigma, self.omega, self.x0, self.exchange, delta_e)
    }

    /// `(x₁ + x₂, x₁ - x₂)`
    fn sum_difference(x1: T, x2: T) -> (T, T) {
        (x1 + x2, x1 - x2)
    }

    /// Amplitude of the untouched state.
    pub fn position_amplitude(&self, x1: T, x2: T) -> Complex<T> {
        let eta: T = self.exchange.sign();
        let (s, d) = Self::sum_difference(x1, x2);
        let two_x0 = T::lit(2.0) * self.x0;
        let s2 = self.sigma * self.sigma;
        let pref = (self.sigma / (T::PI() * self.omega)).sqrt();
        let com = (-s * s / (T::lit(4.0) * self.omega * self.omega)).exp();
        let a = (-(d - two_x0) * (d - two_x0) * s2).exp();
        let b = (-(d + two_x0) * (d + two_x0) * s2).exp();
        Complex::from(pref * com * (a + eta * b))
    }

    /// Complex evolution prefactor; its modulus is [`prefactor_modulus`](Self::prefactor_modulus).
    pub fn evolution_prefactor(&self) -> Complex<T> {
        let four_omega2 = T::lit(4.0) * self.omega * self.omega;
        let inv_s2 = (self.sigma * self.sigma).recip();
        let delta = self.delta_e;
        let com = (Complex::from(four_omega2) / Complex::new(four_omega2, delta)).sqrt();
        let rel = (Complex::from(inv_s2) / Complex::new(inv_s2, delta)).sqrt();
        com * rel * (self.sigma / (T::PI() * self.omega)).sqrt()
    }

    /// `C_t = π^{-1/2} [{Ω² + (λL/2πΩ)²}{1/σ² + (2σλL/π)²}]^{-1/4}` with
    /// `λL/π = δ/2`.
    pub fn prefactor_modulus(&self) -> T {
        let half_delta = T::lit(0.5) * self.delta_e;
        let com = self.omega * self.omega + (half_delta / (T::lit(2.0) * self.omega)).powi(2);
        let rel =
            (self.sigma * self.sigma).recip() + (T::lit(2.0) * self.sigma * half_delta).powi(2);
        T::PI().sqrt().recip() * (com * rel).powf(T::lit(-0.25))
    }

    /// Amplitude after free evolution over `δ`.
    pub fn evolved_amplitude(&self, x1: T, x2: T) -> Complex<T> {
        let eta: T = self.exchange.sign();
        let (s, d) = Self::sum_difference(x1, x2);
        let two_x0 = T::lit(2.0) * self.x0;
        let com_width = Complex::new(T::lit(4.0) * self.omega * self.omega, self.delta_e);
        let rel_inv = Complex::new((self.sigma * self.sigma).recip(), self.delta_e).inv();
        let com = -com_width.inv() * (s * s);
        let mean = -rel_inv * (d * d + two_x0 * two_x0);
        let half_gap = rel_inv * (T::lit(2.0) * two_x0 * d);
        self.evolution_prefactor() * exchange_pair_amplitude(com + mean, half_gap, eta)
    }

    /// `1/σ⁴ + δ²`
    fn relative_denominator(&self) -> T {
        let inv_s2 = (self.sigma * self.sigma).recip();
        inv_s2 * inv_s2 + self.delta_e * self.delta_e
    }

    /// `16Ω⁴ + δ²`
    fn com_denominator(&self) -> T {
        let w = T::lit(4.0) * self.omega * self.omega;
        w * w + self.delta_e * self.delta_e
    }

    /// Joint detection density of the evolved pair:
    ///
    /// ```text
    /// 2|C_t|² e^{-8Ω²(x₁+x₂)²/(16Ω⁴+δ²)} e^{-2((x₁-x₂)² + 4x₀²)/σ²/(1/σ⁴+δ²)}
    ///     · (cosh B + η cos C)
    /// ```
    ///
    /// with `B = 8(x₁-x₂)x₀/σ²/(1/σ⁴+δ²)` and `C = 8δ(x₁-x₂)x₀/(1/σ⁴+δ²)`,
    /// evaluated through the two direct Gaussians so it cannot overflow.
    pub fn evolved_pdf(&self, x1: T, x2: T) -> T {
        let eta: T = self.exchange.sign();
        let (com, e, b, c) = self.exponents(x1, x2);
        self.pdf_prefactor() * (-com).exp() * exchange_pair(e, b, c, eta)
    }

    /// The evolved density without exchange terms.
    pub fn direct_pdf(&self, x1: T, x2: T) -> T {
        let (com, e, b, _) = self.exponents(x1, x2);
        self.pdf_prefactor() * (-com).exp() * direct_pair(e, b)
    }

    fn pdf_prefactor(&self) -> T {
        let m = self.prefactor_modulus();
        m * m
    }

    /// `(center-of-mass exponent, E, B, C)` of the closed-form density.
    fn exponents(&self, x1: T, x2: T) -> (T, T, T, T) {
        let (s, d) = Self::sum_difference(x1, x2);
        let two_x0 = T::lit(2.0) * self.x0;
        let com = T::lit(8.0) * self.omega * self.omega * s * s / self.com_denominator();
        let rel_scale = T::lit(2.0) / (self.sigma * self.sigma * self.relative_denominator());
        let e = rel_scale * (d * d + two_x0 * two_x0);
        (
            com,
            e,
            self.envelope_rate() * d,
            self.fringe_wavenumber() * d,
        )
    }

    /// `density / direct density = 1 + η cos C / cosh B`.
    pub fn interference_ratio(&self, x1: T, x2: T) -> T {
        let eta: T = self.exchange.sign();
        let d = x1 - x2;
        T::one() + eta * (self.fringe_wavenumber() * d).cos() / (self.envelope_rate() * d).cosh()
    }

    /// `8δx₀/(1/σ⁴+δ²)`
    pub fn fringe_wavenumber(&self) -> T {
        T::lit(8.0) * self.delta_e * self.x0 / self.relative_denominator()
    }

    /// `8x₀/σ²/(1/σ⁴+δ²)`
    pub fn envelope_rate(&self) -> T {
        T::lit(8.0) * self.x0 / (self.sigma * self.sigma * self.relative_denominator())
    }

    /// `π(1/σ⁴+δ²)/(4δx₀)`, the period of the fringes in `x₁ - x₂`.
    pub fn fringe_period(&self) -> Result<T> {
        if self.x0 == T::zero() || self.delta_e == T::zero() {
            return Err(HbtError::NoFringes(format!(
                "fringe period needs x0 > 0 and delta_e > 0 (x0 = {}, delta_e = {})",
                self.x0, self.delta_e
            )));
        }
        Ok(T::PI() * self.relative_denominator() / (T::lit(4.0) * self.delta_e * self.x0))
    }

    pub fn visibility_envelope(&self, dx: T) -> T {
        (self.envelope_rate() * dx).cosh().recip()
    }

    /// `1 + η e^{-8x₀²σ²}`; independent of `δ`.
    pub fn total_probability(&self) -> T {
        let eta: T = self.exchange.sign();
        let u = self.x0 * self.sigma;
        T::one() + eta * (T::lit(-8.0) * u * u).exp()
    }

    pub fn entanglement_diagnostic(&self) -> EntanglementDiagnostic<T> {
        let ratio = T::lit(2.0) * self.omega * self.sigma;
        let inv_s4 = (self.sigma * self.sigma).recip().powi(2);
        let regime = if (ratio - T::one()).abs() < T::lit(PRODUCT_STATE_TOLERANCE) {
            EntanglementRegime::Product
        } else if inv_s4 <= T::lit(STRONG_ENTANGLEMENT_RATIO) * self.delta_e * self.delta_e {
            EntanglementRegime::StrongEntangled
        } else {
            EntanglementRegime::Entangled
        };
        EntanglementDiagnostic { ratio, regime }
    }

    /// Standard deviations `(x₁+x₂, x₁-x₂)` of one direct term of the evolved density.
    pub(crate) fn direct_term_widths(&self) -> (T, T) {
        let four = T::lit(4.0);
        let var_s = self.com_denominator() / (T::lit(16.0) * self.omega * self.omega);
        let var_d = self.sigma * self.sigma * self.relative_denominator() / four;
        (var_s.sqrt(), var_d.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(EprParams::new(0.0, 1.0, 1.0, Exchange::Boson, 1.0).is_err());
        assert!(EprParams::new(1.0, -1.0, 1.0, Exchange::Boson, 1.0).is_err());
        assert!(EprParams::new(1.0, 1.0, -1.0, Exchange::Boson, 1.0).is_err());
        assert!(EprParams::new(1.0, 1.0, 1.0, Exchange::Boson, -1.0).is_err());
        assert!(EprParams::new(1.0, 1.0, 0.0, Exchange::Fermion, 1.0).is_err());
        assert!(EprParams::new(1.0, 1.0, 0.0, Exchange::Boson, 0.0).is_ok());
    }

    #[test]
    fn propagation_doubles_the_spread() {
        let e = EprParams::with_propagation(
            2.0,
            1.0,
            1.0,
            Exchange::Boson,
            PropagationInput::Optical {
                wavelength: 0.5,
                distance: std::f64::consts::PI,
            },
        )
        .unwrap();
        // δ = 2λL/π
        assert!((e.delta_e() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exchange_symmetry_of_the_amplitude() {
        for eta in [Exchange::Boson, Exchange::Fermion] {
            let e = EprParams::new(1.3, 0.7, 0.9, eta, 0.0).unwrap();
            for &(x1, x2) in &[(0.1, 0.4), (-1.0, 2.0), (0.0, 0.0)] {
                let a = e.position_amplitude(x1, x2);
                let b = e.position_amplitude(x2, x1) * eta.sign::<f64>();
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn antisymmetric_pair_vanishes_at_equal_positions() {
        let e = EprParams::new(1.3, 0.7, 0.9, Exchange::Fermion, 3.0).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert_eq!(e.position_amplitude(x, x).norm(), 0.0);
            assert_eq!(e.evolved_pdf(x, x), 0.0);
        }
    }

    #[test]
    fn product_point_equals_independent_packets_at_t0() {
        let p =
            PacketParams::new(0.9, 1.2, Exchange::Boson, PropagationInput::Spread(0.0)).unwrap();
        let e = EprParams::product_state(&p);
        assert_eq!(
            e.entanglement_diagnostic().regime,
            EntanglementRegime::Product
        );
        for &(x1, x2) in &[(0.0f64, 0.0f64), (1.0, -1.3), (0.4, 2.2)] {
            let a = e.position_amplitude(x1, x2);
            let b = p.initial_amplitude(x1, x2);
            assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn evolved_pdf_reduces_at_product_point() {
        for eta in [Exchange::Boson, Exchange::Fermion] {
            let p = PacketParams::new(1.1, 0.8, eta, PropagationInput::Spread(7.0)).unwrap();
            let e = EprParams::product_state(&p);
            for &(x1, x2) in &[(0.0, 0.3), (1.0, -1.3), (4.4, 2.2), (-6.0, 5.0)] {
                assert!(rel(e.evolved_pdf(x1, x2), p.joint_pdf(x1, x2)) < 1e-12);
            }
            assert!(rel(e.fringe_period().unwrap(), p.fringe_period().unwrap()) < 1e-12);
            assert!(rel(e.total_probability(), p.total_probability()) < 1e-14);
        }
    }

    #[test]
    fn zero_spread_density_is_amplitude_squared() {
        let e = EprParams::new(1.7, 0.6, 0.8, Exchange::Boson, 0.0).unwrap();
        for &(x1, x2) in &[(0.0, 0.3), (1.0, -0.2), (0.4, -1.2)] {
            let a = e.position_amplitude(x1, x2).norm_sqr();
            assert!(rel(e.evolved_pdf(x1, x2), a) < 1e-12);
        }
    }

    #[test]
    fn prefactor_modulus_matches_complex_prefactor() {
        for &(s, o, d) in &[(1.0, 1.0, 0.0), (2.0, 0.3, 5.0), (0.4, 3.0, 100.0)] {
            let e = EprParams::new(s, o, 1.0, Exchange::Boson, d).unwrap();
            assert!(rel(e.evolution_prefactor().norm(), e.prefactor_modulus()) < 1e-14);
        }
    }

    #[test]
    fn diagnostic_regimes() {
        let product = EprParams::new(2.0, 0.25, 1.0, Exchange::Boson, 5.0).unwrap();
        assert_eq!(
            product.entanglement_diagnostic().regime,
            EntanglementRegime::Product
        );
        assert_eq!(product.entanglement_diagnostic().ratio, 1.0);
        let strong = EprParams::new(100.0, 1.0, 1.0, Exchange::Boson, 1.0).unwrap();
        assert_eq!(
            strong.entanglement_diagnostic().regime,
            EntanglementRegime::StrongEntangled
        );
        // 2Ωσ = 1.5, 1/σ⁴ = 1.98 > 1e-4
        let mid = EprParams::new(0.75f64, 1.0, 1.0, Exchange::Boson, 1.0).unwrap();
        let diag = mid.entanglement_diagnostic();
        assert_eq!(diag.regime, EntanglementRegime::Entangled);
        assert!((diag.ratio - 1.5).abs() < 1e-15);
    }

    #[test]
    fn strong_entanglement_period_matches_classical_limit() {
        // 1/σ⁴ = 1e-4·δ² exactly at the regime boundary
        let delta: f64 = 200.0;
        let sigma = (1e-4 * delta * delta).powf(-0.25);
        let e = EprParams::new(sigma, 1.0, 3.0, Exchange::Boson, delta).unwrap();
        assert_eq!(
            e.entanglement_diagnostic().regime,
            EntanglementRegime::StrongEntangled
        );
        let classical = std::f64::consts::PI * (delta / 2.0) / (2.0 * 3.0);
        assert!(rel(e.fringe_period().unwrap(), classical) <= 1.0001e-4);
        let far = EprParams::new(10.0, 1.0, 3.0, Exchange::Boson, delta).unwrap();
        assert!(rel(far.fringe_period().unwrap(), classical) < 1e-4 * 1e-2);
        let doubled = EprParams::new(10.0, 1.0, 6.0, Exchange::Boson, delta).unwrap();
        assert!(
            rel(
                2.0 * doubled.fringe_period().unwrap(),
                far.fringe_period().unwrap()
            ) < 1e-15
        );
    }

    #[test]
    fn no_fringes_without_separation_or_spread() {
        assert!(EprParams::new(1.0, 1.0, 0.0, Exchange::Boson, 1.0)
            .unwrap()
            .fringe_period()
            .is_err());
        assert!(EprParams::new(1.0, 1.0, 1.0, Exchange::Boson, 0.0)
            .unwrap()
            .fringe_period()
            .is_err());
    }

    proptest! {
        #[test]
        fn evolved_pdf_is_evolved_amplitude_squared(
            sigma in 0.2..3.0f64, omega in 0.2..3.0f64, x0 in 0.01..3.0f64,
            delta in 0.0..40.0f64, fermion in any::<bool>(),
            x1 in -6.0..6.0f64, x2 in -6.0..6.0f64,
        ) {
            let eta = if fermion { Exchange::Fermion } else { Exchange::Boson };
            let e = EprParams::new(sigma, omega, x0, eta, delta).unwrap();
            let a = e.evolved_amplitude(x1, x2).norm_sqr();
            let b = e.evolved_pdf(x1, x2);
            prop_assert!((a - b).abs() <= 1e-10 * a.max(b) + 1e-300, "{a} vs {b}");
        }

        #[test]
        fn evolved_pdf_is_exchange_symmetric(
            sigma in 0.2..3.0f64, omega in 0.2..3.0f64, x0 in 0.01..3.0f64,
            delta in 0.0..40.0f64, fermion in any::<bool>(),
            x1 in -6.0..6.0f64, x2 in -6.0..6.0f64,
        ) {
            let eta = if fermion { Exchange::Fermion } else { Exchange::Boson };
            let e = EprParams::new(sigma, omega, x0, eta, delta).unwrap();
            prop_assert!(rel(e.evolved_pdf(x1, x2), e.evolved_pdf(x2, x1)) < 1e-13);
        }
    }
}
