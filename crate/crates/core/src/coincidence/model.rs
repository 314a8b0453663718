use serde::Serialize;

use crate::epr::EprParams;
use crate::error::Result;
use crate::exchange::Exchange;
use crate::real::{direct_pair, exchange_pair, integrate_gl4, Real};
use crate::wavepacket::PacketParams;

/// A two-particle scenario that the coincidence counter can sample.
///
/// Every quantum density in the crate has the form
/// `direct(x₁, x₂) · (1 + η cos C / cosh B)` where `direct` is a normalized
/// equal-weight mixture of two Gaussians and `B`, `C` depend only on
/// `x₁ - x₂`. The sampler and the fit rely on that structure.
pub trait CoincidenceModel<T: Real>: Sync {
    fn exchange(&self) -> Exchange;

    /// Joint detection density.
    fn density(&self, x1: T, x2: T) -> T;

    /// The density without exchange terms; integrates to one.
    fn direct_density(&self, x1: T, x2: T) -> T;

    /// `density / direct_density`, within `[0, 2]`.
    fn interference_ratio(&self, x1: T, x2: T) -> T;

    /// Gaussian mixture equal to [`direct_density`](Self::direct_density).
    fn proposal(&self) -> GaussianMixture<T>;

    /// Closed-form marginal of the density in `x₁ - x₂`.
    fn marginal(&self) -> MarginalShape<T>;

    fn fringe_period(&self) -> Result<T>;

    /// Integral of the density over the plane.
    fn total_probability(&self) -> T;
}

/// Equal-weight mixture in `s = x₁ + x₂`, `d = x₁ - x₂`:
/// `s ~ N(0, s_std²)` and `d ~ N(±d_offset, d_std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMixture<T> {
    pub s_std: T,
    pub d_std: T,
    pub d_offset: T,
}

impl<T: Real> GaussianMixture<T> {
    /// Density with respect to `dx₁ dx₂`.
    pub fn density(&self, x1: T, x2: T) -> T {
        let (s, d) = (x1 + x2, x1 - x2);
        let norm = |z: T, std: T| {
            let u = z / std;
            (T::lit(-0.5) * u * u).exp() / (std * T::TAU().sqrt())
        };
        norm(s, self.s_std)
            * (norm(d - self.d_offset, self.d_std) + norm(d + self.d_offset, self.d_std))
    }
}

/// Marginal density in `d = x₁ - x₂`:
/// `K e^{-a(d² + d₀²)} (cosh(bd) + η cos(cd))` with `b = 2a d₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalShape<T> {
    pub scale: T,
    pub rate: T,
    pub offset: T,
    pub wavenumber: T,
    pub eta: T,
}

impl<T: Real> MarginalShape<T> {
    pub fn cosh_rate(&self) -> T {
        T::lit(2.0) * self.rate * self.offset
    }

    fn exponent(&self, d: T) -> T {
        self.rate * (d * d + self.offset * self.offset)
    }

    pub fn eval(&self, d: T) -> T {
        let half = T::lit(0.5);
        half * self.scale
            * exchange_pair(
                self.exponent(d),
                self.cosh_rate() * d,
                self.wavenumber * d,
                self.eta,
            )
    }

    /// The marginal of the direct terms alone.
    pub fn direct(&self, d: T) -> T {
        T::lit(0.5) * self.scale * direct_pair(self.exponent(d), self.cosh_rate() * d)
    }

    /// `K√(π/a) (1 + η e^{-a d₀²} e^{-c²/4a})`
    pub fn integral(&self) -> T {
        let a = self.rate;
        let exchange = (-a * self.offset * self.offset
            - self.wavenumber * self.wavenumber / (T::lit(4.0) * a))
            .exp();
        self.scale * (T::PI() / a).sqrt() * (T::one() + self.eta * exchange)
    }

    /// Integral over `[lo, hi]`, split so every panel is short against both
    /// the fringe period and the envelope width.
    pub fn bin_integral(&self, lo: T, hi: T) -> T {
        let width = hi - lo;
        let mut scale = (T::lit(0.5) / self.rate).sqrt();
        if self.wavenumber > T::zero() {
            scale = scale.min(T::TAU() / self.wavenumber);
        }
        let panels = (width / (T::lit(0.05) * scale))
            .ceil()
            .as_f64()
            .clamp(1.0, 10_000.0) as usize;
        let step = width / T::from_usize(panels).unwrap();
        (0..panels)
            .map(|j| {
                let a = lo + step * T::from_usize(j).unwrap();
                integrate_gl4(a, a + step, |d| self.eval(d))
            })
            .sum()
    }
}

impl<T: Real> CoincidenceModel<T> for PacketParams<T> {
    fn exchange(&self) -> Exchange {
        PacketParams::exchange(self)
    }

    fn density(&self, x1: T, x2: T) -> T {
        self.joint_pdf(x1, x2)
    }

    fn direct_density(&self, x1: T, x2: T) -> T {
        self.direct_pdf(x1, x2)
    }

    fn interference_ratio(&self, x1: T, x2: T) -> T {
        PacketParams::interference_ratio(self, x1, x2)
    }

    fn proposal(&self) -> GaussianMixture<T> {
        let eps2 = self.epsilon() * self.epsilon();
        let d = eps2 * eps2 + self.delta() * self.delta();
        let std = (d / (T::lit(2.0) * eps2)).sqrt();
        GaussianMixture {
            s_std: std,
            d_std: std,
            d_offset: T::lit(2.0) * self.x0(),
        }
    }

    fn marginal(&self) -> MarginalShape<T> {
        let eps2 = self.epsilon() * self.epsilon();
        let d = eps2 * eps2 + self.delta() * self.delta();
        MarginalShape {
            scale: self.epsilon() / (T::PI() * d).sqrt(),
            rate: eps2 / d,
            offset: T::lit(2.0) * self.x0(),
            wavenumber: self.fringe_wavenumber(),
            eta: self.exchange().sign(),
        }
    }

    fn fringe_period(&self) -> Result<T> {
        PacketParams::fringe_period(self)
    }

    fn total_probability(&self) -> T {
        PacketParams::total_probability(self)
    }
}

impl<T: Real> CoincidenceModel<T> for EprParams<T> {
    fn exchange(&self) -> Exchange {
        EprParams::exchange(self)
    }

    fn density(&self, x1: T, x2: T) -> T {
        self.evolved_pdf(x1, x2)
    }

    fn direct_density(&self, x1: T, x2: T) -> T {
        self.direct_pdf(x1, x2)
    }

    fn interference_ratio(&self, x1: T, x2: T) -> T {
        EprParams::interference_ratio(self, x1, x2)
    }

    fn proposal(&self) -> GaussianMixture<T> {
        let (s_std, d_std) = self.direct_term_widths();
        GaussianMixture {
            s_std,
            d_std,
            d_offset: T::lit(2.0) * self.x0(),
        }
    }

    fn marginal(&self) -> MarginalShape<T> {
        let (s_std, d_std) = self.direct_term_widths();
        let c = self.prefactor_modulus();
        // ∫ e^{-s²/2s_std²} ds
        let com = s_std * T::TAU().sqrt();
        MarginalShape {
            scale: c * c * com,
            rate: (T::lit(2.0) * d_std * d_std).recip(),
            offset: T::lit(2.0) * self.x0(),
            wavenumber: self.fringe_wavenumber(),
            eta: self.exchange().sign(),
        }
    }

    fn fringe_period(&self) -> Result<T> {
        EprParams::fringe_period(self)
    }

    fn total_probability(&self) -> T {
        EprParams::total_probability(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::PropagationInput;

    fn packets(eta: Exchange) -> PacketParams<f64> {
        PacketParams::new(1.0, 1.5, eta, PropagationInput::Spread(4.0)).unwrap()
    }

    fn epr(eta: Exchange) -> EprParams<f64> {
        EprParams::new(1.3, 0.8, 1.2, eta, 3.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs())
    }

    fn check_proposal<M: CoincidenceModel<f64>>(m: &M) {
        let g = m.proposal();
        for &(x1, x2) in &[(0.0, 0.0), (1.0, -2.0), (-3.0, 0.5), (4.0, 4.5)] {
            assert!(rel(g.density(x1, x2), m.direct_density(x1, x2)) < 1e-12);
            let ratio = m.interference_ratio(x1, x2);
            let direct = m.direct_density(x1, x2);
            assert!((m.density(x1, x2) - ratio * direct).abs() < 1e-12 * direct);
            assert!(m.density(x1, x2) <= 2.0 * g.density(x1, x2) * (1.0 + 1e-12));
        }
    }

    fn check_marginal<M: CoincidenceModel<f64>>(m: &M) {
        let shape = m.marginal();
        assert!(rel(shape.integral(), m.total_probability()) < 1e-12);
        // 1-D quadrature over x₁ + x₂ at fixed d; dx₁dx₂ = ds dd / 2
        for d in [0.0, 0.7, -2.5, 6.0] {
            let n = 20_000;
            let h = 200.0 / n as f64;
            let sum: f64 = (0..=n)
                .map(|j| {
                    let s = -100.0 + h * j as f64;
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    w * m.density(0.5 * (s + d), 0.5 * (s - d))
                })
                .sum();
            let quad = 0.5 * sum * h;
            assert!(
                (quad - shape.eval(d)).abs() < 1e-10,
                "d = {d}: {quad} vs {}",
                shape.eval(d)
            );
        }
    }

    #[test]
    fn packet_proposal_and_marginal() {
        for eta in [Exchange::Boson, Exchange::Fermion] {
            check_proposal(&packets(eta));
            check_marginal(&packets(eta));
        }
    }

    #[test]
    fn epr_proposal_and_marginal() {
        for eta in [Exchange::Boson, Exchange::Fermion] {
            check_proposal(&epr(eta));
            check_marginal(&epr(eta));
        }
    }

    #[test]
    fn bin_integrals_add_up() {
        let shape = packets(Exchange::Boson).marginal();
        let total: f64 = (0..200)
            .map(|j| {
                let lo = -50.0 + 0.5 * j as f64;
                shape.bin_integral(lo, lo + 0.5)
            })
            .sum();
        assert!(rel(total, shape.integral()) < 1e-10);
    }

    #[test]
    fn direct_marginal_integrates_to_scale() {
        let shape = epr(Exchange::Fermion).marginal();
        let direct = MarginalShape { eta: 0.0, ..shape };
        assert!(rel(direct.integral(), 1.0) < 1e-12);
        assert!(rel(direct.eval(0.8), shape.direct(0.8)) < 1e-14);
    }
}
