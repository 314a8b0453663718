//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point scalar: `f32` or `f64`.
///
/// The documented tolerances throughout the crate assume `f64`; `f32`
/// instantiations are useful for quick scans but loosen every bound.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Converts a literal constant.
    fn lit(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// Uniform draw on `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            #[inline]
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Below this `|B|` the pair sums are rewritten in half-angle form.
const HALF_ANGLE_LIMIT: f64 = 1.0;

/// `e^{-E} · 2cosh B`, the sum of the two direct Gaussians `e^{-(E∓B)}`.
#[inline]
pub(crate) fn direct_pair<T: Real>(e: T, b: T) -> T {
    if b.abs() <= T::lit(HALF_ANGLE_LIMIT) {
        T::lit(2.0) * ((-e).exp() * b.cosh())
    } else {
        (b - e).exp() + (-b - e).exp()
    }
}

/// `e^{-E} · 2(cosh B + η cos C)`.
///
/// Any real `η` is accepted; the half-angle path applies to `η = ±1`.
///
/// Near `B = 0` this is `4e^{-E}(sinh²(B/2) + cos²(C/2))` for bosons and
/// `4e^{-E}(sinh²(B/2) + sin²(C/2))` for fermions, which keeps full relative
/// precision where the direct and exchange terms nearly cancel.
#[inline]
pub(crate) fn exchange_pair<T: Real>(e: T, b: T, c: T, eta: T) -> T {
    let half = T::lit(0.5);
    let unit = eta.abs() == T::one();
    if unit && b.abs() <= T::lit(HALF_ANGLE_LIMIT) {
        let sh = (half * b).sinh();
        let tr = if eta > T::zero() {
            (half * c).cos()
        } else {
            (half * c).sin()
        };
        T::lit(4.0) * ((-e).exp() * (sh * sh + tr * tr))
    } else {
        (b - e).exp() + (-b - e).exp() + T::lit(2.0) * eta * (-e).exp() * c.cos()
    }
}

/// `e^{m}(e^{h} + η e^{-h})` for complex exponents, in `2e^{m}cosh h` or
/// `2e^{m}sinh h` form when `|Re h|` is small.
#[inline]
pub(crate) fn exchange_pair_amplitude<T: Real>(m: Complex<T>, h: Complex<T>, eta: T) -> Complex<T> {
    if h.re.abs() <= T::lit(HALF_ANGLE_LIMIT) {
        let hyp = if eta > T::zero() { h.cosh() } else { h.sinh() };
        m.exp() * hyp * T::lit(2.0)
    } else {
        (m + h).exp() + (m - h).exp() * eta
    }
}

/// Fixed-order Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) const GAUSS_LEGENDRE_4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Integrates `f` over `[lo, hi]` with the 4-point Gauss-Legendre rule.
pub(crate) fn integrate_gl4<T: Real>(lo: T, hi: T, mut f: impl FnMut(T) -> T) -> T {
    let mid = T::lit(0.5) * (lo + hi);
    let half = T::lit(0.5) * (hi - lo);
    GAUSS_LEGENDRE_4
        .iter()
        .map(|&(node, weight)| T::lit(weight) * f(mid + half * T::lit(node)))
        .sum::<T>()
        * half
}
