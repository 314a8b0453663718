use num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::histogram::CoincidenceHistogram;
use super::model::CoincidenceModel;
use crate::epr::EprParams;
use crate::error::{HbtError, Result};
use crate::real::{Real, GAUSS_LEGENDRE_4};
use crate::wavepacket::PacketParams;

/// Fewest histogrammed samples a fit accepts.
pub const MIN_FIT_COUNTS: u64 = 10_000;
/// Fewest fringe periods the histogram range must span.
pub const MIN_PERIODS: f64 = 3.0;
/// Fitted visibilities above `1 + VISIBILITY_TOLERANCE` are rejected.
pub const VISIBILITY_TOLERANCE: f64 = 0.25;

const MAX_ITERATIONS: usize = 300;
const START_MULTIPLIERS: [f64; 5] = [1.0, 0.98, 1.02, 0.95, 1.05];
const NPAR: usize = 5;

/// Source of the starting point for [`fit_fringes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FringeModel<T> {
    /// Independent packets; starts from their analytic marginal.
    Qhbt(PacketParams<T>),
    /// Entangled pair; starts from its analytic marginal.
    Ehbt(EprParams<T>),
    /// No prior: fringe wavenumber from the histogram spectrum.
    Blind,
}

/// Result of fitting `A e^{-a d²} (cosh(bd) + κ cos(cd))` to a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit<T> {
    /// `2π/c`
    pub period: T,
    /// `|κ|`
    pub visibility: T,
    /// Signed exchange contrast `κ`; negative for an anti-bunching dip.
    pub contrast: T,
    pub amplitude: T,
    /// `a`
    pub envelope_rate: T,
    /// Standard deviation of the Gaussian factor, `1/√(2a)`.
    pub envelope_scale: T,
    /// `b`
    pub cosh_rate: T,
    /// `c`
    pub wavenumber: T,
    /// `√(χ²/bins)` with Neyman weights; about 1 for a good fit.
    pub residual_rms: T,
    pub chi_square: T,
    pub degrees_of_freedom: usize,
    pub iterations: usize,
    pub starts: usize,
}

impl<T: Real> FringeFit<T> {
    fn params(&self) -> [T; NPAR] {
        [
            self.amplitude,
            self.envelope_rate,
            self.cosh_rate * self.cosh_rate,
            self.wavenumber,
            self.contrast,
        ]
    }

    /// Fitted count density per unit `d`.
    pub fn eval(&self, d: T) -> T {
        shape(&self.params(), d).0
    }

    /// Fitted counts in `[lo, hi)`.
    pub fn bin_expectation(&self, lo: T, hi: T) -> T {
        bin_model(&self.params(), lo, hi).0
    }

    pub fn expected_counts(&self, h: &CoincidenceHistogram<T>) -> Vec<T> {
        h.bin_edges
            .windows(2)
            .map(|w| self.bin_expectation(w[0], w[1]))
            .collect()
    }
}

/// Weighted least-squares fit of the fringe form to a coincidence histogram.
///
/// Starting values come from `model`; restarts perturb the wavenumber by up
/// to 5% and flip the sign of the contrast, and the lowest `χ²` wins.
pub fn fit_fringes<T: Real>(
    h: &CoincidenceHistogram<T>,
    model: &FringeModel<T>,
) -> Result<FringeFit<T>> {
    if h.n_samples() < MIN_FIT_COUNTS {
        return Err(HbtError::TooFewSamples {
            got: h.n_samples(),
            min: MIN_FIT_COUNTS,
        });
    }
    let (lo, hi) = h.range();
    let (rate, q, c) = match model {
        FringeModel::Qhbt(p) => analytic_start(p),
        FringeModel::Ehbt(e) => analytic_start(e),
        FringeModel::Blind => blind_start(h),
    };
    let span = ((hi - lo) * c / T::TAU()).as_f64();
    if !(span >= MIN_PERIODS) {
        return Err(HbtError::FitFailure(format!(
            "histogram spans {span:.2} fringe periods, need at least {MIN_PERIODS}"
        )));
    }

    let data = FitData::new(h);
    let mut best: Option<([T; NPAR], T, usize)> = None;
    let mut starts = 0;
    let mut iterations = 0;
    for mult in START_MULTIPLIERS {
        let c0 = c * T::lit(mult);
        let Some((amp, kappa)) = data.linear_start(rate, q, c0) else {
            continue;
        };
        for sign in [T::one(), -T::one()] {
            starts += 1;
            let p0 = [amp, rate, q, c0, sign * kappa];
            if let Some((p, chi2, its)) = data.levenberg_marquardt(p0) {
                iterations += its;
                if best.as_ref().is_none_or(|b| chi2 < b.1) {
                    best = Some((p, chi2, its));
                }
            }
        }
    }
    let Some((p, chi2, _)) = best else {
        return Err(HbtError::FitFailure(format!(
            "no start out of {starts} converged (initial wavenumber {c}, envelope rate {rate})"
        )));
    };
    let [amplitude, a, q, c, kappa] = p;
    let visibility = kappa.abs();
    if visibility > T::lit(1.0 + VISIBILITY_TOLERANCE) {
        return Err(HbtError::FitFailure(format!(
            "fitted visibility {visibility} exceeds 1 + {VISIBILITY_TOLERANCE}"
        )));
    }
    let bins = h.bins();
    Ok(FringeFit {
        period: T::TAU() / c,
        visibility,
        contrast: kappa,
        amplitude,
        envelope_rate: a,
        envelope_scale: (T::lit(2.0) * a).sqrt().recip(),
        cosh_rate: q.sqrt(),
        wavenumber: c,
        residual_rms: (chi2 / T::from_usize(bins).unwrap()).sqrt(),
        chi_square: chi2,
        degrees_of_freedom: bins.saturating_sub(NPAR),
        iterations,
        starts,
    })
}

fn analytic_start<T: Real, M: CoincidenceModel<T>>(m: &M) -> (T, T, T) {
    let shape = m.marginal();
    let b = shape.cosh_rate();
    (shape.rate, b * b, shape.wavenumber)
}

/// Envelope rate from the histogram variance and wavenumber from the
/// strongest spectral peak at three or more cycles across the range.
fn blind_start<T: Real>(h: &CoincidenceHistogram<T>) -> (T, T, T) {
    let centers = h.bin_centers();
    let total = T::from_u64(h.n_total.max(1)).unwrap();
    let weight = |j: usize| T::from_u64(h.counts[j]).unwrap();
    let mean = (0..h.bins()).map(|j| weight(j) * centers[j]).sum::<T>() / total;
    let var = (0..h.bins())
        .map(|j| weight(j) * (centers[j] - mean) * (centers[j] - mean))
        .sum::<T>()
        / total;
    let rate = (T::lit(2.0) * var.max(h.bin_width() * h.bin_width())).recip();

    let n = h.bins();
    let mut buf: Vec<Complex<T>> = h
        .counts
        .iter()
        .map(|&c| Complex::from(T::from_u64(c).unwrap()))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<T> = buf.iter().map(|z| z.norm()).collect();
    let first = 3.min(n / 2);
    let k = (first..=n / 2)
        .max_by(|&i, &j| mag[i].partial_cmp(&mag[j]).unwrap())
        .unwrap_or(first);
    let mut peak = T::from_usize(k).unwrap();
    if k > first && k < n / 2 {
        let (l, m, r) = (mag[k - 1], mag[k], mag[k + 1]);
        let denom = l - T::lit(2.0) * m + r;
        if denom < T::zero() {
            peak += T::lit(0.5) * (l - r) / denom;
        }
    }
    let (lo, hi) = h.range();
    (rate, T::zero(), T::TAU() * peak / (hi - lo))
}

/// Model density and its gradient in `(A, a, q = b², c, κ)`.
fn shape<T: Real>(p: &[T; NPAR], d: T) -> (T, [T; NPAR]) {
    let [amp, a, q, c, kappa] = *p;
    let half = T::lit(0.5);
    let gauss_exp = -a * d * d;
    let g = gauss_exp.exp();
    let r = q.max(T::zero()).sqrt();
    let x = r * d.abs();
    // e^{-ad²} cosh(bd) and ∂/∂q of it
    let (gch, dgch) = if x < T::lit(1e-4) {
        let d2 = d * d;
        (
            g * (T::one() + half * q * d2 + q * q * d2 * d2 / T::lit(24.0)),
            g * (half * d2 + q * d2 * d2 / T::lit(12.0)),
        )
    } else {
        let up = (gauss_exp + x).exp();
        let down = (gauss_exp - x).exp();
        (
            half * (up + down),
            d.abs() * half * (up - down) / (T::lit(2.0) * r),
        )
    };
    let (sin, cos) = (c * d).sin_cos();
    let base = gch + kappa * g * cos;
    let value = amp * base;
    (
        value,
        [
            base,
            -d * d * value,
            amp * dgch,
            -amp * kappa * g * d * sin,
            amp * g * cos,
        ],
    )
}

fn bin_model<T: Real>(p: &[T; NPAR], lo: T, hi: T) -> (T, [T; NPAR]) {
    let mid = T::lit(0.5) * (lo + hi);
    let half = T::lit(0.5) * (hi - lo);
    let mut value = T::zero();
    let mut grad = [T::zero(); NPAR];
    for &(node, weight) in &GAUSS_LEGENDRE_4 {
        let w = T::lit(weight) * half;
        let (v, gr) = shape(p, mid + half * T::lit(node));
        value += w * v;
        for k in 0..NPAR {
            grad[k] += w * gr[k];
        }
    }
    (value, grad)
}

struct FitData<T> {
    edges: Vec<(T, T)>,
    counts: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> FitData<T> {
    fn new(h: &CoincidenceHistogram<T>) -> Self {
        let counts: Vec<T> = h.counts.iter().map(|&c| T::from_u64(c).unwrap()).collect();
        FitData {
            edges: h.bin_edges.windows(2).map(|w| (w[0], w[1])).collect(),
            weights: counts.iter().map(|&c| c.max(T::one()).recip()).collect(),
            counts,
        }
    }

    fn chi_square(&self, p: &[T; NPAR]) -> T {
        self.edges
            .iter()
            .zip(self.counts.iter().zip(&self.weights))
            .map(|(&(lo, hi), (&y, &w))| {
                let r = y - bin_model(p, lo, hi).0;
                w * r * r
            })
            .sum()
    }

    /// Weighted linear solve for `A` and `κ` at fixed `(a, q, c)`.
    fn linear_start(&self, a: T, q: T, c: T) -> Option<(T, T)> {
        let probe = [T::one(), a, q, c, T::zero()];
        let (mut m11, mut m12, mut m22, mut v1, mut v2) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for (&(lo, hi), (&y, &w)) in self.edges.iter().zip(self.counts.iter().zip(&self.weights)) {
            // with A = 1 and κ = 0 the value is the cosh part and ∂/∂κ the cosine part
            let (g1, grad) = bin_model(&probe, lo, hi);
            let g2 = grad[4];
            m11 += w * g1 * g1;
            m12 += w * g1 * g2;
            m22 += w * g2 * g2;
            v1 += w * g1 * y;
            v2 += w * g2 * y;
        }
        let det = m11 * m22 - m12 * m12;
        if !(det > T::zero()) {
            return None;
        }
        let amp = (v1 * m22 - v2 * m12) / det;
        let b = (m11 * v2 - m12 * v1) / det;
        (amp > T::zero() && amp.is_finite()).then(|| (amp, b / amp))
    }

    fn levenberg_marquardt(&self, p0: [T; NPAR]) -> Option<([T; NPAR], T, usize)> {
        let mut p = p0;
        let mut chi2 = self.chi_square(&p);
        let mut lambda = T::lit(1e-3);
        for iteration in 1..=MAX_ITERATIONS {
            let mut m = [[T::zero(); NPAR]; NPAR];
            let mut g = [T::zero(); NPAR];
            for (&(lo, hi), (&y, &w)) in
                self.edges.iter().zip(self.counts.iter().zip(&self.weights))
            {
                let (mu, jac) = bin_model(&p, lo, hi);
                let r = y - mu;
                for i in 0..NPAR {
                    g[i] += w * r * jac[i];
                    for k in 0..NPAR {
                        m[i][k] += w * jac[i] * jac[k];
                    }
                }
            }
            let scale: [T; NPAR] = std::array::from_fn(|i| {
                let s = m[i][i].sqrt();
                if s > T::zero() {
                    s
                } else {
                    T::one()
                }
            });
            loop {
                let mut a = [[T::zero(); NPAR]; NPAR];
                let mut rhs = [T::zero(); NPAR];
                for i in 0..NPAR {
                    for k in 0..NPAR {
                        a[i][k] = m[i][k] / (scale[i] * scale[k]);
                    }
                    a[i][i] += lambda;
                    rhs[i] = g[i] / scale[i];
                }
                let step = solve(a, rhs)?;
                let mut trial = p;
                for i in 0..NPAR {
                    trial[i] += step[i] / scale[i];
                }
                trial[2] = trial[2].max(T::zero());
                let valid = trial[0] > T::zero() && trial[1] > T::zero() && trial[3] > T::zero();
                if valid {
                    let trial_chi2 = self.chi_square(&trial);
                    if trial_chi2.is_finite() && trial_chi2 < chi2 {
                        let gain = chi2 - trial_chi2;
                        p = trial;
                        chi2 = trial_chi2;
                        lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                        if gain <= T::lit(1e-10) * chi2 + T::lit(1e-12) {
                            return Some((p, chi2, iteration));
                        }
                        break;
                    }
                }
                lambda *= T::lit(10.0);
                if lambda > T::lit(1e12) {
                    // no downhill step left: a minimum
                    return chi2.is_finite().then_some((p, chi2, iteration));
                }
            }
        }
        None
    }
}

/// Gaussian elimination with partial pivoting.
fn solve<T: Real>(mut a: [[T; NPAR]; NPAR], mut b: [T; NPAR]) -> Option<[T; NPAR]> {
    for col in 0..NPAR {
        let pivot =
            (col..NPAR).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[pivot][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..NPAR {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, &v) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [T::zero(); NPAR];
    for row in (0..NPAR).rev() {
        let tail: T = (row + 1..NPAR).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
