//! Two-particle position grids, FFT-based free evolution and 2-D quadrature.
//!
//! The spectral propagator is the reference against which the closed-form
//! evolution is checked: the initial wavefunction is sampled on a periodic
//! grid, transformed to the two-particle momentum representation, multiplied
//! by `exp(-i(p² + p'²)t/2)` and transformed back.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::epr::EprParams;
use crate::error::{HbtError, Result};
use crate::real::Real;
use crate::wavepacket::PacketParams;

/// Grid size used before any doubling.
pub const DEFAULT_POINTS: usize = 1024;
/// Doubling stops here.
pub const MAX_POINTS: usize = 4096;
/// Packet widths (amplitude `e^{-u²/w²}`) kept inside the grid on every side.
pub const COVERAGE_WIDTHS: f64 = 6.0;

/// Square periodic grid on `[-extent, extent)²` with `points` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec<T> {
    pub extent: T,
    pub points: usize,
}

/// Length scales a grid has to respect.
#[derive(Debug, Clone, Copy)]
struct Resolution<T> {
    /// Half-width the grid must cover.
    coverage: T,
    /// Narrowest amplitude width `w` of the `e^{-u²/w²}` factors.
    feature: T,
    fringe_period: Option<T>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(extent: T, points: usize) -> Result<Self> {
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(crate::error::invalid(
                "extent",
                format!("must be positive, got {extent}"),
            ));
        }
        if points < 16 || !points.is_multiple_of(2) {
            return Err(crate::error::invalid(
                "points",
                format!("need an even count of at least 16, got {points}"),
            ));
        }
        Ok(GridSpec { extent, points })
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.extent / T::from_usize(self.points).unwrap()
    }

    pub fn coordinate(&self, index: usize) -> T {
        -self.extent + self.spacing() * T::from_usize(index).unwrap()
    }

    pub fn coordinates(&self) -> Vec<T> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    fn wavenumbers(&self) -> Vec<T> {
        let n = self.points;
        let dk = T::TAU() / (T::from_usize(n).unwrap() * self.spacing());
        (0..n)
            .map(|j| {
                let signed = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                dk * T::lit(signed)
            })
            .collect()
    }

    /// Default grid for two independent packets: half-width
    /// `x₀ + 6·max(ε, Δ/ε)` and 1024 points, doubled until resolved.
    pub fn for_packets(p: &PacketParams<T>) -> Result<Self> {
        Self::resolved(p.resolution())
    }

    /// Default grid for the entangled pair.
    pub fn for_epr(e: &EprParams<T>) -> Result<Self> {
        Self::resolved(e.resolution())
    }

    fn resolved(res: Resolution<T>) -> Result<Self> {
        let mut grid = GridSpec::new(res.coverage, DEFAULT_POINTS)?;
        while grid.check(&res).is_err() && grid.points < MAX_POINTS {
            grid.points *= 2;
        }
        grid.check(&res)?;
        Ok(grid)
    }

    fn check(&self, res: &Resolution<T>) -> Result<()> {
        // relative slack for extents computed from the same formula
        if self.extent < res.coverage * T::lit(1.0 - 1e-12) {
            return Err(HbtError::UnderResolvedGrid(format!(
                "extent {} does not cover the packets (need {})",
                self.extent, res.coverage
            )));
        }
        let h = self.spacing();
        // the amplitude spectrum e^{-k²w²/4} must be negligible at the Nyquist limit
        let feature_limit = T::PI() * res.feature / T::lit(12.0);
        if h > feature_limit {
            return Err(HbtError::UnderResolvedGrid(format!(
                "spacing {h} exceeds {feature_limit} (packet width {})",
                res.feature
            )));
        }
        if let Some(period) = res.fringe_period {
            if h > period / T::lit(4.0) {
                return Err(HbtError::UnderResolvedGrid(format!(
                    "spacing {h} does not resolve fringe period {period}"
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> PacketParams<T> {
    fn resolution(&self) -> Resolution<T> {
        let eps = self.epsilon();
        let spread = eps.max(self.delta() / eps);
        Resolution {
            coverage: self.x0() + T::lit(COVERAGE_WIDTHS) * spread,
            feature: eps,
            fringe_period: self.fringe_period().ok(),
        }
    }
}

impl<T: Real> EprParams<T> {
    fn resolution(&self) -> Resolution<T> {
        // amplitude widths: e^{-s²/(2Ω)²} in x₁+x₂, e^{-d²σ²} in x₁-x₂,
        // both broadened by the evolution
        let (std_s, std_d) = self.direct_term_widths();
        let amp_s = std_s * T::lit(2.0);
        let amp_d = std_d * T::lit(2.0);
        let initial = (T::lit(2.0) * self.omega()).min(self.sigma().recip());
        Resolution {
            // |x₁| ≤ (|s| + |d|)/2 with d centred on ±2x₀
            coverage: self.x0() + T::lit(0.5 * COVERAGE_WIDTHS) * (amp_s + amp_d),
            feature: initial,
            fringe_period: self.fringe_period().ok(),
        }
    }
}

/// Complex field on a [`GridSpec`], row-major with the first coordinate slow.
#[derive(Debug, Clone)]
pub struct SpectralField<T> {
    pub grid: GridSpec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn sample(grid: GridSpec<T>, f: impl Fn(T, T) -> Complex<T> + Sync) -> Self {
        let n = grid.points;
        let xs = grid.coordinates();
        let mut values = vec![Complex::default(); n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let x1 = xs[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(x1, xs[j]);
            }
        });
        SpectralField { grid, values }
    }

    pub fn at(&self, i1: usize, i2: usize) -> Complex<T> {
        self.values[i1 * self.grid.points + i2]
    }

    /// `∫∫ |ψ|² dx₁ dx₂` by the periodic trapezoid rule.
    pub fn norm_sqr(&self) -> T {
        let h = self.grid.spacing();
        let n = self.grid.points;
        let rows: Vec<T> = self
            .values
            .par_chunks(n)
            .map(|row| row.iter().map(|v| v.norm_sqr()).sum::<T>())
            .collect();
        rows.into_iter().sum::<T>() * h * h
    }

    /// Largest pointwise `|self - f(x₁, x₂)|`.
    pub fn max_abs_deviation(&self, f: impl Fn(T, T) -> Complex<T> + Sync) -> T {
        let n = self.grid.points;
        let xs = self.grid.coordinates();
        self.values
            .par_chunks(n)
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| (*v - f(xs[i], xs[j])).norm())
                    .fold(T::zero(), T::max)
            })
            .reduce(T::zero, T::max)
    }

    /// Exact free evolution of both coordinates for a time `t` (ħ = m = 1).
    pub fn evolve_free(&mut self, t: T) {
        let n = self.grid.points;
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let k = self.grid.wavenumbers();

        fft_2d(&mut self.values, n, |rows| forward.process(rows));
        let half_t = T::lit(0.5) * t;
        let scale = T::one() / T::from_usize(n * n).unwrap();
        self.values
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    let phase = -(k[i] * k[i] + k[j] * k[j]) * half_t;
                    *v = *v * Complex::from_polar(scale, phase);
                }
            });
        fft_2d(&mut self.values, n, |rows| inverse.process(rows));
    }
}

/// Applies a 1-D transform along both axes of a square row-major buffer.
fn fft_2d<T: Real>(
    data: &mut [Complex<T>],
    n: usize,
    transform: impl Fn(&mut [Complex<T>]) + Sync,
) {
    data.par_chunks_mut(n).for_each(&transform);
    transpose_square(data, n);
    data.par_chunks_mut(n).for_each(&transform);
    transpose_square(data, n);
}

fn transpose_square<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Evolves the initial two-packet wavefunction on `grid` by exact phase
/// multiplication in momentum space.
pub fn spectral_oracle_evolve<T: Real>(
    p: &PacketParams<T>,
    grid: GridSpec<T>,
) -> Result<SpectralField<T>> {
    grid.check(&p.resolution())?;
    let mut field = SpectralField::sample(grid, |x1, x2| p.initial_amplitude(x1, x2));
    if p.delta() > T::zero() {
        // Δ = 2t
        field.evolve_free(T::lit(0.5) * p.delta());
    }
    Ok(field)
}

/// Periodic trapezoid rule for `∫∫ f dx₁ dx₂` over the grid.
pub fn quadrature_2d<T: Real>(grid: &GridSpec<T>, f: impl Fn(T, T) -> T + Sync) -> T {
    let xs = grid.coordinates();
    let h = grid.spacing();
    let rows: Vec<T> = xs
        .par_iter()
        .map(|&x1| xs.iter().map(|&x2| f(x1, x2)).sum::<T>())
        .collect();
    rows.into_iter().sum::<T>() * h * h
}

/// `∫∫` of the closed-form joint density over `grid`.
pub fn normalization_integral<T: Real>(p: &PacketParams<T>, grid: &GridSpec<T>) -> Result<T> {
    grid.check(&p.resolution())?;
    Ok(quadrature_2d(grid, |x1, x2| p.joint_pdf(x1, x2)))
}

/// `∫∫` of the evolved entangled-pair density over `grid`.
pub fn epr_normalization_integral<T: Real>(e: &EprParams<T>, grid: &GridSpec<T>) -> Result<T> {
    grid.check(&e.resolution())?;
    Ok(quadrature_2d(grid, |x1, x2| e.evolved_pdf(x1, x2)))
}
