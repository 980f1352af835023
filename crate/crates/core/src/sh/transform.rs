//! Forward and inverse transforms on the HEALPix grid.
//!
//! The forward transform is the equal-area quadrature
//! `a_l^m = Ω_pix Σ_k r_k Y_l^m(ω_k)`. The fast path groups pixels by ring,
//! takes one FFT per ring for the azimuthal sums and then accumulates the
//! Legendre factors ring by ring. Fits optionally apply Jacobi refinement
//! `a ← a + analyze(r − synthesize(a))`, which drives the result to the
//! least-squares solution on the grid.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{coeff_count, tri_index, LegendreTable, RadialField, ShCoefficients};
use crate::error::{Result, SharcError};
use crate::sphere_grid::SphereGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Upper bound on refinement sweeps; 0 gives the single-pass quadrature.
    pub max_refinements: usize,
    /// Stop once the largest update falls below this fraction of the largest coefficient.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_refinements: 10,
            tolerance: 1e-13,
        }
    }
}

impl FitOptions {
    pub const SINGLE_PASS: FitOptions = FitOptions {
        max_refinements: 0,
        tolerance: 0.0,
    };
}

type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

pub struct ShTransform {
    bandwidth: usize,
    grid: SphereGrid,
    /// Orthonormal Legendre values per ring, `tri_len` entries each.
    ring_legendre: Vec<f64>,
    tri_len: usize,
    ffts: HashMap<usize, FftPair>,
}

impl std::fmt::Debug for ShTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShTransform")
            .field("bandwidth", &self.bandwidth)
            .field("nside", &self.grid.nside())
            .finish()
    }
}

impl ShTransform {
    pub fn new(grid: SphereGrid, bandwidth: usize) -> Result<ShTransform> {
        if grid.npix() < 4 * coeff_count(bandwidth) {
            return Err(SharcError::InvalidArgument(format!(
                "bandwidth {bandwidth} exceeds what N_side = {} supports (need N_pix ≥ 4(L+1)²)",
                grid.nside()
            )));
        }
        let table = LegendreTable::new(bandwidth);
        let tri_len = table.len();
        let mut ring_legendre = vec![0.0; tri_len * grid.rings().len()];
        for (r, ring) in grid.rings().iter().enumerate() {
            let sin_theta = ((1.0 - ring.z) * (1.0 + ring.z)).sqrt();
            table.fill(ring.z, sin_theta, &mut ring_legendre[r * tri_len..(r + 1) * tri_len]);
        }
        let mut planner = FftPlanner::new();
        let mut ffts = HashMap::new();
        for ring in grid.rings() {
            ffts.entry(ring.len)
                .or_insert_with(|| (planner.plan_fft_forward(ring.len), planner.plan_fft_inverse(ring.len)));
        }
        Ok(ShTransform {
            bandwidth,
            grid,
            ring_legendre,
            tri_len,
            ffts,
        })
    }

    pub fn for_bandwidth(bandwidth: usize, target_samples: usize) -> Result<ShTransform> {
        let nside = crate::sphere_grid::choose_nside(bandwidth, target_samples)?;
        ShTransform::new(SphereGrid::new(nside)?, bandwidth)
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    fn check_len(&self, values: &[f64]) {
        assert_eq!(values.len(), self.grid.npix(), "one value per pixel expected");
    }

    /// Quadrature by explicit summation over every pixel and basis function.
    pub fn analyze_direct(&self, values: &[f64]) -> ShCoefficients {
        self.check_len(values);
        let bw = self.bandwidth;
        let table = LegendreTable::new(bw);
        let mut plm = vec![0.0; table.len()];
        let mut out = ShCoefficients::zeros(bw);
        let omega = self.grid.pixel_solid_angle();
        let a = out.values_mut();
        for ring in self.grid.rings() {
            let sin_theta = ((1.0 - ring.z) * (1.0 + ring.z)).sqrt();
            for j in 0..ring.len {
                let r = values[ring.start + j] * omega;
                let phi = self.grid.phi(ring, j);
                table.fill(ring.z, sin_theta, &mut plm);
                for l in 0..=bw {
                    a[l * l + l] += r * plm[tri_index(l, 0)];
                }
                for m in 1..=bw {
                    let (s, c) = (m as f64 * phi).sin_cos();
                    for l in m..=bw {
                        let p = SQRT_2 * plm[tri_index(l, m)] * r;
                        a[l * l + l + m] += p * c;
                        a[l * l + l - m] += p * s;
                    }
                }
            }
        }
        out
    }

    /// Per-pixel evaluation of the series.
    pub fn synthesize_direct(&self, coeffs: &ShCoefficients) -> Vec<f64> {
        assert_eq!(coeffs.bandwidth(), self.bandwidth);
        let mut eval = super::SeriesEvaluator::new(self.bandwidth);
        self.grid
            .directions()
            .iter()
            .map(|d| eval.evaluate(coeffs, d))
            .collect()
    }

    /// Ring-FFT quadrature, equal to [`analyze_direct`](Self::analyze_direct) up to rounding.
    pub fn analyze(&self, values: &[f64]) -> ShCoefficients {
        self.check_len(values);
        let bw = self.bandwidth;
        let omega = self.grid.pixel_solid_angle();
        let mut out = ShCoefficients::zeros(bw);
        let a = out.values_mut();
        let mut buf: Vec<Complex<f64>> = Vec::new();
        let mut fm = vec![Complex::new(0.0, 0.0); bw + 1];
        for (ri, ring) in self.grid.rings().iter().enumerate() {
            let n = ring.len;
            buf.clear();
            buf.extend(values[ring.start..ring.start + n].iter().map(|&v| Complex::new(v, 0.0)));
            self.ffts[&n].0.process(&mut buf);
            // F_m = Σ_j r_j e^{−imφ_j} = e^{−imφ0} X[m mod n]
            for (m, f) in fm.iter_mut().enumerate() {
                let (s, c) = (m as f64 * ring.phi0).sin_cos();
                *f = buf[m % n] * Complex::new(c, -s) * omega;
            }
            let plm = &self.ring_legendre[ri * self.tri_len..(ri + 1) * self.tri_len];
            for l in 0..=bw {
                a[l * l + l] += fm[0].re * plm[tri_index(l, 0)];
            }
            for m in 1..=bw {
                let re = SQRT_2 * fm[m].re;
                let im = -SQRT_2 * fm[m].im;
                for l in m..=bw {
                    let p = plm[tri_index(l, m)];
                    a[l * l + l + m] += re * p;
                    a[l * l + l - m] += im * p;
                }
            }
        }
        out
    }

    /// Ring-FFT synthesis onto the grid pixels.
    pub fn synthesize(&self, coeffs: &ShCoefficients) -> Vec<f64> {
        assert_eq!(coeffs.bandwidth(), self.bandwidth);
        let bw = self.bandwidth;
        let a = coeffs.values();
        let mut out = vec![0.0; self.grid.npix()];
        let mut buf: Vec<Complex<f64>> = Vec::new();
        for (ri, ring) in self.grid.rings().iter().enumerate() {
            let n = ring.len;
            let plm = &self.ring_legendre[ri * self.tri_len..(ri + 1) * self.tri_len];
            buf.clear();
            buf.resize(n, Complex::new(0.0, 0.0));
            let mut dc = 0.0;
            for l in 0..=bw {
                dc += a[l * l + l] * plm[tri_index(l, 0)];
            }
            buf[0] += dc;
            for m in 1..=bw {
                let (mut cos_part, mut sin_part) = (0.0, 0.0);
                for l in m..=bw {
                    let p = plm[tri_index(l, m)];
                    cos_part += a[l * l + l + m] * p;
                    sin_part += a[l * l + l - m] * p;
                }
                // A cos(mφ) + B sin(mφ) = Re[(A − iB) e^{imφ}]
                let (s, c) = (m as f64 * ring.phi0).sin_cos();
                let h = Complex::new(SQRT_2 * cos_part, -SQRT_2 * sin_part) * Complex::new(c, s);
                buf[m % n] += h;
            }
            self.ffts[&n].1.process(&mut buf);
            for (dst, v) in out[ring.start..ring.start + n].iter_mut().zip(&buf) {
                *dst = v.re;
            }
        }
        out
    }

    /// Quadrature fit with optional Jacobi refinement.
    pub fn fit(&self, values: &[f64], options: FitOptions, fast: bool) -> ShCoefficients {
        let analyze = |v: &[f64]| if fast { self.analyze(v) } else { self.analyze_direct(v) };
        let synthesize = |c: &ShCoefficients| {
            if fast {
                self.synthesize(c)
            } else {
                self.synthesize_direct(c)
            }
        };
        let mut coeffs = analyze(values);
        for _ in 0..options.max_refinements {
            let approx = synthesize(&coeffs);
            let residual: Vec<f64> = values.iter().zip(&approx).map(|(r, s)| r - s).collect();
            let update = analyze(&residual);
            let scale = coeffs.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let step = update.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (c, u) in coeffs.values_mut().iter_mut().zip(update.values()) {
                *c += u;
            }
            if step <= options.tolerance * scale {
                break;
            }
        }
        coeffs
    }
}

fn check_field(field: &RadialField, bandwidth: usize) -> Result<SphereGrid> {
    let grid = SphereGrid::new(field.nside())?;
    if grid.npix() < 4 * coeff_count(bandwidth) {
        return Err(SharcError::InvalidArgument(format!(
            "bandwidth {bandwidth} exceeds grid support (N_side = {})",
            field.nside()
        )));
    }
    Ok(grid)
}

/// Direct-summation fit of a radial field.
pub fn fit_coefficients(field: &RadialField, bandwidth: usize, options: FitOptions) -> Result<ShCoefficients> {
    let grid = check_field(field, bandwidth)?;
    Ok(ShTransform::new(grid, bandwidth)?.fit(field.radii(), options, false))
}

/// Ring-FFT fit of a radial field.
pub fn fit_coefficients_fast(field: &RadialField, bandwidth: usize, options: FitOptions) -> Result<ShCoefficients> {
    let grid = check_field(field, bandwidth)?;
    Ok(ShTransform::new(grid, bandwidth)?.fit(field.radii(), options, true))
}
