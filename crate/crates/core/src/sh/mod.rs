//! Real spherical harmonics: basis evaluation, quadrature transforms on
//! the HEALPix grid, spectral windowing and the binary representation.
//!
//! Convention: the associated Legendre functions include the
//! Condon–Shortley phase `(−1)^m`, and the real basis is
//!
//! ```text
//! Y_l^0  = N_l^0 P_l^0(cos θ)
//! Y_l^m  = √2 N_l^m P_l^m(cos θ) cos(mφ)      m > 0
//! Y_l^-m = √2 N_l^m P_l^m(cos θ) sin(mφ)      m > 0
//! N_l^m  = √((2l+1)/(4π) · (l−m)!/(l+m)!)
//! ```
//!
//! so that `Y_1^1 = −√(3/4π) sin θ cos φ`. Coefficients are flattened as
//! `l² + l + m`.

mod field;
mod format;
mod transform;

use std::f64::consts::PI;

pub use field::{sample_radial_field, RadialField, MAX_INVALID_FRACTION};
pub use format::{
    deserialize, read_representation, serialize, serialized_len, write_representation, AnchorRecord,
    SharcRepresentation, FORMAT_VERSION, HEADER_LEN, MAGIC,
};
pub use transform::{fit_coefficients, fit_coefficients_fast, FitOptions, ShTransform};

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;

/// Bandwidth, fitting density and decode-time smoothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShConfig {
    pub bandwidth: usize,
    pub n_fit: usize,
    pub lanczos: bool,
    pub fit: FitOptions,
}

impl Default for ShConfig {
    fn default() -> Self {
        ShConfig {
            bandwidth: 64,
            n_fit: 10_000,
            lanczos: true,
            fit: FitOptions::default(),
        }
    }
}

impl ShConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_fit < (self.bandwidth + 1).pow(2) {
            return Err(SharcError::InvalidArgument(format!(
                "N_fit = {} is below (L+1)² = {}",
                self.n_fit,
                (self.bandwidth + 1).pow(2)
            )));
        }
        Ok(())
    }
}

#[inline]
pub fn coeff_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

#[inline]
pub fn coeff_count(bandwidth: usize) -> usize {
    (bandwidth + 1) * (bandwidth + 1)
}

/// Real coefficient block for degrees `0..=bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoefficients {
    bandwidth: usize,
    values: Vec<f64>,
}

impl ShCoefficients {
    pub fn zeros(bandwidth: usize) -> Self {
        ShCoefficients {
            bandwidth,
            values: vec![0.0; coeff_count(bandwidth)],
        }
    }

    pub fn from_values(bandwidth: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != coeff_count(bandwidth) {
            return Err(SharcError::InvalidArgument(format!(
                "expected {} coefficients for L = {bandwidth}, got {}",
                coeff_count(bandwidth),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SharcError::NonFinite("coefficient"));
        }
        Ok(ShCoefficients { bandwidth, values })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.values[coeff_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.values[coeff_index(l, m)] = v;
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Associated Legendre function `P_l^m(x)` including the Condon–Shortley phase.
pub fn legendre(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l, "legendre requires m ≤ l");
    // P_m^m = (−1)^m (2m−1)!! (1−x²)^{m/2}
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in m + 2..=l {
        pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// Recurrence coefficients for orthonormalized Legendre functions
/// `P̄_l^m = N_l^m P_l^m`, stored for `m ≤ l ≤ L` in triangular order.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    bandwidth: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    diag: Vec<f64>,
}

#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl LegendreTable {
    pub fn new(bandwidth: usize) -> Self {
        let n = tri_index(bandwidth, bandwidth) + 1;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for m in 0..=bandwidth {
            for l in m + 2..=bandwidth {
                let (lf, mf) = (l as f64, m as f64);
                a[tri_index(l, m)] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let l1 = lf - 1.0;
                b[tri_index(l, m)] = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
            }
        }
        // ratio P̄_m^m / (−sin θ · P̄_{m−1}^{m−1})
        let diag = (0..=bandwidth)
            .map(|m| {
                if m == 0 {
                    (1.0 / (4.0 * PI)).sqrt()
                } else {
                    ((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
                }
            })
            .collect();
        LegendreTable { bandwidth, a, b, diag }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Fills `out[tri_index(l, m)] = P̄_l^m(cos θ)` given `cos θ` and `sin θ ≥ 0`.
    pub fn fill(&self, cos_theta: f64, sin_theta: f64, out: &mut [f64]) {
        let lmax = self.bandwidth;
        let mut pmm = self.diag[0];
        for m in 0..=lmax {
            if m > 0 {
                pmm *= -self.diag[m] * sin_theta;
            }
            out[tri_index(m, m)] = pmm;
            if m == lmax {
                break;
            }
            let mut p1 = cos_theta * ((2 * m + 3) as f64).sqrt() * pmm;
            out[tri_index(m + 1, m)] = p1;
            let mut p0 = pmm;
            for l in m + 2..=lmax {
                let k = tri_index(l, m);
                let p = self.a[k] * (cos_theta * p1 - self.b[k] * p0);
                out[k] = p;
                p0 = p1;
                p1 = p;
            }
        }
    }
}

/// Real orthonormal basis function `Y_l^m(θ, φ)`.
pub fn sh_basis(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let norm = normalization(l, am);
    let p = norm * legendre(l, am, theta.cos());
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * p * (m as f64 * phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p * (am as f64 * phi).sin(),
    }
}

/// `N_l^m` evaluated in log space so large degrees do not overflow.
fn normalization(l: usize, m: usize) -> f64 {
    let mut log_ratio = 0.0;
    for k in (l - m + 1)..=(l + m) {
        log_ratio -= (k as f64).ln();
    }
    ((2 * l + 1) as f64 / (4.0 * PI) * log_ratio.exp()).sqrt()
}

/// Lanczos σ-factor `sinc(πl/L)` with `σ_0 = 1`.
pub fn lanczos_sigma(l: usize, bandwidth: usize) -> f64 {
    if l == 0 || bandwidth == 0 {
        return 1.0;
    }
    let x = PI * l as f64 / bandwidth as f64;
    // sin(π(L−l)/L) equals sin(πl/L) and is exactly zero at l = L
    (PI * (bandwidth - l.min(bandwidth)) as f64 / bandwidth as f64).sin() / x
}

pub fn lanczos_window(coeffs: &ShCoefficients) -> ShCoefficients {
    let bw = coeffs.bandwidth;
    let mut out = coeffs.clone();
    for l in 0..=bw {
        let s = lanczos_sigma(l, bw);
        for v in &mut out.values[l * l..(l + 1) * (l + 1)] {
            *v *= s;
        }
    }
    out
}

/// Reusable scratch space for series evaluation.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator {
    table: LegendreTable,
    plm: Vec<f64>,
}

impl SeriesEvaluator {
    pub fn new(bandwidth: usize) -> Self {
        let table = LegendreTable::new(bandwidth);
        let plm = vec![0.0; table.len()];
        SeriesEvaluator { table, plm }
    }

    /// `Σ a_l^m Y_l^m(ω)` for a unit direction.
    pub fn evaluate(&mut self, coeffs: &ShCoefficients, direction: &Vec3) -> f64 {
        let bw = self.table.bandwidth();
        assert_eq!(coeffs.bandwidth, bw, "evaluator bandwidth mismatch");
        let z = direction.z.clamp(-1.0, 1.0);
        let rho = direction.x.hypot(direction.y);
        let sin_theta = rho.min(1.0);
        let (cphi, sphi) = if rho > 0.0 {
            (direction.x / rho, direction.y / rho)
        } else {
            (1.0, 0.0)
        };
        self.table.fill(z, sin_theta, &mut self.plm);
        let a = &coeffs.values;
        let mut total = 0.0;
        for l in 0..=bw {
            total += a[l * l + l] * self.plm[tri_index(l, 0)];
        }
        let (mut cm, mut sm) = (1.0, 0.0);
        for m in 1..=bw {
            let c = cm * cphi - sm * sphi;
            sm = sm * cphi + cm * sphi;
            cm = c;
            let mut even = 0.0;
            let mut odd = 0.0;
            for l in m..=bw {
                let p = self.plm[tri_index(l, m)];
                even += a[l * l + l + m] * p;
                odd += a[l * l + l - m] * p;
            }
            total += std::f64::consts::SQRT_2 * (even * cm + odd * sm);
        }
        total
    }
}

const LANES: usize = 8;

/// Coefficients rearranged by order `m` for evaluating many directions at
/// once; lanes of directions run the Legendre recurrence side by side.
#[derive(Debug, Clone)]
pub struct PackedSeries {
    bandwidth: usize,
    offsets: Vec<usize>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    diag: Vec<f64>,
}

impl PackedSeries {
    pub fn new(coeffs: &ShCoefficients) -> Self {
        let bw = coeffs.bandwidth;
        let table = LegendreTable::new(bw);
        let n = table.len();
        let (mut cos, mut sin, mut a, mut b) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        let mut offsets = Vec::with_capacity(bw + 1);
        for m in 0..=bw {
            offsets.push(cos.len());
            for l in m..=bw {
                cos.push(coeffs.values[l * l + l + m]);
                sin.push(if m > 0 { coeffs.values[l * l + l - m] } else { 0.0 });
                a.push(table.a[tri_index(l, m)]);
                b.push(table.b[tri_index(l, m)]);
            }
        }
        PackedSeries {
            bandwidth: bw,
            offsets,
            cos,
            sin,
            a,
            b,
            diag: table.diag,
        }
    }

    /// Same values as [`SeriesEvaluator::evaluate`] for every direction.
    pub fn evaluate_batch(&self, directions: &[Vec3], out: &mut [f64]) {
        assert_eq!(directions.len(), out.len());
        for (dirs, res) in directions.chunks(LANES).zip(out.chunks_mut(LANES)) {
            let mut lane_dirs = [Vec3::z(); LANES];
            lane_dirs[..dirs.len()].copy_from_slice(dirs);
            let vals = self.evaluate_lanes(&lane_dirs);
            res.copy_from_slice(&vals[..dirs.len()]);
        }
    }

    fn evaluate_lanes(&self, dirs: &[Vec3; LANES]) -> [f64; LANES] {
        let bw = self.bandwidth;
        let mut x = [0.0; LANES];
        let mut st = [0.0; LANES];
        let mut cphi = [1.0; LANES];
        let mut sphi = [0.0; LANES];
        for (i, d) in dirs.iter().enumerate() {
            x[i] = d.z.clamp(-1.0, 1.0);
            let rho = d.x.hypot(d.y);
            st[i] = rho.min(1.0);
            if rho > 0.0 {
                cphi[i] = d.x / rho;
                sphi[i] = d.y / rho;
            }
        }
        let mut total = [0.0; LANES];
        let mut pmm = [self.diag[0]; LANES];
        let mut cm = [1.0; LANES];
        let mut sm = [0.0; LANES];
        for m in 0..=bw {
            if m > 0 {
                for i in 0..LANES {
                    pmm[i] *= -self.diag[m] * st[i];
                    let c = cm[i] * cphi[i] - sm[i] * sphi[i];
                    sm[i] = sm[i] * cphi[i] + cm[i] * sphi[i];
                    cm[i] = c;
                }
            }
            let k0 = self.offsets[m];
            let mut even = [0.0; LANES];
            let mut odd = [0.0; LANES];
            for i in 0..LANES {
                even[i] = self.cos[k0] * pmm[i];
                odd[i] = self.sin[k0] * pmm[i];
            }
            if m < bw {
                let mut p0 = pmm;
                let mut p1 = [0.0; LANES];
                let f = ((2 * m + 3) as f64).sqrt();
                for i in 0..LANES {
                    p1[i] = x[i] * f * pmm[i];
                    even[i] += self.cos[k0 + 1] * p1[i];
                    odd[i] += self.sin[k0 + 1] * p1[i];
                }
                for k in k0 + 2..k0 + bw - m + 1 {
                    let (ak, bk, ck, sk) = (self.a[k], self.b[k], self.cos[k], self.sin[k]);
                    for i in 0..LANES {
                        let p = ak * (x[i] * p1[i] - bk * p0[i]);
                        even[i] += ck * p;
                        odd[i] += sk * p;
                        p0[i] = p1[i];
                        p1[i] = p;
                    }
                }
            }
            for i in 0..LANES {
                if m == 0 {
                    total[i] = even[i];
                } else {
                    total[i] += std::f64::consts::SQRT_2 * (even[i] * cm[i] + odd[i] * sm[i]);
                }
            }
        }
        total
    }
}

pub fn evaluate_series(coeffs: &ShCoefficients, direction: &Vec3) -> f64 {
    SeriesEvaluator::new(coeffs.bandwidth).evaluate(coeffs, direction)
}
