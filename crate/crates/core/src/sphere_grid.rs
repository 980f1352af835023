//! Equal-area HEALPix direction grid (ring ordering) and auxiliary
//! direction samplers for decoding.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::sampling::random_unit_vector;

pub const MAX_NSIDE: u32 = 512;

/// One iso-latitude ring of pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    pub z: f64,
    /// Azimuth of the first pixel; pixels are spaced by `2π / len`.
    pub phi0: f64,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    nside: u32,
    rings: Vec<Ring>,
    directions: Vec<Vec3>,
}

impl SphereGrid {
    pub fn new(nside: u32) -> Result<SphereGrid> {
        if nside == 0 || !nside.is_power_of_two() || nside > MAX_NSIDE {
            return Err(SharcError::InvalidArgument(format!(
                "N_side must be a power of two in [1, {MAX_NSIDE}], got {nside}"
            )));
        }
        let ns = nside as usize;
        let nf = nside as f64;
        let mut rings = Vec::with_capacity(4 * ns - 1);
        let mut start = 0;
        for i in 1..4 * ns {
            let (z, len, phi0) = if i < ns {
                let fi = i as f64;
                (1.0 - fi * fi / (3.0 * nf * nf), 4 * i, PI / (4.0 * fi))
            } else if i <= 3 * ns {
                let shift = if (i + ns).is_multiple_of(2) { 0.5 } else { 0.0 };
                (4.0 / 3.0 - 2.0 * i as f64 / (3.0 * nf), 4 * ns, shift * PI / (2.0 * nf))
            } else {
                let k = 4 * ns - i;
                let fk = k as f64;
                (-(1.0 - fk * fk / (3.0 * nf * nf)), 4 * k, PI / (4.0 * fk))
            };
            rings.push(Ring { z, phi0, start, len });
            start += len;
        }
        let mut directions = Vec::with_capacity(start);
        for r in &rings {
            let sin_theta = ((1.0 - r.z) * (1.0 + r.z)).sqrt();
            let step = 2.0 * PI / r.len as f64;
            for j in 0..r.len {
                let (s, c) = (r.phi0 + step * j as f64).sin_cos();
                directions.push(Vec3::new(sin_theta * c, sin_theta * s, r.z));
            }
        }
        Ok(SphereGrid {
            nside,
            rings,
            directions,
        })
    }

    pub fn nside(&self) -> u32 {
        self.nside
    }

    pub fn npix(&self) -> usize {
        self.directions.len()
    }

    /// Solid angle of every pixel, `4π / N_pix`.
    pub fn pixel_solid_angle(&self) -> f64 {
        4.0 * PI / self.npix() as f64
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    /// Azimuth of pixel `j` in `ring`.
    pub fn phi(&self, ring: &Ring, j: usize) -> f64 {
        ring.phi0 + 2.0 * PI * j as f64 / ring.len as f64
    }
}

/// Smallest power-of-two `N_side` with `12·N_side² ≥ max(target, 4·(L+1)²)`.
pub fn choose_nside(bandwidth: usize, target_samples: usize) -> Result<u32> {
    let need = target_samples.max(4 * (bandwidth + 1) * (bandwidth + 1));
    let mut nside = 1u32;
    while 12 * (nside as usize).pow(2) < need {
        nside *= 2;
        if nside > MAX_NSIDE {
            return Err(SharcError::InvalidArgument(format!(
                "no N_side ≤ {MAX_NSIDE} supports {need} samples"
            )));
        }
    }
    Ok(nside)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionGenerator {
    Healpix,
    Fibonacci,
    SeededRandom,
}

#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub directions: Vec<Vec3>,
    pub generator: DirectionGenerator,
}

/// Golden-angle spiral with `z` at the centers of `n` equal-area bands.
pub fn fibonacci_directions(n: usize) -> DirectionSet {
    let directions = if n == 1 {
        vec![Vec3::z()]
    } else {
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..n)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let r = ((1.0 - z) * (1.0 + z)).sqrt();
                let (s, c) = (golden * i as f64).sin_cos();
                Vec3::new(r * c, r * s, z)
            })
            .collect()
    };
    DirectionSet {
        directions,
        generator: DirectionGenerator::Fibonacci,
    }
}

pub fn random_directions(n: usize, seed: u64) -> DirectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DirectionSet {
        directions: (0..n).map(|_| random_unit_vector(&mut rng)).collect(),
        generator: DirectionGenerator::SeededRandom,
    }
}

pub fn healpix_directions(nside: u32) -> Result<DirectionSet> {
    Ok(DirectionSet {
        directions: SphereGrid::new(nside)?.directions,
        generator: DirectionGenerator::Healpix,
    })
}
