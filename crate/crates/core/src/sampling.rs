//! Interior candidate generation by rejection sampling the bounding box,
//! plus the surface sample set used during selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, SharcError};
use crate::geometry::{Aabb, Vec3};
use crate::spatial::RayAccelerator;

/// Points on the mesh surface with the triangle each was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSampleSet {
    points: Vec<Vec3>,
    sources: Vec<u32>,
}

impl SurfaceSampleSet {
    pub fn new(points: Vec<Vec3>, sources: Vec<u32>) -> Self {
        assert_eq!(points.len(), sources.len());
        SurfaceSampleSet { points, sources }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub points: Vec<Vec3>,
    pub seed: u64,
    pub requested: usize,
    pub attempts: usize,
}

impl CandidatePool {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.points.len() as f64 / self.attempts as f64
        }
    }
}

const BATCH: usize = 4096;

/// Draws uniform points in `bounds` and keeps the ones the parity test
/// classifies as interior, in draw order.
pub fn sample_interior(
    acc: &RayAccelerator,
    bounds: &Aabb,
    n: usize,
    seed: u64,
    max_attempt_factor: f64,
    votes: usize,
) -> Result<CandidatePool> {
    if n == 0 {
        return Err(SharcError::InvalidArgument("candidate count must be ≥ 1".into()));
    }
    if !acc.mesh().is_watertight() {
        log::warn!("mesh is not watertight; interior classification may be unreliable");
    }
    let box_volume = bounds.volume();
    let mesh_volume = acc.mesh().signed_volume().abs();
    let ratio = if mesh_volume > 0.0 && box_volume > 0.0 {
        (box_volume / mesh_volume).clamp(1.0, 1e4)
    } else {
        100.0
    };
    let budget = (max_attempt_factor * n as f64 * ratio).ceil().max(n as f64) as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0;
    let lo = bounds.min;
    let ext = bounds.extent();
    while points.len() < n && attempts < budget {
        let batch = BATCH.min(budget - attempts);
        let draws: Vec<Vec3> = (0..batch)
            .map(|_| {
                Vec3::new(
                    lo.x + ext.x * rng.random::<f64>(),
                    lo.y + ext.y * rng.random::<f64>(),
                    lo.z + ext.z * rng.random::<f64>(),
                )
            })
            .collect();
        let inside: Vec<bool> = draws.par_iter().map(|p| acc.is_inside(p, votes)).collect();
        for (p, keep) in draws.into_iter().zip(inside) {
            attempts += 1;
            if keep {
                points.push(p);
                if points.len() == n {
                    break;
                }
            }
        }
    }
    if points.is_empty() {
        return Err(SharcError::Geometry("mesh not enclosing a volume".into()));
    }
    let pool = CandidatePool {
        points,
        seed,
        requested: n,
        attempts,
    };
    if pool.points.len() < n {
        log::warn!(
            "attempt budget exhausted: {} of {} interior candidates after {} draws",
            pool.points.len(),
            n,
            attempts
        );
    }
    if pool.acceptance_rate() < 1e-3 {
        log::warn!(
            "interior acceptance rate {:.2e} is below 0.1%; thin shapes may need a larger pool",
            pool.acceptance_rate()
        );
    }
    Ok(pool)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn sphere_candidates_are_interior() {
        let mesh = shapes::icosphere(3);
        let acc = RayAccelerator::new(&mesh);
        let pool = sample_interior(&acc, &mesh.bounds(), 1000, 7, 10.0, 3).unwrap();
        assert_eq!(pool.points.len(), 1000);
        assert!(pool.points.iter().all(|p| p.norm() < 1.0));
        assert!(pool.points.iter().all(|p| acc.is_inside(p, 3)));
    }

    #[test]
    fn cube_accepts_everything() {
        let mesh = shapes::cube(1.0);
        let acc = RayAccelerator::new(&mesh);
        let pool = sample_interior(&acc, &mesh.bounds(), 10_000, 1, 10.0, 3).unwrap();
        assert_eq!(pool.points.len(), 10_000);
        assert!(pool.acceptance_rate() > 0.999, "rate {}", pool.acceptance_rate());
    }

    #[test]
    fn torus_acceptance_matches_volume_ratio() {
        let (big, small) = (0.7, 0.2);
        let mesh = shapes::torus(big, small, 128, 64);
        let acc = RayAccelerator::new(&mesh);
        let bounds = mesh.bounds();
        let pool = sample_interior(&acc, &bounds, 5000, 2, 10.0, 3).unwrap();
        let p = 2.0 * std::f64::consts::PI.powi(2) * big * small * small / bounds.volume();
        let n = pool.attempts as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        // polygonal torus volume is a little under the analytic one
        let tessellation = p * 0.005;
        assert!(
            (pool.acceptance_rate() - p).abs() < 3.0 * sigma + tessellation,
            "rate {} expected {p}",
            pool.acceptance_rate()
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let mesh = shapes::torus(0.7, 0.2, 32, 16);
        let acc = RayAccelerator::new(&mesh);
        let a = sample_interior(&acc, &mesh.bounds(), 300, 5, 10.0, 3).unwrap();
        let b = sample_interior(&acc, &mesh.bounds(), 300, 5, 10.0, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn box_missing_the_volume_is_an_error() {
        let mesh = shapes::cube(1.0);
        let acc = RayAccelerator::new(&mesh);
        let bounds = Aabb {
            min: Vec3::repeat(5.0),
            max: Vec3::repeat(6.0),
        };
        let err = sample_interior(&acc, &bounds, 10, 1, 1.0, 3).unwrap_err();
        assert!(matches!(err, SharcError::Geometry(_)));
    }
}
