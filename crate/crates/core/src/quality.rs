//! Chamfer and Hausdorff distances as a percentage of the ground-truth
//! diameter, and storage ratios.

use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::kdtree::KdTree;
use crate::mesh::{sample_surface, TriangleMesh};

/// Distance from each query point to its nearest neighbour in `tree`.
pub fn nearest_distances(queries: &[Vec3], tree: &KdTree) -> Vec<f64> {
    queries
        .par_iter()
        .map(|q| tree.nearest(q).map_or(f64::INFINITY, |n| n.dist()))
        .collect()
}

fn check(a: &[Vec3], b: &[Vec3], diameter: f64) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(SharcError::InvalidArgument("metric inputs must be non-empty".into()));
    }
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(SharcError::InvalidArgument(format!(
            "diameter must be positive, got {diameter}"
        )));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Symmetric mean nearest-neighbour distance in percent of `diameter`.
pub fn chamfer_l1(a: &[Vec3], b: &[Vec3], diameter: f64) -> Result<f64> {
    Ok(compare_point_sets(a, b, diameter, false)?.chamfer)
}

/// `(ε_fwd, ε_bwd, ε_bi)` in percent of `diameter`.
pub fn hausdorff(a: &[Vec3], b: &[Vec3], diameter: f64) -> Result<(f64, f64, f64)> {
    let r = compare_point_sets(a, b, diameter, false)?;
    Ok((r.hausdorff_fwd, r.hausdorff_bwd, r.hausdorff_bi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub chamfer: f64,
    pub hausdorff_fwd: f64,
    pub hausdorff_bwd: f64,
    pub hausdorff_bi: f64,
    pub gt_samples: usize,
    pub recon_samples: usize,
    pub diameter: f64,
    /// Chamfer averaged squared distances (divided by diameter²) instead of distances.
    pub squared: bool,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "d_cd,eps_fwd,eps_bwd,eps_bi,gt_samples,recon_samples,diameter";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.chamfer,
            self.hausdorff_fwd,
            self.hausdorff_bwd,
            self.hausdorff_bi,
            self.gt_samples,
            self.recon_samples,
            self.diameter
        )
    }
}

/// Both metrics from one pair of nearest-neighbour passes; `a` is the ground truth.
pub fn compare_point_sets(a: &[Vec3], b: &[Vec3], diameter: f64, squared: bool) -> Result<MetricsReport> {
    check(a, b, diameter)?;
    let a_to_b = nearest_distances(a, &KdTree::new(b.to_vec()));
    let b_to_a = nearest_distances(b, &KdTree::new(a.to_vec()));
    let chamfer = if squared {
        let sq = |v: &[f64]| v.iter().map(|d| d * d).sum::<f64>() / v.len() as f64;
        0.5 * (sq(&a_to_b) + sq(&b_to_a)) / (diameter * diameter) * 100.0
    } else {
        0.5 * (mean(&a_to_b) + mean(&b_to_a)) / diameter * 100.0
    };
    let fwd = max(&a_to_b) / diameter * 100.0;
    let bwd = max(&b_to_a) / diameter * 100.0;
    Ok(MetricsReport {
        chamfer,
        hausdorff_fwd: fwd,
        hausdorff_bwd: bwd,
        hausdorff_bi: fwd.max(bwd),
        gt_samples: a.len(),
        recon_samples: b.len(),
        diameter,
        squared,
    })
}

pub enum Reconstruction<'a> {
    Mesh(&'a TriangleMesh),
    Cloud(&'a [Vec3]),
}

pub const DEFAULT_EVAL_SAMPLES: usize = 100_000;

/// Samples both sides and compares them against the ground-truth diameter.
/// Meshes are sampled area-uniformly; clouds larger than `n_eval` are
/// subsampled without replacement.
pub fn evaluate_reconstruction(
    gt: &TriangleMesh,
    recon: Reconstruction<'_>,
    n_eval: usize,
    seed: u64,
    squared: bool,
) -> Result<MetricsReport> {
    if n_eval < 1000 {
        return Err(SharcError::InvalidArgument(format!(
            "n_eval must be ≥ 1000, got {n_eval}"
        )));
    }
    let gt_points = sample_surface(gt, n_eval, seed)?.points().to_vec();
    let recon_points = match recon {
        Reconstruction::Mesh(m) => sample_surface(m, n_eval, seed)?.points().to_vec(),
        Reconstruction::Cloud(c) => {
            if c.is_empty() {
                return Err(SharcError::Geometry("reconstruction is empty".into()));
            }
            if c.len() <= n_eval {
                c.to_vec()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = sample_indices(&mut rng, c.len(), n_eval).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| c[i]).collect()
            }
        }
    };
    compare_point_sets(&gt_points, &recon_points, gt.bounding_diameter(), squared)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub original_bytes: u64,
    pub representation_bytes: u64,
    pub ratio: f64,
}

impl StorageReport {
    pub fn from_sizes(original_bytes: u64, representation_bytes: u64) -> Result<Self> {
        if original_bytes == 0 || representation_bytes == 0 {
            return Err(SharcError::InvalidArgument("storage sizes must be non-zero".into()));
        }
        Ok(StorageReport {
            original_bytes,
            representation_bytes,
            ratio: original_bytes as f64 / representation_bytes as f64,
        })
    }
}

pub fn storage_report(representation: &Path, original: &Path) -> Result<StorageReport> {
    let size = |p: &Path| std::fs::metadata(p).map(|m| m.len()).map_err(|e| SharcError::io(p, e));
    StorageReport::from_sizes(size(original)?, size(representation)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn direct_formula() {
        let a = [Vec3::zeros()];
        let b = [Vec3::new(0.02, 0.0, 0.0)];
        assert!((chamfer_l1(&a, &b, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(chamfer_l1(&a, &a, 2.0).unwrap(), 0.0);
        let (f, bw, bi) = hausdorff(&a, &b, 2.0).unwrap();
        assert!((f - 1.0).abs() < 1e-12 && (bw - 1.0).abs() < 1e-12 && bi == f.max(bw));
        assert!(chamfer_l1(&[], &b, 2.0).is_err());
        assert!(chamfer_l1(&a, &b, 0.0).is_err());
    }

    #[test]
    fn squared_variant() {
        let a = [Vec3::zeros()];
        let b = [Vec3::new(0.2, 0.0, 0.0)];
        let r = compare_point_sets(&a, &b, 2.0, true).unwrap();
        assert!((r.chamfer - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gt_against_itself_is_zero() {
        let m = shapes::icosphere(2);
        let r = evaluate_reconstruction(&m, Reconstruction::Mesh(&m), 2000, 4, false).unwrap();
        assert_eq!((r.chamfer, r.hausdorff_bi), (0.0, 0.0));
        assert!((r.diameter - 2.0).abs() < 1e-12);
        assert!(evaluate_reconstruction(&m, Reconstruction::Mesh(&m), 10, 4, false).is_err());
        assert!(evaluate_reconstruction(&m, Reconstruction::Cloud(&[]), 1000, 4, false).is_err());
    }

    #[test]
    fn cloud_is_subsampled() {
        let m = shapes::icosphere(3);
        let cloud = sample_surface(&m, 5000, 1).unwrap().points().to_vec();
        let r = evaluate_reconstruction(&m, Reconstruction::Cloud(&cloud), 1000, 2, false).unwrap();
        assert_eq!((r.gt_samples, r.recon_samples), (1000, 1000));
    }

    #[test]
    fn storage_ratio() {
        assert_eq!(StorageReport::from_sizes(10, 10).unwrap().ratio, 1.0);
        let r = StorageReport::from_sizes(181_000_000, 1_490_000).unwrap();
        assert_eq!(r.ratio.round(), 121.0);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        std::fs::write(&a, vec![0u8; 300]).unwrap();
        std::fs::write(&b, vec![0u8; 100]).unwrap();
        assert_eq!(storage_report(&b, &a).unwrap().ratio, 3.0);
        assert!(storage_report(&dir.path().join("missing"), &a).is_err());
    }

    #[test]
    fn csv_row_has_header_arity() {
        let a = [Vec3::zeros()];
        let r = compare_point_sets(&a, &a, 1.0, false).unwrap();
        assert_eq!(
            r.csv_row().split(',').count(),
            MetricsReport::CSV_HEADER.split(',').count()
        );
    }
}
