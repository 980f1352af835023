//! Decoding: series evaluation per anchor, generator filtering and PCA
//! normals oriented along the generating ray.

use std::path::Path;
use std::process::Command;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::kdtree::KdTree;
use crate::mesh::io::encode_oriented_ply;
use crate::sh::{lanczos_window, PackedSeries, ShCoefficients, SharcRepresentation};
use crate::sphere_grid::fibonacci_directions;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconConfig {
    /// Directions evaluated per anchor.
    pub n_recon: usize,
    pub k_gen: usize,
    pub k_pca: usize,
    /// PCA neighbourhood radius; `None` picks twice the mean point spacing.
    pub r_pca: Option<f64>,
    pub lanczos: bool,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            n_recon: 20_000,
            k_gen: 3,
            k_pca: 16,
            r_pca: None,
            lanczos: true,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_recon == 0 || self.k_gen == 0 || self.k_pca < 3 {
            return Err(SharcError::InvalidArgument(
                "need n_recon ≥ 1, k_gen ≥ 1 and k_pca ≥ 3".into(),
            ));
        }
        if let Some(r) = self.r_pca {
            if !(r > 0.0 && r.is_finite()) {
                return Err(SharcError::InvalidArgument(format!("r_pca must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// `position = anchor + radius · direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedPoint {
    pub position: Vec3,
    pub generator: u32,
    pub direction: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDecode {
    pub points: Vec<DecodedPoint>,
    /// Directions whose radius was non-positive or non-finite.
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FilterStats {
    pub evaluated: usize,
    pub dropped_radius: usize,
    pub raw: usize,
    pub kept: usize,
    pub degenerate_normals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPointCloud {
    pub points: Vec<DecodedPoint>,
    pub normals: Vec<Vec3>,
    /// Normals that fell back to the generator ray.
    pub degenerate: Vec<bool>,
    pub stats: FilterStats,
}

impl OrientedPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.points.iter().map(|p| p.position).collect()
    }
}

pub fn anchor_positions(rep: &SharcRepresentation) -> Vec<Vec3> {
    rep.anchors
        .iter()
        .map(|a| Vec3::new(a.position[0] as f64, a.position[1] as f64, a.position[2] as f64))
        .collect()
}

fn anchor_coeffs(rep: &SharcRepresentation, i: usize, lanczos: bool) -> ShCoefficients {
    let values = rep.anchors[i].coeffs.iter().map(|&c| c as f64).collect();
    let coeffs = ShCoefficients::from_values(rep.bandwidth as usize, values).expect("validated on read");
    if lanczos && rep.bandwidth > 0 {
        lanczos_window(&coeffs)
    } else {
        coeffs
    }
}

const CHUNK: usize = 2048;

/// Evaluates every anchor's series along `n_recon` Fibonacci directions.
/// Output is ordered by (anchor, direction).
pub fn decode_raw(rep: &SharcRepresentation, cfg: &ReconConfig) -> Result<RawDecode> {
    cfg.validate()?;
    if rep.anchors.is_empty() {
        return Err(SharcError::InvalidArgument("representation has no anchors".into()));
    }
    let dirs = fibonacci_directions(cfg.n_recon).directions;
    let anchors = anchor_positions(rep);
    let mut points = Vec::with_capacity(anchors.len() * dirs.len());
    let mut dropped = 0;
    for (i, anchor) in anchors.iter().enumerate() {
        let series = PackedSeries::new(&anchor_coeffs(rep, i, cfg.lanczos));
        let chunks: Vec<Vec<DecodedPoint>> = dirs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut radii = vec![0.0; chunk.len()];
                series.evaluate_batch(chunk, &mut radii);
                chunk
                    .iter()
                    .zip(radii)
                    .filter(|(_, r)| *r > 0.0 && r.is_finite())
                    .map(|(d, r)| DecodedPoint {
                        position: anchor + r * d,
                        generator: i as u32,
                        direction: *d,
                        radius: r,
                    })
                    .collect()
            })
            .collect();
        let before = points.len();
        for c in chunks {
            points.extend(c);
        }
        dropped += dirs.len() - (points.len() - before);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} directions with non-positive radius");
    }
    Ok(RawDecode { points, dropped })
}

/// Keeps points whose generator is among their `k_gen` nearest anchors.
pub fn generator_filter(raw: &[DecodedPoint], anchors: &[Vec3], k_gen: usize) -> Vec<DecodedPoint> {
    if anchors.len() <= k_gen.max(1) {
        return raw.to_vec();
    }
    let tree = KdTree::new(anchors.to_vec());
    raw.par_iter()
        .filter(|p| {
            tree.knn(&p.position, k_gen)
                .iter()
                .any(|n| n.index == p.generator as usize)
        })
        .copied()
        .collect()
}

/// Twice the mean nearest-neighbour spacing measured on up to 1000 points.
pub fn auto_pca_radius(tree: &KdTree) -> f64 {
    let n = tree.len();
    if n < 2 {
        return 0.0;
    }
    let step = n.div_ceil(1000);
    let probes: Vec<usize> = (0..n).step_by(step).collect();
    let total: f64 = probes
        .iter()
        .map(|&i| tree.knn(&tree.points()[i], 2).get(1).map_or(0.0, |nb| nb.dist()))
        .sum();
    2.0 * total / probes.len() as f64
}

/// Returns a unit normal and whether the neighbourhood was degenerate.
fn pca_normal(tree: &KdTree, point: &DecodedPoint, k: usize, radius: f64) -> (Vec3, bool) {
    let knn = tree.knn(&point.position, k);
    let in_radius: Vec<usize> = knn.iter().filter(|n| n.dist() <= radius).map(|n| n.index).collect();
    let neighbours: Vec<usize> = if in_radius.len() >= 3 {
        in_radius
    } else {
        knn.iter().map(|n| n.index).collect()
    };
    let pts = tree.points();
    let centroid = neighbours.iter().fold(Vec3::zeros(), |acc, &i| acc + pts[i]) / neighbours.len() as f64;
    let mut cov = Matrix3::zeros();
    for &i in &neighbours {
        let d = pts[i] - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (mid, top) = (eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(top > 0.0) || mid <= 1e-12 * top {
        return (point.direction.normalize(), true);
    }
    let n: Vec3 = eig.eigenvectors.column(order[0]).into_owned().normalize();
    let sign = if n.dot(&point.direction) < 0.0 { -1.0 } else { 1.0 };
    (sign * n, false)
}

pub fn estimate_normals(points: Vec<DecodedPoint>, cfg: &ReconConfig) -> Result<OrientedPointCloud> {
    cfg.validate()?;
    if points.len() < cfg.k_pca {
        return Err(SharcError::Geometry(format!(
            "{} points left after filtering, need at least k_pca = {}",
            points.len(),
            cfg.k_pca
        )));
    }
    let tree = KdTree::new(points.iter().map(|p| p.position).collect());
    let radius = cfg.r_pca.unwrap_or_else(|| auto_pca_radius(&tree));
    let (normals, degenerate): (Vec<Vec3>, Vec<bool>) = points
        .par_iter()
        .map(|p| pca_normal(&tree, p, cfg.k_pca, radius))
        .unzip();
    let stats = FilterStats {
        raw: points.len(),
        kept: points.len(),
        degenerate_normals: degenerate.iter().filter(|d| **d).count(),
        ..FilterStats::default()
    };
    Ok(OrientedPointCloud {
        points,
        normals,
        degenerate,
        stats,
    })
}

/// Full decode: evaluation, generator filtering and oriented normals.
pub fn reconstruct(rep: &SharcRepresentation, cfg: &ReconConfig) -> Result<OrientedPointCloud> {
    let raw = decode_raw(rep, cfg)?;
    let raw_count = raw.points.len();
    let kept = generator_filter(&raw.points, &anchor_positions(rep), cfg.k_gen);
    let mut cloud = estimate_normals(kept, cfg)?;
    cloud.stats.evaluated = rep.anchors.len() * cfg.n_recon;
    cloud.stats.dropped_radius = raw.dropped;
    cloud.stats.raw = raw_count;
    Ok(cloud)
}

/// Binary PLY bytes in the original mesh frame.
pub fn encode_cloud_ply(cloud: &OrientedPointCloud, rep: &SharcRepresentation) -> Result<Vec<u8>> {
    if cloud.is_empty() {
        return Err(SharcError::Geometry("decoded point cloud is empty".into()));
    }
    let positions: Vec<Vec3> = cloud.points.iter().map(|p| rep.transform.invert(&p.position)).collect();
    Ok(encode_oriented_ply(&positions, &cloud.normals))
}

pub fn export_oriented_ply(cloud: &OrientedPointCloud, rep: &SharcRepresentation, path: &Path) -> Result<usize> {
    let bytes = encode_cloud_ply(cloud, rep)?;
    std::fs::write(path, &bytes).map_err(|e| SharcError::io(path, e))?;
    Ok(bytes.len())
}

/// Runs an external surface reconstruction command. `{input}` and
/// `{output}` in the whitespace-separated template are replaced by the paths.
pub fn run_mesher(template: &str, input: &Path, output: &Path) -> Result<()> {
    let args: Vec<String> = template
        .split_whitespace()
        .map(|a| {
            a.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
        })
        .collect();
    let (program, rest) = args
        .split_first()
        .ok_or_else(|| SharcError::InvalidArgument("empty mesher command".into()))?;
    let status = Command::new(program)
        .args(rest)
        .status()
        .map_err(|e| SharcError::io(program, e))?;
    if !status.success() {
        return Err(SharcError::Geometry(format!("mesher `{program}` exited with {status}")));
    }
    Ok(())
}
