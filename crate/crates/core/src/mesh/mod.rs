//! Triangle surfaces: validation, normalization into the unit sphere and
//! area-weighted surface sampling.

pub mod io;
pub mod shapes;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SharcError};
use crate::geometry::{Aabb, Vec3};
use crate::sampling::SurfaceSampleSet;

pub use io::{load_mesh, read_ply, save_mesh_ply, MeshFormat, PlyData};

/// Indexed triangle surface with cached per-triangle areas.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    areas: Vec<f64>,
}

/// Outcome of building a mesh from raw arrays.
#[derive(Debug, Clone)]
pub struct CleanedMesh {
    pub mesh: TriangleMesh,
    pub removed_degenerate: usize,
}

impl TriangleMesh {
    /// Validates indices and drops zero-area triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<CleanedMesh> {
        let n = vertices.len();
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(SharcError::malformed(
                "mesh",
                format!("non-finite vertex {:?}", v.as_slice()),
            ));
        }
        let mut kept = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut removed = 0;
        for (i, t) in triangles.into_iter().enumerate() {
            if t.iter().any(|&k| k as usize >= n) {
                return Err(SharcError::malformed(
                    "mesh",
                    format!("triangle {i} references vertex beyond {n}"),
                ));
            }
            let a = triangle_area(
                &vertices[t[0] as usize],
                &vertices[t[1] as usize],
                &vertices[t[2] as usize],
            );
            if a > 0.0 && t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                kept.push(t);
                areas.push(a);
            } else {
                removed += 1;
            }
        }
        if kept.is_empty() {
            return Err(SharcError::EmptyMesh);
        }
        if removed > 0 {
            log::warn!("removed {removed} degenerate triangle(s)");
        }
        Ok(CleanedMesh {
            mesh: TriangleMesh {
                vertices,
                triangles: kept,
                areas,
            },
            removed_degenerate: removed,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    #[inline]
    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        let t = self.triangles[tri];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    /// Diameter of the bounding sphere centered on the bounding-box center.
    pub fn bounding_diameter(&self) -> f64 {
        let c = self.bounds().center();
        2.0 * self.vertices.iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
    }

    /// Enclosed volume by the divergence theorem (positive for outward winding).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0] as usize];
                let b = self.vertices[t[1] as usize];
                let c = self.vertices[t[2] as usize];
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(u32, u32), u32> = HashMap::with_capacity(self.triangles.len() * 3 / 2);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().all(|&c| c == 2)
    }

    /// Applies `transform` to every vertex.
    pub fn transformed(&self, transform: &NormalizationTransform) -> TriangleMesh {
        let vertices: Vec<Vec3> = self.vertices.iter().map(|v| transform.apply(v)).collect();
        let s2 = transform.scale * transform.scale;
        TriangleMesh {
            vertices,
            triangles: self.triangles.clone(),
            areas: self.areas.iter().map(|a| a * s2).collect(),
        }
    }
}

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Similarity map `v ↦ (v − center)·scale` into the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub center: [f64; 3],
    pub scale: f64,
}

impl NormalizationTransform {
    pub const IDENTITY: NormalizationTransform = NormalizationTransform {
        center: [0.0; 3],
        scale: 1.0,
    };

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    #[inline]
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        (v - self.center()) * self.scale
    }

    #[inline]
    pub fn invert(&self, v: &Vec3) -> Vec3 {
        v / self.scale + self.center()
    }
}

/// Centers the mesh on its bounding-box center and scales the farthest
/// vertex onto the unit sphere.
pub fn normalize(mesh: &TriangleMesh) -> (TriangleMesh, NormalizationTransform) {
    let center = mesh.bounds().center();
    let radius = mesh.vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max);
    let scale = if radius > 0.0 { 1.0 / radius } else { 1.0 };
    let transform = NormalizationTransform {
        center: center.into(),
        scale,
    };
    (mesh.transformed(&transform), transform)
}

/// Draws `n` area-uniform points, recording each point's source triangle.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<SurfaceSampleSet> {
    if n == 0 {
        return Err(SharcError::InvalidArgument("surface sample count must be ≥ 1".into()));
    }
    let mut cdf = Vec::with_capacity(mesh.areas.len());
    let mut acc = 0.0;
    for a in &mesh.areas {
        acc += a;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let tri = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let (u, v, w) = (1.0 - s, s * (1.0 - r2), s * r2);
        let [a, b, c] = mesh.corners(tri);
        points.push(a * u + b * v + c * w);
        sources.push(tri as u32);
    }
    Ok(SurfaceSampleSet::new(points, sources))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_with_degenerate() -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let m = shapes::cube(1.0);
        let mut v = m.vertices().to_vec();
        let mut t = m.triangles().to_vec();
        v.push(Vec3::new(0.0, 0.0, 0.0));
        v.push(Vec3::new(1.0, 0.0, 0.0));
        v.push(Vec3::new(2.0, 0.0, 0.0));
        let n = v.len() as u32;
        t[5] = [n - 3, n - 2, n - 1];
        (v, t)
    }

    #[test]
    fn degenerate_triangle_is_dropped() {
        let (v, t) = cube_with_degenerate();
        let cleaned = TriangleMesh::new(v, t).unwrap();
        assert_eq!(cleaned.mesh.triangle_count(), 11);
        assert_eq!(cleaned.removed_degenerate, 1);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(matches!(
            TriangleMesh::new(v, vec![[0, 1, 3]]),
            Err(SharcError::Malformed { .. })
        ));
    }

    #[test]
    fn all_degenerate_is_empty() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0];
        assert!(matches!(
            TriangleMesh::new(v, vec![[0, 1, 2]]),
            Err(SharcError::EmptyMesh)
        ));
    }

    #[test]
    fn unit_cube_normalizes_to_corner_norm_one() {
        let m = shapes::axis_box(Vec3::zeros(), Vec3::repeat(1.0));
        let (n, t) = normalize(&m);
        assert!((t.center() - Vec3::repeat(0.5)).norm() < 1e-15);
        let max = n.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        for v in n.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-12, "every cube corner is extremal");
        }
    }

    #[test]
    fn thin_box_scale_is_two_over_diagonal() {
        let m = shapes::axis_box(Vec3::zeros(), Vec3::new(10.0, 0.1, 0.1));
        let (_, t) = normalize(&m);
        let diag = (100.0f64 + 0.01 + 0.01).sqrt();
        assert!((t.scale - 2.0 / diag).abs() < 1e-12);
    }

    #[test]
    fn normalized_icosphere_is_identity() {
        let m = shapes::icosphere(3);
        let (_, t) = normalize(&m);
        assert!(t.center().norm() < 1e-9);
        assert!((t.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalization_is_idempotent_and_invertible() {
        let m = shapes::torus(0.7, 0.2, 24, 12);
        let shifted = m.transformed(&NormalizationTransform {
            center: [-3.0, 1.5, 0.25],
            scale: 0.37,
        });
        let (n1, t1) = normalize(&shifted);
        let (_, t2) = normalize(&n1);
        assert!(t2.center().norm() < 1e-9 && (t2.scale - 1.0).abs() < 1e-9);
        for (orig, norm) in shifted.vertices().iter().zip(n1.vertices()) {
            let back = t1.invert(norm);
            assert!((back - orig).norm() <= 1e-9 * orig.norm().max(1.0));
        }
        let d = n1.bounding_diameter();
        assert!((d - 2.0).abs() < 1e-9);
        assert!(n1.vertices().iter().all(|v| v.norm() <= 1.0 + 1e-9));
    }

    #[test]
    fn single_triangle_sample_is_inside() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        let m = TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap().mesh;
        let s = sample_surface(&m, 1, 3).unwrap();
        let p = s.points()[0];
        // barycentric coordinates for this triangle are (1 − x − y, x, y)
        let bary = [1.0 - p.x - p.y, p.x, p.y];
        assert!(bary.iter().all(|&b| (0.0..=1.0).contains(&b)));
        assert!(p.z.abs() < 1e-15);
    }

    #[test]
    fn sampling_follows_area_ratio() {
        // areas 1 and 3
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(13.0, 0.0, 0.0),
            Vec3::new(10.0, 2.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap().mesh;
        assert!((m.areas()[0] - 1.0).abs() < 1e-15 && (m.areas()[1] - 3.0).abs() < 1e-15);
        let n = 100_000;
        let s = sample_surface(&m, n, 11).unwrap();
        let first = s.sources().iter().filter(|&&t| t == 0).count() as f64;
        let (p, nf) = (0.25, n as f64);
        let sigma = (nf * p * (1.0 - p)).sqrt();
        assert!((first - nf * p).abs() < 3.0 * sigma, "count {first}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = shapes::icosphere(2);
        let a = sample_surface(&m, 500, 9).unwrap();
        let b = sample_surface(&m, 500, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_surface(&m, 500, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn icosphere_samples_mean_radius() {
        let m = shapes::icosphere(3);
        let s = sample_surface(&m, 4000, 5).unwrap();
        let mean = s.points().iter().map(|p| p.norm()).sum::<f64>() / 4000.0;
        let vmean = m.vertices().iter().map(|p| p.norm()).sum::<f64>() / m.vertices().len() as f64;
        assert!((mean - vmean).abs() / vmean < 0.005);
        for (p, &t) in s.points().iter().zip(s.sources()) {
            let [a, b, c] = m.corners(t as usize);
            let normal = (b - a).cross(&(c - a)).normalize();
            assert!((p - a).dot(&normal).abs() < 1e-9);
        }
    }

    #[test]
    fn icosphere_area_close_to_sphere() {
        let m = shapes::icosphere(3);
        assert_eq!(m.triangle_count(), 1280);
        let area = m.total_area();
        let sphere = 4.0 * std::f64::consts::PI;
        assert!((area - sphere).abs() / sphere < 0.01, "area {area}");
    }

    #[test]
    fn closed_shapes_are_watertight() {
        assert!(shapes::cube(1.0).is_watertight());
        assert!(shapes::icosphere(2).is_watertight());
        assert!(shapes::torus(0.7, 0.2, 16, 8).is_watertight());
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y()];
        assert!(!TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap().mesh.is_watertight());
    }
}
