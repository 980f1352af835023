use rayon::prelude::*;

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::kdtree::KdTree;
use crate::spatial::RayAccelerator;
use crate::sphere_grid::SphereGrid;

/// Fraction of missed rays above which a field is rejected.
pub const MAX_INVALID_FRACTION: f64 = 0.1;
/// Largest admissible radius in the unit-sphere frame.
const MAX_RADIUS: f64 = 2.0;

/// Distances from an anchor to the first surface hit along each grid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    anchor: Vec3,
    nside: u32,
    radii: Vec<f64>,
    valid: Vec<bool>,
}

impl RadialField {
    /// Field with every pixel valid.
    pub fn from_radii(anchor: Vec3, nside: u32, radii: Vec<f64>) -> Result<Self> {
        let npix = 12 * (nside as usize).pow(2);
        if radii.len() != npix {
            return Err(SharcError::InvalidArgument(format!(
                "{} radii for a grid of {npix} pixels",
                radii.len()
            )));
        }
        let valid = vec![true; npix];
        Ok(RadialField {
            anchor,
            nside,
            radii,
            valid,
        })
    }

    pub fn anchor(&self) -> Vec3 {
        self.anchor
    }

    pub fn nside(&self) -> u32 {
        self.nside
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn invalid_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

/// Casts one ray per pixel center; missed pixels are inpainted from their
/// neighbours by repeated median filling.
pub fn sample_radial_field(anchor: &Vec3, grid: &SphereGrid, acc: &RayAccelerator) -> Result<RadialField> {
    let hits: Vec<Option<f64>> = grid
        .directions()
        .par_iter()
        .map(|d| {
            acc.closest_hit(anchor, d)
                .map(|h| h.t)
                .filter(|t| *t > 0.0 && *t <= MAX_RADIUS)
        })
        .collect();
    let mut valid: Vec<bool> = hits.iter().map(Option::is_some).collect();
    let mut radii: Vec<f64> = hits.iter().map(|h| h.unwrap_or(0.0)).collect();
    let missing = valid.iter().filter(|v| !**v).count();
    if missing as f64 > MAX_INVALID_FRACTION * grid.npix() as f64 {
        return Err(SharcError::Geometry(format!(
            "anchor field unreliable: {missing} of {} rays missed the surface",
            grid.npix()
        )));
    }
    let original_valid = valid.clone();
    if missing > 0 {
        log::debug!("inpainting {missing} missed pixels");
        inpaint(grid, &mut radii, &mut valid);
    }
    Ok(RadialField {
        anchor: *anchor,
        nside: grid.nside(),
        radii,
        valid: original_valid,
    })
}

fn inpaint(grid: &SphereGrid, radii: &mut [f64], valid: &mut [bool]) {
    let tree = KdTree::new(grid.directions().to_vec());
    let neighbours: Vec<Vec<usize>> = (0..grid.npix())
        .map(|i| {
            if valid[i] {
                Vec::new()
            } else {
                tree.knn(&grid.directions()[i], 9)
                    .into_iter()
                    .map(|n| n.index)
                    .filter(|&j| j != i)
                    .collect()
            }
        })
        .collect();
    loop {
        let mut updates = Vec::new();
        for i in 0..radii.len() {
            if valid[i] {
                continue;
            }
            let mut vals: Vec<f64> = neighbours[i].iter().filter(|&&j| valid[j]).map(|&j| radii[j]).collect();
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(f64::total_cmp);
            let mid = vals.len() / 2;
            let median = if vals.len().is_multiple_of(2) {
                0.5 * (vals[mid - 1] + vals[mid])
            } else {
                vals[mid]
            };
            updates.push((i, median));
        }
        if updates.is_empty() {
            break;
        }
        for (i, v) in updates {
            radii[i] = v;
            valid[i] = true;
        }
    }
    // isolated regions with no valid neighbour chain fall back to the mean
    let (sum, count) = radii
        .iter()
        .zip(valid.iter())
        .filter(|(_, v)| **v)
        .fold((0.0, 0usize), |(s, c), (r, _)| (s + r, c + 1));
    let mean = if count > 0 { sum / count as f64 } else { 1.0 };
    for (r, v) in radii.iter_mut().zip(valid.iter()) {
        if !*v {
            *r = mean;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{shapes, TriangleMesh};

    #[test]
    fn centered_sphere_field_is_unit() {
        let acc = RayAccelerator::new(&shapes::icosphere(5));
        let grid = SphereGrid::new(16).unwrap();
        let f = sample_radial_field(&Vec3::zeros(), &grid, &acc).unwrap();
        assert_eq!(f.invalid_count(), 0);
        assert!(f.radii().iter().all(|r| (r - 1.0).abs() < 1e-3));
    }

    #[test]
    fn offset_anchor_in_sphere() {
        let acc = RayAccelerator::new(&shapes::icosphere(5));
        let c = Vec3::new(0.3, 0.0, 0.0);
        let plus = acc.closest_hit(&c, &Vec3::x()).unwrap().t;
        let minus = acc.closest_hit(&c, &-Vec3::x()).unwrap().t;
        assert!((plus - 0.7).abs() < 1e-3 && (minus - 1.3).abs() < 1e-3);
    }

    #[test]
    fn cube_center_radii() {
        let acc = RayAccelerator::new(&shapes::cube(1.0));
        let face = acc.closest_hit(&Vec3::zeros(), &Vec3::z()).unwrap().t;
        let diag = acc
            .closest_hit(&Vec3::zeros(), &Vec3::repeat(1.0).normalize())
            .unwrap()
            .t;
        assert!((face - 0.5).abs() < 1e-12);
        assert!((diag - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_patch_is_inpainted() {
        // sphere with its top cap removed: rays through the hole escape
        let sphere = shapes::icosphere(4);
        let tris: Vec<[u32; 3]> = sphere
            .triangles()
            .iter()
            .copied()
            .filter(|t| t.iter().all(|&i| sphere.vertices()[i as usize].z < 0.97))
            .collect();
        let holed = TriangleMesh::new(sphere.vertices().to_vec(), tris).unwrap().mesh;
        let acc = RayAccelerator::new(&holed);
        let grid = SphereGrid::new(16).unwrap();
        let f = sample_radial_field(&Vec3::zeros(), &grid, &acc).unwrap();
        assert!(f.invalid_count() > 0);
        assert!(f.radii().iter().all(|r| (r - 1.0).abs() < 3e-3));
    }

    #[test]
    fn mostly_open_surface_is_rejected() {
        let sphere = shapes::icosphere(3);
        let tris: Vec<[u32; 3]> = sphere
            .triangles()
            .iter()
            .copied()
            .filter(|t| t.iter().all(|&i| sphere.vertices()[i as usize].z < 0.0))
            .collect();
        let half = TriangleMesh::new(sphere.vertices().to_vec(), tris).unwrap().mesh;
        let acc = RayAccelerator::new(&half);
        let grid = SphereGrid::new(8).unwrap();
        let err = sample_radial_field(&Vec3::zeros(), &grid, &acc).unwrap_err();
        assert!(err.to_string().contains("anchor field unreliable"));
    }
}
