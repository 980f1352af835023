//! Small shared geometric vocabulary.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x.max(0.0) * e.y.max(0.0) * e.z.max(0.0)
    }

    pub fn surface_area(&self) -> f64 {
        let e = self.extent();
        if e.x < 0.0 {
            return 0.0;
        }
        2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    /// Slab test; returns the entry distance if the ray meets the box within `[0, t_max]`.
    #[inline]
    pub fn ray_entry(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            if inv_dir[axis].is_infinite() {
                if origin[axis] < self.min[axis] || origin[axis] > self.max[axis] {
                    return None;
                }
                continue;
            }
            let a = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let b = (self.max[axis] - origin[axis]) * inv_dir[axis];
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// Unit vector from spherical coordinates (colatitude, azimuth).
pub fn direction_from_angles(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// Colatitude and azimuth (in `[0, 2π)`) of a unit vector.
pub fn angles_from_direction(d: &Vec3) -> (f64, f64) {
    let theta = d.z.clamp(-1.0, 1.0).acos();
    let mut phi = d.y.atan2(d.x);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    (theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slab_test_handles_parallel_rays_on_faces() {
        let b = Aabb {
            min: Vec3::new(0.0, 0.0, -1.0),
            max: Vec3::new(1.0, 1.0, 1.0),
        };
        let inv = |d: Vec3| Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        // origin on the y = 0 face, ray along +x
        assert_eq!(
            b.ray_entry(&Vec3::new(-1.0, 0.0, 0.0), &inv(Vec3::x()), f64::INFINITY),
            Some(1.0)
        );
        assert_eq!(
            b.ray_entry(&Vec3::new(-1.0, -0.1, 0.0), &inv(Vec3::x()), f64::INFINITY),
            None
        );
        assert_eq!(
            b.ray_entry(&Vec3::new(0.5, 0.5, 0.0), &inv(-Vec3::z()), f64::INFINITY),
            Some(0.0)
        );
        assert_eq!(b.ray_entry(&Vec3::new(-1.0, 0.5, 0.0), &inv(Vec3::x()), 0.5), None);
    }

    #[test]
    fn angle_round_trip() {
        for &(t, p) in &[(0.3, 1.0), (2.9, 5.5), (1.2, 0.0)] {
            let (t2, p2) = angles_from_direction(&direction_from_angles(t, p));
            assert!((t - t2).abs() < 1e-12 && (p - p2).abs() < 1e-12);
        }
    }
}
