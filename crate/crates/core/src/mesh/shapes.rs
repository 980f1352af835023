//! Closed, outward-wound test surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geometry::Vec3;
use crate::mesh::TriangleMesh;

fn build(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> TriangleMesh {
    TriangleMesh::new(vertices, triangles)
        .expect("generated shapes are non-empty")
        .mesh
}

/// Unit-radius icosphere with `20·4^subdivisions` faces.
pub fn icosphere(subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Vec3::from(*c).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let m = ((vertices[a as usize] + vertices[b as usize]) * 0.5).normalize();
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    build(vertices, faces)
}

/// Axis-aligned box with two triangles per face.
pub fn axis_box(min: Vec3, max: Vec3) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8u32 {
        vertices.push(Vec3::new(
            if i & 1 == 0 { min.x } else { max.x },
            if i & 2 == 0 { min.y } else { max.y },
            if i & 4 == 0 { min.z } else { max.z },
        ));
    }
    let faces = vec![
        [0, 4, 6],
        [0, 6, 2], // -x
        [1, 3, 7],
        [1, 7, 5], // +x
        [0, 1, 5],
        [0, 5, 4], // -y
        [2, 6, 7],
        [2, 7, 3], // +y
        [0, 2, 3],
        [0, 3, 1], // -z
        [4, 5, 7],
        [4, 7, 6], // +z
    ];
    build(vertices, faces)
}

/// Cube of the given edge length centered at the origin.
pub fn cube(edge: f64) -> TriangleMesh {
    let h = Vec3::repeat(edge / 2.0);
    axis_box(-h, h)
}

/// Torus around the z axis with `2·major·minor` faces.
pub fn torus(major_radius: f64, minor_radius: f64, major_segments: u32, minor_segments: u32) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((major_segments * minor_segments) as usize);
    for i in 0..major_segments {
        let u = 2.0 * PI * i as f64 / major_segments as f64;
        for j in 0..minor_segments {
            let v = 2.0 * PI * j as f64 / minor_segments as f64;
            let ring = major_radius + minor_radius * v.cos();
            vertices.push(Vec3::new(ring * u.cos(), ring * u.sin(), minor_radius * v.sin()));
        }
    }
    let idx = |i: u32, j: u32| (i % major_segments) * minor_segments + (j % minor_segments);
    let mut faces = Vec::with_capacity((2 * major_segments * minor_segments) as usize);
    for i in 0..major_segments {
        for j in 0..minor_segments {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    build(vertices, faces)
}

/// Two disjoint icospheres of `radius` centered at `±offset` along x.
pub fn two_spheres(offset: f64, radius: f64, subdivisions: u32) -> TriangleMesh {
    let sphere = icosphere(subdivisions);
    let n = sphere.vertices().len() as u32;
    let mut vertices = Vec::with_capacity(2 * n as usize);
    let mut faces = Vec::with_capacity(2 * sphere.triangle_count());
    for (k, sign) in [-1.0, 1.0].into_iter().enumerate() {
        let shift = Vec3::new(sign * offset, 0.0, 0.0);
        vertices.extend(sphere.vertices().iter().map(|v| v * radius + shift));
        let base = k as u32 * n;
        faces.extend(
            sphere
                .triangles()
                .iter()
                .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
        );
    }
    build(vertices, faces)
}

/// Star-shaped blob: an icosphere with vertex radii
/// `1 + amplitude·sin(lobes·θ)·cos(lobes·φ)`.
pub fn lobed_sphere(subdivisions: u32, amplitude: f64, lobes: u32) -> TriangleMesh {
    let base = icosphere(subdivisions);
    let k = lobes as f64;
    let vertices = base
        .vertices()
        .iter()
        .map(|v| {
            let theta = v.z.clamp(-1.0, 1.0).acos();
            let phi = v.y.atan2(v.x);
            v * (1.0 + amplitude * (k * theta).sin() * (k * phi).cos())
        })
        .collect();
    build(vertices, base.triangles().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_counts() {
        assert_eq!(icosphere(0).triangle_count(), 20);
        assert_eq!(icosphere(5).triangle_count(), 20480);
        assert_eq!(cube(1.0).triangle_count(), 12);
        assert_eq!(torus(0.7, 0.2, 250, 100).triangle_count(), 50_000);
    }

    #[test]
    fn outward_winding_gives_positive_volume() {
        assert!((cube(2.0).signed_volume() - 8.0).abs() < 1e-12);
        let v = icosphere(4).signed_volume();
        assert!(v > 0.98 * 4.0 / 3.0 * PI && v < 4.0 / 3.0 * PI);
        let t = torus(0.7, 0.2, 96, 48).signed_volume();
        let exact = 2.0 * PI * PI * 0.7 * 0.04;
        assert!((t - exact).abs() / exact < 0.01);
        assert!(two_spheres(0.6, 0.3, 2).signed_volume() > 0.0);
        assert!(lobed_sphere(3, 0.2, 3).signed_volume() > 0.0);
    }
}
