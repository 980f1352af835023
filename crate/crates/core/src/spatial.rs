//! BVH-accelerated ray queries against a triangle mesh: closest hit,
//! even-odd containment and point-to-point visibility.

use std::cmp::Ordering;

use crate::geometry::{Aabb, Vec3};
use crate::mesh::TriangleMesh;

/// Minimum accepted hit distance along a ray.
pub const RAY_EPSILON: f64 = 1e-7;
/// Relative band for declaring a surface point visible.
pub const VISIBILITY_EPSILON: f64 = 1e-4;

const LEAF_SIZE: usize = 4;
const SAH_BINS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub triangle: usize,
    /// Weights of the triangle's three corners.
    pub barycentric: [f64; 3],
}

impl RayHit {
    #[inline]
    fn closer_than(&self, other: &RayHit) -> bool {
        match self.t.total_cmp(&other.t) {
            Ordering::Less => true,
            Ordering::Equal => self.triangle < other.triangle,
            Ordering::Greater => false,
        }
    }
}

/// Möller–Trumbore intersection; edges and vertices count as inside.
#[inline]
pub fn intersect_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<(f64, f64, f64)> {
    intersect_prepared(origin, dir, &[tri[0], tri[1] - tri[0], tri[2] - tri[0]])
}

/// Intersection against `[v0, v1 − v0, v2 − v0]`.
#[inline]
fn intersect_prepared(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<(f64, f64, f64)> {
    let [v0, e1, e2] = tri;
    let p = dir.cross(e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - v0;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t > RAY_EPSILON {
        Some((t, u, v))
    } else {
        None
    }
}

/// Ray with a NaN-free reciprocal direction: zero components are replaced
/// by a tiny signed value so slab products never evaluate `0 · ∞`.
struct Ray {
    origin: Vec3,
    inv: Vec3,
}

impl Ray {
    #[inline]
    fn new(origin: &Vec3, dir: &Vec3) -> Ray {
        let r = |d: f64| 1.0 / if d == 0.0 { 1e-300f64.copysign(d) } else { d };
        Ray {
            origin: *origin,
            inv: Vec3::new(r(dir.x), r(dir.y), r(dir.z)),
        }
    }

    /// Entry distance into `b` if the ray meets it within `[0, t_max]`.
    #[inline]
    fn enter(&self, b: &Aabb, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            let a = (b.min[axis] - self.origin[axis]) * self.inv[axis];
            let c = (b.max[axis] - self.origin[axis]) * self.inv[axis];
            t0 = t0.max(a.min(c));
            t1 = t1.min(a.max(c));
        }
        (t0 <= t1).then_some(t0)
    }
}

/// Traversal stack kept inline for typical depths.
struct Stack {
    inline: [u32; 64],
    len: usize,
    spill: Vec<u32>,
}

impl Stack {
    #[inline]
    fn new(root: u32) -> Stack {
        let mut s = Stack {
            inline: [0; 64],
            len: 0,
            spill: Vec::new(),
        };
        s.push(root);
        s
    }

    #[inline]
    fn push(&mut self, v: u32) {
        if self.len < self.inline.len() {
            self.inline[self.len] = v;
            self.len += 1;
        } else {
            self.spill.push(v);
        }
    }

    #[inline]
    fn pop(&mut self) -> Option<u32> {
        if let Some(v) = self.spill.pop() {
            return Some(v);
        }
        if self.len == 0 {
            return None;
        }
        self.len -= 1;
        Some(self.inline[self.len])
    }
}

#[derive(Debug, Clone, Copy)]
struct BvhNode {
    bounds: Aabb,
    /// Leaf: first primitive; interior: index of the right child (left is `self + 1`).
    offset: u32,
    /// Primitive count for leaves, 0 for interior nodes.
    count: u32,
}

/// Bounding-volume hierarchy over the triangles of a mesh.
#[derive(Debug, Clone)]
pub struct RayAccelerator {
    mesh: TriangleMesh,
    /// First corner and the two edge vectors from it.
    tris: Vec<[Vec3; 3]>,
    prims: Vec<u32>,
    nodes: Vec<BvhNode>,
}

struct BuildPrim {
    bounds: Aabb,
    centroid: Vec3,
    index: u32,
}

impl RayAccelerator {
    pub fn new(mesh: &TriangleMesh) -> RayAccelerator {
        let corners: Vec<[Vec3; 3]> = (0..mesh.triangle_count()).map(|i| mesh.corners(i)).collect();
        let mut build: Vec<BuildPrim> = corners
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let bounds = Aabb::from_points(t.iter());
                BuildPrim {
                    bounds,
                    centroid: bounds.center(),
                    index: i as u32,
                }
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * corners.len() / LEAF_SIZE + 1);
        let n = build.len();
        build_node(&mut build, 0, n, &mut nodes);
        let prims = build.iter().map(|p| p.index).collect();
        let tris = corners.iter().map(|t| [t[0], t[1] - t[0], t[2] - t[0]]).collect();
        RayAccelerator {
            mesh: mesh.clone(),
            tris,
            prims,
            nodes,
        }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn leaf_primitives(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .filter(|n| n.count > 0)
            .map(|n| {
                self.prims[n.offset as usize..(n.offset + n.count) as usize]
                    .iter()
                    .map(|&p| p as usize)
                    .collect()
            })
            .collect()
    }

    #[inline]
    fn leaf(&self, node: &BvhNode) -> &[u32] {
        &self.prims[node.offset as usize..(node.offset + node.count) as usize]
    }

    /// Pushes the children of an interior node that the ray enters before
    /// `limit`, nearer child on top.
    #[inline]
    fn push_children(&self, ray: &Ray, id: u32, node: &BvhNode, limit: f64, stack: &mut Stack) {
        let (left, right) = (id + 1, node.offset);
        let dl = ray.enter(&self.nodes[left as usize].bounds, limit);
        let dr = ray.enter(&self.nodes[right as usize].bounds, limit);
        match (dl, dr) {
            (Some(a), Some(b)) => {
                let (near, far) = if a <= b { (left, right) } else { (right, left) };
                stack.push(far);
                stack.push(near);
            }
            (Some(_), None) => stack.push(left),
            (None, Some(_)) => stack.push(right),
            (None, None) => {}
        }
    }

    /// Nearest intersection with `t > RAY_EPSILON`; ties resolve to the lower triangle index.
    pub fn closest_hit(&self, origin: &Vec3, direction: &Vec3) -> Option<RayHit> {
        let ray = Ray::new(origin, direction);
        let mut best: Option<RayHit> = None;
        let mut limit = f64::INFINITY;
        ray.enter(&self.nodes[0].bounds, limit)?;
        let mut stack = Stack::new(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if ray.enter(&node.bounds, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &p in self.leaf(node) {
                    if let Some((t, u, v)) = intersect_prepared(origin, direction, &self.tris[p as usize]) {
                        let hit = RayHit {
                            t,
                            triangle: p as usize,
                            barycentric: [1.0 - u - v, u, v],
                        };
                        if best.is_none_or(|b| hit.closer_than(&b)) {
                            best = Some(hit);
                            limit = t;
                        }
                    }
                }
            } else {
                self.push_children(&ray, id, node, limit, &mut stack);
            }
        }
        best
    }

    /// Number of surface crossings along the whole ray.
    pub fn count_crossings(&self, origin: &Vec3, direction: &Vec3) -> usize {
        let ray = Ray::new(origin, direction);
        let mut count = 0;
        if ray.enter(&self.nodes[0].bounds, f64::INFINITY).is_none() {
            return 0;
        }
        let mut stack = Stack::new(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.count > 0 {
                for &p in self.leaf(node) {
                    if intersect_prepared(origin, direction, &self.tris[p as usize]).is_some() {
                        count += 1;
                    }
                }
            } else {
                self.push_children(&ray, id, node, f64::INFINITY, &mut stack);
            }
        }
        count
    }

    /// Whether any surface lies on the ray strictly between `RAY_EPSILON` and `t_max`.
    pub fn occluded(&self, origin: &Vec3, direction: &Vec3, t_max: f64) -> bool {
        let ray = Ray::new(origin, direction);
        if ray.enter(&self.nodes[0].bounds, t_max).is_none() {
            return false;
        }
        let mut stack = Stack::new(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if node.count > 0 {
                for &p in self.leaf(node) {
                    if let Some((t, _, _)) = intersect_prepared(origin, direction, &self.tris[p as usize]) {
                        if t < t_max {
                            return true;
                        }
                    }
                }
            } else {
                self.push_children(&ray, id, node, t_max, &mut stack);
            }
        }
        false
    }

    /// Even-odd containment decided by a majority over `votes` jittered rays.
    pub fn is_inside(&self, point: &Vec3, votes: usize) -> bool {
        let votes = votes.max(1);
        let mut inside = 0;
        for k in 0..votes {
            let dir = parity_direction(point, k);
            if self.count_crossings(point, &dir) % 2 == 1 {
                inside += 1;
            }
        }
        2 * inside > votes
    }

    /// Whether the segment from `c` to the surface point `x` reaches `x`
    /// without crossing the surface earlier (up to a relative band).
    pub fn is_visible(&self, c: &Vec3, x: &Vec3) -> bool {
        let delta = x - c;
        let dist = delta.norm();
        if dist == 0.0 {
            return false;
        }
        !self.occluded(c, &(delta / dist), dist * (1.0 - VISIBILITY_EPSILON))
    }
}

const PARITY_BASE: [[f64; 3]; 5] = [
    [0.5773502691896258, 0.5773502691896257, 0.5773502691896258],
    [-0.3162277660168379, 0.8432740427115678, -0.4346598037226364],
    [0.2672612419124244, -0.5345224838248488, -0.8017837257372732],
    [-0.7427813527082074, -0.3713906763541037, 0.5570860145311556],
    [0.1796053020267749, 0.3592106040535498, -0.9157810406287113],
];

/// Fixed base directions perturbed by a hash of the query point.
fn parity_direction(point: &Vec3, k: usize) -> Vec3 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15 ^ (k as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    for c in point.iter() {
        h ^= c.to_bits();
        h = splitmix(h);
    }
    let base = Vec3::from(PARITY_BASE[k % PARITY_BASE.len()]);
    let jitter = Vec3::new(unit_from(h), unit_from(splitmix(h)), unit_from(splitmix(h ^ 0xA5A5)));
    (base + jitter * 0.05).normalize()
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn unit_from(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn build_node(prims: &mut [BuildPrim], start: usize, end: usize, nodes: &mut Vec<BvhNode>) -> u32 {
    let id = nodes.len() as u32;
    let slice = &mut prims[start..end];
    let bounds = slice.iter().fold(Aabb::empty(), |b, p| b.merge(&p.bounds));
    nodes.push(BvhNode {
        bounds,
        offset: start as u32,
        count: slice.len() as u32,
    });
    if slice.len() <= LEAF_SIZE {
        return id;
    }
    let centroid_bounds = Aabb::from_points(slice.iter().map(|p| &p.centroid));
    let extent = centroid_bounds.extent();
    let axis = extent.imax();
    if extent[axis] <= 0.0 {
        // coincident centroids: split in the middle of the list
        return finish_split(prims, start, start + (end - start) / 2, end, nodes, id);
    }

    let mut bins = [(Aabb::empty(), 0usize); SAH_BINS];
    let lo = centroid_bounds.min[axis];
    let scale = SAH_BINS as f64 / extent[axis];
    let bin_of = |c: f64| (((c - lo) * scale) as usize).min(SAH_BINS - 1);
    for p in slice.iter() {
        let b = &mut bins[bin_of(p.centroid[axis])];
        b.0 = b.0.merge(&p.bounds);
        b.1 += 1;
    }
    let mut best_cost = f64::INFINITY;
    let mut best_split = 0;
    for split in 1..SAH_BINS {
        let (mut lb, mut lc, mut rb, mut rc) = (Aabb::empty(), 0, Aabb::empty(), 0);
        for (i, (b, c)) in bins.iter().enumerate() {
            if i < split {
                lb = lb.merge(b);
                lc += c;
            } else {
                rb = rb.merge(b);
                rc += c;
            }
        }
        if lc == 0 || rc == 0 {
            continue;
        }
        let cost = lb.surface_area() * lc as f64 + rb.surface_area() * rc as f64;
        if cost < best_cost {
            best_cost = cost;
            best_split = split;
        }
    }
    let mid = if best_split == 0 {
        None
    } else {
        let mut i = 0;
        for j in 0..slice.len() {
            if bin_of(slice[j].centroid[axis]) < best_split {
                slice.swap(i, j);
                i += 1;
            }
        }
        (i > 0 && i < slice.len()).then_some(i)
    };
    let mid = match mid {
        Some(m) => start + m,
        None => {
            // median fallback
            let m = slice.len() / 2;
            slice.select_nth_unstable_by(m, |a, b| {
                a.centroid[axis]
                    .total_cmp(&b.centroid[axis])
                    .then(a.index.cmp(&b.index))
            });
            start + m
        }
    };
    finish_split(prims, start, mid, end, nodes, id)
}

fn finish_split(
    prims: &mut [BuildPrim],
    start: usize,
    mid: usize,
    end: usize,
    nodes: &mut Vec<BvhNode>,
    id: u32,
) -> u32 {
    build_node(prims, start, mid, nodes);
    let right = build_node(prims, mid, end, nodes);
    nodes[id as usize].offset = right;
    nodes[id as usize].count = 0;
    id
}

/// Reference implementation scanning every triangle.
pub fn brute_force_closest_hit(mesh: &TriangleMesh, origin: &Vec3, direction: &Vec3) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for i in 0..mesh.triangle_count() {
        if let Some((t, u, v)) = intersect_triangle(origin, direction, &mesh.corners(i)) {
            let hit = RayHit {
                t,
                triangle: i,
                barycentric: [1.0 - u - v, u, v],
            };
            if best.is_none_or(|b| hit.closer_than(&b)) {
                best = Some(hit);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::sampling::random_unit_vector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_triangle_in_exactly_one_leaf() {
        let mesh = shapes::torus(0.7, 0.2, 40, 20);
        let acc = RayAccelerator::new(&mesh);
        let mut seen = vec![0; mesh.triangle_count()];
        for leaf in acc.leaf_primitives() {
            assert!(leaf.len() <= LEAF_SIZE);
            for t in leaf {
                seen[t] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn center_of_sphere_hits_at_radius() {
        let acc = RayAccelerator::new(&shapes::icosphere(4));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let d = random_unit_vector(&mut rng);
            let hit = acc.closest_hit(&Vec3::zeros(), &d).unwrap();
            assert!((hit.t - 1.0).abs() < 3e-3);
        }
    }

    #[test]
    fn cube_from_outside() {
        let acc = RayAccelerator::new(&shapes::cube(1.0));
        let hit = acc.closest_hit(&Vec3::new(-2.0, 0.0, 0.0), &Vec3::x()).unwrap();
        assert_eq!(hit.t, 1.5);
        assert!(acc.closest_hit(&Vec3::new(-2.0, 0.0, 0.0), &-Vec3::x()).is_none());
    }

    #[test]
    fn hit_point_lies_on_triangle() {
        let mesh = shapes::torus(0.7, 0.2, 30, 12);
        let acc = RayAccelerator::new(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let o = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.3..0.3),
            );
            let d = random_unit_vector(&mut rng);
            if let Some(hit) = acc.closest_hit(&o, &d) {
                assert!(hit.t > 0.0);
                let [a, b, c] = mesh.corners(hit.triangle);
                let p = a * hit.barycentric[0] + b * hit.barycentric[1] + c * hit.barycentric[2];
                assert!((o + d * hit.t - p).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn parity_on_simple_shapes() {
        let cube = RayAccelerator::new(&shapes::cube(1.0));
        assert!(cube.is_inside(&Vec3::zeros(), 3));
        assert!(!cube.is_inside(&Vec3::new(2.0, 0.0, 0.0), 3));
        let torus = RayAccelerator::new(&shapes::torus(0.7, 0.2, 48, 24));
        assert!(!torus.is_inside(&Vec3::zeros(), 3));
        assert!(!torus.is_inside(&Vec3::new(0.0, 0.0, 0.1), 1));
        assert!(torus.is_inside(&Vec3::new(0.7, 0.0, 0.0), 3));
    }

    #[test]
    fn visibility_inside_sphere_and_cube() {
        let sphere = shapes::icosphere(3);
        let acc = RayAccelerator::new(&sphere);
        let s = crate::mesh::sample_surface(&sphere, 500, 1).unwrap();
        assert!(s.points().iter().all(|x| acc.is_visible(&Vec3::zeros(), x)));

        let cube = shapes::cube(1.0);
        let acc = RayAccelerator::new(&cube);
        let s = crate::mesh::sample_surface(&cube, 4000, 2).unwrap();
        let c = Vec3::new(0.1, -0.2, 0.05);
        assert!(s.points().iter().all(|x| acc.is_visible(&c, x)));
    }

    #[test]
    fn far_lobe_is_occluded() {
        let acc = RayAccelerator::new(&shapes::two_spheres(0.6, 0.35, 3));
        let c = Vec3::new(-0.6, 0.0, 0.0);
        // the far lobe's nearest pole, seen through the near lobe's wall
        let x = Vec3::new(0.25, 0.0, 0.0);
        assert!(!acc.is_visible(&c, &x));
        let hit = acc.closest_hit(&c, &Vec3::x()).unwrap();
        assert!((hit.t - 0.35).abs() < 1e-2);
    }

    #[test]
    fn visibility_agrees_with_closest_hit() {
        let mesh = shapes::torus(0.7, 0.25, 32, 12);
        let acc = RayAccelerator::new(&mesh);
        let s = crate::mesh::sample_surface(&mesh, 400, 9).unwrap();
        for c in [Vec3::new(0.7, 0.0, 0.0), Vec3::new(-0.5, 0.45, 0.1)] {
            for x in s.points() {
                let d = x - c;
                let by_hit = acc
                    .closest_hit(&c, &d.normalize())
                    .is_some_and(|h| h.t >= d.norm() * (1.0 - VISIBILITY_EPSILON));
                assert_eq!(acc.is_visible(&c, x), by_hit);
            }
        }
    }

    #[test]
    fn triangle_order_does_not_change_answers() {
        let mesh = shapes::torus(0.7, 0.2, 24, 10);
        let mut tris = mesh.triangles().to_vec();
        tris.reverse();
        let permuted = TriangleMesh::new(mesh.vertices().to_vec(), tris).unwrap().mesh;
        let (a, b) = (RayAccelerator::new(&mesh), RayAccelerator::new(&permuted));
        let s = crate::mesh::sample_surface(&mesh, 300, 4).unwrap();
        let c = Vec3::new(0.7, 0.0, 0.0);
        for x in s.points() {
            assert_eq!(a.is_visible(&c, x), b.is_visible(&c, x));
        }
    }
}
