//! Static 3-d tree for exact nearest, k-nearest and radius queries.
//!
//! Distances are compared as `(squared distance, point index)` so results
//! are reproducible and match a brute-force scan including ties.

use std::cmp::Ordering;

use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

impl Neighbor {
    #[inline]
    fn key_cmp(&self, other: &Neighbor) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }

    pub fn dist(&self) -> f64 {
        self.dist_sq.sqrt()
    }
}

impl KdTree {
    pub fn new(points: Vec<Vec3>) -> KdTree {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let len = order.len();
            build(&points, &mut order, 0, len, &mut nodes);
        }
        KdTree { points, order, nodes }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn nearest(&self, query: &Vec3) -> Option<Neighbor> {
        let mut best: Option<Neighbor> = None;
        if !self.nodes.is_empty() {
            self.nearest_rec(0, query, &mut best);
        }
        best
    }

    fn nearest_rec(&self, node: usize, q: &Vec3, best: &mut Option<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let cand = Neighbor {
                        index: i as usize,
                        dist_sq: (self.points[i as usize] - q).norm_squared(),
                    };
                    if best.is_none_or(|b| cand.key_cmp(&b) == Ordering::Less) {
                        *best = Some(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near as usize, q, best);
                if best.is_none_or(|b| diff * diff <= b.dist_sq) {
                    self.nearest_rec(far as usize, q, best);
                }
            }
        }
    }

    /// The `k` nearest points sorted by increasing distance.
    pub fn knn(&self, query: &Vec3, k: usize) -> Vec<Neighbor> {
        let mut heap: Vec<Neighbor> = Vec::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.knn_rec(0, query, k, &mut heap);
        }
        heap
    }

    fn knn_rec(&self, node: usize, q: &Vec3, k: usize, best: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let cand = Neighbor {
                        index: i as usize,
                        dist_sq: (self.points[i as usize] - q).norm_squared(),
                    };
                    if best.len() == k && cand.key_cmp(best.last().unwrap()) != Ordering::Less {
                        continue;
                    }
                    let pos = best.partition_point(|b| b.key_cmp(&cand) == Ordering::Less);
                    best.insert(pos, cand);
                    if best.len() > k {
                        best.pop();
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near as usize, q, k, best);
                if best.len() < k || diff * diff <= best.last().unwrap().dist_sq {
                    self.knn_rec(far as usize, q, k, best);
                }
            }
        }
    }

    /// All points with `‖p − q‖ ≤ radius`, in increasing index order.
    pub fn within_radius(&self, query: &Vec3, radius: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        if !self.nodes.is_empty() && radius >= 0.0 {
            self.radius_rec(0, query, radius, &mut out);
        }
        out.sort_unstable_by_key(|n| n.index);
        out
    }

    fn radius_rec(&self, node: usize, q: &Vec3, radius: f64, out: &mut Vec<Neighbor>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start as usize..end as usize] {
                    let p = self.points[i as usize];
                    // compare actual distances so the boundary matches `norm() <= radius`
                    let d = (p - q).norm();
                    if d <= radius {
                        out.push(Neighbor {
                            index: i as usize,
                            dist_sq: d * d,
                        });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                if diff <= radius {
                    self.radius_rec(left as usize, q, radius, out);
                }
                if -diff <= radius {
                    self.radius_rec(right as usize, q, radius, out);
                }
            }
        }
    }
}

fn build(points: &[Vec3], order: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let id = nodes.len() as u32;
    let slice = &mut order[start..end];
    if slice.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: start as u32,
            end: end as u32,
        });
        return id;
    }
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in slice.iter() {
        lo = lo.inf(&points[i as usize]);
        hi = hi.sup(&points[i as usize]);
    }
    let axis = (hi - lo).imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let value = points[slice[mid] as usize][axis];
    // left holds coordinates ≤ value, right ≥ value; queries descend both on equality
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let left = build(points, order, start, start + mid, nodes);
    let right = build(points, order, start + mid, end, nodes);
    nodes[id as usize] = Node::Split {
        axis: axis as u8,
        value,
        left,
        right,
    };
    id
}
