//! Greedy, visibility-aware reference point selection.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SharcError};
use crate::geometry::Vec3;
use crate::kdtree::KdTree;
use crate::sampling::{CandidatePool, SurfaceSampleSet};
use crate::spatial::RayAccelerator;

/// Uniformity value used while nothing has been selected.
pub const EMPTY_UNIFORMITY: f64 = 2.0;
const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub tau_prox: f64,
    pub w_cov: f64,
    pub w_cen: f64,
    pub w_uni: f64,
    pub max_points: Option<usize>,
    pub votes: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            tau_prox: 0.2,
            w_cov: 1.0,
            w_cen: 1.0,
            w_uni: 1.0,
            max_points: None,
            votes: 3,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_prox > 0.0 && self.tau_prox.is_finite()) {
            return Err(SharcError::InvalidArgument(format!(
                "tau_prox must be positive, got {}",
                self.tau_prox
            )));
        }
        if ![self.w_cov, self.w_cen, self.w_uni].iter().all(|w| w.is_finite()) {
            return Err(SharcError::InvalidArgument("selection weights must be finite".into()));
        }
        Ok(())
    }
}

/// `−1 / min_s ‖c − s‖`; `−∞` when the candidate sits on a sample.
pub fn centrality(candidate: &Vec3, samples: &KdTree) -> f64 {
    match samples.nearest(candidate) {
        Some(n) if n.dist_sq > 0.0 => -1.0 / n.dist(),
        _ => f64::NEG_INFINITY,
    }
}

/// Distance to the closest already-selected point.
pub fn uniformity(candidate: &Vec3, selected: &[Vec3]) -> f64 {
    selected
        .iter()
        .map(|s| (candidate - s).norm())
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
        .unwrap_or(EMPTY_UNIFORMITY)
}

/// Population z-scores; all zeros when the spread is negligible.
pub fn standardize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd >= STD_FLOOR) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Bitset over surface samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    words: Vec<u64>,
    len: usize,
}

impl SampleSet {
    pub fn empty(len: usize) -> Self {
        SampleSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = SampleSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection_count(&self, other: &SampleSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn remove_all(&mut self, other: &SampleSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }
}

/// `D[c][s]`: sample `s` lies within `τ` of candidate `c` and is visible from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMatrix {
    rows: Vec<SampleSet>,
    samples: usize,
}

impl CoverageMatrix {
    pub fn compute(candidates: &[Vec3], samples: &SurfaceSampleSet, acc: &RayAccelerator, tau: f64) -> Self {
        let tree = KdTree::new(samples.points().to_vec());
        CoverageMatrix::compute_with_tree(candidates, &tree, acc, tau)
    }

    fn compute_with_tree(candidates: &[Vec3], tree: &KdTree, acc: &RayAccelerator, tau: f64) -> Self {
        let n = tree.len();
        let rows = candidates
            .par_iter()
            .map(|c| {
                let mut row = SampleSet::empty(n);
                for nb in tree.within_radius(c, tau) {
                    if acc.is_visible(c, &tree.points()[nb.index]) {
                        row.insert(nb.index);
                    }
                }
                row
            })
            .collect();
        CoverageMatrix { rows, samples: n }
    }

    pub fn from_rows(rows: Vec<SampleSet>, samples: usize) -> Self {
        assert!(rows.iter().all(|r| r.capacity() == samples));
        CoverageMatrix { rows, samples }
    }

    pub fn row(&self, candidate: usize) -> &SampleSet {
        &self.rows[candidate]
    }

    pub fn candidates(&self) -> usize {
        self.rows.len()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn get(&self, candidate: usize, sample: usize) -> bool {
        self.rows[candidate].contains(sample)
    }
}

/// `|{s ∈ U : D[c][s]}| / |S|`.
pub fn coverage_row(matrix: &CoverageMatrix, candidate: usize, uncovered: &SampleSet) -> f64 {
    if matrix.samples == 0 {
        return 0.0;
    }
    matrix.row(candidate).intersection_count(uncovered) as f64 / matrix.samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStatus {
    /// Every surface sample is covered.
    Covered,
    /// Stopped at the configured cap.
    MaxPoints,
    /// No candidate covers any sample; nothing selected.
    NoCoverage,
    /// The best-scoring candidate covers nothing new.
    Stalled,
    /// Every candidate was selected or excluded.
    PoolExhausted,
}

impl SelectionStatus {
    pub fn describe(&self) -> &'static str {
        match self {
            SelectionStatus::Covered => "all samples covered",
            SelectionStatus::MaxPoints => "reached max_points",
            SelectionStatus::NoCoverage => "no coverage possible",
            SelectionStatus::Stalled => "no candidate covers the remaining samples",
            SelectionStatus::PoolExhausted => "candidate pool exhausted",
        }
    }
}

/// Scores of a candidate at the iteration it was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub candidate: usize,
    pub e_cov: f64,
    pub e_cen: f64,
    pub e_uni: f64,
    pub score: f64,
    pub uncovered_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePointSet {
    pub positions: Vec<Vec3>,
    pub provenance: Vec<TraceRow>,
    pub status: SelectionStatus,
    pub uncovered: usize,
}

impl ReferencePointSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,candidate,e_cov,e_cen,e_uni,h,uncovered\n");
        for r in &self.provenance {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iteration, r.candidate, r.e_cov, r.e_cen, r.e_uni, r.score, r.uncovered_after
            );
        }
        out
    }

    pub fn write_trace(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.trace_csv()).map_err(|e| SharcError::io(path, e))
    }
}

pub fn select_anchors(
    pool: &CandidatePool,
    samples: &SurfaceSampleSet,
    acc: &RayAccelerator,
    cfg: &SelectionConfig,
) -> Result<ReferencePointSet> {
    cfg.validate()?;
    if pool.points.is_empty() {
        return Err(SharcError::InvalidArgument("candidate pool is empty".into()));
    }
    if samples.is_empty() {
        return Err(SharcError::InvalidArgument("surface sample set is empty".into()));
    }
    let tree = KdTree::new(samples.points().to_vec());
    let matrix = CoverageMatrix::compute_with_tree(&pool.points, &tree, acc, cfg.tau_prox);
    let centralities: Vec<f64> = pool.points.iter().map(|c| centrality(c, &tree)).collect();
    greedy(&pool.points, &matrix, &centralities, cfg)
}

/// Greedy loop over a precomputed coverage matrix.
pub fn greedy(
    candidates: &[Vec3],
    matrix: &CoverageMatrix,
    centralities: &[f64],
    cfg: &SelectionConfig,
) -> Result<ReferencePointSet> {
    assert_eq!(candidates.len(), matrix.candidates());
    assert_eq!(candidates.len(), centralities.len());
    let mut available: Vec<usize> = (0..candidates.len()).filter(|&i| centralities[i].is_finite()).collect();
    if available.is_empty() {
        return Err(SharcError::Geometry(
            "every candidate coincides with a surface sample".into(),
        ));
    }
    let mut uncovered = SampleSet::full(matrix.samples());
    let mut nearest_selected = vec![EMPTY_UNIFORMITY; candidates.len()];
    let mut positions = Vec::new();
    let mut provenance = Vec::new();
    let cap = cfg.max_points.unwrap_or(usize::MAX);

    let status = loop {
        if uncovered.is_empty() {
            break SelectionStatus::Covered;
        }
        if positions.len() >= cap {
            break SelectionStatus::MaxPoints;
        }
        if available.is_empty() {
            break SelectionStatus::PoolExhausted;
        }
        let cov: Vec<f64> = available.iter().map(|&c| coverage_row(matrix, c, &uncovered)).collect();
        let cen: Vec<f64> = available.iter().map(|&c| centralities[c]).collect();
        let uni: Vec<f64> = available.iter().map(|&c| nearest_selected[c]).collect();
        let (z_cov, z_cen, z_uni) = (standardize(&cov), standardize(&cen), standardize(&uni));
        // candidates that cover nothing stay in the statistics but are never chosen
        let mut best = None;
        let mut best_h = f64::NEG_INFINITY;
        for k in 0..available.len() {
            if cov[k] == 0.0 {
                continue;
            }
            let h = cfg.w_cov * z_cov[k] + cfg.w_cen * z_cen[k] + cfg.w_uni * z_uni[k];
            if best.is_none() || h > best_h {
                best_h = h;
                best = Some(k);
            }
        }
        let Some(best) = best else {
            break if positions.is_empty() {
                SelectionStatus::NoCoverage
            } else {
                SelectionStatus::Stalled
            };
        };
        let chosen = available.remove(best);
        uncovered.remove_all(matrix.row(chosen));
        let p = candidates[chosen];
        for &c in &available {
            nearest_selected[c] = if positions.is_empty() {
                (candidates[c] - p).norm()
            } else {
                nearest_selected[c].min((candidates[c] - p).norm())
            };
        }
        provenance.push(TraceRow {
            iteration: positions.len(),
            candidate: chosen,
            e_cov: cov[best],
            e_cen: cen[best],
            e_uni: uni[best],
            score: best_h,
            uncovered_after: uncovered.count(),
        });
        positions.push(p);
    };
    log::info!(
        "selected {} anchors ({}), {} samples uncovered",
        positions.len(),
        status.describe(),
        uncovered.count()
    );
    Ok(ReferencePointSet {
        positions,
        provenance,
        status,
        uncovered: uncovered.count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_examples() {
        let z = standardize(&[1.0, 2.0, 3.0]);
        let want = 1.5f64.sqrt();
        assert!((z[0] + want).abs() < 1e-12 && z[1].abs() < 1e-15 && (z[2] - want).abs() < 1e-12);
        assert_eq!(standardize(&[5.0, 5.0, 5.0]), vec![0.0; 3]);
    }

    #[test]
    fn uniformity_examples() {
        let c = Vec3::new(0.3, 0.0, 0.0);
        assert_eq!(uniformity(&c, &[]), 2.0);
        assert!((uniformity(&c, &[Vec3::zeros()]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn centrality_examples() {
        let tree = KdTree::new(vec![Vec3::new(0.25, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]);
        assert_eq!(centrality(&Vec3::zeros(), &tree), -4.0);
        assert_eq!(centrality(&Vec3::new(0.25, 0.0, 0.0), &tree), f64::NEG_INFINITY);
    }

    #[test]
    fn coverage_row_counts_uncovered_only() {
        let mut row = SampleSet::empty(4000);
        for i in 0..400 {
            row.insert(i * 10);
        }
        let matrix = CoverageMatrix::from_rows(vec![row, SampleSet::full(4000), SampleSet::empty(4000)], 4000);
        let mut uncovered = SampleSet::empty(4000);
        // 215 multiples of 10 plus 1085 other indices
        for i in 0..215 {
            uncovered.insert(i * 10);
        }
        let mut extra = 0;
        let mut i = 1;
        while extra < 1085 {
            if i % 10 != 0 {
                uncovered.insert(i);
                extra += 1;
            }
            i += 1;
        }
        assert_eq!(uncovered.count(), 1300);
        assert!((coverage_row(&matrix, 0, &uncovered) - 0.05375).abs() < 1e-15);
        assert_eq!(coverage_row(&matrix, 1, &SampleSet::full(4000)), 1.0);
        assert_eq!(coverage_row(&matrix, 2, &uncovered), 0.0);
    }

    #[test]
    fn sample_set_ops() {
        let mut a = SampleSet::full(130);
        assert_eq!(a.count(), 130);
        let mut b = SampleSet::empty(130);
        b.insert(0);
        b.insert(129);
        a.remove_all(&b);
        assert_eq!(a.count(), 128);
        assert!(!a.contains(129) && a.contains(128));
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 129]);
    }

    #[test]
    fn greedy_prefers_coverage_and_stops() {
        let candidates = vec![Vec3::zeros(), Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 0.5, 0.0)];
        let mut r0 = SampleSet::empty(6);
        let mut r1 = SampleSet::empty(6);
        for i in 0..4 {
            r0.insert(i);
        }
        r1.insert(4);
        let matrix = CoverageMatrix::from_rows(vec![r0, r1, SampleSet::empty(6)], 6);
        let set = greedy(&candidates, &matrix, &[-1.0, -2.0, -2.0], &SelectionConfig::default()).unwrap();
        assert_eq!(
            set.provenance.iter().map(|r| r.candidate).collect::<Vec<_>>(),
            vec![0, 1]
        );
        assert_eq!(set.status, SelectionStatus::Stalled);
        assert_eq!(set.uncovered, 1);
    }

    #[test]
    fn greedy_respects_cap_and_empty_coverage() {
        let candidates = vec![Vec3::zeros(), Vec3::x()];
        let matrix = CoverageMatrix::from_rows(vec![SampleSet::empty(3), SampleSet::empty(3)], 3);
        let set = greedy(&candidates, &matrix, &[-1.0, -1.0], &SelectionConfig::default()).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.status, SelectionStatus::NoCoverage);

        let matrix = CoverageMatrix::from_rows(vec![SampleSet::full(3), SampleSet::full(3)], 3);
        let cfg = SelectionConfig {
            max_points: Some(0),
            ..SelectionConfig::default()
        };
        assert_eq!(
            greedy(&candidates, &matrix, &[-1.0, -1.0], &cfg).unwrap().status,
            SelectionStatus::MaxPoints
        );
    }

    #[test]
    fn degenerate_pool_is_an_error() {
        let matrix = CoverageMatrix::from_rows(vec![SampleSet::full(1)], 1);
        assert!(greedy(
            &[Vec3::zeros()],
            &matrix,
            &[f64::NEG_INFINITY],
            &SelectionConfig::default()
        )
        .is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SelectionConfig::default().validate().is_ok());
        assert!(SelectionConfig {
            tau_prox: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SelectionConfig {
            w_uni: f64::NAN,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
