//! End-to-end encode and decode with per-stage timings.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{stage_seed, PipelineConfig};
use crate::error::{Result, SharcError};
use crate::mesh::{normalize, sample_surface, TriangleMesh};
use crate::reconstruct::{reconstruct, OrientedPointCloud};
use crate::sampling::sample_interior;
use crate::select::{select_anchors, ReferencePointSet};
use crate::sh::{sample_radial_field, AnchorRecord, ShTransform, SharcRepresentation, FORMAT_VERSION};
use crate::spatial::RayAccelerator;

pub const SEED_SURFACE: u64 = 1;
pub const SEED_POOL: u64 = 2;
pub const SEED_EVAL: u64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodeTimings {
    pub preprocess: f64,
    pub selection: f64,
    pub fitting: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub representation: SharcRepresentation,
    pub selection: ReferencePointSet,
    pub pool_size: usize,
    pub pool_acceptance: f64,
    pub timings: EncodeTimings,
}

pub fn encode(mesh: &TriangleMesh, cfg: &PipelineConfig) -> Result<EncodeOutput> {
    cfg.validate()?;
    let start = Instant::now();

    let (normalized, transform) = normalize(mesh);
    let acc = RayAccelerator::new(&normalized);
    let surface = sample_surface(&normalized, cfg.surface_samples, stage_seed(cfg.seed, SEED_SURFACE))
        .map_err(|e| e.in_stage("preprocess"))?;
    let pool = sample_interior(
        &acc,
        &normalized.bounds(),
        cfg.pool_size,
        stage_seed(cfg.seed, SEED_POOL),
        cfg.max_attempt_factor,
        cfg.votes,
    )
    .map_err(|e| e.in_stage("preprocess"))?;
    let t_pre = start.elapsed().as_secs_f64();

    let selection = select_anchors(&pool, &surface, &acc, &cfg.selection()).map_err(|e| e.in_stage("selection"))?;
    if selection.is_empty() {
        return Err(
            SharcError::Geometry(format!("no anchors selected ({})", selection.status.describe()))
                .in_stage("selection"),
        );
    }
    let t_sel = start.elapsed().as_secs_f64();

    let sh = cfg.sh();
    let transform_sh = ShTransform::for_bandwidth(sh.bandwidth, sh.n_fit).map_err(|e| e.in_stage("fitting"))?;
    let anchors: Vec<AnchorRecord> = selection
        .positions
        .par_iter()
        .map(|p| {
            let field = sample_radial_field(p, transform_sh.grid(), &acc)?;
            let coeffs = transform_sh.fit(field.radii(), sh.fit, true);
            Ok(AnchorRecord {
                position: [p.x as f32, p.y as f32, p.z as f32],
                coeffs: coeffs.values().iter().map(|&c| c as f32).collect(),
            })
        })
        .collect::<Result<_>>()
        .map_err(|e: SharcError| e.in_stage("fitting"))?;
    let total = start.elapsed().as_secs_f64();

    log::info!("encoded {} anchors in {total:.2}s", anchors.len());
    Ok(EncodeOutput {
        representation: SharcRepresentation {
            version: FORMAT_VERSION,
            bandwidth: sh.bandwidth as u16,
            transform,
            anchors,
        },
        pool_size: pool.points.len(),
        pool_acceptance: pool.acceptance_rate(),
        selection,
        timings: EncodeTimings {
            preprocess: t_pre,
            selection: t_sel - t_pre,
            fitting: total - t_sel,
            total,
        },
    })
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub cloud: OrientedPointCloud,
    pub seconds: f64,
}

pub fn decode(rep: &SharcRepresentation, cfg: &PipelineConfig) -> Result<DecodeOutput> {
    let start = Instant::now();
    let cloud = reconstruct(rep, &cfg.recon()).map_err(|e| e.in_stage("decode"))?;
    Ok(DecodeOutput {
        cloud,
        seconds: start.elapsed().as_secs_f64(),
    })
}
