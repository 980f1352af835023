//! Flat run configuration, read from and written to TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SharcError};
use crate::reconstruct::ReconConfig;
use crate::select::SelectionConfig;
use crate::sh::{FitOptions, ShConfig};

pub const RUN_CONFIG_FILE: &str = "run.config";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub tau_prox: f64,
    pub w_cov: f64,
    pub w_cen: f64,
    pub w_uni: f64,
    /// 0 means unlimited.
    pub max_points: usize,
    pub votes: usize,
    pub pool_size: usize,
    pub max_attempt_factor: f64,
    pub surface_samples: usize,
    pub bandwidth: usize,
    pub n_fit: usize,
    pub fit_refinements: usize,
    pub n_recon: usize,
    pub k_gen: usize,
    pub k_pca: usize,
    /// 0 selects the adaptive radius.
    pub r_pca: f64,
    pub lanczos: bool,
    pub n_eval: usize,
    pub mesher: String,
    pub input: String,
    pub output: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let sel = SelectionConfig::default();
        let sh = ShConfig::default();
        let rec = ReconConfig::default();
        PipelineConfig {
            seed: 0,
            tau_prox: sel.tau_prox,
            w_cov: sel.w_cov,
            w_cen: sel.w_cen,
            w_uni: sel.w_uni,
            max_points: 0,
            votes: sel.votes,
            pool_size: 10_000,
            max_attempt_factor: 20.0,
            surface_samples: 4000,
            bandwidth: sh.bandwidth,
            n_fit: sh.n_fit,
            fit_refinements: sh.fit.max_refinements,
            n_recon: rec.n_recon,
            k_gen: rec.k_gen,
            k_pca: rec.k_pca,
            r_pca: 0.0,
            lanczos: rec.lanczos,
            n_eval: crate::quality::DEFAULT_EVAL_SAMPLES,
            mesher: String::new(),
            input: String::new(),
            output: String::new(),
        }
    }
}

impl PipelineConfig {
    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            tau_prox: self.tau_prox,
            w_cov: self.w_cov,
            w_cen: self.w_cen,
            w_uni: self.w_uni,
            max_points: (self.max_points > 0).then_some(self.max_points),
            votes: self.votes,
        }
    }

    pub fn sh(&self) -> ShConfig {
        ShConfig {
            bandwidth: self.bandwidth,
            n_fit: self.n_fit,
            lanczos: self.lanczos,
            fit: FitOptions {
                max_refinements: self.fit_refinements,
                ..FitOptions::default()
            },
        }
    }

    pub fn recon(&self) -> ReconConfig {
        ReconConfig {
            n_recon: self.n_recon,
            k_gen: self.k_gen,
            k_pca: self.k_pca,
            r_pca: (self.r_pca > 0.0).then_some(self.r_pca),
            lanczos: self.lanczos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.selection().validate()?;
        self.sh().validate()?;
        self.recon().validate()?;
        if self.bandwidth > u16::MAX as usize {
            return Err(SharcError::InvalidArgument(
                "bandwidth does not fit the file format".into(),
            ));
        }
        if self.pool_size == 0 || self.surface_samples == 0 {
            return Err(SharcError::InvalidArgument(
                "pool_size and surface_samples must be ≥ 1".into(),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SharcError::malformed("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SharcError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| SharcError::io(path, e))
    }
}

/// Independent per-stage seed derived from the root seed (splitmix64).
pub fn stage_seed(root: u64, stage: u64) -> u64 {
    let mut z = root ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = PipelineConfig {
            seed: 7,
            tau_prox: 0.05,
            mesher: "poisson {input} {output}".into(),
            ..Default::default()
        };
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = PipelineConfig::from_toml("bandwidth = 32\nlanczos = false\n").unwrap();
        assert_eq!(cfg.bandwidth, 32);
        assert!(!cfg.lanczos);
        assert_eq!(cfg.tau_prox, 0.2);
        assert!(PipelineConfig::from_toml("bandwith = 3").is_err());
    }

    #[test]
    fn defaults_validate() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.selection().max_points, None);
        assert_eq!(cfg.recon().r_pca, None);
        assert!(PipelineConfig {
            bandwidth: 128,
            n_fit: 100,
            ..cfg
        }
        .validate()
        .is_err());
    }

    #[test]
    fn stage_seeds_differ() {
        assert_ne!(stage_seed(1, 1), stage_seed(1, 2));
        assert_ne!(stage_seed(1, 1), stage_seed(2, 1));
        assert_eq!(stage_seed(5, 3), stage_seed(5, 3));
    }
}
