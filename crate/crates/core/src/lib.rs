//! Shape codec that stores a watertight mesh as a handful of interior
//! reference points, each carrying a spherical-harmonic expansion of the
//! distance to the surface, and decodes them back to an oriented point cloud.

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod kdtree;
pub mod mesh;
pub mod pipeline;
pub mod quality;
pub mod reconstruct;
pub mod sampling;
pub mod select;
pub mod sh;
pub mod spatial;
pub mod sphere_grid;

pub use error::{Result, SharcError};
pub use geometry::Vec3;
