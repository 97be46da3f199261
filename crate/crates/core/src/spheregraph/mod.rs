//! The spherical node lattice and its flow network.
//!
//! Node `(r, k)` is the `k`-th sample on ray `r`. A closed set in the network
//! contains, for every ray, a prefix `0..=b(r)` of its samples, and prefixes
//! of neighbouring rays differ by at most the smoothness limit. The minimum
//! s-t cut therefore selects one boundary index per ray.

mod graph;
mod polyhedron;
mod rays;

pub use graph::{
    background_gray, build_graph, node_cost, node_weights, otsu_split, OtsuSplit, SurfaceGraph,
};
pub use polyhedron::{build_icosphere, Polyhedron, MAX_LEVEL};
pub use rays::{sample_rays, RayGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Volume, DEFAULT_CUBE_D};

/// Graph construction parameters.
///
/// `delta_r_mm: None` samples at half the smallest voxel spacing, so the
/// boundary lands within a quarter voxel of the true edge instead of
/// snapping to whole voxels. `smoothness` counts samples, so the default of
/// 4 lets the boundary move two voxel spacings between neighbouring rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphParams {
    pub level: u32,
    pub samples: usize,
    pub delta_r_mm: Option<f64>,
    pub smoothness: usize,
    pub cube_d: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            level: 4,
            samples: 60,
            delta_r_mm: None,
            smoothness: 4,
            cube_d: DEFAULT_CUBE_D,
        }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if self.level > MAX_LEVEL {
            return Err(Error::InvalidParams(format!(
                "level {} exceeds {MAX_LEVEL}",
                self.level
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParams("samples must be >= 2".into()));
        }
        if self.smoothness > self.samples - 1 {
            return Err(Error::InvalidParams(format!(
                "smoothness {} exceeds samples - 1 = {}",
                self.smoothness,
                self.samples - 1
            )));
        }
        if let Some(dr) = self.delta_r_mm {
            if !(dr.is_finite() && dr > 0.0) {
                return Err(Error::InvalidParams("delta_r_mm must be > 0".into()));
            }
        }
        if self.cube_d == 0 {
            return Err(Error::InvalidParams("cube_d must be >= 1".into()));
        }
        Ok(())
    }

    /// Radial step for `volume`.
    pub fn delta_r_for(&self, volume: &Volume) -> f64 {
        self.delta_r_mm
            .unwrap_or_else(|| volume.min_spacing() / 2.0)
    }
}

/// Pins the boundary of `ray` to `sample`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayConstraint {
    pub ray: usize,
    pub sample: usize,
}
