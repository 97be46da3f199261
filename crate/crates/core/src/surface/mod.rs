//! From a cut to geometry: per-ray boundary, closed mesh, slice contours and
//! a voxel mask.

mod contour;
mod mesh;
mod raster;

pub use crate::volume::BinaryMask;
pub use contour::{slice_contours, SliceContours};
pub use mesh::{build_mesh, TriangleMesh};
pub use raster::{rasterize_mask, RayLocator};

use crate::error::{Error, Result};
use crate::mincut::CutResult;
use crate::spheregraph::{Polyhedron, RayGrid};

/// One boundary sample index per ray.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    indices: Vec<usize>,
    delta_r: f64,
}

impl BoundaryField {
    pub fn new(indices: Vec<usize>, delta_r: f64) -> Self {
        BoundaryField { indices, delta_r }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    /// Distance of the boundary from the seed on `ray`, `(b + 1) · delta_r`.
    pub fn radius(&self, ray: usize) -> f64 {
        (self.indices[ray] + 1) as f64 * self.delta_r
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.indices.len()).map(|r| self.radius(r)).collect()
    }

    /// Largest index difference across polyhedron edges.
    pub fn max_neighbor_jump(&self, poly: &Polyhedron) -> usize {
        poly.edges()
            .iter()
            .map(|&(a, b)| self.indices[a].abs_diff(self.indices[b]))
            .max()
            .unwrap_or(0)
    }
}

/// Boundary index per ray: the last source-side sample.
///
/// Fails if a ray has no source-side node or its source-side nodes are not
/// a prefix of the ray, neither of which a cut of [`crate::spheregraph::build_graph`]
/// output can produce.
pub fn extract_boundary(grid: &RayGrid, cut: &CutResult) -> Result<BoundaryField> {
    let k_max = grid.samples();
    if cut.source_side.len() != grid.rays() * k_max {
        return Err(Error::DimensionMismatch(format!(
            "cut has {} nodes, grid has {}",
            cut.source_side.len(),
            grid.rays() * k_max
        )));
    }
    let mut indices = Vec::with_capacity(grid.rays());
    for r in 0..grid.rays() {
        let side = &cut.source_side[r * k_max..(r + 1) * k_max];
        let inside = side.iter().take_while(|&&s| s).count();
        if inside == 0 {
            return Err(Error::Internal(format!("ray {r} has no source-side node")));
        }
        if side[inside..].iter().any(|&s| s) {
            return Err(Error::Internal(format!("ray {r} cut is not monotone")));
        }
        indices.push(inside - 1);
    }
    Ok(BoundaryField::new(indices, grid.delta_r()))
}
