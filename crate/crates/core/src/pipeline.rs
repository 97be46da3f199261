//! End-to-end segmentation shared by the command line and the HTTP service.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mincut::{max_flow, CutResult};
use crate::spheregraph::{
    build_graph, build_icosphere, sample_rays, GraphParams, Polyhedron, RayConstraint, RayGrid,
};
use crate::surface::{
    build_mesh, extract_boundary, rasterize_mask, slice_contours, BinaryMask, BoundaryField,
    SliceContours, TriangleMesh,
};
use crate::volume::{mean_gray_around_seeds, SeedSet, Volume};

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sampling_s: f64,
    pub graph_build_s: f64,
    pub max_flow_s: f64,
    pub rasterize_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub mean_gray: f64,
    pub rays: usize,
    pub samples: usize,
    pub delta_r_mm: f64,
    /// Including source and sink.
    pub nodes: usize,
    pub arcs: usize,
    pub cut_cost: f64,
    pub max_flow: f64,
    pub boundary_radius_min_mm: f64,
    pub boundary_radius_max_mm: f64,
    pub mask_voxels: usize,
    pub mask_volume_cm3: f64,
    pub mesh_volume_cm3: f64,
    pub constraints: Vec<RayConstraint>,
}

#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub polyhedron: Polyhedron,
    pub grid: RayGrid,
    pub cut: CutResult,
    pub boundary: BoundaryField,
    pub mesh: TriangleMesh,
    pub mask: BinaryMask,
    pub stats: SegmentStats,
    pub timings: Timings,
}

impl SegmentOutput {
    /// Contours of every axial slice the mesh crosses.
    pub fn contours(&self, volume: &Volume) -> Vec<SliceContours> {
        let spacing = volume.spacing();
        let (lo, hi) = self
            .mesh
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v.z), hi.max(v.z))
            });
        let first = (lo / spacing[2]).floor().max(0.0) as usize;
        let last = ((hi / spacing[2]).ceil().max(0.0) as usize).min(volume.dims()[2] - 1);
        (first..=last)
            .map(|z| slice_contours(&self.mesh, z, spacing))
            .filter(|c| !c.is_empty())
            .collect()
    }
}

/// Runs the full pipeline: gray-value estimate over all seeds, ray sampling
/// around the primary seed, graph construction with one fixed ray per extra
/// seed, min cut, and conversion to boundary, mesh and mask.
pub fn segment(volume: &Volume, seeds: &SeedSet, params: &GraphParams) -> Result<SegmentOutput> {
    params.validate()?;
    let start = Instant::now();

    let poly = build_icosphere(params.level)?;
    let mean_gray = mean_gray_around_seeds(volume, seeds, params.cube_d)?;
    let delta_r = params.delta_r_for(volume);
    let grid = sample_rays(volume, seeds.primary(), &poly, params.samples, delta_r)?;
    let t_sampling = start.elapsed().as_secs_f64();

    let mut graph = build_graph(&grid, &poly, mean_gray, params)?;
    let mut constraints = Vec::with_capacity(seeds.extras().len());
    for &p in seeds.extras() {
        let c = grid.nearest_node(p);
        graph.fix_ray(c)?;
        constraints.push(c);
    }
    let t_graph = start.elapsed().as_secs_f64();

    let cut = max_flow(graph.network());
    if cut.cut_capacity >= graph.max_weight() {
        return Err(Error::InfeasibleConstraints);
    }
    let t_flow = start.elapsed().as_secs_f64();

    let boundary = extract_boundary(&grid, &cut)?;
    let mask = rasterize_mask(&grid, &boundary, volume.dims(), volume.spacing());
    let mesh = build_mesh(&grid, &boundary, &poly);
    let t_raster = start.elapsed().as_secs_f64();

    let radii = boundary.radii();
    let stats = SegmentStats {
        mean_gray,
        rays: grid.rays(),
        samples: grid.samples(),
        delta_r_mm: delta_r,
        nodes: graph.total_nodes(),
        arcs: graph.network().arcs().len(),
        cut_cost: cut.cut_capacity,
        max_flow: cut.max_flow_value,
        boundary_radius_min_mm: radii.iter().copied().fold(f64::INFINITY, f64::min),
        boundary_radius_max_mm: radii.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mask_voxels: mask.count(),
        mask_volume_cm3: crate::metrics::volume_cm3(&mask),
        mesh_volume_cm3: mesh.volume() / 1000.0,
        constraints,
    };
    Ok(SegmentOutput {
        polyhedron: poly,
        grid,
        cut,
        boundary,
        mesh,
        mask,
        stats,
        timings: Timings {
            sampling_s: t_sampling,
            graph_build_s: t_graph - t_sampling,
            max_flow_s: t_flow - t_graph,
            rasterize_s: t_raster - t_flow,
            total_s: t_raster,
        },
    })
}
