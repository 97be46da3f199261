//! Semi-automatic segmentation of roughly spherical objects in scalar volumes.
//!
//! Rays are cast from a user seed through the vertices of a subdivided
//! icosahedron and sampled at regular radial steps. The samples become the
//! nodes of a directed graph whose minimum s-t cut is the minimum-cost
//! closed set, i.e. one boundary position per ray subject to a smoothness
//! constraint between neighbouring rays. Extra seeds pin the boundary of the
//! ray they fall on and add their neighbourhood to the gray-value estimate.
//!
//! The pipeline is:
//!
//! 1. [`volume::mean_gray_around_seeds`] estimates the object gray value.
//! 2. [`spheregraph::sample_rays`] builds the [`spheregraph::RayGrid`].
//! 3. [`spheregraph::build_graph`] and [`spheregraph::SurfaceGraph::fix_ray`]
//!    produce a [`mincut::FlowNetwork`].
//! 4. [`mincut::max_flow`] solves it.
//! 5. [`surface`] turns the cut into a boundary, a mesh, contours and a mask.
//!
//! [`pipeline::segment`] runs all of the above with phase timings.

pub mod error;
pub mod geom;
pub mod metrics;
pub mod mincut;
pub mod pipeline;
pub mod spheregraph;
pub mod surface;
pub mod volume;

pub use error::{Error, Result};
pub use geom::Vec3;
pub use metrics::{dsc, volume_cm3, CaseStats, Summary};
pub use mincut::{max_flow, CutResult, FlowNetwork, Vertex};
pub use pipeline::{segment, SegmentOutput, Timings};
pub use spheregraph::{GraphParams, Polyhedron, RayConstraint, RayGrid, SurfaceGraph};
pub use surface::{BinaryMask, BoundaryField, SliceContours, TriangleMesh};
pub use volume::{PhantomShape, PhantomSpec, SeedSet, Volume, VolumeFormat};
