use std::collections::HashMap;
use std::fmt::Write as _;

use super::BoundaryField;
use crate::geom::Vec3;
use crate::spheregraph::{Polyhedron, RayGrid};

/// Closed triangle mesh in world millimeters, outward counter-clockwise
/// winding.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Enclosed volume in mm³ by the divergence theorem.
    pub fn volume(&self) -> f64 {
        let origin = self.vertices.first().copied().unwrap_or(Vec3::ZERO);
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (p, q, r) = (
                    self.vertices[a] - origin,
                    self.vertices[b] - origin,
                    self.vertices[c] - origin,
                );
                p.dot(q.cross(r))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Directed edge multiset check: every edge appears once in each
    /// direction, i.e. closed and consistently oriented.
    pub fn is_closed(&self) -> bool {
        self.boundary_edge_count() == 0
    }

    /// Number of undirected edges not shared by exactly two triangles with
    /// opposite orientation.
    pub fn boundary_edge_count(&self) -> usize {
        let mut count: HashMap<(usize, usize), i32> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let (key, sign) = if u < v { ((u, v), 1) } else { ((v, u), -1) };
                *count.entry(key).or_default() += sign;
            }
        }
        count.values().filter(|&&c| c != 0).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Wavefront OBJ text (`v x y z`, `f a b c`, 1-based).
    pub fn to_obj(&self) -> String {
        let mut out = String::with_capacity(40 * (self.vertices.len() + self.triangles.len()));
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

/// One vertex per ray at its boundary radius, connected like the polyhedron.
pub fn build_mesh(grid: &RayGrid, bf: &BoundaryField, poly: &Polyhedron) -> TriangleMesh {
    let vertices = (0..grid.rays())
        .map(|r| grid.center() + grid.direction(r) * bf.radius(r))
        .collect();
    TriangleMesh {
        vertices,
        triangles: poly.faces().to_vec(),
    }
}
