use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::TriangleMesh;

/// Closed polylines of one axial slice in voxel coordinates. Each polyline
/// repeats its first point at the end and runs counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceContours {
    pub slice: usize,
    pub polylines: Vec<Vec<[f64; 2]>>,
}

impl SliceContours {
    /// Total enclosed area in voxel units (x·y pixels).
    pub fn area_voxels(&self) -> f64 {
        self.polylines.iter().map(|p| signed_area(p).abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }
}

fn signed_area(poly: &[[f64; 2]]) -> f64 {
    poly.windows(2)
        .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
        .sum::<f64>()
        / 2.0
}

/// Intersects `mesh` with the plane `z = slice · spacing[2]`.
///
/// Vertices exactly on the plane count as above it, so every crossing lies
/// strictly inside a mesh edge and each loop is well defined.
pub fn slice_contours(mesh: &TriangleMesh, slice: usize, spacing: [f64; 3]) -> SliceContours {
    let z = slice as f64 * spacing[2];
    let above = |v: usize| mesh.vertices[v].z >= z;

    // segment endpoints are mesh edges (sorted vertex pairs)
    let mut links: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut segments: Vec<[(usize, usize); 2]> = Vec::new();
    for &[a, b, c] in &mesh.triangles {
        let crossing: Vec<(usize, usize)> = [(a, b), (b, c), (c, a)]
            .into_iter()
            .filter(|&(u, v)| above(u) != above(v))
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        if let [e0, e1] = crossing[..] {
            let id = segments.len();
            segments.push([e0, e1]);
            links.entry(e0).or_default().push(id);
            links.entry(e1).or_default().push(id);
        }
    }

    let point = |(u, v): (usize, usize)| {
        let (p, q) = (mesh.vertices[u], mesh.vertices[v]);
        let t = (z - p.z) / (q.z - p.z);
        [
            (p.x + t * (q.x - p.x)) / spacing[0],
            (p.y + t * (q.y - p.y)) / spacing[1],
        ]
    };

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let first_edge = segments[start][0];
        let mut edge = segments[start][1];
        let mut loop_pts = vec![point(first_edge), point(edge)];
        let mut closed = false;
        loop {
            if edge == first_edge {
                closed = true;
                break;
            }
            let next = links
                .get(&edge)
                .and_then(|ids| ids.iter().copied().find(|&s| !used[s]));
            let Some(seg) = next else { break };
            used[seg] = true;
            let [e0, e1] = segments[seg];
            edge = if e0 == edge { e1 } else { e0 };
            loop_pts.push(point(edge));
        }
        if closed && loop_pts.len() >= 4 {
            if signed_area(&loop_pts) < 0.0 {
                loop_pts.reverse();
            }
            polylines.push(loop_pts);
        }
    }
    SliceContours { slice, polylines }
}
