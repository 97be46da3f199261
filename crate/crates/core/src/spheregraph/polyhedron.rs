use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Highest supported subdivision level (40962 directions).
pub const MAX_LEVEL: u32 = 6;

/// Unit ray directions from a recursively subdivided icosahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    level: u32,
    directions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Polyhedron {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Triangles with counter-clockwise winding seen from outside.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of direction `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Number of directions at a subdivision level.
    pub fn direction_count(level: u32) -> usize {
        10 * 4usize.pow(level) + 2
    }
}

/// Regular icosahedron subdivided `level` times; every new vertex is the
/// normalized midpoint of an edge.
pub fn build_icosphere(level: u32) -> Result<Polyhedron> {
    if level > MAX_LEVEL {
        return Err(Error::InvalidParams(format!(
            "polyhedron level {level} exceeds {MAX_LEVEL}"
        )));
    }
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut directions: Vec<Vec3> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| Vec3::from(v).normalized())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, dirs: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                dirs.push(((dirs[a] + dirs[b]) * 0.5).normalized());
                dirs.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut directions);
            let bc = midpoint(b, c, &mut directions);
            let ca = midpoint(c, a, &mut directions);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    for f in faces.iter_mut() {
        let [a, b, c] = *f;
        let normal = (directions[b] - directions[a]).cross(directions[c] - directions[a]);
        if normal.dot(directions[a] + directions[b] + directions[c]) < 0.0 {
            f.swap(1, 2);
        }
    }

    let mut edges: Vec<(usize, usize)> = faces
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut neighbors = vec![Vec::new(); directions.len()];
    for &(a, b) in &edges {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    for n in neighbors.iter_mut() {
        n.sort_unstable();
    }

    Ok(Polyhedron {
        level,
        directions,
        faces,
        edges,
        neighbors,
    })
}
