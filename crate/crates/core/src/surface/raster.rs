use rayon::prelude::*;

use super::{BinaryMask, BoundaryField};
use crate::geom::Vec3;
use crate::spheregraph::RayGrid;
use crate::volume::containing_voxel;

/// Exact nearest-direction lookup (largest dot product, lowest index on
/// ties) accelerated by a cube map whose cells list every direction that
/// can win somewhere inside the cell.
#[derive(Debug, Clone)]
pub struct RayLocator {
    directions: Vec<Vec3>,
    cells_per_side: usize,
    candidates: Vec<Vec<u32>>,
}

impl RayLocator {
    pub fn new(directions: &[Vec3]) -> Self {
        let cells_per_side = ((directions.len() as f64 / 24.0).sqrt().ceil() as usize).max(1);
        let n = cells_per_side;
        let mut candidates = Vec::with_capacity(6 * n * n);
        for face in 0..6 {
            for row in 0..n {
                for col in 0..n {
                    let uv = |a: f64, b: f64| {
                        let u = -1.0 + 2.0 * (col as f64 + a) / n as f64;
                        let v = -1.0 + 2.0 * (row as f64 + b) / n as f64;
                        face_direction(face, u, v)
                    };
                    let center = uv(0.5, 0.5);
                    let spread = [uv(0.0, 0.0), uv(1.0, 0.0), uv(0.0, 1.0), uv(1.0, 1.0)]
                        .iter()
                        .map(|c| angle(center, *c))
                        .fold(0.0, f64::max);
                    let best = directions
                        .iter()
                        .map(|d| angle(center, *d))
                        .fold(f64::INFINITY, f64::min);
                    let limit = best + 2.0 * spread + 1e-9;
                    candidates.push(
                        directions
                            .iter()
                            .enumerate()
                            .filter(|(_, d)| angle(center, **d) <= limit)
                            .map(|(i, _)| i as u32)
                            .collect(),
                    );
                }
            }
        }
        RayLocator {
            directions: directions.to_vec(),
            cells_per_side,
            candidates,
        }
    }

    /// Index of the direction closest to `u` (need not be normalized).
    pub fn nearest(&self, u: Vec3) -> usize {
        let cell = self.cell_of(u);
        let mut best = usize::MAX;
        let mut best_dot = f64::NEG_INFINITY;
        for &i in &self.candidates[cell] {
            let d = self.directions[i as usize].dot(u);
            if d > best_dot {
                best_dot = d;
                best = i as usize;
            }
        }
        best
    }

    fn cell_of(&self, u: Vec3) -> usize {
        let (ax, ay, az) = (u.x.abs(), u.y.abs(), u.z.abs());
        let (face, a, b, m) = if ax >= ay && ax >= az {
            (if u.x >= 0.0 { 0 } else { 1 }, u.y, u.z, ax)
        } else if ay >= az {
            (if u.y >= 0.0 { 2 } else { 3 }, u.z, u.x, ay)
        } else {
            (if u.z >= 0.0 { 4 } else { 5 }, u.x, u.y, az)
        };
        let n = self.cells_per_side;
        let idx = |t: f64| (((t / m + 1.0) * 0.5 * n as f64) as usize).min(n - 1);
        (face * n + idx(b)) * n + idx(a)
    }
}

fn face_direction(face: usize, a: f64, b: f64) -> Vec3 {
    let v = match face {
        0 => Vec3::new(1.0, a, b),
        1 => Vec3::new(-1.0, a, b),
        2 => Vec3::new(b, 1.0, a),
        3 => Vec3::new(b, -1.0, a),
        4 => Vec3::new(a, b, 1.0),
        _ => Vec3::new(a, b, -1.0),
    };
    v.normalized()
}

fn angle(a: Vec3, b: Vec3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Voxelizes the star-shaped region bounded by `bf`.
///
/// A voxel is set when its distance from the seed is at most the boundary
/// radius of the ray nearest to its direction. The voxel containing the seed
/// is always set.
pub fn rasterize_mask(
    grid: &RayGrid,
    bf: &BoundaryField,
    dims: [usize; 3],
    spacing: [f64; 3],
) -> BinaryMask {
    let locator = RayLocator::new(grid.directions());
    let radii = bf.radii();
    let reach = radii.iter().copied().fold(0.0, f64::max);
    let seed = grid.center();

    let span = |axis: usize, c: f64| -> std::ops::Range<usize> {
        let lo = ((c - reach) / spacing[axis]).floor().max(0.0) as usize;
        let hi = (((c + reach) / spacing[axis]).ceil() + 1.0).max(0.0) as usize;
        lo.min(dims[axis])..hi.min(dims[axis])
    };
    let (xs, ys, zs) = (span(0, seed.x), span(1, seed.y), span(2, seed.z));

    let plane = dims[0] * dims[1];
    let slices: Vec<(usize, Vec<usize>)> = zs
        .into_par_iter()
        .map(|k| {
            let mut set = Vec::new();
            for j in ys.clone() {
                for i in xs.clone() {
                    let p = Vec3::new(
                        i as f64 * spacing[0],
                        j as f64 * spacing[1],
                        k as f64 * spacing[2],
                    );
                    let d = p - seed;
                    let dist = d.norm();
                    let inside = dist == 0.0 || dist <= radii[locator.nearest(d)] + 1e-9;
                    if inside {
                        set.push(i + dims[0] * j);
                    }
                }
            }
            (k, set)
        })
        .collect();

    let mut bits = vec![false; dims.iter().product()];
    for (k, set) in slices {
        for idx in set {
            bits[k * plane + idx] = true;
        }
    }
    if let Some([i, j, k]) = containing_voxel(dims, spacing, seed) {
        bits[i + dims[0] * (j + dims[1] * k)] = true;
    }
    BinaryMask::from_bits(dims, spacing, bits).expect("bit count matches dims")
}
