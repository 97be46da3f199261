use rayon::prelude::*;

use super::{Polyhedron, RayConstraint};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::volume::Volume;

/// Intensities sampled along every ray at radii `(k + 1) · delta_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayGrid {
    center: Vec3,
    directions: Vec<Vec3>,
    samples: usize,
    delta_r: f64,
    intensities: Vec<f64>,
    clamped: Vec<bool>,
}

impl RayGrid {
    /// Builds a grid from explicit ray-major intensities. No sample is
    /// marked as clamped.
    pub fn from_intensities(
        center: Vec3,
        directions: Vec<Vec3>,
        samples: usize,
        delta_r: f64,
        intensities: Vec<f64>,
    ) -> Result<Self> {
        if samples == 0 || !(delta_r > 0.0) {
            return Err(Error::InvalidParams(
                "samples must be >= 1 and delta_r > 0".into(),
            ));
        }
        if intensities.len() != directions.len() * samples {
            return Err(Error::PayloadMismatch {
                expected: directions.len() * samples,
                found: intensities.len(),
            });
        }
        let clamped = vec![false; intensities.len()];
        Ok(RayGrid {
            center,
            directions,
            samples,
            delta_r,
            intensities,
            clamped,
        })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn rays(&self) -> usize {
        self.directions.len()
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn delta_r(&self) -> f64 {
        self.delta_r
    }

    pub fn direction(&self, ray: usize) -> Vec3 {
        self.directions[ray]
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    #[inline]
    pub fn node_index(&self, ray: usize, sample: usize) -> usize {
        ray * self.samples + sample
    }

    pub fn intensity(&self, ray: usize, sample: usize) -> f64 {
        self.intensities[self.node_index(ray, sample)]
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn is_clamped(&self, ray: usize, sample: usize) -> bool {
        self.clamped[self.node_index(ray, sample)]
    }

    pub fn radius(&self, sample: usize) -> f64 {
        (sample + 1) as f64 * self.delta_r
    }

    pub fn position(&self, ray: usize, sample: usize) -> Vec3 {
        self.center + self.directions[ray] * self.radius(sample)
    }

    /// Node closest to `p`; ties go to the lower ray, then the lower sample.
    pub fn nearest_node(&self, p: Vec3) -> RayConstraint {
        let mut best = RayConstraint { ray: 0, sample: 0 };
        let mut best_d = f64::INFINITY;
        for ray in 0..self.rays() {
            for sample in 0..self.samples {
                let d = self.position(ray, sample).distance(p);
                if d < best_d {
                    best_d = d;
                    best = RayConstraint { ray, sample };
                }
            }
        }
        best
    }
}

/// Samples the volume along every polyhedron direction from `seed`.
///
/// Samples past the volume boundary repeat the last in-bounds value of their
/// ray (the seed intensity if the very first sample is already outside) and
/// are flagged as clamped.
pub fn sample_rays(
    volume: &Volume,
    seed: Vec3,
    poly: &Polyhedron,
    samples: usize,
    delta_r: f64,
) -> Result<RayGrid> {
    if !volume.contains_strictly(seed) {
        return Err(Error::SeedOutOfBounds {
            point: seed.to_array(),
        });
    }
    if samples == 0 || !(delta_r > 0.0) {
        return Err(Error::InvalidParams(
            "samples must be >= 1 and delta_r > 0".into(),
        ));
    }
    let at_seed = volume.sample_trilinear(seed)?;
    let per_ray: Vec<(Vec<f64>, Vec<bool>)> = poly
        .directions()
        .par_iter()
        .map(|&dir| {
            let mut values = Vec::with_capacity(samples);
            let mut flags = Vec::with_capacity(samples);
            let mut last = at_seed;
            let mut outside = false;
            for k in 0..samples {
                let p = seed + dir * ((k + 1) as f64 * delta_r);
                if !outside {
                    match volume.sample_trilinear(p) {
                        Ok(v) => last = v,
                        Err(_) => outside = true,
                    }
                }
                values.push(last);
                flags.push(outside);
            }
            (values, flags)
        })
        .collect();
    let mut intensities = Vec::with_capacity(poly.len() * samples);
    let mut clamped = Vec::with_capacity(poly.len() * samples);
    for (values, flags) in per_ray {
        intensities.extend(values);
        clamped.extend(flags);
    }
    Ok(RayGrid {
        center: seed,
        directions: poly.directions().to_vec(),
        samples,
        delta_r,
        intensities,
        clamped,
    })
}
