//! Synthetic test objects with known ground truth.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{BinaryMask, Volume};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::spheregraph::build_icosphere;

/// A radial bump (or dent, for negative amplitude) on a lobed sphere.
///
/// The radius offset in direction `u` is `amplitude · cos(frequency · θ)` where
/// `θ` is the angle between `u` and `direction`, for `frequency · θ < π/2`,
/// and zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub direction: Vec3,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhantomShape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Lobed {
        center: Vec3,
        base_radius: f64,
        lobes: Vec<Lobe>,
    },
}

impl PhantomShape {
    pub fn center(&self) -> Vec3 {
        match self {
            PhantomShape::Sphere { center, .. } | PhantomShape::Lobed { center, .. } => *center,
        }
    }

    /// Surface radius in the unit direction `u`.
    pub fn radius_towards(&self, u: Vec3) -> f64 {
        match self {
            PhantomShape::Sphere { radius, .. } => *radius,
            PhantomShape::Lobed {
                base_radius, lobes, ..
            } => {
                let mut r = *base_radius;
                for lobe in lobes {
                    let axis = lobe.direction.normalized();
                    let theta = u.dot(axis).clamp(-1.0, 1.0).acos();
                    let phase = lobe.frequency * theta;
                    if phase < FRAC_PI_2 {
                        r += lobe.amplitude * phase.cos();
                    }
                }
                r
            }
        }
    }

    /// Largest surface radius, taken over the lobe axes and a dense set of
    /// icosphere directions. Exact for spheres and for non-overlapping lobes.
    pub fn max_radius(&self) -> f64 {
        match self {
            PhantomShape::Sphere { radius, .. } => *radius,
            PhantomShape::Lobed { lobes, .. } => {
                let dense = build_icosphere(4).expect("level 4 is supported");
                lobes
                    .iter()
                    .map(|l| l.direction.normalized())
                    .chain(dense.directions().iter().copied())
                    .map(|u| self.radius_towards(u))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    fn min_radius_bound(&self) -> f64 {
        match self {
            PhantomShape::Sphere { radius, .. } => *radius,
            PhantomShape::Lobed {
                base_radius, lobes, ..
            } => base_radius + lobes.iter().map(|l| l.amplitude.min(0.0)).sum::<f64>(),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let d = p - self.center();
        let dist = d.norm();
        if dist == 0.0 {
            return true;
        }
        dist <= self.radius_towards(d * (1.0 / dist))
    }

    fn validate(&self) -> Result<()> {
        if let PhantomShape::Lobed { lobes, .. } = self {
            for lobe in lobes {
                if !(lobe.frequency >= 0.5) {
                    return Err(Error::InvalidParams(format!(
                        "lobe frequency {} must be >= 0.5",
                        lobe.frequency
                    )));
                }
                if !(lobe.direction.norm() > 0.0) {
                    return Err(Error::InvalidParams(
                        "lobe direction must be non-zero".into(),
                    ));
                }
            }
        }
        if !(self.min_radius_bound() > 0.0) {
            return Err(Error::InvalidParams(
                "object radius must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub object: PhantomShape,
    pub foreground_mean: f64,
    pub background_mean: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl PhantomSpec {
    pub fn sphere(dims: [usize; 3], spacing: [f64; 3], center: Vec3, radius: f64) -> Self {
        PhantomSpec {
            dims,
            spacing,
            object: PhantomShape::Sphere { center, radius },
            foreground_mean: 100.0,
            background_mean: 0.0,
            noise_sigma: 0.0,
            rng_seed: 0,
        }
    }
}

/// Renders the phantom. The mask holds the voxels whose centers lie inside
/// the object; intensities are the two means plus optional Gaussian noise
/// drawn in voxel order from a ChaCha8 stream seeded with `rng_seed`.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(Volume, BinaryMask)> {
    spec.object.validate()?;
    if spec.foreground_mean == spec.background_mean {
        return Err(Error::InvalidParams(
            "foreground and background means must differ".into(),
        ));
    }
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidParams("noise_sigma must be >= 0".into()));
    }
    let grid = Volume::constant(spec.dims, spec.spacing, 0.0)?;
    let center = spec.object.center();
    let reach = spec.object.max_radius();
    let lo = center - Vec3::new(reach, reach, reach);
    let hi = center + Vec3::new(reach, reach, reach);
    if !grid.contains(lo) || !grid.contains(hi) {
        return Err(Error::PhantomOutside(format!(
            "object spans {:?}..{:?}, volume spans 0..{:?}",
            lo.to_array(),
            hi.to_array(),
            grid.extent().to_array()
        )));
    }

    let [nx, ny, nz] = spec.dims;
    let mut mask = BinaryMask::empty(spec.dims, spec.spacing);
    let mut data = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let inside = spec.object.contains(grid.voxel_center(i, j, k));
                mask.set(i, j, k, inside);
                data.push(if inside {
                    spec.foreground_mean
                } else {
                    spec.background_mean
                });
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let normal =
            Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
        for v in data.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    let volume = Volume::new(
        spec.dims,
        spec.spacing,
        data.into_iter().map(|v| v as f32).collect(),
    )?;
    Ok((volume, mask))
}
