//! Scalar volumes, seed points, gray-value estimation and synthetic phantoms.
//!
//! World coordinates are millimeters with voxel `(i, j, k)` centered at
//! `(i·sx, j·sy, k·sz)`. The sampling domain of a volume is the box spanned by
//! its voxel centers.

mod io;
mod mask;
mod nifti;
mod phantom;

pub use io::{load_volume, read_native, save_native, NativeDtype, NativeHeader, VolumeFormat};
pub use mask::BinaryMask;
pub use nifti::{parse_nifti, write_nifti_bytes, NiftiDatatype};
pub use phantom::{generate_phantom, Lobe, PhantomShape, PhantomSpec};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Default cube edge length, in voxels, for [`mean_gray_around_seeds`].
pub const DEFAULT_CUBE_D: usize = 3;

/// Tolerance for points lying on the bounding box of the voxel centers.
const BOUNDS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<f32>,
    range: (f32, f32),
}

impl Volume {
    /// Creates a volume from x-fastest data.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f32>) -> Result<Self> {
        validate_geometry(dims, spacing)?;
        let expected = dims[0] * dims[1] * dims[2];
        if data.len() != expected {
            return Err(Error::PayloadMismatch {
                expected,
                found: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume(format!("non-finite intensity {bad}")));
        }
        let range = data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Ok(Volume {
            dims,
            spacing,
            data,
            range,
        })
    }

    /// Creates a volume with every voxel set to `value`.
    pub fn constant(dims: [usize; 3], spacing: [f64; 3], value: f32) -> Result<Self> {
        validate_geometry(dims, spacing)?;
        Volume::new(dims, spacing, vec![value; dims[0] * dims[1] * dims[2]])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(min, max)` of the intensities.
    pub fn intensity_range(&self) -> (f64, f64) {
        (self.range.0 as f64, self.range.1 as f64)
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.data[self.index(i, j, k)]
    }

    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            i as f64 * self.spacing[0],
            j as f64 * self.spacing[1],
            k as f64 * self.spacing[2],
        )
    }

    /// Continuous voxel coordinates of a world point.
    pub fn to_voxel(&self, p: Vec3) -> [f64; 3] {
        [
            p.x / self.spacing[0],
            p.y / self.spacing[1],
            p.z / self.spacing[2],
        ]
    }

    pub fn to_world(&self, voxel: [f64; 3]) -> Vec3 {
        Vec3::new(
            voxel[0] * self.spacing[0],
            voxel[1] * self.spacing[1],
            voxel[2] * self.spacing[2],
        )
    }

    /// World-space extent of the voxel-center box, `(n - 1) · s` per axis.
    pub fn extent(&self) -> Vec3 {
        Vec3::new(
            (self.dims[0] - 1) as f64 * self.spacing[0],
            (self.dims[1] - 1) as f64 * self.spacing[1],
            (self.dims[2] - 1) as f64 * self.spacing[2],
        )
    }

    /// True when `p` lies inside (or on) the box spanned by the voxel centers.
    pub fn contains(&self, p: Vec3) -> bool {
        let u = self.to_voxel(p);
        (0..3).all(|a| u[a] >= -BOUNDS_EPS && u[a] <= (self.dims[a] - 1) as f64 + BOUNDS_EPS)
    }

    /// Like [`contains`](Self::contains) but excludes the box faces. Axes with
    /// a single voxel only admit the coordinate 0.
    pub fn contains_strictly(&self, p: Vec3) -> bool {
        let u = self.to_voxel(p);
        (0..3).all(|a| {
            if self.dims[a] == 1 {
                u[a].abs() <= BOUNDS_EPS
            } else {
                u[a] > 0.0 && u[a] < (self.dims[a] - 1) as f64
            }
        })
    }

    /// Index of the voxel whose cell contains `p`; cells are half-open, so a
    /// point exactly between two centers belongs to the lower voxel.
    pub fn containing_voxel(&self, p: Vec3) -> Option<[usize; 3]> {
        containing_voxel(self.dims, self.spacing, p)
    }

    /// Trilinear interpolation at a world point; reproduces voxel values
    /// exactly at voxel centers.
    pub fn sample_trilinear(&self, p: Vec3) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::OutOfBounds {
                point: p.to_array(),
            });
        }
        let u = self.to_voxel(p);
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut t = [0f64; 3];
        for a in 0..3 {
            let n = self.dims[a];
            let x = u[a].clamp(0.0, (n - 1) as f64);
            if n == 1 {
                continue;
            }
            let base = (x.floor() as usize).min(n - 2);
            lo[a] = base;
            hi[a] = base + 1;
            t[a] = x - base as f64;
        }
        let v = |i: usize, j: usize, k: usize| self.get(i, j, k) as f64;
        let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + (b - a) * t };
        let c00 = lerp(v(lo[0], lo[1], lo[2]), v(hi[0], lo[1], lo[2]), t[0]);
        let c10 = lerp(v(lo[0], hi[1], lo[2]), v(hi[0], hi[1], lo[2]), t[0]);
        let c01 = lerp(v(lo[0], lo[1], hi[2]), v(hi[0], lo[1], hi[2]), t[0]);
        let c11 = lerp(v(lo[0], hi[1], hi[2]), v(hi[0], hi[1], hi[2]), t[0]);
        let c0 = lerp(c00, c10, t[1]);
        let c1 = lerp(c01, c11, t[1]);
        Ok(lerp(c0, c1, t[2]))
    }
}

/// [`Volume::containing_voxel`] for a bare grid geometry.
pub fn containing_voxel(dims: [usize; 3], spacing: [f64; 3], p: Vec3) -> Option<[usize; 3]> {
    let u = [p.x / spacing[0], p.y / spacing[1], p.z / spacing[2]];
    let mut out = [0usize; 3];
    for a in 0..3 {
        let top = (dims[a] - 1) as f64;
        if !(u[a] >= -BOUNDS_EPS && u[a] <= top + BOUNDS_EPS) {
            return None;
        }
        out[a] = ((u[a] - 0.5).ceil().max(0.0) as usize).min(dims[a] - 1);
    }
    Some(out)
}

fn validate_geometry(dims: [usize; 3], spacing: [f64; 3]) -> Result<()> {
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidVolume(format!(
            "dimensions must be at least 1, got {dims:?}"
        )));
    }
    if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::InvalidVolume(format!(
            "spacing must be positive, got {spacing:?}"
        )));
    }
    Ok(())
}

/// The primary seed (graph center) and the extra constraint seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    primary: Vec3,
    extras: Vec<Vec3>,
}

impl SeedSet {
    pub fn new(volume: &Volume, primary: Vec3, extras: Vec<Vec3>) -> Result<Self> {
        if !volume.contains_strictly(primary) {
            return Err(Error::SeedOutOfBounds {
                point: primary.to_array(),
            });
        }
        if let Some(bad) = extras.iter().find(|p| !volume.contains(**p)) {
            return Err(Error::SeedOutOfBounds {
                point: bad.to_array(),
            });
        }
        Ok(SeedSet { primary, extras })
    }

    pub fn one_click(volume: &Volume, primary: Vec3) -> Result<Self> {
        SeedSet::new(volume, primary, Vec::new())
    }

    pub fn primary(&self) -> Vec3 {
        self.primary
    }

    pub fn extras(&self) -> &[Vec3] {
        &self.extras
    }

    /// Number of seeds including the primary one.
    pub fn count(&self) -> usize {
        1 + self.extras.len()
    }

    /// Primary seed first, then the extras in order.
    pub fn points(&self) -> impl Iterator<Item = Vec3> + '_ {
        std::iter::once(self.primary).chain(self.extras.iter().copied())
    }
}

/// Object gray value: mean over seeds of the average intensity inside a cube
/// of `d` voxels per edge centered on each seed.
///
/// The cube around a seed at continuous voxel coordinate `u` holds the voxel
/// centers `i` with `u - d/2 <= i < u + d/2` on every axis, clipped to the
/// volume. For `d = 1` that is exactly the containing voxel.
pub fn mean_gray_around_seeds(volume: &Volume, seeds: &SeedSet, d: usize) -> Result<f64> {
    let points: Vec<Vec3> = seeds.points().collect();
    mean_gray_at_points(volume, &points, d)
}

/// [`mean_gray_around_seeds`] over an arbitrary list of points.
pub fn mean_gray_at_points(volume: &Volume, points: &[Vec3], d: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::NoSeeds);
    }
    if d == 0 {
        return Err(Error::InvalidParams("cube edge d must be >= 1".into()));
    }
    let mut total = 0.0;
    for &p in points {
        if !volume.contains(p) {
            return Err(Error::SeedOutOfBounds {
                point: p.to_array(),
            });
        }
        let ranges = cube_ranges(volume, p, d);
        let mut sum = 0.0;
        let mut count = 0usize;
        for k in ranges[2].clone() {
            for j in ranges[1].clone() {
                for i in ranges[0].clone() {
                    sum += volume.get(i, j, k) as f64;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::Internal(format!("empty cube around {p:?}")));
        }
        total += sum / count as f64;
    }
    Ok(total / points.len() as f64)
}

fn cube_ranges(volume: &Volume, p: Vec3, d: usize) -> [std::ops::Range<usize>; 3] {
    let u = volume.to_voxel(p);
    let dims = volume.dims();
    std::array::from_fn(|a| {
        let lo = (u[a] - d as f64 / 2.0).ceil() as i64;
        let hi = lo + d as i64;
        let lo = lo.clamp(0, dims[a] as i64) as usize;
        let hi = hi.clamp(0, dims[a] as i64) as usize;
        lo..hi
    })
}
