use std::path::Path;

use super::io::{read_native, write_native_raw, NativeDtype, NativeHeader, VolumeFormat};
use super::nifti::{parse_nifti, write_nifti_bytes, NiftiDatatype};
use crate::error::{Error, Result};

/// One flag per voxel on the grid of a source volume, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    dims: [usize; 3],
    spacing: [f64; 3],
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(dims: [usize; 3], spacing: [f64; 3]) -> Self {
        BinaryMask {
            dims,
            spacing,
            bits: vec![false; dims.iter().product()],
        }
    }

    pub fn from_bits(dims: [usize; 3], spacing: [f64; 3], bits: Vec<bool>) -> Result<Self> {
        let expected = dims.iter().product::<usize>();
        if bits.len() != expected {
            return Err(Error::PayloadMismatch {
                expected,
                found: bits.len(),
            });
        }
        Ok(BinaryMask {
            dims,
            spacing,
            bits,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.bits[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        let idx = self.index(i, j, k);
        self.bits[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_grid(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.spacing == other.spacing
    }

    fn as_bytes(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    fn from_values(dims: [usize; 3], spacing: [f64; 3], values: &[f32]) -> Result<Self> {
        let mut bits = Vec::with_capacity(values.len());
        for &v in values {
            match v {
                v if v == 0.0 => bits.push(false),
                v if v == 1.0 => bits.push(true),
                other => {
                    return Err(Error::InvalidVolume(format!(
                        "mask value {other} is not 0 or 1"
                    )))
                }
            }
        }
        BinaryMask::from_bits(dims, spacing, bits)
    }

    /// Writes `path` (raw `u8`) and its `.json` sidecar.
    pub fn save_native(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = NativeHeader {
            dims: self.dims,
            spacing_mm: self.spacing,
            dtype: NativeDtype::U8,
        };
        write_native_raw(path.as_ref(), &header, &self.as_bytes())
    }

    pub fn to_nifti_bytes(&self) -> Result<Vec<u8>> {
        let values: Vec<f32> = self.bits.iter().map(|&b| b as u8 as f32).collect();
        write_nifti_bytes(self.dims, self.spacing, &values, NiftiDatatype::Uint8)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        match VolumeFormat::from_path(path) {
            VolumeFormat::Native => self.save_native(path),
            VolumeFormat::Nifti1 => {
                std::fs::write(path, self.to_nifti_bytes()?).map_err(|e| Error::io(path, e))
            }
        }
    }

    /// Loads a mask from a native file (either dtype) or a `.nii`, accepting
    /// only the values 0 and 1.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match VolumeFormat::from_path(path) {
            VolumeFormat::Native => {
                let (header, values) = read_native(path)?;
                BinaryMask::from_values(header.dims, header.spacing_mm, &values)
            }
            VolumeFormat::Nifti1 => {
                let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
                BinaryMask::from_nifti_bytes(&bytes)
            }
        }
    }

    pub fn from_nifti_bytes(bytes: &[u8]) -> Result<Self> {
        let v = parse_nifti(bytes)?;
        BinaryMask::from_values(v.dims(), v.spacing(), v.data())
    }
}
