//! Native raw+sidecar format and format dispatch.
//!
//! `<name>.vol` holds little-endian scalars (x fastest, z slowest) and
//! `<name>.vol.json` describes them:
//!
//! ```json
//! {"dims": [nx, ny, nz], "spacing_mm": [sx, sy, sz], "dtype": "f32"}
//! ```
//!
//! Masks use the same layout with `"dtype": "u8"` and values in `{0, 1}`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::nifti;
use super::Volume;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeFormat {
    Native,
    Nifti1,
}

impl VolumeFormat {
    /// `.nii` selects NIfTI-1, anything else the native format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("nii") => VolumeFormat::Nifti1,
            _ => VolumeFormat::Native,
        }
    }
}

impl FromStr for VolumeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "native" => Ok(VolumeFormat::Native),
            "nifti1" | "nifti" | "nii" => Ok(VolumeFormat::Nifti1),
            other => Err(Error::InvalidParams(format!(
                "unknown volume format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NativeDtype {
    F32,
    U8,
}

impl NativeDtype {
    fn size(self) -> usize {
        match self {
            NativeDtype::F32 => 4,
            NativeDtype::U8 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NativeHeader {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub dtype: NativeDtype,
}

/// Path of the JSON sidecar belonging to a raw payload file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn load_volume(path: impl AsRef<Path>, format: VolumeFormat) -> Result<Volume> {
    let path = path.as_ref();
    match format {
        VolumeFormat::Native => {
            let (header, data) = read_native(path)?;
            Volume::new(header.dims, header.spacing_mm, data)
        }
        VolumeFormat::Nifti1 => {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            nifti::parse_nifti(&bytes)
        }
    }
}

/// Reads a native payload and its sidecar, converting values to `f32`.
pub fn read_native(path: impl AsRef<Path>) -> Result<(NativeHeader, Vec<f32>)> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let header: NativeHeader = serde_json::from_str(&text)
        .map_err(|e| Error::Header(format!("{}: {e}", side.display())))?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = header.dims.iter().product::<usize>();
    let size = header.dtype.size();
    if bytes.len() % size != 0 || bytes.len() / size != expected {
        return Err(Error::PayloadMismatch {
            expected,
            found: bytes.len() / size,
        });
    }
    let data = match header.dtype {
        NativeDtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
        NativeDtype::U8 => bytes.iter().map(|&b| b as f32).collect(),
    };
    Ok((header, data))
}

pub(crate) fn write_native_raw(path: &Path, header: &NativeHeader, payload: &[u8]) -> Result<()> {
    std::fs::write(path, payload).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(header)?;
    std::fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

pub fn save_native(volume: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let header = NativeHeader {
        dims: volume.dims(),
        spacing_mm: volume.spacing(),
        dtype: NativeDtype::F32,
    };
    let payload: Vec<u8> = volume.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_native_raw(path.as_ref(), &header, &payload)
}
