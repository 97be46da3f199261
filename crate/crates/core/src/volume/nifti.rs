//! Minimal single-file NIfTI-1 (`.nii`) support.
//!
//! Only `dim[1..=3]`, `pixdim[1..=3]`, `datatype` and `vox_offset` are read;
//! intensity scaling, orientation and units are ignored.

use super::Volume;
use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;
const OFFSET_DIM: usize = 40;
const OFFSET_DATATYPE: usize = 70;
const OFFSET_BITPIX: usize = 72;
const OFFSET_PIXDIM: usize = 76;
const OFFSET_VOX_OFFSET: usize = 108;
const OFFSET_MAGIC: usize = 344;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiftiDatatype {
    Uint8,
    Int16,
    Float32,
}

impl NiftiDatatype {
    fn code(self) -> i16 {
        match self {
            NiftiDatatype::Uint8 => 2,
            NiftiDatatype::Int16 => 4,
            NiftiDatatype::Float32 => 16,
        }
    }

    fn from_code(code: i16) -> Result<Self> {
        match code {
            2 => Ok(NiftiDatatype::Uint8),
            4 => Ok(NiftiDatatype::Int16),
            16 => Ok(NiftiDatatype::Float32),
            other => Err(Error::UnsupportedDatatype(format!(
                "NIfTI datatype code {other}"
            ))),
        }
    }

    fn bytes(self) -> usize {
        match self {
            NiftiDatatype::Uint8 => 1,
            NiftiDatatype::Int16 => 2,
            NiftiDatatype::Float32 => 4,
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    big_endian: bool,
}

impl Reader<'_> {
    fn i16(&self, at: usize) -> i16 {
        let b = [self.bytes[at], self.bytes[at + 1]];
        if self.big_endian {
            i16::from_be_bytes(b)
        } else {
            i16::from_le_bytes(b)
        }
    }

    fn f32(&self, at: usize) -> f32 {
        let b = [
            self.bytes[at],
            self.bytes[at + 1],
            self.bytes[at + 2],
            self.bytes[at + 3],
        ];
        if self.big_endian {
            f32::from_be_bytes(b)
        } else {
            f32::from_le_bytes(b)
        }
    }
}

pub fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b {
        return Err(Error::Header(
            "gzip-compressed NIfTI is not supported".into(),
        ));
    }
    if bytes.len() < HEADER_SIZE {
        return Err(Error::Header(format!(
            "file is {} bytes, shorter than a NIfTI-1 header",
            bytes.len()
        )));
    }
    let sizeof_hdr = [bytes[0], bytes[1], bytes[2], bytes[3]];
    let big_endian = if i32::from_le_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
        false
    } else if i32::from_be_bytes(sizeof_hdr) == HEADER_SIZE as i32 {
        true
    } else {
        return Err(Error::Header("sizeof_hdr is not 348".into()));
    };
    match &bytes[OFFSET_MAGIC..OFFSET_MAGIC + 4] {
        b"n+1\0" => {}
        b"ni1\0" => {
            return Err(Error::Header(
                "two-file NIfTI (.hdr/.img) is not supported".into(),
            ))
        }
        _ => return Err(Error::Header("missing NIfTI-1 magic".into())),
    }
    let r = Reader { bytes, big_endian };

    let ndim = r.i16(OFFSET_DIM);
    if !(1..=7).contains(&ndim) {
        return Err(Error::Header(format!("dim[0] = {ndim} out of range")));
    }
    let mut dims = [1usize; 3];
    for (a, d) in dims.iter_mut().enumerate() {
        if (a as i16) < ndim {
            let n = r.i16(OFFSET_DIM + 2 * (a + 1));
            if n < 1 {
                return Err(Error::Header(format!("dim[{}] = {n}", a + 1)));
            }
            *d = n as usize;
        }
    }
    for a in 4..=ndim as usize {
        if r.i16(OFFSET_DIM + 2 * a) > 1 {
            return Err(Error::UnsupportedDatatype(
                "multi-volume or vector-valued NIfTI".into(),
            ));
        }
    }
    let mut spacing = [1.0f64; 3];
    for (a, s) in spacing.iter_mut().enumerate() {
        if (a as i16) < ndim {
            *s = r.f32(OFFSET_PIXDIM + 4 * (a + 1)).abs() as f64;
        }
    }

    let datatype = NiftiDatatype::from_code(r.i16(OFFSET_DATATYPE))?;
    let vox_offset = r.f32(OFFSET_VOX_OFFSET);
    if !(vox_offset.is_finite() && vox_offset >= HEADER_SIZE as f32) {
        return Err(Error::Header(format!("vox_offset {vox_offset} is invalid")));
    }
    let start = vox_offset as usize;
    let count = dims.iter().product::<usize>();
    let available = bytes.len().saturating_sub(start) / datatype.bytes();
    if available < count {
        return Err(Error::PayloadMismatch {
            expected: count,
            found: available,
        });
    }
    let payload = &bytes[start..start + count * datatype.bytes()];
    let data: Vec<f32> = match datatype {
        NiftiDatatype::Uint8 => payload.iter().map(|&b| b as f32).collect(),
        NiftiDatatype::Int16 => payload
            .chunks_exact(2)
            .map(|c| {
                let b = [c[0], c[1]];
                (if big_endian {
                    i16::from_be_bytes(b)
                } else {
                    i16::from_le_bytes(b)
                }) as f32
            })
            .collect(),
        NiftiDatatype::Float32 => payload
            .chunks_exact(4)
            .map(|c| {
                let b = [c[0], c[1], c[2], c[3]];
                if big_endian {
                    f32::from_be_bytes(b)
                } else {
                    f32::from_le_bytes(b)
                }
            })
            .collect(),
    };
    Volume::new(dims, spacing, data)
}

/// Serializes `values` as a little-endian single-file NIfTI-1 image.
///
/// Values are cast to the target datatype; callers pick a datatype that can
/// represent them.
pub fn write_nifti_bytes(
    dims: [usize; 3],
    spacing: [f64; 3],
    values: &[f32],
    datatype: NiftiDatatype,
) -> Result<Vec<u8>> {
    if dims.iter().any(|&n| n == 0 || n > i16::MAX as usize) {
        return Err(Error::InvalidVolume(format!(
            "dims {dims:?} cannot be stored in NIfTI-1"
        )));
    }
    let mut out = vec![0u8; HEADER_SIZE + 4];
    let put_i16 =
        |out: &mut [u8], at: usize, v: i16| out[at..at + 2].copy_from_slice(&v.to_le_bytes());
    let put_f32 =
        |out: &mut [u8], at: usize, v: f32| out[at..at + 4].copy_from_slice(&v.to_le_bytes());
    out[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
    put_i16(&mut out, OFFSET_DIM, 3);
    for a in 0..3 {
        put_i16(&mut out, OFFSET_DIM + 2 * (a + 1), dims[a] as i16);
    }
    for a in 4..8 {
        put_i16(&mut out, OFFSET_DIM + 2 * a, 1);
    }
    put_i16(&mut out, OFFSET_DATATYPE, datatype.code());
    put_i16(&mut out, OFFSET_BITPIX, (datatype.bytes() * 8) as i16);
    put_f32(&mut out, OFFSET_PIXDIM, 1.0);
    for a in 0..3 {
        put_f32(&mut out, OFFSET_PIXDIM + 4 * (a + 1), spacing[a] as f32);
    }
    put_f32(&mut out, OFFSET_VOX_OFFSET, (HEADER_SIZE + 4) as f32);
    put_f32(&mut out, 112, 1.0); // scl_slope
    out[123] = 10; // xyzt_units: mm, s
    out[OFFSET_MAGIC..OFFSET_MAGIC + 4].copy_from_slice(b"n+1\0");
    out.reserve(values.len() * datatype.bytes());
    match datatype {
        NiftiDatatype::Uint8 => out.extend(values.iter().map(|&v| v as u8)),
        NiftiDatatype::Int16 => {
            for &v in values {
                out.extend((v as i16).to_le_bytes());
            }
        }
        NiftiDatatype::Float32 => {
            for &v in values {
                out.extend(v.to_le_bytes());
            }
        }
    }
    Ok(out)
}
