//! Little-endian NIfTI-1 subset: single-file `n+1` images with uint8, int16 or
//! float32 voxels, optionally gzip-wrapped. Spatial transforms are reduced to
//! `pixdim` spacing.

use std::io::{Read, Write};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use ndarray::Array3;

use super::{GridSpec, Orientation, Volume};
use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag block.
pub const DEFAULT_VOX_OFFSET: usize = 352;
pub const SUPPORTED_DATATYPES: &[i16] = &[2, 4, 16];

mod offsets {
    pub const SIZEOF_HDR: usize = 0;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const MAGIC: usize = 344;
}

const MAGIC: &[u8; 4] = b"n+1\0";
const UNITS_MM: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataType {
    UInt8,
    Int16,
    Float32,
}

impl DataType {
    pub fn from_code(code: i16) -> Result<Self> {
        match code {
            2 => Ok(DataType::UInt8),
            4 => Ok(DataType::Int16),
            16 => Ok(DataType::Float32),
            _ => Err(Error::UnsupportedDatatype {
                code,
                supported: SUPPORTED_DATATYPES,
            }),
        }
    }

    pub fn code(self) -> i16 {
        match self {
            DataType::UInt8 => 2,
            DataType::Int16 => 4,
            DataType::Float32 => 16,
        }
    }

    pub fn bytes_per_voxel(self) -> usize {
        match self {
            DataType::UInt8 => 1,
            DataType::Int16 => 2,
            DataType::Float32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DataType::UInt8 => "uint8",
            DataType::Int16 => "int16",
            DataType::Float32 => "float32",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "uint8" => Some(DataType::UInt8),
            "int16" => Some(DataType::Int16),
            "float32" => Some(DataType::Float32),
            _ => None,
        }
    }

    /// Narrowest type that stores every voxel of `volume` exactly.
    pub fn smallest_exact(volume: &Volume) -> Self {
        let fits = |lo: f32, hi: f32| {
            volume
                .data()
                .iter()
                .all(|&v| v.fract() == 0.0 && v >= lo && v <= hi && !(v == 0.0 && v.is_sign_negative()))
        };
        if fits(0.0, 255.0) {
            DataType::UInt8
        } else if fits(i16::MIN as f32, i16::MAX as f32) {
            DataType::Int16
        } else {
            DataType::Float32
        }
    }

    pub(crate) fn decode(self, raw: &[u8], slope: f32, inter: f32) -> Vec<f32> {
        let scale = |v: f32| if slope == 1.0 && inter == 0.0 { v } else { slope * v + inter };
        match self {
            DataType::UInt8 => raw.iter().map(|&b| scale(b as f32)).collect(),
            DataType::Int16 => raw
                .chunks_exact(2)
                .map(|c| scale(i16::from_le_bytes([c[0], c[1]]) as f32))
                .collect(),
            DataType::Float32 => raw
                .chunks_exact(4)
                .map(|c| scale(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect(),
        }
    }

    pub(crate) fn encode(self, values: impl Iterator<Item = f32>, out: &mut Vec<u8>) -> Result<()> {
        for v in values {
            match self {
                DataType::UInt8 => {
                    if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
                        return Err(Error::Argument(format!("value {v} not representable as uint8")));
                    }
                    out.push(v as u8);
                }
                DataType::Int16 => {
                    if v.fract() != 0.0 || v < i16::MIN as f32 || v > i16::MAX as f32 {
                        return Err(Error::Argument(format!("value {v} not representable as int16")));
                    }
                    out.extend_from_slice(&(v as i16).to_le_bytes());
                }
                DataType::Float32 => out.extend_from_slice(&v.to_le_bytes()),
            }
        }
        Ok(())
    }
}

/// The header fields this reader honours.
#[derive(Clone, Debug, PartialEq)]
pub struct Header {
    pub dims: [usize; 3],
    pub spacing: [f32; 3],
    pub datatype: DataType,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub vox_offset: usize,
}

fn read_i16(b: &[u8], at: usize) -> i16 {
    i16::from_le_bytes([b[at], b[at + 1]])
}

fn read_i32(b: &[u8], at: usize) -> i32 {
    i32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn read_f32(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

impl Header {
    pub fn parse(bytes: &[u8]) -> Result<Header> {
        if bytes.len() < HEADER_SIZE {
            return Err(format_err(
                bytes.len(),
                format!("header needs {HEADER_SIZE} bytes, file has {}", bytes.len()),
            ));
        }
        let sizeof_hdr = read_i32(bytes, offsets::SIZEOF_HDR);
        if sizeof_hdr != HEADER_SIZE as i32 {
            let hint = if sizeof_hdr.swap_bytes() == HEADER_SIZE as i32 {
                " (big-endian files are not supported)"
            } else {
                ""
            };
            return Err(format_err(
                offsets::SIZEOF_HDR,
                format!("sizeof_hdr is {sizeof_hdr}, expected 348{hint}"),
            ));
        }
        if &bytes[offsets::MAGIC..offsets::MAGIC + 4] != MAGIC {
            return Err(format_err(
                offsets::MAGIC,
                format!(
                    "magic {:?} is not single-file NIfTI-1 \"n+1\"",
                    String::from_utf8_lossy(&bytes[offsets::MAGIC..offsets::MAGIC + 4])
                ),
            ));
        }
        let rank = read_i16(bytes, offsets::DIM);
        if !(3..=7).contains(&rank) {
            return Err(format_err(offsets::DIM, format!("dim[0] = {rank}, expected 3..=7")));
        }
        let mut dims = [0usize; 3];
        for i in 0..7 {
            let at = offsets::DIM + 2 * (i + 1);
            let d = read_i16(bytes, at);
            if (i as i16) < rank {
                if d < 1 {
                    return Err(format_err(at, format!("dim[{}] = {d} must be positive", i + 1)));
                }
                if i < 3 {
                    dims[i] = d as usize;
                } else if d != 1 {
                    return Err(format_err(at, format!("dim[{}] = {d}; only 3D volumes are supported", i + 1)));
                }
            }
        }
        let datatype = DataType::from_code(read_i16(bytes, offsets::DATATYPE))?;
        let bitpix = read_i16(bytes, offsets::BITPIX);
        if bitpix as usize != datatype.bytes_per_voxel() * 8 {
            return Err(format_err(
                offsets::BITPIX,
                format!("bitpix {bitpix} inconsistent with datatype {}", datatype.name()),
            ));
        }
        let mut spacing = [0f32; 3];
        for (i, s) in spacing.iter_mut().enumerate() {
            let at = offsets::PIXDIM + 4 * (i + 1);
            *s = read_f32(bytes, at);
            if !(*s > 0.0 && s.is_finite()) {
                return Err(format_err(at, format!("pixdim[{}] = {s} must be positive", i + 1)));
            }
        }
        let vox_offset = read_f32(bytes, offsets::VOX_OFFSET);
        if !(vox_offset >= HEADER_SIZE as f32) || vox_offset.fract() != 0.0 {
            return Err(format_err(offsets::VOX_OFFSET, format!("vox_offset {vox_offset} is invalid")));
        }
        let mut scl_slope = read_f32(bytes, offsets::SCL_SLOPE);
        let mut scl_inter = read_f32(bytes, offsets::SCL_INTER);
        if scl_slope == 0.0 || !scl_slope.is_finite() {
            scl_slope = 1.0;
            scl_inter = 0.0;
        }
        if !scl_inter.is_finite() {
            scl_inter = 0.0;
        }
        Ok(Header {
            dims,
            spacing,
            datatype,
            scl_slope,
            scl_inter,
            vox_offset: vox_offset as usize,
        })
    }

    pub fn payload_len(&self) -> usize {
        self.dims.iter().product::<usize>() * self.datatype.bytes_per_voxel()
    }

    /// Serialise the header followed by zero padding up to `vox_offset`.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut b = vec![0u8; self.vox_offset.max(HEADER_SIZE)];
        b[offsets::SIZEOF_HDR..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
        b[offsets::DIM..offsets::DIM + 2].copy_from_slice(&3i16.to_le_bytes());
        for i in 0..7 {
            let d: i16 = if i < 3 {
                i16::try_from(self.dims[i]).map_err(|_| Error::Argument(format!("dimension {} exceeds NIfTI-1 limit", self.dims[i])))?
            } else {
                1
            };
            let at = offsets::DIM + 2 * (i + 1);
            b[at..at + 2].copy_from_slice(&d.to_le_bytes());
        }
        b[offsets::DATATYPE..offsets::DATATYPE + 2].copy_from_slice(&self.datatype.code().to_le_bytes());
        let bitpix = (self.datatype.bytes_per_voxel() * 8) as i16;
        b[offsets::BITPIX..offsets::BITPIX + 2].copy_from_slice(&bitpix.to_le_bytes());
        b[offsets::PIXDIM..offsets::PIXDIM + 4].copy_from_slice(&1f32.to_le_bytes());
        for i in 0..3 {
            let at = offsets::PIXDIM + 4 * (i + 1);
            b[at..at + 4].copy_from_slice(&self.spacing[i].to_le_bytes());
        }
        b[offsets::VOX_OFFSET..offsets::VOX_OFFSET + 4].copy_from_slice(&(self.vox_offset as f32).to_le_bytes());
        b[offsets::SCL_SLOPE..offsets::SCL_SLOPE + 4].copy_from_slice(&self.scl_slope.to_le_bytes());
        b[offsets::SCL_INTER..offsets::SCL_INTER + 4].copy_from_slice(&self.scl_inter.to_le_bytes());
        b[offsets::XYZT_UNITS] = UNITS_MM;
        b[offsets::MAGIC..offsets::MAGIC + 4].copy_from_slice(MAGIC);
        Ok(b)
    }
}

fn is_gzip(bytes: &[u8]) -> bool {
    bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b
}

pub fn gzip(bytes: &[u8]) -> std::io::Result<Vec<u8>> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    enc.write_all(bytes)?;
    enc.finish()
}

/// Decode a NIfTI-1 image (gzip detected from the stream magic).
pub fn decode(bytes: &[u8]) -> Result<Volume> {
    let inflated;
    let bytes = if is_gzip(bytes) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| format_err(0, format!("gzip stream: {e}")))?;
        inflated = out;
        &inflated[..]
    } else {
        bytes
    };
    let header = Header::parse(bytes)?;
    let expected = header.payload_len();
    let actual = bytes.len().saturating_sub(header.vox_offset);
    if actual < expected {
        return Err(Error::Truncated { expected, actual });
    }
    let raw = &bytes[header.vox_offset..header.vox_offset + expected];
    let values = header.datatype.decode(raw, header.scl_slope, header.scl_inter);
    // NIfTI stores x fastest; our arrays are row-major with z fastest.
    let [nx, ny, nz] = header.dims;
    let data = Array3::from_shape_vec((nz, ny, nx), values)
        .expect("payload length checked")
        .permuted_axes([2, 1, 0]);
    let grid = GridSpec::new(header.dims, header.spacing, Orientation::RAS)?;
    Volume::new(grid, data)
}

/// Encode a volume as uncompressed NIfTI-1 with unit scaling.
pub fn encode(volume: &Volume, datatype: DataType) -> Result<Vec<u8>> {
    let header = Header {
        dims: volume.dims(),
        spacing: volume.grid().spacing,
        datatype,
        scl_slope: 1.0,
        scl_inter: 0.0,
        vox_offset: DEFAULT_VOX_OFFSET,
    };
    let mut bytes = header.to_bytes()?;
    bytes.reserve(header.payload_len());
    // Fortran order: iterate the transposed view in logical order.
    let fortran = volume.data().view().reversed_axes();
    datatype.encode(fortran.iter().copied(), &mut bytes)?;
    Ok(bytes)
}
