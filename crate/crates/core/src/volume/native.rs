//! Native fixture format: a JSON sidecar header next to a flat little-endian
//! payload (`<name>.json` + `<name>.raw`), x varying fastest as in NIfTI.
//!
//! Label volumes use `<name>.labels.json` + `<name>.labels.raw`; each class is
//! stored as a bit-packed bounding-box crop.

use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::nifti::DataType;
use super::{ClassMask, GridSpec, LabelVolume, Volume};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct VolumeHeader {
    #[serde(flatten)]
    grid: GridSpec,
    dtype: String,
    #[serde(default = "one")]
    scl_slope: f32,
    #[serde(default)]
    scl_inter: f32,
}

fn one() -> f32 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelHeader {
    #[serde(flatten)]
    grid: GridSpec,
    classes: Vec<LabelEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelEntry {
    name: String,
    origin: [usize; 3],
    shape: [usize; 3],
    offset: usize,
    len: usize,
}

/// `foo.json` -> `foo.raw`, `foo.labels.json` -> `foo.labels.raw`.
pub fn payload_path(header: &Path) -> PathBuf {
    header.with_extension("raw")
}

/// Label file that accompanies a native volume header, if any naming applies.
pub fn label_path_for(volume_header: &Path) -> PathBuf {
    let stem = volume_header
        .file_name()
        .map(|n| n.to_string_lossy().trim_end_matches(".json").to_string())
        .unwrap_or_default();
    volume_header.with_file_name(format!("{stem}.labels.json"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_volume(header_path: &Path) -> Result<Volume> {
    let header: VolumeHeader = serde_json::from_slice(&read(header_path)?)?;
    header.grid.validate()?;
    let dtype = DataType::from_name(&header.dtype).ok_or_else(|| Error::Argument(format!("unknown dtype {:?}", header.dtype)))?;
    let raw = read(&payload_path(header_path))?;
    let expected = header.grid.len() * dtype.bytes_per_voxel();
    if raw.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: raw.len(),
        });
    }
    let values = dtype.decode(&raw, header.scl_slope, header.scl_inter);
    let [nx, ny, nz] = header.grid.dims;
    let data = Array3::from_shape_vec((nz, ny, nx), values)
        .expect("payload length checked")
        .permuted_axes([2, 1, 0]);
    Volume::new(header.grid, data)
}

pub fn save_volume(volume: &Volume, header_path: &Path, dtype: DataType) -> Result<()> {
    let header = VolumeHeader {
        grid: *volume.grid(),
        dtype: dtype.name().to_string(),
        scl_slope: 1.0,
        scl_inter: 0.0,
    };
    let mut raw = Vec::with_capacity(volume.grid().len() * dtype.bytes_per_voxel());
    dtype.encode(volume.data().view().reversed_axes().iter().copied(), &mut raw)?;
    write(&payload_path(header_path), &raw)?;
    write(header_path, &serde_json::to_vec_pretty(&header)?)
}

fn pack_bits(bits: impl Iterator<Item = bool>, out: &mut Vec<u8>) {
    let mut byte = 0u8;
    let mut n = 0;
    for b in bits {
        if b {
            byte |= 1 << n;
        }
        n += 1;
        if n == 8 {
            out.push(byte);
            byte = 0;
            n = 0;
        }
    }
    if n > 0 {
        out.push(byte);
    }
}

pub fn save_labels(labels: &LabelVolume, header_path: &Path) -> Result<()> {
    let mut raw = Vec::new();
    let mut classes = Vec::with_capacity(labels.len());
    for (name, mask) in labels.iter() {
        let offset = raw.len();
        let (cx, cy, cz) = mask.crop().dim();
        pack_bits(mask.crop().view().reversed_axes().iter().copied(), &mut raw);
        classes.push(LabelEntry {
            name: name.to_string(),
            origin: mask.origin(),
            shape: [cx, cy, cz],
            offset,
            len: raw.len() - offset,
        });
    }
    let header = LabelHeader {
        grid: *labels.grid(),
        classes,
    };
    write(&payload_path(header_path), &raw)?;
    write(header_path, &serde_json::to_vec_pretty(&header)?)
}

pub fn load_labels(header_path: &Path) -> Result<LabelVolume> {
    let header: LabelHeader = serde_json::from_slice(&read(header_path)?)?;
    header.grid.validate()?;
    let raw = read(&payload_path(header_path))?;
    let mut labels = LabelVolume::new(header.grid);
    for entry in header.classes {
        let n: usize = entry.shape.iter().product();
        let needed = n.div_ceil(8);
        let end = entry.offset + entry.len;
        if entry.len < needed || end > raw.len() {
            return Err(Error::Truncated {
                expected: entry.offset + needed,
                actual: raw.len(),
            });
        }
        let bytes = &raw[entry.offset..end];
        let bits: Vec<bool> = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        let [cx, cy, cz] = entry.shape;
        let crop = Array3::from_shape_vec((cz, cy, cx), bits)
            .expect("length computed from shape")
            .permuted_axes([2, 1, 0])
            .as_standard_layout()
            .into_owned();
        labels.insert(entry.name, ClassMask::from_crop(entry.origin, crop))?;
    }
    Ok(labels)
}

/// Read a directory of per-class NIfTI masks (`<class>.nii[.gz]`, nonzero =
/// foreground), the layout most CT segmentation tools emit.
pub fn load_label_dir(dir: &Path) -> Result<LabelVolume> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let n = p.to_string_lossy();
            n.ends_with(".nii") || n.ends_with(".nii.gz")
        })
        .collect();
    entries.sort();
    let mut labels: Option<LabelVolume> = None;
    for path in entries {
        let volume = super::load_volume(&path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().trim_end_matches(".gz").trim_end_matches(".nii").to_string())
            .unwrap_or_default();
        let lv = labels.get_or_insert_with(|| LabelVolume::new(*volume.grid()));
        if lv.grid().dims != volume.dims() {
            return Err(Error::Argument(format!(
                "{} has dims {:?}, expected {:?}",
                path.display(),
                volume.dims(),
                lv.grid().dims
            )));
        }
        lv.insert_dense(name, &volume.data().mapv(|v| v != 0.0))?;
    }
    labels.ok_or_else(|| Error::Argument(format!("no NIfTI masks found in {}", dir.display())))
}
