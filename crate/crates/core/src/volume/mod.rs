//! Volumes, label volumes and their on-disk formats.

mod labels;
pub mod native;
pub mod nifti;

use std::path::Path;

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use labels::{ClassMask, LabelVolume};

/// Anatomical role of an array axis.
///
/// `Sagittal` is the left-right axis (normal to sagittal planes), `Coronal` the
/// anterior-posterior axis and `Axial` the superior-inferior axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisRole {
    Sagittal,
    Coronal,
    Axial,
}

/// Assignment of anatomical roles to the three array axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[AxisRole; 3]", into = "[AxisRole; 3]")]
pub struct Orientation([AxisRole; 3]);

impl Orientation {
    pub const RAS: Orientation = Orientation([AxisRole::Sagittal, AxisRole::Coronal, AxisRole::Axial]);

    pub fn new(roles: [AxisRole; 3]) -> Result<Self> {
        for role in [AxisRole::Sagittal, AxisRole::Coronal, AxisRole::Axial] {
            if !roles.contains(&role) {
                return Err(Error::Argument(format!("orientation {roles:?} does not assign the {role:?} role")));
            }
        }
        Ok(Orientation(roles))
    }

    pub fn roles(&self) -> [AxisRole; 3] {
        self.0
    }

    /// Array axis carrying the given role.
    pub fn axis_of(&self, role: AxisRole) -> usize {
        self.0.iter().position(|r| *r == role).expect("validated orientation")
    }
}

impl Default for Orientation {
    fn default() -> Self {
        Orientation::RAS
    }
}

impl TryFrom<[AxisRole; 3]> for Orientation {
    type Error = Error;

    fn try_from(roles: [AxisRole; 3]) -> Result<Self> {
        Orientation::new(roles)
    }
}

impl From<Orientation> for [AxisRole; 3] {
    fn from(o: Orientation) -> Self {
        o.0
    }
}

/// Voxel grid geometry shared by a volume and its labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: [usize; 3],
    /// Millimetres per voxel along each array axis.
    pub spacing: [f32; 3],
    #[serde(default)]
    pub orientation: Orientation,
}

impl GridSpec {
    pub fn new(dims: [usize; 3], spacing: [f32; 3], orientation: Orientation) -> Result<Self> {
        let grid = GridSpec {
            dims,
            spacing,
            orientation,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Isotropic 1 mm grid in RAS orientation.
    pub fn isotropic(dims: [usize; 3]) -> Self {
        GridSpec {
            dims,
            spacing: [1.0; 3],
            orientation: Orientation::RAS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Argument(format!("grid dims {:?} contain zero", self.dims)));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Argument(format!(
                "grid spacing {:?} must be strictly positive",
                self.spacing
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.dims[0], self.dims[1], self.dims[2])
    }
}

/// Inclusive HU window; the default is the 12-bit CT range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuWindow {
    pub lo: f32,
    pub hi: f32,
}

impl Default for HuWindow {
    fn default() -> Self {
        HuWindow { lo: -1024.0, hi: 3071.0 }
    }
}

impl HuWindow {
    pub fn new(lo: f32, hi: f32) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Argument(format!("HU window requires lo < hi, got [{lo}, {hi}]")));
        }
        Ok(HuWindow { lo, hi })
    }
}

/// Scalar CT volume in Hounsfield units.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    grid: GridSpec,
    data: Array3<f32>,
}

impl Volume {
    pub fn new(grid: GridSpec, data: Array3<f32>) -> Result<Self> {
        grid.validate()?;
        let shape = data.dim();
        if [shape.0, shape.1, shape.2] != grid.dims {
            return Err(Error::Argument(format!(
                "data shape {shape:?} does not match grid dims {:?}",
                grid.dims
            )));
        }
        Ok(Volume {
            grid,
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn filled(grid: GridSpec, value: f32) -> Result<Self> {
        grid.validate()?;
        Ok(Volume {
            data: Array3::from_elem(grid.shape(), value),
            grid,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    pub fn data(&self) -> &Array3<f32> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f32> {
        &mut self.data
    }

    pub fn into_data(self) -> Array3<f32> {
        self.data
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Clamp every voxel into `[lo, hi]`.
pub fn clip_hu(volume: &Volume, lo: f32, hi: f32) -> Result<Volume> {
    let window = HuWindow::new(lo, hi)?;
    Ok(Volume {
        grid: volume.grid,
        data: volume.data.mapv(|v| v.clamp(window.lo, window.hi)),
    })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Whether `path` names a file this crate can read as a volume.
pub fn is_volume_path(path: &Path) -> bool {
    let name = file_name(path);
    name.ends_with(".nii")
        || name.ends_with(".nii.gz")
        || (name.ends_with(".json") && !name.ends_with(".labels.json") && !name.ends_with(".spec.json"))
}

/// Load a NIfTI-1 file (`.nii`, `.nii.gz`) or a native `.json` + `.raw` pair.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let name = file_name(path);
    if name.ends_with(".nii") || name.ends_with(".nii.gz") {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        nifti::decode(&bytes)
    } else if name.ends_with(".json") {
        native::load_volume(path)
    } else {
        Err(Error::Argument(format!("unrecognised volume extension for {}", path.display())))
    }
}

/// Save a volume, choosing the container from the extension.
///
/// Integral data inside the int16 range is stored as int16, anything else as
/// float32, so a reload is bit-exact.
pub fn save_volume(volume: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let name = file_name(path);
    let dtype = nifti::DataType::smallest_exact(volume);
    if name.ends_with(".nii") || name.ends_with(".nii.gz") {
        let mut bytes = nifti::encode(volume, dtype)?;
        if name.ends_with(".gz") {
            bytes = nifti::gzip(&bytes).map_err(|e| Error::io(path, e))?;
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    } else if name.ends_with(".json") {
        native::save_volume(volume, path, dtype)
    } else {
        Err(Error::Argument(format!("unrecognised volume extension for {}", path.display())))
    }
}
