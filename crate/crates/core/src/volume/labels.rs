use indexmap::IndexMap;
use ndarray::{s, Array3};

use super::GridSpec;
use crate::error::{Error, Result};

/// One class of a label volume, stored as its bounding-box crop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMask {
    origin: [usize; 3],
    crop: Array3<bool>,
}

impl ClassMask {
    /// Crop a full-grid mask to the bounding box of its foreground.
    pub fn from_dense(mask: &Array3<bool>) -> Self {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for ((x, y, z), &v) in mask.indexed_iter() {
            if v {
                for (axis, i) in [x, y, z].into_iter().enumerate() {
                    lo[axis] = lo[axis].min(i);
                    hi[axis] = hi[axis].max(i);
                }
            }
        }
        if lo[0] == usize::MAX {
            return ClassMask::empty();
        }
        let crop = mask.slice(s![lo[0]..=hi[0], lo[1]..=hi[1], lo[2]..=hi[2]]).to_owned();
        ClassMask { origin: lo, crop }
    }

    pub fn empty() -> Self {
        ClassMask {
            origin: [0; 3],
            crop: Array3::from_elem((0, 0, 0), false),
        }
    }

    /// Build from a crop placed at `origin`; the crop is trimmed to its foreground.
    pub fn from_crop(origin: [usize; 3], crop: Array3<bool>) -> Self {
        let trimmed = ClassMask::from_dense(&crop);
        if trimmed.is_empty() {
            return trimmed;
        }
        ClassMask {
            origin: [
                origin[0] + trimmed.origin[0],
                origin[1] + trimmed.origin[1],
                origin[2] + trimmed.origin[2],
            ],
            crop: trimmed.crop,
        }
    }

    pub fn origin(&self) -> [usize; 3] {
        self.origin
    }

    pub fn crop(&self) -> &Array3<bool> {
        &self.crop
    }

    pub fn is_empty(&self) -> bool {
        self.crop.is_empty()
    }

    pub fn count(&self) -> usize {
        self.crop.iter().filter(|&&v| v).count()
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        let (cx, cy, cz) = self.crop.dim();
        let local = [
            p[0].wrapping_sub(self.origin[0]),
            p[1].wrapping_sub(self.origin[1]),
            p[2].wrapping_sub(self.origin[2]),
        ];
        local[0] < cx && local[1] < cy && local[2] < cz && self.crop[local]
    }

    /// Exclusive upper corner of the crop.
    pub fn end(&self) -> [usize; 3] {
        let (cx, cy, cz) = self.crop.dim();
        [self.origin[0] + cx, self.origin[1] + cy, self.origin[2] + cz]
    }

    pub fn to_dense(&self, dims: [usize; 3]) -> Array3<bool> {
        let mut out = Array3::from_elem((dims[0], dims[1], dims[2]), false);
        if !self.is_empty() {
            let [x0, y0, z0] = self.origin;
            let [x1, y1, z1] = self.end();
            out.slice_mut(s![x0..x1, y0..y1, z0..z1]).assign(&self.crop);
        }
        out
    }
}

/// Possibly overlapping per-class binary masks sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelVolume {
    grid: GridSpec,
    classes: IndexMap<String, ClassMask>,
}

impl LabelVolume {
    pub fn new(grid: GridSpec) -> Self {
        LabelVolume {
            grid,
            classes: IndexMap::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Add a full-grid mask. Class names must be unique.
    pub fn insert_dense(&mut self, name: impl Into<String>, mask: &Array3<bool>) -> Result<()> {
        let dims = mask.dim();
        if [dims.0, dims.1, dims.2] != self.grid.dims {
            return Err(Error::Argument(format!(
                "mask shape {dims:?} does not match grid {:?}",
                self.grid.dims
            )));
        }
        self.insert(name, ClassMask::from_dense(mask))
    }

    pub fn insert(&mut self, name: impl Into<String>, mask: ClassMask) -> Result<()> {
        let name = name.into();
        if self.classes.contains_key(&name) {
            return Err(Error::Argument(format!("duplicate class name {name:?}")));
        }
        if !mask.is_empty() && mask.end().iter().zip(self.grid.dims).any(|(&e, d)| e > d) {
            return Err(Error::Argument(format!("class {name:?} extends beyond the grid")));
        }
        self.classes.insert(name, mask);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ClassMask> {
        self.classes.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ClassMask)> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}
