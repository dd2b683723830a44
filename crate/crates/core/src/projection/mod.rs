//! Pseudo-radiograph synthesis from CT and max-projection of label volumes.
//!
//! Image convention: rows run superior to inferior (the axial axis is assumed
//! to increase superiorly and is flipped); frontal columns follow the sagittal
//! axis index, lateral columns the coronal axis index.

mod clahe;

use std::io::Cursor;
use std::path::Path;

use ndarray::{Array2, Array3, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgops::{fill_holes_slicewise, ght_threshold, largest_component, threshold, GhtParams, Histogram, Sense};
use crate::maskset::{MaskSet2D, View};
use crate::resample::{resize_2d, resize_nearest, Kernel};
use crate::volume::{clip_hu, AxisRole, HuWindow, LabelVolume, Orientation, Volume};

pub use clahe::{equalize_adaptive, ClaheParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub body_weight: f64,
    pub bone_weight: f64,
    /// Output (width, height).
    pub output_size: (usize, usize),
    pub equalize_frontal: bool,
    pub equalize_lateral: bool,
    pub window: HuWindow,
    pub body_threshold: f32,
    pub ght: GhtParams,
    pub clahe: ClaheParams,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            body_weight: 1.0,
            bone_weight: 0.3,
            output_size: (512, 512),
            equalize_frontal: true,
            equalize_lateral: false,
            window: HuWindow::default(),
            body_threshold: -100.0,
            ght: GhtParams::OTSU,
            clahe: ClaheParams::default(),
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.body_weight >= 0.0 && self.bone_weight >= 0.0) {
            return Err(Error::Argument("projection weights must be non-negative".into()));
        }
        if self.output_size.0 == 0 || self.output_size.1 == 0 {
            return Err(Error::Argument("output size must be positive".into()));
        }
        HuWindow::new(self.window.lo, self.window.hi)?;
        self.ght.validate()
    }

    pub fn equalize(&self, view: View) -> bool {
        match view {
            View::Frontal => self.equalize_frontal,
            View::Lateral => self.equalize_lateral,
        }
    }
}

/// An 8-bit pseudo-radiograph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub image: Array2<u8>,
    pub view: View,
    pub source_id: String,
    pub equalized: bool,
}

impl Projection {
    pub fn to_png(&self) -> Result<Vec<u8>> {
        gray_png(&self.image)
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png()?).map_err(|e| Error::io(path, e))
    }
}

/// Encode a (rows, cols) 8-bit array as a grayscale PNG.
pub fn gray_png(image: &Array2<u8>) -> Result<Vec<u8>> {
    let (rows, cols) = image.dim();
    let buf = image::GrayImage::from_raw(cols as u32, rows as u32, image.iter().copied().collect())
        .ok_or_else(|| Error::Argument("image buffer size mismatch".into()))?;
    let mut out = Vec::new();
    buf.write_to(&mut Cursor::new(&mut out), image::ImageFormat::Png)?;
    Ok(out)
}

/// Array axes for a view: (ray axis, row axis, column axis).
pub fn view_axes(orientation: &Orientation, view: View) -> (usize, usize, usize) {
    let ray = match view {
        View::Frontal => orientation.axis_of(AxisRole::Coronal),
        View::Lateral => orientation.axis_of(AxisRole::Sagittal),
    };
    let col = match view {
        View::Frontal => orientation.axis_of(AxisRole::Sagittal),
        View::Lateral => orientation.axis_of(AxisRole::Coronal),
    };
    (ray, orientation.axis_of(AxisRole::Axial), col)
}

/// Native (rows, cols) of a view's projection for a grid.
pub fn view_shape(dims: [usize; 3], orientation: &Orientation, view: View) -> (usize, usize) {
    let (_, row, col) = view_axes(orientation, view);
    (dims[row], dims[col])
}

/// Patient outline: threshold, per-axial-slice hole filling, largest
/// connected component. Drops the scanner table and anything else detached.
pub fn body_mask(volume: &Volume, threshold_hu: f32) -> Result<Array3<bool>> {
    let above = threshold(volume.data(), threshold_hu, Sense::AtLeast);
    if !above.iter().any(|&b| b) {
        return Err(Error::Degenerate(format!("no voxel reaches {threshold_hu} HU")));
    }
    let axial = volume.grid().orientation.axis_of(AxisRole::Axial);
    Ok(largest_component(&fill_holes_slicewise(&above, axial)))
}

/// Per-axial-slice bone extraction with GHT on the body voxels' histogram.
///
/// Returns the input HU on bone voxels and `window.lo` elsewhere. Slices whose
/// body voxels span fewer than two HU bins contribute no bone.
pub fn bone_volume(volume: &Volume, body: &Array3<bool>, ght: &GhtParams, window: HuWindow) -> Result<Volume> {
    if body.dim() != volume.grid().shape() {
        return Err(Error::Argument("body mask does not match the volume grid".into()));
    }
    let axial = volume.grid().orientation.axis_of(AxisRole::Axial);
    let mut out = Volume::filled(*volume.grid(), window.lo)?;
    let slices = volume
        .data()
        .axis_iter(Axis(axial))
        .zip(body.axis_iter(Axis(axial)))
        .zip(out.data_mut().axis_iter_mut(Axis(axial)));
    for ((values, inside), mut dst) in slices {
        let body_values = Zip::from(&values).and(&inside).fold(Vec::new(), |mut acc, &v, &b| {
            if b {
                acc.push(v);
            }
            acc
        });
        let hist = Histogram::integer_hu(window.lo, window.hi, body_values.into_iter());
        if hist.occupied_bins() < 2 {
            continue;
        }
        let t = ght_threshold(&hist, ght)? as f32;
        Zip::from(&mut dst).and(&values).and(&inside).for_each(|d, &v, &b| {
            if b && v >= t {
                *d = v;
            }
        });
    }
    Ok(out)
}

/// Mean of the masked voxels along each ray; rays without masked voxels get
/// `empty_value`.
pub fn project_mean(volume: &Volume, view: View, mask: &Array3<bool>, empty_value: f64) -> Result<Array2<f64>> {
    if mask.dim() != volume.grid().shape() {
        return Err(Error::Argument("projection mask does not match the volume grid".into()));
    }
    let grid = volume.grid();
    let (_, row_axis, col_axis) = view_axes(&grid.orientation, view);
    let shape = view_shape(grid.dims, &grid.orientation, view);
    let mut sum = Array2::<f64>::zeros(shape);
    let mut count = Array2::<u32>::zeros(shape);
    let last_row = shape.0 - 1;
    Zip::indexed(volume.data()).and(mask).for_each(|(x, y, z), &v, &m| {
        if m {
            let p = [x, y, z];
            let rc = (last_row - p[row_axis], p[col_axis]);
            sum[rc] += v as f64;
            count[rc] += 1;
        }
    });
    Ok(Zip::from(&sum)
        .and(&count)
        .map_collect(|&s, &n| if n == 0 { empty_value } else { s / n as f64 }))
}

/// Min-max scale to [0, 255]; a constant image maps to 0.
pub fn rescale_u8(image: &Array2<f64>) -> Array2<u8> {
    let (lo, hi) = image
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return image.mapv(|_| 0);
    }
    let span = hi - lo;
    image.mapv(|v| (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8)
}

/// Clipped volume with its body mask and weighted bone term, shared by both
/// views of one CT.
pub struct DrrSource {
    combined: Volume,
    body: Array3<bool>,
    window: HuWindow,
}

impl DrrSource {
    pub fn new(volume: &Volume, cfg: &ProjectionConfig) -> Result<Self> {
        cfg.validate()?;
        let clipped = clip_hu(volume, cfg.window.lo, cfg.window.hi)?;
        let body = body_mask(&clipped, cfg.body_threshold)?;
        let bone = bone_volume(&clipped, &body, &cfg.ght, cfg.window)?;
        let lo = cfg.window.lo;
        let (wb, wo) = (cfg.body_weight as f32, cfg.bone_weight as f32);
        let mut combined = clipped;
        Zip::from(combined.data_mut())
            .and(bone.data())
            .and(&body)
            .for_each(|v, &b, &inside| {
                *v = if inside { wb * *v + wo * (b - lo) } else { lo };
            });
        Ok(DrrSource {
            combined,
            body,
            window: cfg.window,
        })
    }

    pub fn body(&self) -> &Array3<bool> {
        &self.body
    }

    pub fn render(&self, view: View, cfg: &ProjectionConfig) -> Result<Projection> {
        let mean = project_mean(&self.combined, view, &self.body, self.window.lo as f64)?;
        let mut image = rescale_u8(&mean);
        let equalized = cfg.equalize(view);
        if equalized {
            image = equalize_adaptive(&image, cfg.clahe.tiles, cfg.clahe.clip_limit);
        }
        let resized = resize_2d(&image.mapv(f64::from), cfg.output_size, Kernel::Lanczos)?;
        Ok(Projection {
            image: resized.mapv(|v| v.round().clamp(0.0, 255.0) as u8),
            view,
            source_id: String::new(),
            equalized,
        })
    }
}

/// Full pseudo-radiograph pipeline for one view.
pub fn compose_drr(volume: &Volume, cfg: &ProjectionConfig, view: View) -> Result<Projection> {
    DrrSource::new(volume, cfg)?.render(view, cfg)
}

/// Max-project every class along the view's ray axis at native resolution.
pub fn project_masks_native(labels: &LabelVolume, view: View) -> MaskSet2D {
    let grid = labels.grid();
    let (_, row_axis, col_axis) = view_axes(&grid.orientation, view);
    let shape = view_shape(grid.dims, &grid.orientation, view);
    let mut set = MaskSet2D::new(view, shape);
    for (name, class) in labels.iter() {
        let mut footprint = Array2::from_elem(shape, false);
        let origin = class.origin();
        for ((x, y, z), &v) in class.crop().indexed_iter() {
            if v {
                let p = [x + origin[0], y + origin[1], z + origin[2]];
                footprint[[shape.0 - 1 - p[row_axis], p[col_axis]]] = true;
            }
        }
        set.insert(name, footprint).expect("class names are unique in a label volume");
    }
    set
}

/// Max-project labels and resize with nearest interpolation to `output_size`
/// (width, height).
pub fn project_masks(labels: &LabelVolume, view: View, output_size: (usize, usize)) -> Result<MaskSet2D> {
    let native = project_masks_native(labels, view);
    let mut out = MaskSet2D::new(view, (output_size.1, output_size.0));
    for (name, entry) in native.iter() {
        out.insert(name, resize_nearest(&entry.mask, output_size)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
