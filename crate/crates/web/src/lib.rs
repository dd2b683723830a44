//! WebAssembly bindings for the static demo in `www/`.
//!
//! A [`Demo`] holds one generated phantom so sliders re-render without
//! regenerating the volume. Images cross the boundary as RGBA bytes.

use ct2cxr::biomarkers::{ctr, is_vertebra, scd, CtrMeasurement, ScdMeasurement};
use ct2cxr::imgops::{ght_threshold, GhtParams, Histogram};
use ct2cxr::phantom::{generate_phantom, scoliosis_variant, PhantomSpec};
use ct2cxr::projection::{project_masks, DrrSource, ProjectionConfig};
use ct2cxr::volume::{AxisRole, HuWindow, LabelVolume, Volume};
use ct2cxr::{MaskSet2D, View};
use ndarray::{Array2, Axis};
use wasm_bindgen::prelude::*;

/// Output images are square with this side.
pub const IMAGE_SIDE: usize = 256;

type Rgba = Array2<[u8; 4]>;

fn to_bytes(img: &Rgba) -> Vec<u8> {
    img.iter().flatten().copied().collect()
}

fn gray(img: &Array2<u8>) -> Rgba {
    img.mapv(|v| [v, v, v, 255])
}

fn blend(px: &mut [u8; 4], color: [u8; 3], alpha: f32) {
    for i in 0..3 {
        px[i] = (px[i] as f32 * (1.0 - alpha) + color[i] as f32 * alpha).round() as u8;
    }
}

fn tint(img: &mut Rgba, mask: &Array2<bool>, color: [u8; 3], alpha: f32) {
    img.zip_mut_with(mask, |px, &m| {
        if m {
            blend(px, color, alpha);
        }
    });
}

fn dot(img: &mut Rgba, r: f64, c: f64, color: [u8; 3]) {
    let (h, w) = img.dim();
    for dr in -2..=2 {
        for dc in -2..=2 {
            let (rr, cc) = (r.round() as isize + dr, c.round() as isize + dc);
            if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                img[[rr as usize, cc as usize]] = [color[0], color[1], color[2], 255];
            }
        }
    }
}

fn hline(img: &mut Rgba, row: usize, c0: usize, c1: usize, color: [u8; 3]) {
    for c in c0..=c1.min(img.ncols() - 1) {
        img[[row, c]] = [color[0], color[1], color[2], 255];
    }
}

/// Widest row of a mask as (row, first col, last col).
fn widest_row(mask: &Array2<bool>) -> Option<(usize, usize, usize)> {
    mask.axis_iter(Axis(0))
        .enumerate()
        .filter_map(|(r, row)| Some((r, row.iter().position(|&v| v)?, row.iter().rposition(|&v| v)?)))
        .max_by_key(|&(r, a, b)| (b - a, std::cmp::Reverse(r)))
}

const HEART: [u8; 3] = [230, 60, 60];
const LUNG: [u8; 3] = [60, 140, 230];
const SPINE: [u8; 3] = [240, 200, 40];
const LINE: [u8; 3] = [40, 220, 120];

/// Phantom-specific state; everything here works natively as well.
pub struct Scene {
    volume: Volume,
    labels: LabelVolume,
    masks: MaskSet2D,
    source: Option<(f64, DrrSource)>,
}

impl Scene {
    pub fn new(size: usize, heart_half_width: f64, scoliosis_amplitude: f64) -> ct2cxr::Result<Scene> {
        let base = PhantomSpec::standard(size);
        let k = size as f64 / 256.0;
        let mut spec = base.clone().with_heart_half_width(heart_half_width * k);
        if scoliosis_amplitude != 0.0 {
            spec = scoliosis_variant(&spec, scoliosis_amplitude * k, 2.0 * base.spine.length())?;
        }
        let (volume, labels) = generate_phantom(&spec)?;
        let masks = project_masks(&labels, View::Frontal, (IMAGE_SIDE, IMAGE_SIDE))?;
        Ok(Scene {
            volume,
            labels,
            masks,
            source: None,
        })
    }

    fn config(bone_weight: f64, equalize: bool) -> ProjectionConfig {
        ProjectionConfig {
            bone_weight,
            equalize_frontal: equalize,
            equalize_lateral: equalize,
            output_size: (IMAGE_SIDE, IMAGE_SIDE),
            ..Default::default()
        }
    }

    /// Pseudo-radiograph as grayscale bytes (rows x cols).
    pub fn radiograph(&mut self, view: View, bone_weight: f64, equalize: bool) -> ct2cxr::Result<Array2<u8>> {
        let cfg = Self::config(bone_weight, equalize);
        if self.source.as_ref().is_none_or(|(w, _)| *w != bone_weight) {
            self.source = Some((bone_weight, DrrSource::new(&self.volume, &cfg)?));
        }
        let (_, src) = self.source.as_ref().expect("source just built");
        Ok(src.render(view, &cfg)?.image)
    }

    pub fn ctr(&self) -> ct2cxr::Result<CtrMeasurement> {
        ctr(&self.masks)
    }

    pub fn scd(&self) -> ct2cxr::Result<ScdMeasurement> {
        scd(&self.masks)
    }

    /// Frontal radiograph with heart, lungs and vertebrae tinted, the CTR
    /// widths drawn at their widest rows, and the fitted spinal centerline.
    pub fn overlay(&mut self, bone_weight: f64, equalize: bool) -> ct2cxr::Result<Rgba> {
        let mut img = gray(&self.radiograph(View::Frontal, bone_weight, equalize)?);
        for (name, e) in self.masks.iter() {
            if name == "heart" {
                tint(&mut img, &e.mask, HEART, 0.35);
            } else if name.starts_with("lung_") {
                tint(&mut img, &e.mask, LUNG, 0.2);
            } else if is_vertebra(name) {
                tint(&mut img, &e.mask, SPINE, 0.3);
            }
        }
        if let Some((r, a, b)) = self.masks.get("heart").and_then(widest_row) {
            hline(&mut img, r, a, b, HEART);
        }
        let lungs = match (self.masks.get("lung_right"), self.masks.get("lung_left")) {
            (Some(r), Some(l)) => Some(r | l),
            _ => None,
        };
        if let Some((r, a, b)) = lungs.as_ref().and_then(widest_row) {
            hline(&mut img, r, a, b, LUNG);
        }
        if let Ok(m) = self.scd() {
            let (p, d) = (m.centerline.point, m.centerline.direction);
            for t in -(IMAGE_SIDE as i64)..IMAGE_SIDE as i64 {
                let (x, y) = (p[0] + d[0] * t as f64, p[1] + d[1] * t as f64);
                if (0.0..IMAGE_SIDE as f64).contains(&x) && (0.0..IMAGE_SIDE as f64).contains(&y) {
                    img[[y as usize, x as usize]] = [LINE[0], LINE[1], LINE[2], 255];
                }
            }
            for (name, e) in self.masks.iter() {
                if is_vertebra(name) {
                    if let Ok((x, y)) = ct2cxr::biomarkers::centroid(&e.mask) {
                        dot(&mut img, y, x, LINE);
                    }
                }
            }
        }
        Ok(img)
    }

    pub fn axial_slices(&self) -> usize {
        let o = self.volume.grid().orientation;
        self.volume.dims()[o.axis_of(AxisRole::Axial)]
    }

    /// GHT threshold of one axial slice's body voxels and the slice with the
    /// selected voxels tinted. Slice 0 is the most inferior.
    pub fn threshold_slice(&self, index: usize, params: &GhtParams) -> ct2cxr::Result<(f64, Rgba)> {
        let o = self.volume.grid().orientation;
        let axis = o.axis_of(AxisRole::Axial);
        let index = index.min(self.axial_slices() - 1);
        let slice = self.volume.data().index_axis(Axis(axis), index).to_owned();
        let window = HuWindow::default();
        let body: Vec<f32> = slice.iter().copied().filter(|&v| v >= -100.0).collect();
        let hist = Histogram::integer_hu(window.lo, window.hi, body.iter().copied());
        let t = ght_threshold(&hist, params)?;
        // Display with anterior at the top: rows follow the coronal axis.
        let (s_axis, c_axis) = (o.axis_of(AxisRole::Sagittal), o.axis_of(AxisRole::Coronal));
        let oriented = if s_axis < c_axis { slice.t().to_owned() } else { slice };
        let shown = oriented.mapv(|v| (((v + 1000.0) / 2000.0).clamp(0.0, 1.0) * 255.0) as u8);
        let mut img = gray(&shown);
        let selected = oriented.mapv(|v| v >= -100.0 && v as f64 >= t);
        tint(&mut img, &selected, HEART, 0.5);
        Ok((t, img))
    }

    pub fn labels(&self) -> &LabelVolume {
        &self.labels
    }
}

fn js(e: ct2cxr::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Browser handle around a [`Scene`].
#[wasm_bindgen]
pub struct Demo {
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    /// Heart half-width and scoliosis amplitude are in voxels of a 256^3
    /// phantom and scale with `size`.
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, heart_half_width: f64, scoliosis_amplitude: f64) -> Result<Demo, JsError> {
        Ok(Demo {
            scene: Scene::new(size, heart_half_width, scoliosis_amplitude).map_err(js)?,
        })
    }

    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        IMAGE_SIDE
    }

    /// RGBA pseudo-radiograph; `lateral` picks the side view.
    pub fn radiograph(&mut self, lateral: bool, bone_weight: f64, equalize: bool) -> Result<Vec<u8>, JsError> {
        let view = if lateral { View::Lateral } else { View::Frontal };
        Ok(to_bytes(&gray(&self.scene.radiograph(view, bone_weight, equalize).map_err(js)?)))
    }

    /// RGBA frontal radiograph with masks and measurements drawn on top.
    pub fn overlay(&mut self, bone_weight: f64, equalize: bool) -> Result<Vec<u8>, JsError> {
        Ok(to_bytes(&self.scene.overlay(bone_weight, equalize).map_err(js)?))
    }

    /// Cardiothoracic ratio, or NaN when it cannot be measured.
    pub fn ctr(&self) -> f64 {
        self.scene.ctr().map_or(f64::NAN, |m| m.ctr)
    }

    /// Spine-center distance in pixels, or NaN.
    pub fn scd(&self) -> f64 {
        self.scene.scd().map_or(f64::NAN, |m| m.scd)
    }

    #[wasm_bindgen(getter)]
    pub fn slices(&self) -> usize {
        self.scene.axial_slices()
    }

    /// Threshold of one axial slice; `nu = Infinity, tau = 0` is Otsu.
    pub fn slice_threshold(&self, index: usize, nu: f64, tau: f64, kappa: f64, omega: f64) -> Result<f64, JsError> {
        let p = GhtParams { nu, tau, kappa, omega };
        Ok(self.scene.threshold_slice(index, &p).map_err(js)?.0)
    }

    /// RGBA slice with the above-threshold body voxels tinted.
    pub fn slice_image(&self, index: usize, nu: f64, tau: f64, kappa: f64, omega: f64) -> Result<Vec<u8>, JsError> {
        let p = GhtParams { nu, tau, kappa, omega };
        Ok(to_bytes(&self.scene.threshold_slice(index, &p).map_err(js)?.1))
    }
}
