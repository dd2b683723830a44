//! 2D resampling: separable Lanczos for images, nearest neighbour for masks.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LANCZOS_RADIUS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Lanczos,
    Nearest,
}

fn check_target(target: (usize, usize)) -> Result<()> {
    if target.0 == 0 || target.1 == 0 {
        return Err(Error::Argument(format!("resize target {target:?} has a zero dimension")));
    }
    Ok(())
}

/// Resize to `target = (width, height)`; the result has shape `(height, width)`.
pub fn resize_2d(image: &Array2<f64>, target: (usize, usize), kernel: Kernel) -> Result<Array2<f64>> {
    check_target(target)?;
    match kernel {
        Kernel::Nearest => resize_nearest(image, target),
        Kernel::Lanczos => {
            if image.is_empty() {
                return Err(Error::Argument("cannot resize an empty image".into()));
            }
            let (w, h) = target;
            let rows = resample_axis(image, Axis(0), h);
            Ok(resample_axis(&rows, Axis(1), w))
        }
    }
}

/// Nearest-neighbour resize for any cloneable pixel type.
pub fn resize_nearest<T: Clone>(image: &Array2<T>, target: (usize, usize)) -> Result<Array2<T>> {
    check_target(target)?;
    let (rows, cols) = image.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::Argument("cannot resize an empty image".into()));
    }
    let (w, h) = target;
    let src_index = |dst: usize, dst_n: usize, src_n: usize| ((2 * dst + 1) * src_n) / (2 * dst_n);
    Ok(Array2::from_shape_fn((h, w), |(r, c)| {
        image[[src_index(r, h, rows), src_index(c, w, cols)]].clone()
    }))
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

fn lanczos(x: f64) -> f64 {
    if x.abs() < LANCZOS_RADIUS {
        sinc(x) * sinc(x / LANCZOS_RADIUS)
    } else {
        0.0
    }
}

/// Per-output-sample (first source index, normalised weights).
fn weights(src_n: usize, dst_n: usize) -> Vec<(usize, Vec<f64>)> {
    let scale = src_n as f64 / dst_n as f64;
    // Widen the kernel when shrinking so it also acts as a low-pass filter.
    let stretch = scale.max(1.0);
    let support = LANCZOS_RADIUS * stretch;
    (0..dst_n)
        .map(|o| {
            let center = (o as f64 + 0.5) * scale - 0.5;
            let lo = ((center - support).ceil().max(0.0)) as usize;
            let hi = ((center + support).floor() as isize).min(src_n as isize - 1).max(lo as isize) as usize;
            let mut w: Vec<f64> = (lo..=hi).map(|i| lanczos((i as f64 - center) / stretch)).collect();
            let sum: f64 = w.iter().sum();
            if sum.abs() > 1e-12 {
                w.iter_mut().for_each(|v| *v /= sum);
            } else {
                // Degenerate window: fall back to the nearest sample.
                w.iter_mut().for_each(|v| *v = 0.0);
                let nearest = (center.round().max(0.0) as usize).clamp(lo, hi);
                w[nearest - lo] = 1.0;
            }
            (lo, w)
        })
        .collect()
}

fn resample_axis(image: &Array2<f64>, axis: Axis, dst_n: usize) -> Array2<f64> {
    let src_n = image.len_of(axis);
    let table = weights(src_n, dst_n);
    let mut shape = image.raw_dim();
    shape[axis.index()] = dst_n;
    let mut out = Array2::zeros(shape);
    for (lane_in, mut lane_out) in image.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        for (o, (lo, w)) in table.iter().enumerate() {
            lane_out[o] = w.iter().enumerate().map(|(j, wj)| wj * lane_in[lo + j]).sum();
        }
    }
    out
}
