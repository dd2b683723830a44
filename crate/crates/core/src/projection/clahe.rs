//! Contrast-limited adaptive histogram equalization (Pizer et al., 1987;
//! Zuiderveld's tile-interpolation variant) for 8-bit images.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaheParams {
    /// Tiles across (columns, rows).
    pub tiles: (usize, usize),
    /// Maximum bin height as a multiple of the uniform bin height
    /// (`area / 256`); `inf` disables clipping.
    pub clip_limit: f64,
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles: (8, 8),
            clip_limit: 4.0,
        }
    }
}

fn edges(n: usize, tiles: usize) -> Vec<usize> {
    (0..=tiles).map(|i| i * n / tiles).collect()
}

/// Mapping for one tile. A tile holding a single gray level maps to itself.
fn tile_lut(hist: &mut [u64; 256], area: u64, clip_limit: f64) -> [u8; 256] {
    let mut lut = [0u8; 256];
    if hist.iter().filter(|&&h| h > 0).count() <= 1 {
        for (i, v) in lut.iter_mut().enumerate() {
            *v = i as u8;
        }
        return lut;
    }
    if clip_limit.is_finite() {
        let limit = ((clip_limit * area as f64 / 256.0).floor() as u64).max(1);
        let mut excess = 0;
        for h in hist.iter_mut() {
            if *h > limit {
                excess += *h - limit;
                *h = limit;
            }
        }
        let (each, rest) = (excess / 256, excess % 256);
        for (i, h) in hist.iter_mut().enumerate() {
            *h += each + u64::from((i as u64) < rest);
        }
    }
    let first = hist.iter().position(|&h| h > 0);
    let cdf_min = first.map_or(0, |i| hist[i]);
    let mut cdf = 0u64;
    let span = (area - cdf_min) as f64;
    for (i, h) in hist.iter().enumerate() {
        cdf += h;
        let mapped = 255.0 * (cdf.saturating_sub(cdf_min)) as f64 / span;
        lut[i] = mapped.round().clamp(0.0, 255.0) as u8;
    }
    lut
}

/// Equalize with per-tile clipped histograms and bilinear blending of the
/// neighbouring tile mappings.
pub fn equalize_adaptive(image: &Array2<u8>, tiles: (usize, usize), clip_limit: f64) -> Array2<u8> {
    let (rows, cols) = image.dim();
    if rows == 0 || cols == 0 {
        return image.clone();
    }
    let tx = tiles.0.clamp(1, cols);
    let ty = tiles.1.clamp(1, rows);
    let col_edges = edges(cols, tx);
    let row_edges = edges(rows, ty);

    let mut luts = vec![[0u8; 256]; tx * ty];
    for j in 0..ty {
        for i in 0..tx {
            let mut hist = [0u64; 256];
            for r in row_edges[j]..row_edges[j + 1] {
                for c in col_edges[i]..col_edges[i + 1] {
                    hist[image[[r, c]] as usize] += 1;
                }
            }
            let area = ((row_edges[j + 1] - row_edges[j]) * (col_edges[i + 1] - col_edges[i])) as u64;
            luts[j * tx + i] = tile_lut(&mut hist, area, clip_limit);
        }
    }

    let centers = |e: &[usize]| -> Vec<f64> { e.windows(2).map(|w| (w[0] + w[1]) as f64 / 2.0 - 0.5).collect() };
    let cx = centers(&col_edges);
    let cy = centers(&row_edges);
    // Neighbouring tile indices and the weight of the second one.
    let bracket = |centers: &[f64], p: f64| -> (usize, usize, f64) {
        let n = centers.len();
        if p <= centers[0] {
            return (0, 0, 0.0);
        }
        if p >= centers[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let k = centers.partition_point(|&c| c <= p) - 1;
        let t = (p - centers[k]) / (centers[k + 1] - centers[k]);
        (k, k + 1, t)
    };
    let col_brackets: Vec<_> = (0..cols).map(|c| bracket(&cx, c as f64)).collect();

    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let v = image[[r, c]] as usize;
        let (j0, j1, wy) = bracket(&cy, r as f64);
        let (i0, i1, wx) = col_brackets[c];
        let at = |j: usize, i: usize| luts[j * tx + i][v] as f64;
        let top = (1.0 - wx) * at(j0, i0) + wx * at(j0, i1);
        let bottom = (1.0 - wx) * at(j1, i0) + wx * at(j1, i1);
        ((1.0 - wy) * top + wy * bottom).round().clamp(0.0, 255.0) as u8
    })
}
