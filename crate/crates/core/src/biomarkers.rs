//! Cardio-thoracic ratio and spine-center distance from frontal mask sets.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskset::{MaskSet2D, View};

/// Mean foreground coordinate as `(x, y)` = `(column, row)`.
pub fn centroid(mask: &Array2<bool>) -> Result<(f64, f64)> {
    let (mut n, mut sx, mut sy) = (0u64, 0u64, 0u64);
    for ((r, c), &v) in mask.indexed_iter() {
        if v {
            n += 1;
            sx += c as u64;
            sy += r as u64;
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask("centroid of an empty mask".into()));
    }
    Ok((sx as f64 / n as f64, sy as f64 / n as f64))
}

/// Widest single-row extent, counted inclusively (outer edge to outer edge).
fn widest_row(mask: &Array2<bool>) -> usize {
    mask.rows()
        .into_iter()
        .filter_map(|row| {
            let first = row.iter().position(|&v| v)?;
            let last = row.iter().rposition(|&v| v)?;
            Some(last - first + 1)
        })
        .max()
        .unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtrMeasurement {
    pub ctr: f64,
    pub cardiac_width: usize,
    pub thoracic_width: usize,
}

/// Cardiac width over thoracic width, each the widest row of the heart mask
/// and of the union of both lung masks.
pub fn ctr(masks: &MaskSet2D) -> Result<CtrMeasurement> {
    masks.view().expect(View::Frontal)?;
    let heart = masks.require("heart")?;
    let left = masks.require("lung_left")?;
    let right = masks.require("lung_right")?;
    let lungs = ndarray::Zip::from(left).and(right).map_collect(|&a, &b| a || b);
    let cardiac_width = widest_row(heart);
    let thoracic_width = widest_row(&lungs);
    if thoracic_width == 0 {
        return Err(Error::Degenerate("zero thoracic width".into()));
    }
    Ok(CtrMeasurement {
        ctr: cardiac_width as f64 / thoracic_width as f64,
        cardiac_width,
        thoracic_width,
    })
}

/// Straight line through `point` along the unit vector `direction`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: [f64; 2],
    pub direction: [f64; 2],
}

impl Line {
    pub fn distance(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (p.0 - self.point[0], p.1 - self.point[1]);
        (dx * self.direction[1] - dy * self.direction[0]).abs()
    }
}

/// Orthogonal-regression line: through the centroid, along the principal axis.
pub fn fit_line_tls(points: &[(f64, f64)]) -> Result<Line> {
    if points.len() < 2 {
        return Err(Error::InsufficientLandmarks {
            needed: 2,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Ok(Line {
        point: [mx, my],
        direction: [theta.cos(), theta.sin()],
    })
}

pub fn is_vertebra(name: &str) -> bool {
    let Some(level) = name.strip_prefix("vertebrae_") else {
        return false;
    };
    let mut chars = level.chars();
    matches!(chars.next(), Some('C' | 'T' | 'L')) && !chars.as_str().is_empty() && chars.as_str().bytes().all(|b| b.is_ascii_digit())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScdMeasurement {
    /// Sum of orthogonal distances, in pixels of the mask set.
    pub scd: f64,
    /// `scd` divided by the image height.
    pub scd_normalized: f64,
    pub vertebra_count: usize,
    pub centerline: Line,
}

fn total_distance(points: &[(f64, f64)], line: &Line) -> f64 {
    points.iter().map(|&p| line.distance(p)).sum()
}

/// Line minimising the sum of orthogonal distances.
///
/// Some optimal line passes through two of the points (for a fixed direction
/// the cost is minimised at a median point, and rotating about it the cost is
/// piecewise concave), so all pairs are searched. Falls back to the
/// least-squares line when every point coincides.
pub fn fit_line_l1(points: &[(f64, f64)]) -> Result<Line> {
    let mut best = fit_line_tls(points)?;
    let mut best_cost = total_distance(points, &best);
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len = dx.hypot(dy);
            if len == 0.0 {
                continue;
            }
            let line = Line {
                point: [a.0, a.1],
                direction: [dx / len, dy / len],
            };
            let cost = total_distance(points, &line);
            if cost < best_cost {
                best = line;
                best_cost = cost;
            }
        }
    }
    Ok(best)
}

/// Sum of orthogonal distances from the given centres to their centerline.
pub fn scd_of_points(points: &[(f64, f64)]) -> Result<(f64, Line)> {
    let line = fit_line_l1(points)?;
    Ok((total_distance(points, &line), line))
}

/// Spine-center distance over every non-empty vertebra class.
pub fn scd(masks: &MaskSet2D) -> Result<ScdMeasurement> {
    let centers: Vec<(f64, f64)> = masks
        .iter()
        .filter(|(name, _)| is_vertebra(name))
        .filter_map(|(_, e)| centroid(&e.mask).ok())
        .collect();
    let (scd, centerline) = scd_of_points(&centers)?;
    Ok(ScdMeasurement {
        scd,
        scd_normalized: scd / masks.dims().0 as f64,
        vertebra_count: centers.len(),
        centerline,
    })
}

/// One CSV row per image. Absent metrics are empty with a reason code.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BiomarkerRecord {
    pub image_id: String,
    pub view: String,
    pub ctr: Option<f64>,
    pub cardiac_width: Option<usize>,
    pub thoracic_width: Option<usize>,
    pub ctr_reason: Option<String>,
    pub scd: Option<f64>,
    pub scd_normalized: Option<f64>,
    pub vertebra_count: usize,
    pub centerline_x: Option<f64>,
    pub centerline_y: Option<f64>,
    pub centerline_dx: Option<f64>,
    pub centerline_dy: Option<f64>,
    pub scd_reason: Option<String>,
}

pub fn extract_biomarkers(masks: &MaskSet2D) -> BiomarkerRecord {
    let mut rec = BiomarkerRecord {
        image_id: masks.source_id().to_string(),
        view: masks.view().name().to_string(),
        ..Default::default()
    };
    match ctr(masks) {
        Ok(m) => {
            rec.ctr = Some(m.ctr);
            rec.cardiac_width = Some(m.cardiac_width);
            rec.thoracic_width = Some(m.thoracic_width);
        }
        Err(e) => rec.ctr_reason = Some(e.code().to_string()),
    }
    let scd = masks.view().expect(View::Frontal).and_then(|_| scd(masks));
    match scd {
        Ok(m) => {
            rec.scd = Some(m.scd);
            rec.scd_normalized = Some(m.scd_normalized);
            rec.vertebra_count = m.vertebra_count;
            rec.centerline_x = Some(m.centerline.point[0]);
            rec.centerline_y = Some(m.centerline.point[1]);
            rec.centerline_dx = Some(m.centerline.direction[0]);
            rec.centerline_dy = Some(m.centerline.direction[1]);
        }
        Err(e) => {
            if let Error::InsufficientLandmarks { found, .. } = e {
                rec.vertebra_count = found;
            }
            rec.scd_reason = Some(e.code().to_string());
        }
    }
    rec
}
