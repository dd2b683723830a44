//! Segmentation scores, Fréchet distance between Gaussians, and cohort
//! statistics.

mod distance;
mod frechet;
mod stats;

use indexmap::IndexMap;
use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskset::MaskSet2D;

pub use distance::{boundary, hausdorff, squared_distance_transform};
pub use frechet::{frechet_distance, FeatureStats};
pub use stats::{group_summary, roc_auc, t_test, CohortRow, GroupSummary, Roc, TTest, TTestKind};

/// Set sizes behind IoU and Dice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub intersection: u64,
    pub size_a: u64,
    pub size_b: u64,
}

impl Overlap {
    pub fn union(&self) -> u64 {
        self.size_a + self.size_b - self.intersection
    }

    /// `None` when both masks are empty.
    pub fn iou(&self) -> Option<f64> {
        let u = self.union();
        (u > 0).then(|| self.intersection as f64 / u as f64)
    }

    pub fn dice(&self) -> Option<f64> {
        let s = self.size_a + self.size_b;
        (s > 0).then(|| 2.0 * self.intersection as f64 / s as f64)
    }
}

fn check_dims(a: &Array2<bool>, b: &Array2<bool>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Argument(format!("mask dims differ: {:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

pub fn overlap(a: &Array2<bool>, b: &Array2<bool>) -> Result<Overlap> {
    check_dims(a, b)?;
    let (mut i, mut na, mut nb) = (0, 0, 0);
    Zip::from(a).and(b).for_each(|&x, &y| {
        i += u64::from(x && y);
        na += u64::from(x);
        nb += u64::from(y);
    });
    Ok(Overlap {
        intersection: i,
        size_a: na,
        size_b: nb,
    })
}

/// `(iou, dice)`; undefined-metric error when both masks are empty.
pub fn iou_dice(a: &Array2<bool>, b: &Array2<bool>) -> Result<(f64, f64)> {
    let o = overlap(a, b)?;
    match (o.iou(), o.dice()) {
        (Some(i), Some(d)) => Ok((i, d)),
        _ => Err(Error::UndefinedMetric("IoU/Dice of two empty masks".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub iou: Option<f64>,
    pub dice: Option<f64>,
    pub hausdorff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegScore {
    pub classes: IndexMap<String, ClassScore>,
    pub mean_iou: Option<f64>,
    pub mean_dice: Option<f64>,
    pub mean_hausdorff: Option<f64>,
    /// Classes left out of the overlap means (empty in both sets).
    pub undefined_overlap: Vec<String>,
    /// Classes left out of the Hausdorff mean (empty in either set).
    pub undefined_hausdorff: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n > 0).then(|| s / n as f64)
}

/// Per-class and mean scores over the reference taxonomy.
pub fn evaluate_masksets(pred: &MaskSet2D, gt: &MaskSet2D) -> Result<SegScore> {
    if pred.dims() != gt.dims() {
        return Err(Error::Argument(format!(
            "mask set dims differ: {:?} vs {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    let missing_in_pred: Vec<String> = gt.names().filter(|n| pred.get(n).is_none()).map(String::from).collect();
    let missing_in_gt: Vec<String> = pred.names().filter(|n| gt.get(n).is_none()).map(String::from).collect();
    if !missing_in_pred.is_empty() || !missing_in_gt.is_empty() {
        return Err(Error::TaxonomyMismatch {
            missing_in_pred,
            missing_in_gt,
        });
    }
    let mut classes = IndexMap::new();
    let (mut undefined_overlap, mut undefined_hausdorff) = (Vec::new(), Vec::new());
    for (name, g) in gt.iter() {
        let p = pred.get(name).expect("taxonomies match");
        let o = overlap(p, &g.mask)?;
        let hd = match hausdorff(p, &g.mask) {
            Ok(d) => Some(d),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        if o.iou().is_none() {
            undefined_overlap.push(name.to_string());
        }
        if hd.is_none() {
            undefined_hausdorff.push(name.to_string());
        }
        classes.insert(
            name.to_string(),
            ClassScore {
                iou: o.iou(),
                dice: o.dice(),
                hausdorff: hd,
            },
        );
    }
    Ok(SegScore {
        mean_iou: mean(classes.values().filter_map(|c| c.iou)),
        mean_dice: mean(classes.values().filter_map(|c| c.dice)),
        mean_hausdorff: mean(classes.values().filter_map(|c| c.hausdorff)),
        classes,
        undefined_overlap,
        undefined_hausdorff,
    })
}
