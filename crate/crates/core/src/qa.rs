//! Plausibility filtering of projected mask sets against cohort statistics.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use ndarray::Array2;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::imgops::{connected_components, Connectivity};
use crate::maskset::MaskSet2D;

pub const REASON_AREA: &str = "area-z";
pub const REASON_CENTROID: &str = "centroid-z";
pub const REASON_RIBS: &str = "rib_count";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
}

impl Moments {
    /// Order-independent: values are sorted before summation.
    fn of(values: &[f64]) -> Option<Moments> {
        if values.len() < 2 {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        dev.sort_by(f64::total_cmp);
        let std = (dev.iter().sum::<f64>() / (n - 1.0)).sqrt();
        Some(Moments { mean, std })
    }

    /// |v - mean| / std; a zero spread compares by exact equality.
    pub fn z(&self, v: f64) -> f64 {
        if self.std == 0.0 {
            if v == self.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (v - self.mean).abs() / self.std
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    /// Fraction of cohort images in which the class is non-empty.
    pub presence: f64,
    pub present_count: usize,
    /// Present in fewer than two images: no moments.
    pub area: Option<Moments>,
    pub centroid_x: Option<Moments>,
    pub centroid_y: Option<Moments>,
    /// Modal connected-component count over images where present.
    pub expected_components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub cohort_size: usize,
    pub classes: BTreeMap<String, ClassStat>,
}

/// Normalized geometry of one non-empty mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskFeatures {
    /// Foreground fraction of the image.
    pub area: f64,
    /// Centroid column / cols.
    pub cx: f64,
    /// Centroid row / rows.
    pub cy: f64,
    /// 4-connected components.
    pub components: usize,
}

pub fn mask_features(mask: &Array2<bool>) -> Option<MaskFeatures> {
    let (rows, cols) = mask.dim();
    let (mut n, mut sr, mut sc) = (0u64, 0u64, 0u64);
    for ((r, c), &v) in mask.indexed_iter() {
        if v {
            n += 1;
            sr += r as u64;
            sc += c as u64;
        }
    }
    if n == 0 {
        return None;
    }
    Some(MaskFeatures {
        area: n as f64 / (rows * cols) as f64,
        cx: sc as f64 / n as f64 / cols as f64,
        cy: sr as f64 / n as f64 / rows as f64,
        components: connected_components(mask, Connectivity::Face).count(),
    })
}

pub fn compute_class_stats(cohort: &[MaskSet2D]) -> Result<ClassStats> {
    if cohort.len() < 2 {
        return Err(Error::InsufficientCohort {
            needed: 2,
            found: cohort.len(),
        });
    }
    let mut per_class: BTreeMap<String, Vec<MaskFeatures>> = BTreeMap::new();
    for set in cohort {
        for (name, entry) in set.iter() {
            let slot = per_class.entry(name.to_string()).or_default();
            if let Some(f) = mask_features(&entry.mask) {
                slot.push(f);
            }
        }
    }
    let classes = per_class
        .into_iter()
        .map(|(name, feats)| {
            let pick = |g: fn(&MaskFeatures) -> f64| feats.iter().map(g).collect::<Vec<_>>();
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for f in &feats {
                *counts.entry(f.components).or_default() += 1;
            }
            // Most frequent count; the smallest count wins ties.
            let expected_components = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map_or(0, |(&c, _)| c);
            let stat = ClassStat {
                presence: feats.len() as f64 / cohort.len() as f64,
                present_count: feats.len(),
                area: Moments::of(&pick(|f| f.area)),
                centroid_x: Moments::of(&pick(|f| f.cx)),
                centroid_y: Moments::of(&pick(|f| f.cy)),
                expected_components,
            };
            (name, stat)
        })
        .collect();
    Ok(ClassStats {
        cohort_size: cohort.len(),
        classes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaConfig {
    pub z_max: f64,
    pub min_rib_pairs: usize,
    /// Treat per-class z-score failures as image failures.
    pub fail_on_class_deviation: bool,
    pub rib_prefix_left: String,
    pub rib_prefix_right: String,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            z_max: 3.0,
            min_rib_pairs: 9,
            fail_on_class_deviation: true,
            rib_prefix_left: "rib_posterior_left_".into(),
            rib_prefix_right: "rib_posterior_right_".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

fn finite_or_inf<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_infinite() => s.serialize_str("inf"),
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    #[serde(serialize_with = "finite_or_inf")]
    pub z_area: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub z_centroid_x: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub z_centroid_y: Option<f64>,
    pub components: usize,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlausibilityReport {
    pub source_id: String,
    pub verdict: Verdict,
    /// Image-level failed rules, sorted and unique.
    pub failed_rules: Vec<String>,
    pub rib_pairs: usize,
    pub classes: IndexMap<String, ClassReport>,
}

impl PlausibilityReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn rib_count(masks: &MaskSet2D, prefix: &str) -> usize {
    masks
        .iter()
        .filter(|(name, e)| name.starts_with(prefix) && e.mask.iter().any(|&v| v))
        .count()
}

pub fn plausibility_check(masks: &MaskSet2D, stats: &ClassStats, cfg: &QaConfig) -> PlausibilityReport {
    let mut failed = Vec::new();
    let mut classes = IndexMap::new();
    let mut any_warn = false;
    for (name, entry) in masks.iter() {
        let (Some(stat), Some(f)) = (stats.classes.get(name), mask_features(&entry.mask)) else {
            continue;
        };
        let z = |m: &Option<Moments>, v: f64| m.as_ref().map(|m| m.z(v));
        let report_z = (z(&stat.area, f.area), z(&stat.centroid_x, f.cx), z(&stat.centroid_y, f.cy));
        let over = |v: Option<f64>| v.is_some_and(|z| z > cfg.z_max);
        let mut reasons = Vec::new();
        if over(report_z.0) {
            reasons.push(REASON_AREA.to_string());
        }
        if over(report_z.1) || over(report_z.2) {
            reasons.push(REASON_CENTROID.to_string());
        }
        let verdict = if !reasons.is_empty() {
            Verdict::Fail
        } else if stat.expected_components == 1 && f.components > 1 {
            reasons.push("components".into());
            Verdict::Warn
        } else {
            Verdict::Pass
        };
        match verdict {
            Verdict::Fail if cfg.fail_on_class_deviation => failed.extend(reasons.iter().cloned()),
            Verdict::Fail | Verdict::Warn => any_warn = true,
            Verdict::Pass => {}
        }
        classes.insert(
            name.to_string(),
            ClassReport {
                z_area: report_z.0,
                z_centroid_x: report_z.1,
                z_centroid_y: report_z.2,
                components: f.components,
                verdict,
                reasons,
            },
        );
    }
    let rib_pairs = rib_count(masks, &cfg.rib_prefix_left).min(rib_count(masks, &cfg.rib_prefix_right));
    if rib_pairs < cfg.min_rib_pairs {
        failed.push(REASON_RIBS.to_string());
    }
    failed.sort();
    failed.dedup();
    let verdict = if !failed.is_empty() {
        Verdict::Fail
    } else if any_warn {
        Verdict::Warn
    } else {
        Verdict::Pass
    };
    PlausibilityReport {
        source_id: masks.source_id().to_string(),
        verdict,
        failed_rules: failed,
        rib_pairs,
        classes,
    }
}
