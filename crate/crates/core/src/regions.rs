//! Rule-based anatomical regions derived from projected mask sets.
//!
//! All rules work row-wise on the image (row 0 is superior). Every rule
//! partitions one source mask, leaves the input classes untouched, and adds
//! its outputs as derived classes.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskset::{MaskSet2D, View};

/// Which clavicle margin marks the lower edge of the apical lung zone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClavicleMargin {
    #[default]
    Inferior,
    Superior,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionRuleConfig {
    pub bifurcation_offset_rows: usize,
    pub lung_zone_fractions: [f64; 3],
    pub apical_margin: ClavicleMargin,
    pub aorta_split: bool,
    pub classes: RegionClasses,
}

/// Source class names consumed by the rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionClasses {
    pub mediastinum: String,
    pub t4: String,
    pub heart: String,
    pub lung_right: String,
    pub lung_left: String,
    pub clavicle_right: String,
    pub clavicle_left: String,
    pub trachea: String,
    pub subdiaphragm: String,
    pub aorta: String,
}

impl Default for RegionClasses {
    fn default() -> Self {
        RegionClasses {
            mediastinum: "mediastinum".into(),
            t4: "vertebrae_T4".into(),
            heart: "heart".into(),
            lung_right: "lung_right".into(),
            lung_left: "lung_left".into(),
            clavicle_right: "clavicle_right".into(),
            clavicle_left: "clavicle_left".into(),
            trachea: "trachea".into(),
            subdiaphragm: "subdiaphragm".into(),
            aorta: "aorta".into(),
        }
    }
}

impl Default for RegionRuleConfig {
    fn default() -> Self {
        RegionRuleConfig {
            bifurcation_offset_rows: 10,
            lung_zone_fractions: [1.0 / 3.0; 3],
            apical_margin: ClavicleMargin::Inferior,
            aorta_split: true,
            classes: RegionClasses::default(),
        }
    }
}

impl RegionRuleConfig {
    pub fn validate(&self) -> Result<()> {
        let f = self.lung_zone_fractions;
        if f.iter().any(|&v| !(v > 0.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("lung zone fractions {f:?} must be positive and sum to 1")));
        }
        Ok(())
    }
}

/// Result of a rule: the augmented set plus non-fatal warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct Derived {
    pub masks: MaskSet2D,
    pub warnings: Vec<String>,
}

fn occupied_rows(mask: &Array2<bool>) -> Option<(usize, usize)> {
    let rows: Vec<usize> = mask
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(_, r)| r.iter().any(|&v| v))
        .map(|(i, _)| i)
        .collect();
    Some((*rows.first()?, *rows.last()?))
}

fn occupied_cols(mask: &Array2<bool>) -> Option<(usize, usize)> {
    occupied_rows(&mask.t().to_owned())
}

fn split_rows(mask: &Array2<bool>, upper_last: Option<usize>) -> (Array2<bool>, Array2<bool>) {
    let upper = Array2::from_shape_fn(mask.dim(), |(r, c)| mask[[r, c]] && upper_last.is_some_and(|u| r <= u));
    let lower = Zip::from(mask).and(&upper).map_collect(|&m, &u| m && !u);
    (upper, lower)
}

/// Upper mediastinum = rows down to and including the lowest T4 row.
pub fn split_mediastinum_t4(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    let mediastinum = masks.require(&cfg.classes.mediastinum)?;
    let t4 = masks.require(&cfg.classes.t4)?;
    let cut = occupied_rows(t4).map(|(_, bottom)| bottom);
    let (upper, lower) = split_rows(mediastinum, cut);
    let mut out = masks.clone();
    out.insert_derived("mediastinum_upper", upper)?;
    out.insert_derived("mediastinum_lower", lower)?;
    Ok(Derived {
        masks: out,
        warnings: Vec::new(),
    })
}

/// Lateral view: anterior = lower-mediastinum pixels at or anterior to the
/// heart's posterior boundary in the same row. Rows without heart pixels use
/// the nearest heart row (the upper one on ties).
pub fn split_mediastinum_ant_post(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    masks.view().expect(View::Lateral)?;
    // An empty lower mediastinum is legal (T4 at or below its extent).
    let lower = masks
        .get("mediastinum_lower")
        .ok_or_else(|| Error::MissingDependency("mediastinum_lower".into()))?;
    let heart = masks.require(&cfg.classes.heart)?;
    let boundary: Vec<Option<usize>> = heart.rows().into_iter().map(|row| row.iter().rposition(|&v| v)).collect();
    let heart_rows: Vec<usize> = (0..boundary.len()).filter(|&r| boundary[r].is_some()).collect();
    let nearest = |r: usize| -> usize {
        let i = heart_rows.partition_point(|&h| h < r);
        match (i.checked_sub(1).map(|j| heart_rows[j]), heart_rows.get(i).copied()) {
            (Some(a), Some(b)) => {
                if r - a <= b - r {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("required heart mask is non-empty"),
        }
    };
    let row_limit: Vec<usize> = (0..boundary.len())
        .map(|r| boundary[r].unwrap_or_else(|| boundary[nearest(r)].expect("heart row")))
        .collect();
    let anterior = Array2::from_shape_fn(lower.dim(), |(r, c)| lower[[r, c]] && c <= row_limit[r]);
    let posterior = Zip::from(lower).and(&anterior).map_collect(|&m, &a| m && !a);
    let mut out = masks.clone();
    out.insert_derived("mediastinum_anterior", anterior)?;
    out.insert_derived("mediastinum_posterior", posterior)?;
    Ok(Derived {
        masks: out,
        warnings: Vec::new(),
    })
}

/// Vertical thirds per lung plus the apical zone above the clavicle landmark.
pub fn lung_zones(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    cfg.validate()?;
    let sides = [
        ("right", &cfg.classes.lung_right, &cfg.classes.clavicle_right),
        ("left", &cfg.classes.lung_left, &cfg.classes.clavicle_left),
    ];
    for (_, lung, _) in &sides {
        masks.require(lung)?;
    }
    let [f1, f2, _] = cfg.lung_zone_fractions;
    let mut out = masks.clone();
    let mut warnings = Vec::new();
    for (side, lung_name, clavicle_name) in sides {
        let lung = masks.require(lung_name)?;
        let (top, bottom) = occupied_rows(lung).expect("required mask is non-empty");
        let h = (bottom - top + 1) as f64;
        // The small slack keeps exact fractions such as 90 * (1/3) from rounding up.
        let cut1 = top + (h * f1 - 1e-9).ceil() as usize;
        let cut2 = top + (h * (f1 + f2) - 1e-9).ceil() as usize;
        let band = |lo: usize, hi: usize| Array2::from_shape_fn(lung.dim(), |(r, c)| lung[[r, c]] && r >= lo && r < hi);
        out.insert_derived(format!("lung_{side}_upper"), band(0, cut1))?;
        out.insert_derived(format!("lung_{side}_middle"), band(cut1, cut2))?;
        out.insert_derived(format!("lung_{side}_lower"), band(cut2, usize::MAX))?;

        match masks.get(clavicle_name).and_then(occupied_rows) {
            Some((c_top, c_bottom)) => {
                let landmark = match cfg.apical_margin {
                    ClavicleMargin::Inferior => c_bottom,
                    ClavicleMargin::Superior => c_top,
                };
                out.insert_derived(format!("lung_{side}_apical"), split_rows(lung, Some(landmark)).0)?;
            }
            None => {
                let msg = format!("{clavicle_name} missing or empty; lung_{side}_apical not derived");
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }
    Ok(Derived { masks: out, warnings })
}

fn runs_in_row(row: ndarray::ArrayView1<bool>) -> usize {
    let mut runs = 0;
    let mut prev = false;
    for &v in row {
        if v && !prev {
            runs += 1;
        }
        prev = v;
    }
    runs
}

/// Row at which the airway splits: the top of the block of rows with at least
/// two runs that ends at the lowest such row. `None` for an unsplit tube.
pub fn bifurcation_row(trachea: &Array2<bool>) -> Option<usize> {
    let split: Vec<bool> = trachea.rows().into_iter().map(|r| runs_in_row(r) >= 2).collect();
    let last = split.iter().rposition(|&s| s)?;
    let mut top = last;
    while top > 0 && split[top - 1] {
        top -= 1;
    }
    Some(top)
}

/// Airway pixels from `offset` rows above the bifurcation downward.
pub fn tracheal_bifurcation(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    let trachea = masks.require(&cfg.classes.trachea)?;
    let region = match bifurcation_row(trachea) {
        Some(split) => {
            let start = split.saturating_sub(cfg.bifurcation_offset_rows);
            Array2::from_shape_fn(trachea.dim(), |(r, c)| trachea[[r, c]] && r >= start)
        }
        None => Array2::from_elem(trachea.dim(), false),
    };
    let mut out = masks.clone();
    out.insert_derived("tracheal_bifurcation", region)?;
    Ok(Derived {
        masks: out,
        warnings: Vec::new(),
    })
}

/// Frontal view: split the sub-diaphragm mask at its bounding-box centre
/// column. Image-left (low columns, patient right) goes to the right
/// hemidiaphragm; the centre column belongs to it.
pub fn hemidiaphragm_split(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    masks.view().expect(View::Frontal)?;
    let sub = masks.require(&cfg.classes.subdiaphragm)?;
    let (c0, c1) = occupied_cols(sub).expect("required mask is non-empty");
    let cut = (c0 + c1) / 2;
    let right = Array2::from_shape_fn(sub.dim(), |(r, c)| sub[[r, c]] && c <= cut);
    let left = Zip::from(sub).and(&right).map_collect(|&m, &a| m && !a);
    let mut out = masks.clone();
    out.insert_derived("hemidiaphragm_right", right)?;
    out.insert_derived("hemidiaphragm_left", left)?;
    Ok(Derived {
        masks: out,
        warnings: Vec::new(),
    })
}

/// Frontal view: aortic arch = aorta rows down to the lowest T4 row; the rest
/// splits at the arch's centre column into ascending (image left) and
/// descending limbs.
pub fn split_aorta(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    masks.view().expect(View::Frontal)?;
    let aorta = masks.require(&cfg.classes.aorta)?;
    let t4 = masks.require(&cfg.classes.t4)?;
    let cut = occupied_rows(t4).map(|(_, bottom)| bottom);
    let (arch, rest) = split_rows(aorta, cut);
    let center = occupied_cols(&arch)
        .or_else(|| occupied_cols(aorta))
        .map(|(a, b)| (a + b) / 2)
        .expect("required mask is non-empty");
    let ascending = Array2::from_shape_fn(rest.dim(), |(r, c)| rest[[r, c]] && c <= center);
    let descending = Zip::from(&rest).and(&ascending).map_collect(|&m, &a| m && !a);
    let mut out = masks.clone();
    out.insert_derived("aortic_arch", arch)?;
    out.insert_derived("aorta_ascending", ascending)?;
    out.insert_derived("aorta_descending", descending)?;
    Ok(Derived {
        masks: out,
        warnings: Vec::new(),
    })
}

type Rule = fn(&MaskSet2D, &RegionRuleConfig) -> Result<Derived>;

/// Run every rule that applies to the set's view. Missing dependencies become
/// warnings; other errors abort.
pub fn derive_regions(masks: &MaskSet2D, cfg: &RegionRuleConfig) -> Result<Derived> {
    cfg.validate()?;
    let mut rules: Vec<(&str, Rule)> = vec![("mediastinum_t4", split_mediastinum_t4)];
    match masks.view() {
        View::Lateral => rules.push(("mediastinum_ant_post", split_mediastinum_ant_post)),
        View::Frontal => {
            rules.push(("lung_zones", lung_zones));
            rules.push(("tracheal_bifurcation", tracheal_bifurcation));
            rules.push(("hemidiaphragm", hemidiaphragm_split));
            if cfg.aorta_split {
                rules.push(("aorta", split_aorta));
            }
        }
    }
    let mut current = masks.clone();
    let mut warnings = Vec::new();
    for (name, rule) in rules {
        match rule(&current, cfg) {
            Ok(d) => {
                current = d.masks;
                warnings.extend(d.warnings);
            }
            Err(Error::MissingDependency(class)) => {
                let msg = format!("{name}: skipped, missing dependency {class}");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Derived { masks: current, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rect(dims: (usize, usize), rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>) -> Array2<bool> {
        Array2::from_shape_fn(dims, |(r, c)| rows.contains(&r) && cols.contains(&c))
    }

    fn rows_of(mask: &Array2<bool>) -> Option<(usize, usize)> {
        occupied_rows(mask)
    }

    #[test]
    fn t4_cut_is_inclusive_of_the_landmark_row() {
        let mut ms = MaskSet2D::new(View::Frontal, (128, 64));
        ms.insert("mediastinum", rect((128, 64), 10..=99, 20..=40)).unwrap();
        ms.insert("vertebrae_T4", rect((128, 64), 30..=40, 28..=34)).unwrap();
        let out = split_mediastinum_t4(&ms, &RegionRuleConfig::default()).unwrap().masks;
        assert_eq!(rows_of(out.get("mediastinum_upper").unwrap()), Some((10, 40)));
        assert_eq!(rows_of(out.get("mediastinum_lower").unwrap()), Some((41, 99)));
    }

    #[test]
    fn t4_above_mediastinum_leaves_upper_empty() {
        let mut ms = MaskSet2D::new(View::Frontal, (64, 64));
        ms.insert("mediastinum", rect((64, 64), 20..=50, 20..=40)).unwrap();
        ms.insert("vertebrae_T4", rect((64, 64), 2..=8, 28..=34)).unwrap();
        let out = split_mediastinum_t4(&ms, &RegionRuleConfig::default()).unwrap().masks;
        assert!(out.get("mediastinum_upper").unwrap().iter().all(|&v| !v));
        assert_eq!(out.get("mediastinum_lower"), out.get("mediastinum"));
    }

    #[test]
    fn missing_t4_names_the_class() {
        let mut ms = MaskSet2D::new(View::Frontal, (8, 8));
        ms.insert("mediastinum", rect((8, 8), 1..=5, 1..=5)).unwrap();
        match split_mediastinum_t4(&ms, &RegionRuleConfig::default()) {
            Err(Error::MissingDependency(c)) => assert_eq!(c, "vertebrae_T4"),
            other => panic!("{other:?}"),
        }
    }

    fn lateral_set(heart: Array2<bool>) -> MaskSet2D {
        let dims = heart.dim();
        let mut ms = MaskSet2D::new(View::Lateral, dims);
        ms.insert("heart", heart).unwrap();
        ms.insert_derived("mediastinum_lower", rect(dims, 10..=50, 10..=60)).unwrap();
        ms
    }

    #[test]
    fn ant_post_split_follows_the_heart_boundary() {
        let out = split_mediastinum_ant_post(&lateral_set(rect((64, 64), 20..=40, 12..=30)), &RegionRuleConfig::default())
            .unwrap()
            .masks;
        let ant = out.get("mediastinum_anterior").unwrap();
        let post = out.get("mediastinum_posterior").unwrap();
        for r in 10..=50 {
            for c in 10..=60 {
                assert_eq!(ant[[r, c]], c <= 30, "({r}, {c})");
                assert_eq!(post[[r, c]], c > 30);
            }
        }
    }

    #[test]
    fn heart_spanning_the_depth_makes_the_row_anterior() {
        let out = split_mediastinum_ant_post(&lateral_set(rect((64, 64), 30..=30, 5..=62)), &RegionRuleConfig::default())
            .unwrap()
            .masks;
        let ant = out.get("mediastinum_anterior").unwrap();
        assert!((10..=60).all(|c| ant[[30, c]]));
    }

    #[test]
    fn heart_free_rows_take_the_nearest_boundary() {
        let mut heart = rect((64, 64), 20..=20, 10..=25);
        heart[[40, 35]] = true;
        let out = split_mediastinum_ant_post(&lateral_set(heart), &RegionRuleConfig::default())
            .unwrap()
            .masks;
        let ant = out.get("mediastinum_anterior").unwrap();
        let limit = |r: usize| (10..=60).filter(|&c| ant[[r, c]]).max().unwrap();
        assert_eq!(limit(12), 25);
        assert_eq!(limit(30), 25); // tie between rows 20 and 40
        assert_eq!(limit(31), 35);
        assert_eq!(limit(50), 35);
    }

    #[test]
    fn ant_post_rejects_frontal_input() {
        let mut frontal = MaskSet2D::new(View::Frontal, (16, 16));
        frontal.insert("heart", rect((16, 16), 2..=4, 2..=4)).unwrap();
        frontal.insert_derived("mediastinum_lower", rect((16, 16), 2..=8, 2..=8)).unwrap();
        assert_eq!(
            split_mediastinum_ant_post(&frontal, &RegionRuleConfig::default())
                .unwrap_err()
                .code(),
            "view-mismatch"
        );
    }

    #[test]
    fn lung_zone_cuts_follow_integer_thirds() {
        let mut ms = MaskSet2D::new(View::Frontal, (100, 40));
        ms.insert("lung_right", rect((100, 40), 0..=89, 2..=15)).unwrap();
        ms.insert("lung_left", rect((100, 40), 5..=14, 24..=37)).unwrap();
        let d = lung_zones(&ms, &RegionRuleConfig::default()).unwrap();
        let out = &d.masks;
        assert_eq!(rows_of(out.get("lung_right_upper").unwrap()), Some((0, 29)));
        assert_eq!(rows_of(out.get("lung_right_middle").unwrap()), Some((30, 59)));
        assert_eq!(rows_of(out.get("lung_right_lower").unwrap()), Some((60, 89)));
        // H = 10: cuts at 5 + 4 and 5 + 7.
        assert_eq!(rows_of(out.get("lung_left_upper").unwrap()), Some((5, 8)));
        assert_eq!(rows_of(out.get("lung_left_middle").unwrap()), Some((9, 11)));
        assert!(!out.has("lung_right_apical"));
        assert_eq!(d.warnings.len(), 2);
    }

    #[test]
    fn apical_zone_uses_the_configured_clavicle_margin() {
        let mut ms = MaskSet2D::new(View::Frontal, (60, 40));
        ms.insert("lung_right", rect((60, 40), 5..=50, 2..=15)).unwrap();
        ms.insert("lung_left", rect((60, 40), 5..=50, 24..=37)).unwrap();
        ms.insert("clavicle_right", rect((60, 40), 8..=11, 0..=18)).unwrap();
        let mut cfg = RegionRuleConfig::default();
        let d = lung_zones(&ms, &cfg).unwrap();
        assert_eq!(rows_of(d.masks.get("lung_right_apical").unwrap()), Some((5, 11)));
        assert!(!d.masks.has("lung_left_apical"));
        assert_eq!(d.warnings.len(), 1);
        cfg.apical_margin = ClavicleMargin::Superior;
        let d = lung_zones(&ms, &cfg).unwrap();
        assert_eq!(rows_of(d.masks.get("lung_right_apical").unwrap()), Some((5, 8)));
    }

    /// Y-shaped airway: a trunk down to `split - 1`, two diverging branches below.
    fn y_airway(split: usize) -> Array2<bool> {
        Array2::from_shape_fn((100, 60), |(r, c)| {
            if (5..split).contains(&r) {
                (27..=32).contains(&c)
            } else if (split..90).contains(&r) {
                let d = 3 + (r - split) / 2;
                (27 - d.min(25)..=27 - d.min(25) + 3).contains(&c) || (32 + d..=32 + d + 3).contains(&c)
            } else {
                false
            }
        })
    }

    #[test]
    fn bifurcation_region_starts_offset_rows_above_the_split() {
        let mut ms = MaskSet2D::new(View::Frontal, (100, 60));
        ms.insert("trachea", y_airway(60)).unwrap();
        assert_eq!(bifurcation_row(ms.get("trachea").unwrap()), Some(60));
        let out = tracheal_bifurcation(&ms, &RegionRuleConfig::default()).unwrap().masks;
        assert_eq!(rows_of(out.get("tracheal_bifurcation").unwrap()), Some((50, 89)));
        let cfg = RegionRuleConfig {
            bifurcation_offset_rows: 0,
            ..Default::default()
        };
        let out = tracheal_bifurcation(&ms, &cfg).unwrap().masks;
        assert_eq!(rows_of(out.get("tracheal_bifurcation").unwrap()), Some((60, 89)));
    }

    #[test]
    fn noise_above_the_split_is_ignored() {
        let mut airway = y_airway(60);
        airway[[20, 40]] = true;
        assert_eq!(bifurcation_row(&airway), Some(60));
    }

    #[test]
    fn straight_tube_has_no_bifurcation() {
        let mut ms = MaskSet2D::new(View::Frontal, (50, 20));
        ms.insert("trachea", rect((50, 20), 3..=45, 8..=11)).unwrap();
        let out = tracheal_bifurcation(&ms, &RegionRuleConfig::default()).unwrap().masks;
        assert!(out.get("tracheal_bifurcation").unwrap().iter().all(|&v| !v));
    }

    #[test]
    fn hemidiaphragm_cut_is_the_bbox_centre() {
        let mut ms = MaskSet2D::new(View::Frontal, (40, 100));
        ms.insert("subdiaphragm", rect((40, 100), 10..=20, 20..=79)).unwrap();
        let out = hemidiaphragm_split(&ms, &RegionRuleConfig::default()).unwrap().masks;
        let cols = |n: &str| occupied_cols(out.get(n).unwrap());
        assert_eq!(cols("hemidiaphragm_right"), Some((20, 49)));
        assert_eq!(cols("hemidiaphragm_left"), Some((50, 79)));
        let lateral = MaskSet2D::new(View::Lateral, (4, 4));
        assert_eq!(
            hemidiaphragm_split(&lateral, &RegionRuleConfig::default()).unwrap_err().code(),
            "view-mismatch"
        );
    }

    #[test]
    fn symmetric_diaphragm_halves_match() {
        let mut ms = MaskSet2D::new(View::Frontal, (30, 61));
        let disk = Array2::from_shape_fn((30, 61), |(r, c)| {
            let (dr, dc) = (r as f64 - 15.0, c as f64 - 30.0);
            dr * dr / 100.0 + dc * dc / 400.0 <= 1.0
        });
        ms.insert("subdiaphragm", disk).unwrap();
        let out = hemidiaphragm_split(&ms, &RegionRuleConfig::default()).unwrap().masks;
        let area = |n: &str| out.get(n).unwrap().iter().filter(|&&v| v).count() as i64;
        let column = (0..30).filter(|&r| out.get("subdiaphragm").unwrap()[[r, 30]]).count() as i64;
        assert!((area("hemidiaphragm_right") - area("hemidiaphragm_left")).abs() <= column);
    }

    #[test]
    fn aorta_split_partitions_into_arch_and_limbs() {
        let dims = (80, 60);
        let aorta = Array2::from_shape_fn(dims, |(r, c)| {
            (10..=14).contains(&r) && (18..=42).contains(&c)
                || (10..=50).contains(&r) && (18..=22).contains(&c)
                || (10..=70).contains(&r) && (38..=42).contains(&c)
        });
        let mut ms = MaskSet2D::new(View::Frontal, dims);
        ms.insert("aorta", aorta).unwrap();
        ms.insert("vertebrae_T4", rect(dims, 15..=20, 28..=32)).unwrap();
        let out = split_aorta(&ms, &RegionRuleConfig::default()).unwrap().masks;
        assert_eq!(rows_of(out.get("aortic_arch").unwrap()), Some((10, 20)));
        assert_eq!(occupied_cols(out.get("aorta_ascending").unwrap()), Some((18, 22)));
        assert_eq!(rows_of(out.get("aorta_descending").unwrap()), Some((21, 70)));
    }

    fn full_frontal(dims: (usize, usize)) -> MaskSet2D {
        let mut ms = MaskSet2D::new(View::Frontal, dims);
        ms.insert("mediastinum", rect(dims, 10..=50, 25..=35)).unwrap();
        ms.insert("vertebrae_T4", rect(dims, 15..=19, 28..=32)).unwrap();
        ms.insert("lung_right", rect(dims, 8..=45, 2..=26)).unwrap();
        ms.insert("lung_left", rect(dims, 8..=45, 34..=57)).unwrap();
        ms.insert("clavicle_right", rect(dims, 9..=10, 2..=26)).unwrap();
        ms.insert("clavicle_left", rect(dims, 9..=10, 34..=57)).unwrap();
        ms.insert("trachea", y_airway_small(dims)).unwrap();
        ms.insert("subdiaphragm", rect(dims, 46..=55, 4..=55)).unwrap();
        ms
    }

    fn y_airway_small(dims: (usize, usize)) -> Array2<bool> {
        Array2::from_shape_fn(dims, |(r, c)| {
            (2..20).contains(&r) && (29..=31).contains(&c) || (20..30).contains(&r) && (c == 26 || c == 34)
        })
    }

    #[test]
    fn derivation_is_idempotent_and_preserves_sources() {
        let ms = full_frontal((60, 60));
        let cfg = RegionRuleConfig::default();
        let once = derive_regions(&ms, &cfg).unwrap();
        // No aorta in this set: the aorta rule is skipped with a warning.
        assert_eq!(once.warnings.len(), 1);
        let twice = derive_regions(&once.masks, &cfg).unwrap();
        assert_eq!(once.masks, twice.masks);
        for (name, entry) in ms.iter() {
            assert_eq!(once.masks.entry(name).unwrap(), entry);
        }
        for name in [
            "mediastinum_upper",
            "lung_left_apical",
            "tracheal_bifurcation",
            "hemidiaphragm_left",
        ] {
            assert!(once.masks.entry(name).unwrap().derived, "{name}");
        }
    }

    fn arb_blob(dims: (usize, usize)) -> impl Strategy<Value = Array2<bool>> {
        prop::collection::vec(prop::bool::weighted(0.5), dims.0 * dims.1)
            .prop_map(move |v| Array2::from_shape_vec(dims, v).unwrap())
            .prop_filter("non-empty", |m| m.iter().any(|&v| v))
    }

    fn assert_partition(out: &MaskSet2D, source: &str, parts: &[&str]) -> std::result::Result<(), TestCaseError> {
        let src = out.get(source).unwrap();
        let mut cover = Array2::from_elem(src.dim(), 0u8);
        for p in parts {
            Zip::from(&mut cover).and(out.get(p).unwrap()).for_each(|n, &v| *n += v as u8);
        }
        for (n, &s) in cover.iter().zip(src.iter()) {
            prop_assert_eq!(*n, s as u8);
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn frontal_rules_partition_their_sources(
            m in arb_blob((24, 20)), t4 in arb_blob((24, 20)), lr in arb_blob((24, 20)),
            ll in arb_blob((24, 20)), tr in arb_blob((24, 20)), sd in arb_blob((24, 20)),
            ao in arb_blob((24, 20)), cr in arb_blob((24, 20)),
        ) {
            let mut ms = MaskSet2D::new(View::Frontal, (24, 20));
            for (n, mask) in [("mediastinum", m), ("vertebrae_T4", t4), ("lung_right", lr), ("lung_left", ll),
                              ("trachea", tr), ("subdiaphragm", sd), ("aorta", ao), ("clavicle_right", cr)] {
                ms.insert(n, mask).unwrap();
            }
            let out = derive_regions(&ms, &RegionRuleConfig::default()).unwrap().masks;
            assert_partition(&out, "mediastinum", &["mediastinum_upper", "mediastinum_lower"])?;
            for side in ["right", "left"] {
                let zones: Vec<String> = ["upper", "middle", "lower"].iter().map(|z| format!("lung_{side}_{z}")).collect();
                let refs: Vec<&str> = zones.iter().map(String::as_str).collect();
                assert_partition(&out, &format!("lung_{side}"), &refs)?;
            }
            assert_partition(&out, "subdiaphragm", &["hemidiaphragm_right", "hemidiaphragm_left"])?;
            assert_partition(&out, "aorta", &["aortic_arch", "aorta_ascending", "aorta_descending"])?;
            let apical = out.get("lung_right_apical").unwrap();
            prop_assert!(Zip::from(apical).and(out.get("lung_right").unwrap()).all(|&a, &l| !a || l));
            let bif = out.get("tracheal_bifurcation").unwrap();
            prop_assert!(Zip::from(bif).and(out.get("trachea").unwrap()).all(|&a, &l| !a || l));
            prop_assert_eq!(&derive_regions(&out, &RegionRuleConfig::default()).unwrap().masks, &out);
        }

        #[test]
        fn lateral_rules_partition_their_sources(m in arb_blob((20, 24)), t4 in arb_blob((20, 24)), h in arb_blob((20, 24))) {
            let mut ms = MaskSet2D::new(View::Lateral, (20, 24));
            ms.insert("mediastinum", m).unwrap();
            ms.insert("vertebrae_T4", t4).unwrap();
            ms.insert("heart", h).unwrap();
            let out = derive_regions(&ms, &RegionRuleConfig::default()).unwrap().masks;
            assert_partition(&out, "mediastinum", &["mediastinum_upper", "mediastinum_lower"])?;
            assert_partition(&out, "mediastinum_lower", &["mediastinum_anterior", "mediastinum_posterior"])?;
        }
    }
}
