use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance.
    Student,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Two-sample t-test of `pos` against `neg`; positive `t` means `pos` is larger.
pub fn t_test(pos: &[f64], neg: &[f64], kind: TTestKind) -> Result<TTest> {
    for g in [pos, neg] {
        if g.len() < 2 {
            return Err(Error::InsufficientCohort { needed: 2, found: g.len() });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite sample value".into()));
        }
    }
    let (n1, n2) = (pos.len() as f64, neg.len() as f64);
    let ((m1, v1), (m2, v2)) = (mean_var(pos), mean_var(neg));
    let (se2, df) = match kind {
        TTestKind::Welch => {
            let (a, b) = (v1 / n1, v2 / n2);
            let se2 = a + b;
            (se2, se2 * se2 / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0)))
        }
        TTestKind::Student => {
            let df = n1 + n2 - 2.0;
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
            (pooled * (1.0 / n1 + 1.0 / n2), df)
        }
    };
    if se2 <= 0.0 {
        return Err(Error::Degenerate("both groups have zero variance".into()));
    }
    let t = (m1 - m2) / se2.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::NumericDomain(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roc {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve over the distinct scores, highest first. Scores at or above a
/// threshold are called positive. The trapezoidal area is accumulated as an
/// integer, so it equals the concordance probability with ties counted half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<Roc> {
    if scores.len() != labels.len() {
        return Err(Error::Argument(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Argument("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count() as u128;
    let n_neg = labels.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("ROC needs both label values".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp, mut twice_area) = (0u128, 0u128, 0u128);
    for group in order.chunk_by(|&a, &b| scores[a] == scores[b]) {
        let gp = group.iter().filter(|&&i| labels[i]).count() as u128;
        let gn = group.len() as u128 - gp;
        twice_area += gn * (2 * tp + gp);
        tp += gp;
        fp += gn;
        points.push(RocPoint {
            threshold: scores[group[0]],
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        });
    }
    let auc = twice_area as f64 / (2 * n_pos * n_neg) as f64;
    Ok(Roc { points, auc })
}

/// One image of a biomarker cohort.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub id: String,
    pub value: f64,
    pub label: bool,
    #[serde(default)]
    pub sex: Option<String>,
    #[serde(default)]
    pub age_group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub factor: String,
    pub level: String,
    pub label: bool,
    pub n: usize,
    pub mean: f64,
    pub std: Option<f64>,
}

/// Mean and sample std of the value per label, within each sex and age group.
pub fn group_summary(rows: &[CohortRow]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(&str, String, bool), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry(("all", "all".into(), r.label)).or_default().push(r.value);
        if let Some(s) = &r.sex {
            groups.entry(("sex", s.clone(), r.label)).or_default().push(r.value);
        }
        if let Some(a) = &r.age_group {
            groups.entry(("age_group", a.clone(), r.label)).or_default().push(r.value);
        }
    }
    groups
        .into_iter()
        .map(|((factor, level, label), v)| {
            let (mean, var) = mean_var(&v);
            GroupSummary {
                factor: factor.into(),
                level,
                label,
                n: v.len(),
                mean,
                std: (v.len() > 1).then(|| var.sqrt()),
            }
        })
        .collect()
}
