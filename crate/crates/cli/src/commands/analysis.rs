use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use ct2cxr::archive;
use ct2cxr::biomarkers::{extract_biomarkers, BiomarkerRecord};
use ct2cxr::metrics::{evaluate_masksets, group_summary, roc_auc, t_test, CohortRow, SegScore, TTest};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::manifest::{write_output, Item, Manifest, Output};
use crate::run_parallel;

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

/// One CSV row of biomarkers per archive.
pub fn biomarkers(cfg: &PipelineConfig, inputs: &[PathBuf], out: &Path) -> anyhow::Result<Manifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let results: Vec<anyhow::Result<BiomarkerRecord>> = run_parallel(cfg.jobs, inputs, |p| {
        let masks = archive::load(p)?;
        let mut rec = extract_biomarkers(&masks);
        if rec.image_id.is_empty() {
            rec.image_id = crate::stem(p);
        }
        Ok(rec)
    })?;
    let mut m = Manifest::new("biomarkers", cfg.hash());
    let mut rows = Vec::new();
    for (p, r) in inputs.iter().zip(results) {
        match r {
            Ok(rec) => {
                rows.push(rec);
                m.items.push(Item::ok(p.display().to_string()));
            }
            Err(e) => m.items.push(Item::failed(p.display().to_string(), &e)),
        }
    }
    m.outputs.push(write_output(out, "biomarkers.csv", &csv_bytes(&rows)?)?);
    m.write(out)?;
    Ok(m)
}

#[derive(Serialize)]
struct ClassRow<'a> {
    image: &'a str,
    class: &'a str,
    iou: Option<f64>,
    dice: Option<f64>,
    hausdorff: Option<f64>,
}

#[derive(Serialize)]
struct Evaluation<'a> {
    images: BTreeMap<&'a str, &'a SegScore>,
    mean_iou: Option<f64>,
    mean_dice: Option<f64>,
    mean_hausdorff: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Score predicted archives against reference archives with the same file
/// name. Writes `evaluation.json` and a per-class `evaluation.csv`.
pub fn evaluate(cfg: &PipelineConfig, pred: &[PathBuf], gt: &[PathBuf], out: &Path) -> anyhow::Result<Manifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let key = |p: &PathBuf| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let gt_by_name: BTreeMap<String, &PathBuf> = gt.iter().map(|p| (key(p), p)).collect();
    let results: Vec<anyhow::Result<SegScore>> = run_parallel(cfg.jobs, pred, |p| {
        let g = gt_by_name
            .get(&key(p))
            .ok_or_else(|| anyhow!("no reference archive named {}", key(p)))?;
        Ok(evaluate_masksets(&archive::load(p)?, &archive::load(g)?)?)
    })?;

    let mut m = Manifest::new("evaluate", cfg.hash());
    let names: Vec<String> = pred.iter().map(key).collect();
    let mut scored = BTreeMap::new();
    for ((p, name), r) in pred.iter().zip(&names).zip(&results) {
        match r {
            Ok(s) => {
                scored.insert(name.as_str(), s);
                m.items.push(Item::ok(p.display().to_string()));
            }
            Err(e) => m.items.push(Item::failed(p.display().to_string(), e)),
        }
    }
    let report = Evaluation {
        mean_iou: mean(scored.values().filter_map(|s| s.mean_iou)),
        mean_dice: mean(scored.values().filter_map(|s| s.mean_dice)),
        mean_hausdorff: mean(scored.values().filter_map(|s| s.mean_hausdorff)),
        images: scored,
    };
    let rows = report.images.iter().flat_map(|(image, s)| {
        s.classes.iter().map(move |(class, c)| ClassRow {
            image,
            class,
            iou: c.iou,
            dice: c.dice,
            hausdorff: c.hausdorff,
        })
    });
    m.outputs.push(write_output(out, "evaluation.csv", &csv_bytes(rows)?)?);
    m.outputs.push(write_output(
        out,
        "evaluation.json",
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?);
    m.write(out)?;
    Ok(m)
}

/// Column names in the cohort CSV.
#[derive(Clone, Debug)]
pub struct CohortColumns {
    pub id: String,
    pub value: String,
    pub label: String,
    pub sex: Option<String>,
    pub age_group: Option<String>,
    /// Label text counted as positive; otherwise 1/true/yes vs 0/false/no.
    pub positive: Option<String>,
}

impl Default for CohortColumns {
    fn default() -> Self {
        CohortColumns {
            id: "image_id".into(),
            value: "ctr".into(),
            label: "label".into(),
            sex: None,
            age_group: None,
            positive: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CohortReport {
    pub value_column: String,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Rows without a value.
    pub skipped: usize,
    pub t_test: TTest,
    pub auc: f64,
}

fn parse_label(text: &str, positive: Option<&str>) -> anyhow::Result<bool> {
    if let Some(p) = positive {
        return Ok(text == p);
    }
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        other => bail!("label {other:?} is not binary"),
    }
}

pub fn read_cohort(path: &Path, cols: &CohortColumns) -> anyhow::Result<(Vec<CohortRow>, usize)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("column {name:?} not found in {}", path.display()))
    };
    let (id, value, label) = (col(&cols.id)?, col(&cols.value)?, col(&cols.label)?);
    let sex = cols.sex.as_deref().map(col).transpose()?;
    let age = cols.age_group.as_deref().map(col).transpose()?;
    let (mut rows, mut skipped) = (Vec::new(), 0);
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let raw = rec.get(value).unwrap_or("").trim();
        if raw.is_empty() {
            skipped += 1;
            continue;
        }
        let v: f64 = raw.parse().with_context(|| format!("row {}: value {raw:?}", line + 1))?;
        if !v.is_finite() {
            bail!("row {}: non-finite value", line + 1);
        }
        rows.push(CohortRow {
            id: rec.get(id).unwrap_or("").to_string(),
            value: v,
            label: parse_label(rec.get(label).unwrap_or(""), cols.positive.as_deref()).with_context(|| format!("row {}", line + 1))?,
            sex: sex.and_then(|i| rec.get(i)).filter(|s| !s.is_empty()).map(String::from),
            age_group: age.and_then(|i| rec.get(i)).filter(|s| !s.is_empty()).map(String::from),
        });
    }
    Ok((rows, skipped))
}

/// t-test and ROC of a biomarker column against a binary label, plus group
/// summaries for distribution plots.
pub fn cohort(cfg: &PipelineConfig, table: &Path, cols: &CohortColumns, out: &Path) -> anyhow::Result<(Manifest, CohortReport)> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let (rows, skipped) = read_cohort(table, cols)?;
    let pos: Vec<f64> = rows.iter().filter(|r| r.label).map(|r| r.value).collect();
    let neg: Vec<f64> = rows.iter().filter(|r| !r.label).map(|r| r.value).collect();
    let t = t_test(&pos, &neg, cfg.cohort.test)?;
    let scores: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let labels: Vec<bool> = rows.iter().map(|r| r.label).collect();
    let roc = roc_auc(&scores, &labels)?;
    let report = CohortReport {
        value_column: cols.value.clone(),
        n_pos: pos.len(),
        n_neg: neg.len(),
        skipped,
        t_test: t,
        auc: roc.auc,
    };
    let mut m = Manifest::new("cohort", cfg.hash());
    let mut item = Item::ok(table.display().to_string());
    let outputs: [anyhow::Result<Output>; 3] = [
        write_output(out, "cohort.json", serde_json::to_string_pretty(&report)?.as_bytes()),
        write_output(out, "roc.csv", &csv_bytes(&roc.points)?),
        write_output(out, "groups.csv", &csv_bytes(group_summary(&rows))?),
    ];
    for o in outputs {
        item.outputs.push(o?);
    }
    m.items.push(item);
    m.write(out)?;
    Ok((m, report))
}
