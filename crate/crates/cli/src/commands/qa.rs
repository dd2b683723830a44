use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ct2cxr::qa::{compute_class_stats, plausibility_check, ClassStats, PlausibilityReport};
use ct2cxr::{archive, MaskSet2D, View};

use crate::config::PipelineConfig;
use crate::manifest::{write_output, Item, Manifest};
use crate::run_parallel;

pub struct QaOutcome {
    pub manifest: Manifest,
    /// In input order; failed loads have no report.
    pub reports: Vec<Option<PlausibilityReport>>,
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Cohort statistics per view, then a plausibility verdict per archive.
/// With `filter`, passing archives are copied to `out/filtered/`. `stats`
/// supplies reference statistics instead of computing them from the inputs.
pub fn qa(
    cfg: &PipelineConfig,
    inputs: &[PathBuf],
    out: &Path,
    filter: bool,
    stats: Option<&BTreeMap<View, ClassStats>>,
) -> anyhow::Result<QaOutcome> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let loaded: Vec<anyhow::Result<(MaskSet2D, Vec<u8>)>> = run_parallel(cfg.jobs, inputs, |p| {
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        Ok((archive::decode(&bytes)?, bytes))
    })?;

    let mut manifest = Manifest::new("qa", cfg.hash());
    let mut by_view: BTreeMap<View, Vec<MaskSet2D>> = BTreeMap::new();
    for r in loaded.iter().flatten() {
        by_view.entry(r.0.view()).or_default().push(r.0.clone());
    }
    let computed;
    let stats = match stats {
        Some(s) => s,
        None => {
            let mut m = BTreeMap::new();
            for (view, sets) in &by_view {
                let s = compute_class_stats(sets).with_context(|| format!("{} cohort", view.name()))?;
                let name = format!("class_stats_{}.json", view.name());
                manifest
                    .outputs
                    .push(write_output(out, &name, serde_json::to_string_pretty(&s)?.as_bytes())?);
                m.insert(*view, s);
            }
            computed = m;
            &computed
        }
    };

    let mut reports = Vec::with_capacity(inputs.len());
    for (path, r) in inputs.iter().zip(&loaded) {
        let (masks, bytes) = match r {
            Ok(v) => v,
            Err(e) => {
                log::error!("{}: {e:#}", path.display());
                manifest.items.push(Item::failed(path.display().to_string(), e));
                reports.push(None);
                continue;
            }
        };
        let mut item = Item::ok(path.display().to_string());
        let Some(view_stats) = stats.get(&masks.view()) else {
            bail!("no reference statistics for the {} view", masks.view().name());
        };
        let mut report = plausibility_check(masks, view_stats, &cfg.qa);
        if report.source_id.is_empty() {
            report.source_id = file_name(path);
        }
        if !report.passed() {
            item.warnings.push(format!("qa fail: {}", report.failed_rules.join(", ")));
        } else if filter {
            item.outputs
                .push(write_output(out, &format!("filtered/{}", file_name(path)), bytes)?);
        }
        manifest.items.push(item);
        reports.push(Some(report));
    }
    let json = serde_json::to_string_pretty(&reports.iter().flatten().collect::<Vec<_>>())?;
    manifest.outputs.push(write_output(out, "qa_reports.json", json.as_bytes())?);
    manifest.write(out)?;
    Ok(QaOutcome { manifest, reports })
}
