mod analysis;
mod phantom;
mod qa;

use std::path::{Path, PathBuf};

use anyhow::Context;
use ct2cxr::projection::{project_masks, DrrSource};
use ct2cxr::regions::derive_regions;
use ct2cxr::volume::load_volume;
use ct2cxr::{archive, View};

use crate::config::PipelineConfig;
use crate::manifest::{write_output, Item, Manifest};
use crate::{find_labels, run_parallel, stem, unique_stems};

pub use analysis::{biomarkers, cohort, evaluate, CohortColumns, CohortReport};
pub use phantom::{phantom, PhantomOptions, VolumeFormat};
pub use qa::{qa, QaOutcome};

fn collect(command: &str, cfg: &PipelineConfig, inputs: &[PathBuf], results: Vec<anyhow::Result<Item>>) -> Manifest {
    let mut m = Manifest::new(command, cfg.hash());
    m.items = inputs
        .iter()
        .zip(results)
        .map(|(p, r)| {
            r.unwrap_or_else(|e| {
                log::error!("{}: {e:#}", p.display());
                Item::failed(p.display().to_string(), &e)
            })
        })
        .collect();
    m
}

fn project_one(cfg: &PipelineConfig, path: &Path, out: &Path, views: &[View]) -> anyhow::Result<Item> {
    let mut item = Item::ok(path.display().to_string());
    let id = stem(path);
    let volume = load_volume(path).with_context(|| format!("loading {}", path.display()))?;
    let source = DrrSource::new(&volume, &cfg.projection)?;
    let labels = if cfg.stages.masks {
        find_labels(path).transpose().context("loading labels")?
    } else {
        None
    };
    if cfg.stages.masks && labels.is_none() {
        item.warnings.push("no labels found".into());
    }
    for &view in views {
        let mut drr = source.render(view, &cfg.projection)?;
        drr.source_id = id.clone();
        item.outputs
            .push(write_output(out, &format!("{id}_{}.png", view.name()), &drr.to_png()?)?);
        if let Some(labels) = &labels {
            let mut masks = project_masks(labels, view, cfg.projection.output_size)?;
            masks.set_source_id(id.clone());
            if cfg.stages.derive_regions {
                let derived = derive_regions(&masks, &cfg.regions)?;
                masks = derived.masks;
                item.warnings.extend(derived.warnings);
            }
            item.outputs
                .push(write_output(out, &format!("{id}_{}.mska", view.name()), &archive::encode(&masks)?)?);
        }
    }
    log::info!("projected {}", path.display());
    Ok(item)
}

/// Render pseudo-radiographs (and projected label archives when labels sit
/// next to the volume) for every input volume.
pub fn project(cfg: &PipelineConfig, inputs: &[PathBuf], out: &Path, views: &[View]) -> anyhow::Result<Manifest> {
    unique_stems(inputs)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let results = run_parallel(cfg.jobs, inputs, |p| project_one(cfg, p, out, views))?;
    let m = collect("project", cfg, inputs, results);
    m.write(out)?;
    Ok(m)
}

fn derive_one(cfg: &PipelineConfig, path: &Path, out: &Path) -> anyhow::Result<Item> {
    let mut item = Item::ok(path.display().to_string());
    let masks = archive::load(path)?;
    let derived = derive_regions(&masks, &cfg.regions)?;
    item.warnings = derived.warnings;
    for w in &item.warnings {
        log::warn!("{}: {w}", path.display());
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    item.outputs.push(write_output(out, &name, &archive::encode(&derived.masks)?)?);
    Ok(item)
}

/// Add the derived anatomical regions to each archive; writes augmented
/// copies under `out`.
pub fn derive_regions_cmd(cfg: &PipelineConfig, inputs: &[PathBuf], out: &Path) -> anyhow::Result<Manifest> {
    unique_stems(inputs)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let results = run_parallel(cfg.jobs, inputs, |p| derive_one(cfg, p, out))?;
    let m = collect("derive-regions", cfg, inputs, results);
    m.write(out)?;
    Ok(m)
}
