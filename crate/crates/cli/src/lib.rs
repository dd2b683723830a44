//! Batch commands behind the `ct2cxr` binary. Each command takes a config,
//! a list of inputs and an output root, and returns a manifest; per-item
//! failures are recorded rather than propagated.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ct2cxr::volume::{native, LabelVolume};
use rayon::prelude::*;

pub use config::PipelineConfig;
pub use manifest::{Item, Manifest, Status};

const EXTENSIONS: [&str; 5] = [".nii.gz", ".nii", ".labels.json", ".json", ".mska"];

/// File name without any of the known extensions.
pub fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for ext in EXTENSIONS {
        if let Some(s) = name.strip_suffix(ext) {
            return s.to_string();
        }
    }
    name
}

/// Labels stored next to a volume: `<stem>.labels.json` or a `<stem>.labels/`
/// directory of per-class NIfTI masks.
pub fn find_labels(volume: &Path) -> Option<ct2cxr::Result<LabelVolume>> {
    let dir = volume.parent().unwrap_or(Path::new("."));
    let s = stem(volume);
    let file = dir.join(format!("{s}.labels.json"));
    if file.is_file() {
        return Some(native::load_labels(&file));
    }
    let sub = dir.join(format!("{s}.labels"));
    sub.is_dir().then(|| native::load_label_dir(&sub))
}

/// Expand directories into their matching files (sorted); plain files pass
/// through unchanged.
pub fn expand_inputs(paths: &[PathBuf], accept: impl Fn(&Path) -> bool) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && accept(f))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn is_archive(path: &Path) -> bool {
    path.to_string_lossy().ends_with(".mska")
}

/// Refuse inputs whose outputs would collide.
pub fn unique_stems(inputs: &[PathBuf]) -> anyhow::Result<()> {
    let mut seen = std::collections::BTreeMap::new();
    for p in inputs {
        if let Some(prev) = seen.insert(stem(p), p) {
            bail!("{} and {} map to the same output name", prev.display(), p.display());
        }
    }
    Ok(())
}

/// Map `f` over `items` on `jobs` threads, keeping input order.
pub fn run_parallel<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> anyhow::Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_strip_known_extensions() {
        assert_eq!(stem(Path::new("/a/ct_01.nii.gz")), "ct_01");
        assert_eq!(stem(Path::new("ct.labels.json")), "ct");
        assert_eq!(stem(Path::new("ct.json")), "ct");
        assert_eq!(stem(Path::new("x_frontal.mska")), "x_frontal");
        assert_eq!(stem(Path::new("plain")), "plain");
    }

    #[test]
    fn colliding_stems_are_refused() {
        let a = [PathBuf::from("a/x.nii"), PathBuf::from("b/x.json")];
        assert!(unique_stems(&a).is_err());
        assert!(unique_stems(&a[..1]).is_ok());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let v: Vec<usize> = (0..100).collect();
        assert_eq!(run_parallel(8, &v, |x| x * 2).unwrap(), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
