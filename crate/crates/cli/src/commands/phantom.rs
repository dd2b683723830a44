use std::path::Path;

use anyhow::Context;
use ct2cxr::phantom::{generate_phantom, scoliosis_variant, PhantomSpec};
use ct2cxr::volume::{native, save_volume};
use sha2::{Digest, Sha256};

use crate::config::{hex, PipelineConfig};
use crate::manifest::{Item, Manifest, Output};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VolumeFormat {
    #[default]
    NiftiGz,
    Native,
}

impl VolumeFormat {
    fn extension(self) -> &'static str {
        match self {
            VolumeFormat::NiftiGz => "nii.gz",
            VolumeFormat::Native => "json",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhantomOptions {
    pub count: usize,
    pub size: usize,
    /// Starting spec; defaults to the standard phantom of `size`.
    pub spec: Option<PhantomSpec>,
    pub heart_half_width: Option<f64>,
    /// Heart half-width grows by this much per phantom index.
    pub heart_step: f64,
    pub scoliosis_amplitude: f64,
    pub noise_hu: f32,
    pub seed: u64,
    pub table: bool,
    pub format: VolumeFormat,
    pub prefix: String,
}

impl Default for PhantomOptions {
    fn default() -> Self {
        PhantomOptions {
            count: 1,
            size: 128,
            spec: None,
            heart_half_width: None,
            heart_step: 0.0,
            scoliosis_amplitude: 0.0,
            noise_hu: 0.0,
            seed: 0,
            table: false,
            format: VolumeFormat::NiftiGz,
            prefix: "phantom".into(),
        }
    }
}

impl PhantomOptions {
    /// Spec of the `i`-th phantom.
    pub fn spec(&self, i: usize) -> anyhow::Result<PhantomSpec> {
        let mut spec = self.spec.clone().unwrap_or_else(|| PhantomSpec::standard(self.size));
        let base = self.heart_half_width.unwrap_or(spec.heart.radii[0]);
        if self.heart_half_width.is_some() || self.heart_step != 0.0 {
            spec = spec.with_heart_half_width(base + self.heart_step * i as f64);
        }
        if self.table {
            spec = spec.with_table();
        }
        if self.noise_hu > 0.0 {
            spec = spec.with_noise(self.seed.wrapping_add(i as u64), self.noise_hu);
        }
        if self.scoliosis_amplitude != 0.0 {
            let wavelength = 2.0 * spec.spine.length();
            spec = scoliosis_variant(&spec, self.scoliosis_amplitude, wavelength)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn record(out: &Path, name: &str) -> anyhow::Result<Output> {
    let bytes = std::fs::read(out.join(name)).with_context(|| format!("reading back {name}"))?;
    Ok(Output {
        path: name.to_string(),
        sha256: hex(&Sha256::digest(bytes)),
    })
}

/// Write synthetic CT volumes with their label volumes and specs.
pub fn phantom(cfg: &PipelineConfig, opts: &PhantomOptions, out: &Path) -> anyhow::Result<Manifest> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let indices: Vec<usize> = (0..opts.count).collect();
    let results = crate::run_parallel(cfg.jobs, &indices, |&i| -> anyhow::Result<Item> {
        let name = format!("{}_{i:03}", opts.prefix);
        let mut item = Item::ok(name.clone());
        let spec = opts.spec(i)?;
        let (volume, labels) = generate_phantom(&spec)?;
        let vol_name = format!("{name}.{}", opts.format.extension());
        save_volume(&volume, out.join(&vol_name))?;
        native::save_labels(&labels, &out.join(format!("{name}.labels.json")))?;
        let spec_name = format!("{name}.spec.json");
        std::fs::write(out.join(&spec_name), serde_json::to_string_pretty(&spec)?)?;
        for n in [vol_name, format!("{name}.labels.json"), format!("{name}.labels.raw"), spec_name] {
            item.outputs.push(record(out, &n)?);
        }
        if opts.format == VolumeFormat::Native {
            item.outputs.push(record(out, &format!("{name}.raw"))?);
        }
        Ok(item)
    })?;
    let mut m = Manifest::new("phantom", cfg.hash());
    m.items = indices
        .iter()
        .zip(results)
        .map(|(i, r)| r.unwrap_or_else(|e| Item::failed(format!("{}_{i:03}", opts.prefix), &e)))
        .collect();
    m.write(out)?;
    Ok(m)
}
