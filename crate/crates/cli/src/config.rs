use std::path::Path;

use anyhow::{bail, Context};
use ct2cxr::metrics::TTestKind;
use ct2cxr::projection::ProjectionConfig;
use ct2cxr::qa::QaConfig;
use ct2cxr::regions::RegionRuleConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Optional pipeline stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stages {
    /// Project label volumes next to the images when labels are found.
    pub masks: bool,
    /// Run region derivation on freshly projected masks.
    pub derive_regions: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            masks: true,
            derive_regions: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub test: TTestKind,
}

/// Everything that influences outputs. Loaded from TOML; every field has a
/// default, so an empty file is valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub jobs: usize,
    pub stages: Stages,
    pub projection: ProjectionConfig,
    pub regions: RegionRuleConfig,
    pub qa: QaConfig,
    pub cohort: CohortConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            jobs: 1,
            stages: Stages::default(),
            projection: ProjectionConfig::default(),
            regions: RegionRuleConfig::default(),
            qa: QaConfig::default(),
            cohort: CohortConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.jobs == 0 {
            bail!("jobs must be at least 1");
        }
        self.projection.validate()?;
        self.regions.validate()?;
        Ok(())
    }

    /// SHA-256 of the serialized TOML. Parallelism is excluded since it
    /// never changes outputs.
    pub fn hash(&self) -> String {
        let canonical = PipelineConfig { jobs: 1, ..self.clone() };
        hex(&Sha256::digest(canonical.to_toml()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = PipelineConfig::default();
        cfg.projection.bone_weight = 0.5;
        cfg.qa.z_max = 2.5;
        let back = PipelineConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_ignores_jobs_but_not_thresholds() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { jobs: 8, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.projection.body_threshold = -200.0;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_toml("jobs = 0").is_err());
        assert!(PipelineConfig::from_toml("[projection]\nbone_weight = -1.0").is_err());
        assert!(PipelineConfig::from_toml("nonsense = 1").is_err());
    }
}
