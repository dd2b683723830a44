use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::hex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    /// Relative to the output root.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub input: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<ItemError>,
    #[serde(default)]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Item {
    pub fn ok(input: impl Into<String>) -> Self {
        Item {
            input: input.into(),
            status: Status::Ok,
            error: None,
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn failed(input: impl Into<String>, err: &anyhow::Error) -> Self {
        let code = err.downcast_ref::<ct2cxr::Error>().map(|e| e.code()).unwrap_or("error").to_string();
        Item {
            status: Status::Error,
            error: Some(ItemError {
                code,
                message: format!("{err:#}"),
            }),
            ..Item::ok(input)
        }
    }
}

/// Record of one command run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub items: Vec<Item>,
    /// Outputs that belong to the run rather than one item.
    #[serde(default)]
    pub outputs: Vec<Output>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: String) -> Self {
        Manifest {
            tool: "ct2cxr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            items: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|i| i.status == Status::Error).count()
    }

    pub fn write(&self, out_dir: &Path) -> anyhow::Result<()> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// Write `bytes` under `out_dir` and return the manifest record.
pub fn write_output(out_dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<Output> {
    let path = out_dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(Output {
        path: name.to_string(),
        sha256: hex(&Sha256::digest(bytes)),
    })
}
