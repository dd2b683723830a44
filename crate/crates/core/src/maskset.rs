//! Named per-class 2D masks aligned to one projection.

use indexmap::IndexMap;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Frontal,
    Lateral,
}

impl View {
    pub const BOTH: [View; 2] = [View::Frontal, View::Lateral];

    pub fn name(self) -> &'static str {
        match self {
            View::Frontal => "frontal",
            View::Lateral => "lateral",
        }
    }

    pub fn parse(s: &str) -> Result<View> {
        match s {
            "frontal" => Ok(View::Frontal),
            "lateral" => Ok(View::Lateral),
            other => Err(Error::Argument(format!("unknown view tag {other:?}"))),
        }
    }

    pub(crate) fn expect(self, expected: View) -> Result<()> {
        if self == expected {
            Ok(())
        } else {
            Err(Error::ViewMismatch {
                expected: expected.name(),
                actual: self.name(),
            })
        }
    }
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskEntry {
    pub mask: Array2<bool>,
    /// Produced by a region rule rather than projected from labels.
    pub derived: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet2D {
    view: View,
    dims: (usize, usize),
    source_id: String,
    entries: IndexMap<String, MaskEntry>,
}

impl MaskSet2D {
    /// Empty set of masks with shape `dims = (rows, cols)`.
    pub fn new(view: View, dims: (usize, usize)) -> Self {
        MaskSet2D {
            view,
            dims,
            source_id: String::new(),
            entries: IndexMap::new(),
        }
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn set_source_id(&mut self, id: impl Into<String>) {
        self.source_id = id.into();
    }

    fn check_dims(&self, name: &str, mask: &Array2<bool>) -> Result<()> {
        if mask.dim() != self.dims {
            return Err(Error::Argument(format!(
                "mask {name:?} has shape {:?}, expected {:?}",
                mask.dim(),
                self.dims
            )));
        }
        Ok(())
    }

    /// Add a source class. Names are unique.
    pub fn insert(&mut self, name: impl Into<String>, mask: Array2<bool>) -> Result<()> {
        let name = name.into();
        self.check_dims(&name, &mask)?;
        if self.entries.contains_key(&name) {
            return Err(Error::Argument(format!("duplicate class name {name:?}")));
        }
        self.entries.insert(name, MaskEntry { mask, derived: false });
        Ok(())
    }

    /// Add or replace a derived class; source classes are never overwritten.
    pub fn insert_derived(&mut self, name: impl Into<String>, mask: Array2<bool>) -> Result<()> {
        let name = name.into();
        self.check_dims(&name, &mask)?;
        if let Some(existing) = self.entries.get_mut(&name) {
            if !existing.derived {
                return Err(Error::Argument(format!("derived class {name:?} would overwrite a source class")));
            }
            existing.mask = mask;
        } else {
            self.entries.insert(name, MaskEntry { mask, derived: true });
        }
        Ok(())
    }

    pub(crate) fn insert_entry(&mut self, name: String, entry: MaskEntry) -> Result<()> {
        self.check_dims(&name, &entry.mask)?;
        if self.entries.contains_key(&name) {
            return Err(Error::Argument(format!("duplicate class name {name:?}")));
        }
        self.entries.insert(name, entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Array2<bool>> {
        self.entries.get(name).map(|e| &e.mask)
    }

    pub fn entry(&self, name: &str) -> Option<&MaskEntry> {
        self.entries.get(name)
    }

    /// Mask that must be present and non-empty.
    pub fn require(&self, name: &str) -> Result<&Array2<bool>> {
        match self.get(name) {
            Some(m) if m.iter().any(|&b| b) => Ok(m),
            _ => Err(Error::MissingDependency(name.to_string())),
        }
    }

    /// Present and non-empty.
    pub fn has(&self, name: &str) -> bool {
        self.get(name).is_some_and(|m| m.iter().any(|&b| b))
    }

    pub fn remove(&mut self, name: &str) -> Option<MaskEntry> {
        self.entries.shift_remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MaskEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut MaskEntry)> {
        self.entries.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_entries_replace_but_never_clobber_sources() {
        let mut ms = MaskSet2D::new(View::Frontal, (2, 2));
        ms.insert("heart", Array2::from_elem((2, 2), true)).unwrap();
        assert!(ms.insert_derived("heart", Array2::from_elem((2, 2), false)).is_err());
        ms.insert_derived("zone", Array2::from_elem((2, 2), false)).unwrap();
        ms.insert_derived("zone", Array2::from_elem((2, 2), true)).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms.entry("zone").unwrap().derived);
        assert!(ms.has("zone"));
    }

    #[test]
    fn require_reports_missing_and_empty() {
        let mut ms = MaskSet2D::new(View::Lateral, (2, 2));
        ms.insert("empty", Array2::from_elem((2, 2), false)).unwrap();
        assert!(matches!(ms.require("empty"), Err(Error::MissingDependency(n)) if n == "empty"));
        assert!(matches!(ms.require("absent"), Err(Error::MissingDependency(_))));
        assert!(ms.insert("bad", Array2::from_elem((3, 2), false)).is_err());
    }
}
