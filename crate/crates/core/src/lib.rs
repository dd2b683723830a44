//! Thoracic CT to pseudo-radiograph toolkit.
//!
//! Projects CT volumes and overlapping anatomical label volumes into frontal
//! and lateral 8-bit images with aligned 2D masks, derives rule-based regions,
//! filters implausible mask sets against cohort statistics, extracts the
//! cardio-thoracic ratio and spine-center distance, and scores segmentations.

pub mod archive;
pub mod biomarkers;
pub mod error;
pub mod imgops;
pub mod maskset;
pub mod metrics;
pub mod phantom;
pub mod projection;
pub mod qa;
pub mod regions;
pub mod resample;
pub mod volume;

pub use error::{Error, Result};
pub use maskset::{MaskSet2D, View};
pub use volume::{GridSpec, LabelVolume, Volume};
