//! Binary-mask primitives shared by the 2D and 3D pipelines.
//!
//! Masks are plain `ndarray` boolean arrays; every operation accepts both
//! `Array2<bool>` (rows, cols) and `Array3<bool>`.

mod components;
mod fill;
mod ght;
mod lattice;
mod morph;

use ndarray::{Array, Array2, Array3, Dimension};
use serde::{Deserialize, Serialize};

pub use components::{connected_components, largest_component, Labeling};
pub use fill::{fill_holes_2d, fill_holes_slicewise};
pub use ght::{ght_threshold, GhtParams, Histogram};
pub use morph::{morph, MorphOp};

pub type Mask2 = Array2<bool>;
pub type Mask3 = Array3<bool>;

/// Neighbourhood used for connectivity: `Face` is 4-/6-adjacency, `Full` is
/// 8-/26-adjacency.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Face,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// value >= t
    AtLeast,
    /// value <= t
    AtMost,
}

pub fn threshold<D: Dimension>(data: &Array<f32, D>, t: f32, sense: Sense) -> Array<bool, D> {
    match sense {
        Sense::AtLeast => data.mapv(|v| v >= t),
        Sense::AtMost => data.mapv(|v| v <= t),
    }
}

pub fn count<D: Dimension>(mask: &Array<bool, D>) -> usize {
    mask.iter().filter(|&&v| v).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use proptest::prelude::*;

    #[test]
    fn zero_volume_passes_minus_hundred() {
        let v = Array3::<f32>::zeros((3, 3, 3));
        assert!(threshold(&v, -100.0, Sense::AtLeast).iter().all(|&b| b));
    }

    #[test]
    fn boundary_value_is_included() {
        let v = Array3::from_elem((1, 1, 1), -100.0f32);
        assert!(threshold(&v, -100.0, Sense::AtLeast)[[0, 0, 0]]);
        assert!(threshold(&v, -100.0, Sense::AtMost)[[0, 0, 0]]);
    }

    proptest! {
        #[test]
        fn matches_elementwise_oracle(values in prop::collection::vec(-1100i32..1100, 27), t in -1100i32..1100) {
            let v = Array3::from_shape_vec((3, 3, 3), values.iter().map(|&x| x as f32).collect()).unwrap();
            let m = threshold(&v, t as f32, Sense::AtLeast);
            for (i, &x) in values.iter().enumerate() {
                prop_assert_eq!(m.as_slice().unwrap()[i], x >= t);
            }
        }

        #[test]
        fn union_of_thresholds_is_lower_threshold(values in prop::collection::vec(-50i32..50, 64), a in -60i32..60, b in -60i32..60) {
            let v = Array3::from_shape_vec((4, 4, 4), values.iter().map(|&x| x as f32).collect()).unwrap();
            let ma = threshold(&v, a as f32, Sense::AtLeast);
            let mb = threshold(&v, b as f32, Sense::AtLeast);
            let union = ndarray::Zip::from(&ma).and(&mb).map_collect(|&x, &y| x || y);
            prop_assert_eq!(union, threshold(&v, a.min(b) as f32, Sense::AtLeast));
        }
    }
}
