use ndarray::{Array, Dimension};
use serde::{Deserialize, Serialize};

use super::lattice::{flat, rebuild, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

/// Offsets of the discrete Euclidean ball of `radius` on the active axes.
fn ball(lat: &Lattice, radius: usize) -> Vec<[isize; 3]> {
    let r = radius as isize;
    let span = |a: usize| if lat.active[a] { -r..=r } else { 0..=0 };
    let mut out = Vec::new();
    for dx in span(0) {
        for dy in span(1) {
            for dz in span(2) {
                if dx * dx + dy * dy + dz * dz <= r * r {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

fn dilate(lat: &Lattice, src: &[bool], se: &[[isize; 3]]) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    for (i, _) in src.iter().enumerate().filter(|(_, &v)| v) {
        let p = lat.coords(i);
        for &d in se {
            if let Some(j) = lat.offset(p, d) {
                out[j] = true;
            }
        }
    }
    out
}

// Outside the grid counts as background, so objects touching the border erode.
fn erode(lat: &Lattice, src: &[bool], se: &[[isize; 3]]) -> Vec<bool> {
    (0..src.len())
        .map(|i| {
            src[i] && {
                let p = lat.coords(i);
                se.iter().all(|&d| lat.offset(p, d).is_some_and(|j| src[j]))
            }
        })
        .collect()
}

/// Binary morphology with a Euclidean ball structuring element in pixel
/// space. Opening is erosion followed by dilation, closing the reverse.
pub fn morph<D: Dimension>(mask: &Array<bool, D>, op: MorphOp, radius: usize) -> Array<bool, D> {
    if radius == 0 {
        return mask.clone();
    }
    let lat = Lattice::of(mask);
    let se = ball(&lat, radius);
    let src = flat(mask);
    let out = match op {
        MorphOp::Erode => erode(&lat, &src, &se),
        MorphOp::Dilate => dilate(&lat, &src, &se),
        MorphOp::Open => dilate(&lat, &erode(&lat, &src, &se), &se),
        MorphOp::Close => erode(&lat, &dilate(&lat, &src, &se), &se),
    };
    rebuild(mask, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{s, Array2, Array3, Zip};
    use proptest::prelude::*;

    #[test]
    fn radius_zero_is_identity() {
        let mut m = Array2::from_elem((5, 5), false);
        m[[2, 2]] = true;
        m[[0, 1]] = true;
        for op in [MorphOp::Erode, MorphOp::Dilate, MorphOp::Open, MorphOp::Close] {
            assert_eq!(morph(&m, op, 0), m);
        }
    }

    #[test]
    fn single_pixel_erodes_away() {
        let mut m = Array2::from_elem((5, 5), false);
        m[[2, 2]] = true;
        assert!(morph(&m, MorphOp::Erode, 1).iter().all(|&b| !b));
    }

    #[test]
    fn ball_radius_two_in_2d_has_13_pixels() {
        let mut m = Array2::from_elem((9, 9), false);
        m[[4, 4]] = true;
        assert_eq!(morph(&m, MorphOp::Dilate, 2).iter().filter(|&&b| b).count(), 13);
        let mut v = Array3::from_elem((5, 5, 5), false);
        v[[2, 2, 2]] = true;
        assert_eq!(morph(&v, MorphOp::Dilate, 1).iter().filter(|&&b| b).count(), 7);
    }

    fn shifts_union(m: &Array2<bool>) -> Array2<bool> {
        let (r, c) = m.dim();
        Array2::from_shape_fn((r, c), |(i, j)| {
            let at = |a: i64, b: i64| a >= 0 && b >= 0 && a < r as i64 && b < c as i64 && m[[a as usize, b as usize]];
            let (i, j) = (i as i64, j as i64);
            at(i, j) || at(i - 1, j) || at(i + 1, j) || at(i, j - 1) || at(i, j + 1)
        })
    }

    fn arb_mask(r: usize, c: usize) -> impl Strategy<Value = Array2<bool>> {
        prop::collection::vec(prop::bool::weighted(0.4), r * c).prop_map(move |v| Array2::from_shape_vec((r, c), v).unwrap())
    }

    proptest! {
        #[test]
        fn dilate_r1_is_union_of_shifts(m in arb_mask(11, 13)) {
            prop_assert_eq!(morph(&m, MorphOp::Dilate, 1), shifts_union(&m));
        }

        #[test]
        fn extensive_and_anti_extensive(m in arb_mask(10, 10), r in 1usize..3) {
            let d = morph(&m, MorphOp::Dilate, r);
            let e = morph(&m, MorphOp::Erode, r);
            prop_assert!(Zip::from(&d).and(&m).all(|&o, &i| o || !i));
            prop_assert!(Zip::from(&e).and(&m).all(|&o, &i| !o || i));
        }

        #[test]
        fn open_close_idempotent(m in arb_mask(12, 12), r in 1usize..3) {
            let o = morph(&m, MorphOp::Open, r);
            prop_assert_eq!(morph(&o, MorphOp::Open, r), o);
            // Pad so closing cannot be clipped by the border.
            let mut padded = Array2::from_elem((12 + 4 * r, 12 + 4 * r), false);
            padded.slice_mut(s![2 * r..2 * r + 12, 2 * r..2 * r + 12]).assign(&m);
            let c = morph(&padded, MorphOp::Close, r);
            prop_assert_eq!(morph(&c, MorphOp::Close, r), c);
        }

        #[test]
        fn erosion_dilation_duality_on_padded_domain(m in arb_mask(10, 10), r in 1usize..3) {
            let pad = r + 1;
            let n = 10 + 2 * pad;
            let mut padded = Array2::from_elem((n, n), false);
            padded.slice_mut(s![pad..pad + 10, pad..pad + 10]).assign(&m);
            let eroded = morph(&padded, MorphOp::Erode, r);
            let dual = morph(&padded.mapv(|b| !b), MorphOp::Dilate, r).mapv(|b| !b);
            prop_assert_eq!(eroded, dual);
        }
    }
}
