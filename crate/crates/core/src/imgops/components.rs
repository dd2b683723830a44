use std::collections::VecDeque;

use ndarray::{Array, Dimension};

use super::lattice::{flat, rebuild, Lattice};
use super::Connectivity;

/// Connected-component labelling result.
///
/// Ids start at 1 and follow the scan order of each component's first
/// element; 0 marks background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling<D: Dimension> {
    pub labels: Array<u32, D>,
    /// `sizes[id - 1]` is the element count of component `id`.
    pub sizes: Vec<usize>,
}

impl<D: Dimension> Labeling<D> {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Id of the largest component; ties go to the lowest id.
    pub fn largest(&self) -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for (i, &s) in self.sizes.iter().enumerate() {
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, i as u32 + 1));
            }
        }
        best.map(|(_, id)| id)
    }
}

pub fn connected_components<D: Dimension>(mask: &Array<bool, D>, connectivity: Connectivity) -> Labeling<D> {
    let lat = Lattice::of(mask);
    let fg = flat(mask);
    let offsets = lat.neighbours(connectivity == Connectivity::Face);
    let mut labels = vec![0u32; lat.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..fg.len() {
        if !fg[seed] || labels[seed] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[seed] = id;
        queue.push_back(seed);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let p = lat.coords(i);
            for &d in &offsets {
                if let Some(j) = lat.offset(p, d) {
                    if fg[j] && labels[j] == 0 {
                        labels[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    Labeling {
        labels: rebuild(mask, labels),
        sizes,
    }
}

/// Keep only the largest connected component (face connectivity).
pub fn largest_component<D: Dimension>(mask: &Array<bool, D>) -> Array<bool, D> {
    largest_component_with(mask, Connectivity::Face)
}

pub fn largest_component_with<D: Dimension>(mask: &Array<bool, D>, connectivity: Connectivity) -> Array<bool, D> {
    let labeling = connected_components(mask, connectivity);
    match labeling.largest() {
        Some(id) => labeling.labels.mapv(|l| l == id),
        None => mask.mapv(|_| false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{s, Array2, Array3};
    use proptest::prelude::*;

    fn oracle_flood(mask: &Array3<bool>, full: bool) -> (Array3<u32>, Vec<usize>) {
        // Recursive-free DFS over explicit coordinate tuples.
        let (nx, ny, nz) = mask.dim();
        let mut lab = Array3::<u32>::zeros((nx, ny, nz));
        let mut sizes = Vec::new();
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    if !mask[[x, y, z]] || lab[[x, y, z]] != 0 {
                        continue;
                    }
                    let id = sizes.len() as u32 + 1;
                    let mut stack = vec![(x as i64, y as i64, z as i64)];
                    lab[[x, y, z]] = id;
                    let mut n = 0;
                    while let Some((a, b, c)) = stack.pop() {
                        n += 1;
                        for da in -1..=1i64 {
                            for db in -1..=1i64 {
                                for dc in -1..=1i64 {
                                    let manhattan = da.abs() + db.abs() + dc.abs();
                                    if manhattan == 0 || (!full && manhattan > 1) {
                                        continue;
                                    }
                                    let (p, q, r) = (a + da, b + db, c + dc);
                                    if p < 0 || q < 0 || r < 0 || p >= nx as i64 || q >= ny as i64 || r >= nz as i64 {
                                        continue;
                                    }
                                    let idx = [p as usize, q as usize, r as usize];
                                    if mask[idx] && lab[idx] == 0 {
                                        lab[idx] = id;
                                        stack.push((p, q, r));
                                    }
                                }
                            }
                        }
                    }
                    sizes.push(n);
                }
            }
        }
        (lab, sizes)
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = Array3::from_elem((4, 4, 4), false);
        assert_eq!(connected_components(&m, Connectivity::Face).count(), 0);
        assert_eq!(largest_component(&m), m);
    }

    #[test]
    fn two_cubes_have_exact_sizes() {
        let mut m = Array3::from_elem((10, 10, 10), false);
        m.slice_mut(s![0..2, 0..2, 0..2]).fill(true);
        m.slice_mut(s![5..8, 5..8, 5..8]).fill(true);
        let l = connected_components(&m, Connectivity::Face);
        assert_eq!(l.sizes, vec![8, 27]);
        let big = largest_component(&m);
        assert_eq!(big.iter().filter(|&&b| b).count(), 27);
        assert!(big[[6, 6, 6]] && !big[[0, 0, 0]]);
    }

    #[test]
    fn blobs_100_and_5_keep_the_big_one() {
        let mut m = Array2::from_elem((20, 20), false);
        m.slice_mut(s![0..10, 0..10]).fill(true);
        m.slice_mut(s![15, 0..5]).fill(true);
        let out = largest_component(&m);
        assert_eq!(out.iter().filter(|&&b| b).count(), 100);
        assert!(!out[[15, 0]]);
    }

    #[test]
    fn ties_go_to_first_seed_in_scan_order() {
        let mut m = Array2::from_elem((5, 5), false);
        m[[0, 4]] = true;
        m[[4, 0]] = true;
        let out = largest_component(&m);
        assert!(out[[0, 4]] && !out[[4, 0]]);
    }

    #[test]
    fn diagonal_contact_depends_on_connectivity() {
        let mut m = Array2::from_elem((2, 2), false);
        m[[0, 0]] = true;
        m[[1, 1]] = true;
        assert_eq!(connected_components(&m, Connectivity::Face).count(), 2);
        assert_eq!(connected_components(&m, Connectivity::Full).count(), 1);
    }

    fn random_mask(bits: &[bool]) -> Array3<bool> {
        Array3::from_shape_vec((16, 16, 16), bits.to_vec()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn labeling_matches_flood_fill(bits in prop::collection::vec(prop::bool::weighted(0.35), 4096), full: bool) {
            let m = random_mask(&bits);
            let conn = if full { Connectivity::Full } else { Connectivity::Face };
            let l = connected_components(&m, conn);
            let (oracle, sizes) = oracle_flood(&m, full);
            prop_assert_eq!(&l.sizes, &sizes);
            prop_assert_eq!(&l.labels, &oracle);
        }

        #[test]
        fn largest_is_idempotent_and_maximal(bits in prop::collection::vec(prop::bool::weighted(0.3), 4096)) {
            let m = random_mask(&bits);
            let once = largest_component(&m);
            prop_assert_eq!(largest_component(&once), once.clone());
            let (_, sizes) = oracle_flood(&m, false);
            let kept = once.iter().filter(|&&b| b).count();
            prop_assert_eq!(kept, sizes.iter().copied().max().unwrap_or(0));
            prop_assert!(ndarray::Zip::from(&once).and(&m).all(|&o, &i| !o || i));
        }
    }
}
