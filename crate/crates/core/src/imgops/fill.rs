use ndarray::{Array2, Array3, Axis};

/// Turn every background region not 4-connected to the image border into
/// foreground.
pub fn fill_holes_2d(mask: &Array2<bool>) -> Array2<bool> {
    let (rows, cols) = mask.dim();
    let mut outside = Array2::from_elem((rows, cols), false);
    let mut stack = Vec::new();
    let seed = |r: usize, c: usize, outside: &mut Array2<bool>, stack: &mut Vec<(usize, usize)>| {
        if !mask[[r, c]] && !outside[[r, c]] {
            outside[[r, c]] = true;
            stack.push((r, c));
        }
    };
    for r in 0..rows {
        seed(r, 0, &mut outside, &mut stack);
        seed(r, cols - 1, &mut outside, &mut stack);
    }
    for c in 0..cols {
        seed(0, c, &mut outside, &mut stack);
        seed(rows - 1, c, &mut outside, &mut stack);
    }
    while let Some((r, c)) = stack.pop() {
        let mut visit = |rr: usize, cc: usize| {
            if !mask[[rr, cc]] && !outside[[rr, cc]] {
                outside[[rr, cc]] = true;
                stack.push((rr, cc));
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < rows {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < cols {
            visit(r, c + 1);
        }
    }
    outside.mapv(|o| !o)
}

/// Fill holes independently in every slice perpendicular to `axis`.
pub fn fill_holes_slicewise(mask: &Array3<bool>, axis: usize) -> Array3<bool> {
    assert!(axis < 3, "axis {axis} out of range for a 3D mask");
    let mut out = mask.clone();
    for mut slice in out.axis_iter_mut(Axis(axis)) {
        let filled = fill_holes_2d(&slice.to_owned());
        slice.assign(&filled);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;
    use proptest::prelude::*;

    #[test]
    fn solid_square_unchanged() {
        let mut m = Array2::from_elem((8, 8), false);
        m.slice_mut(s![2..6, 2..6]).fill(true);
        assert_eq!(fill_holes_2d(&m), m);
    }

    #[test]
    fn ring_becomes_square() {
        let mut ring = Array2::from_elem((8, 8), false);
        ring.slice_mut(s![1..7, 1..7]).fill(true);
        ring.slice_mut(s![2..6, 2..6]).fill(false);
        let mut square = Array2::from_elem((8, 8), false);
        square.slice_mut(s![1..7, 1..7]).fill(true);
        assert_eq!(fill_holes_2d(&ring), square);
    }

    #[test]
    fn slicewise_respects_axis() {
        // A ring in every axial (z) slice; along x the slices are open bars.
        let mut m = Array3::from_elem((6, 6, 3), false);
        m.slice_mut(s![1..5, 1..5, ..]).fill(true);
        m.slice_mut(s![2..4, 2..4, ..]).fill(false);
        let axial = fill_holes_slicewise(&m, 2);
        assert!(axial.slice(s![1..5, 1..5, ..]).iter().all(|&b| b));
        assert_eq!(fill_holes_slicewise(&m, 0), m);
    }

    /// Complement of the background reachable from the border, via an
    /// independent breadth-first search on coordinates.
    fn oracle(mask: &Array2<bool>) -> Array2<bool> {
        let (r, c) = mask.dim();
        let mut reached = vec![vec![false; c]; r];
        let mut queue = std::collections::VecDeque::new();
        for i in 0..r {
            for j in 0..c {
                if (i == 0 || j == 0 || i == r - 1 || j == c - 1) && !mask[[i, j]] {
                    reached[i][j] = true;
                    queue.push_back((i as i32, j as i32));
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            for (di, dj) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                let (a, b) = (i + di, j + dj);
                if a >= 0 && b >= 0 && a < r as i32 && b < c as i32 {
                    let (a, b) = (a as usize, b as usize);
                    if !mask[[a, b]] && !reached[a][b] {
                        reached[a][b] = true;
                        queue.push_back((a as i32, b as i32));
                    }
                }
            }
        }
        Array2::from_shape_fn((r, c), |(i, j)| !reached[i][j])
    }

    proptest! {
        #[test]
        fn matches_border_flood_oracle(bits in prop::collection::vec(prop::bool::weighted(0.5), 12 * 10)) {
            let m = Array2::from_shape_vec((12, 10), bits).unwrap();
            let f = fill_holes_2d(&m);
            prop_assert_eq!(&f, &oracle(&m));
            prop_assert_eq!(fill_holes_2d(&f), f.clone());
            prop_assert!(ndarray::Zip::from(&f).and(&m).all(|&o, &i| o || !i));
        }
    }
}
