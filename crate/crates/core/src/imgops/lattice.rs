use ndarray::{Array, Dimension};

/// Flat row-major view of a 2D or 3D grid, padded to three axes.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Lattice {
    pub shape: [usize; 3],
    pub active: [bool; 3],
}

impl Lattice {
    pub fn of<T, D: Dimension>(a: &Array<T, D>) -> Lattice {
        match *a.shape() {
            [r, c] => Lattice {
                shape: [r, c, 1],
                active: [true, true, false],
            },
            [x, y, z] => Lattice {
                shape: [x, y, z],
                active: [true, true, true],
            },
            ref other => panic!("masks must be 2D or 3D, got shape {other:?}"),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let z = i % self.shape[2];
        let rest = i / self.shape[2];
        [rest / self.shape[1], rest % self.shape[1], z]
    }

    #[inline]
    pub fn index(&self, p: [usize; 3]) -> usize {
        (p[0] * self.shape[1] + p[1]) * self.shape[2] + p[2]
    }

    /// `p + d` if it stays inside the grid.
    #[inline]
    pub fn offset(&self, p: [usize; 3], d: [isize; 3]) -> Option<usize> {
        let mut q = [0usize; 3];
        for a in 0..3 {
            let v = p[a] as isize + d[a];
            if v < 0 || v >= self.shape[a] as isize {
                return None;
            }
            q[a] = v as usize;
        }
        Some(self.index(q))
    }

    /// Non-zero offsets with |d_a| <= 1 on active axes; `face_only` keeps the
    /// axis-aligned ones.
    pub fn neighbours(&self, face_only: bool) -> Vec<[isize; 3]> {
        let range = |a: usize| if self.active[a] { -1isize..=1 } else { 0..=0 };
        let mut out = Vec::new();
        for dx in range(0) {
            for dy in range(1) {
                for dz in range(2) {
                    let nz = [dx, dy, dz].iter().filter(|&&d| d != 0).count();
                    if nz == 0 || (face_only && nz > 1) {
                        continue;
                    }
                    out.push([dx, dy, dz]);
                }
            }
        }
        out
    }
}

pub(crate) fn flat<D: Dimension>(a: &Array<bool, D>) -> Vec<bool> {
    a.iter().copied().collect()
}

pub(crate) fn rebuild<T, D: Dimension>(like: &Array<bool, D>, data: Vec<T>) -> Array<T, D> {
    Array::from_shape_vec(like.raw_dim(), data).expect("same element count")
}
