//! Regular cell grids in two or three dimensions.
//!
//! Cells are addressed by a linear index `i + nx * (j + ny * k)`; in 2D the
//! third extent is 1. Cell `(i, j, k)` has its center at
//! `((origin + (i, j, k)) + 0.5) * h`, so grids built from the same spacing
//! share a global lattice regardless of their extent.

/// Integer lattice offset between two cells.
pub type Offset = [i32; 3];

/// Box of cells on the global lattice with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    dims: [usize; 3],
    origin: [i64; 3],
    h: f64,
}

impl Grid {
    pub fn new(dim: usize, dims: [usize; 3], origin: [i64; 3], h: f64) -> Self {
        assert!(dim == 2 || dim == 3);
        let mut dims = dims;
        let mut origin = origin;
        if dim == 2 {
            dims[2] = 1;
            origin[2] = 0;
        }
        Self {
            dim,
            dims,
            origin,
            h,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    /// Global lattice coordinates of a cell.
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let c = self.coords(idx);
        [
            self.origin[0] + c[0] as i64,
            self.origin[1] + c[1] as i64,
            self.origin[2] + c[2] as i64,
        ]
    }

    /// Cell index for global lattice coordinates, if inside the box.
    pub fn from_lattice(&self, l: [i64; 3]) -> Option<usize> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let r = l[a] - self.origin[a];
            if r < 0 || r >= self.dims[a] as i64 {
                return None;
            }
            c[a] = r as usize;
        }
        Some(self.index(c))
    }

    pub fn center(&self, idx: usize) -> [f64; 3] {
        let l = self.lattice(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (l[a] as f64 + 0.5) * self.h;
        }
        x
    }

    #[inline]
    pub fn neighbor(&self, idx: usize, off: Offset) -> Option<usize> {
        let c = self.coords(idx);
        let mut n = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as i64 + off[a] as i64;
            if v < 0 || v >= self.dims[a] as i64 {
                return None;
            }
            n[a] = v as usize;
        }
        Some(self.index(n))
    }

    /// The `2n` unit offsets.
    pub fn face_offsets(&self) -> Vec<Offset> {
        let mut v = Vec::with_capacity(2 * self.dim);
        for a in 0..self.dim {
            let mut o = [0; 3];
            o[a] = 1;
            v.push(o);
            o[a] = -1;
            v.push(o);
        }
        v
    }

    /// All offsets with entries in `{-1, 0, 1}` except zero (8 in 2D, 26 in 3D).
    pub fn vertex_offsets(&self) -> Vec<Offset> {
        let zr = if self.dim == 3 { -1..=1 } else { 0..=0 };
        let mut v = Vec::new();
        for k in zr {
            for j in -1..=1 {
                for i in -1..=1 {
                    if (i, j, k) != (0, 0, 0) {
                        v.push([i, j, k]);
                    }
                }
            }
        }
        v
    }

    pub fn face_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_offsets()
            .into_iter()
            .filter_map(move |o| self.neighbor(idx, o))
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.center(a), self.center(b));
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
    }
}

/// Labels connected components of `mask` under the given adjacency.
/// Returns (labels, component count); cells outside the mask get `usize::MAX`.
pub fn components(grid: &Grid, mask: &[bool], offsets: &[Offset]) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; grid.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..grid.len() {
        if !mask[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(c) = stack.pop() {
            for &o in offsets {
                if let Some(n) = grid.neighbor(c, o) {
                    if mask[n] && label[n] == usize::MAX {
                        label[n] = count;
                        stack.push(n);
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_3d() {
        let g = Grid::new(3, [4, 5, 6], [-2, 0, 3], 0.5);
        for idx in 0..g.len() {
            assert_eq!(g.index(g.coords(idx)), idx);
            assert_eq!(g.from_lattice(g.lattice(idx)), Some(idx));
        }
        assert_eq!(g.center(0), [-0.75, 0.25, 1.75]);
    }

    #[test]
    fn neighbors_respect_box() {
        let g = Grid::new(2, [3, 3, 7], [0, 0, 5], 1.0);
        assert_eq!(g.dims()[2], 1);
        assert_eq!(g.neighbor(0, [-1, 0, 0]), None);
        assert_eq!(g.neighbor(4, [1, 1, 0]), Some(8));
        assert_eq!(g.face_neighbors(4).count(), 4);
        assert_eq!(g.vertex_offsets().len(), 8);
    }
}
