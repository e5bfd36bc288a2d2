//! Raster domains: interior mask, boundary layer and exterior collar.

use crate::error::DomainError;
use crate::field::IndicatorSet;
use crate::grid::{components, Grid};

/// Minimum collar width; the widest stencil offset reaches two cells out.
pub const MIN_COLLAR: usize = 3;

/// Binary image used as an interior mask. Row 0 is the top image row, so
/// pixel `(col, row)` maps to cell `(col, height - 1 - row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    pub width: usize,
    pub height: usize,
    pub inside: Vec<bool>,
}

impl RasterMask {
    fn at(&self, col: i64, row_up: i64) -> bool {
        if col < 0 || row_up < 0 || col >= self.width as i64 || row_up >= self.height as i64 {
            return false;
        }
        let row = self.height - 1 - row_up as usize;
        self.inside[row * self.width + col as usize]
    }
}

/// Interior description. A cell belongs to the interior when its center lies
/// strictly inside the shape (or, for rasters, when its pixel is set).
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Ball { center: [f64; 3], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
    Cuboid { min: [f64; 3], max: [f64; 3] },
    Union(Vec<Shape>),
    Raster(RasterMask),
}

impl Shape {
    pub fn unit_disk() -> Self {
        Shape::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Disk { .. } | Shape::Rect { .. } | Shape::Raster(_) => 2,
            Shape::Ball { .. } | Shape::Cuboid { .. } => 3,
            Shape::Union(v) => v.first().map_or(2, Shape::dim),
        }
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        match self {
            Shape::Disk { center, radius } => {
                (x[0] - center[0]).hypot(x[1] - center[1]) < *radius
            }
            Shape::Ball { center, radius } => {
                let d2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                d2.sqrt() < *radius
            }
            Shape::Rect { min, max } => (0..2).all(|a| x[a] > min[a] && x[a] < max[a]),
            Shape::Cuboid { min, max } => (0..3).all(|a| x[a] > min[a] && x[a] < max[a]),
            Shape::Union(v) => v.iter().any(|s| s.contains(x)),
            Shape::Raster(_) => unreachable!("raster membership is resolved per cell"),
        }
    }

    /// Distance from an interior point to the shape boundary, when known in closed form.
    pub fn boundary_distance(&self, x: [f64; 3]) -> Option<f64> {
        match self {
            Shape::Disk { center, radius } => {
                Some((radius - (x[0] - center[0]).hypot(x[1] - center[1])).max(0.0))
            }
            Shape::Ball { center, radius } => {
                let d2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
                Some((radius - d2.sqrt()).max(0.0))
            }
            Shape::Rect { min, max } => Some(
                (0..2)
                    .map(|a| (x[a] - min[a]).min(max[a] - x[a]))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0),
            ),
            Shape::Cuboid { min, max } => Some(
                (0..3)
                    .map(|a| (x[a] - min[a]).min(max[a] - x[a]))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0),
            ),
            Shape::Union(_) | Shape::Raster(_) => None,
        }
    }

    fn bounds(&self, h: f64) -> ([f64; 3], [f64; 3]) {
        match self {
            Shape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius, 0.0],
                [center[0] + radius, center[1] + radius, 0.0],
            ),
            Shape::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
            Shape::Rect { min, max } => ([min[0], min[1], 0.0], [max[0], max[1], 0.0]),
            Shape::Cuboid { min, max } => (*min, *max),
            Shape::Union(v) => {
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for s in v {
                    let (l, u) = s.bounds(h);
                    for a in 0..3 {
                        lo[a] = lo[a].min(l[a]);
                        hi[a] = hi[a].max(u[a]);
                    }
                }
                (lo, hi)
            }
            Shape::Raster(m) => ([0.0; 3], [m.width as f64 * h, m.height as f64 * h, 0.0]),
        }
    }
}

/// Interior mask Ω on a padded box, with its boundary layer ∂Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDomain {
    grid: Grid,
    interior: Vec<bool>,
    boundary: Vec<bool>,
    interior_cells: Vec<usize>,
    boundary_cells: Vec<usize>,
    collar_width: usize,
}

impl DiscreteDomain {
    /// Builds a domain from an explicit interior mask on `grid`, which must
    /// already leave `collar_width` free cells on every side.
    pub fn from_mask(
        grid: Grid,
        interior: Vec<bool>,
        collar_width: usize,
    ) -> Result<Self, DomainError> {
        if collar_width < MIN_COLLAR {
            return Err(DomainError::CollarTooThin {
                width: collar_width,
                min: MIN_COLLAR,
            });
        }
        let interior_cells: Vec<usize> = (0..grid.len()).filter(|&c| interior[c]).collect();
        if interior_cells.is_empty() {
            return Err(DomainError::EmptyInterior { h: grid.spacing() });
        }
        let (_, n) = components(&grid, &interior, &grid.face_offsets());
        if n != 1 {
            return Err(DomainError::DisconnectedInterior { components: n });
        }
        let mut boundary = vec![false; grid.len()];
        for &c in &interior_cells {
            let faces = grid.face_offsets();
            boundary[c] = faces
                .iter()
                .any(|&o| grid.neighbor(c, o).is_none_or(|n| !interior[n]));
        }
        // A digital boundary layer is only vertex-connected where it steps diagonally.
        let (_, nb) = components(&grid, &boundary, &grid.vertex_offsets());
        if nb != 1 {
            return Err(DomainError::DisconnectedBoundary { components: nb });
        }
        let boundary_cells = (0..grid.len()).filter(|&c| boundary[c]).collect();
        Ok(Self {
            grid,
            interior,
            boundary,
            interior_cells,
            boundary_cells,
            collar_width,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn collar_width(&self) -> usize {
        self.collar_width
    }

    #[inline]
    pub fn is_interior(&self, c: usize) -> bool {
        self.interior[c]
    }

    #[inline]
    pub fn is_boundary(&self, c: usize) -> bool {
        self.boundary[c]
    }

    #[inline]
    pub fn is_collar(&self, c: usize) -> bool {
        !self.interior[c]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior cells in increasing index order.
    pub fn interior_cells(&self) -> &[usize] {
        &self.interior_cells
    }

    /// Boundary-layer cells in increasing index order.
    pub fn boundary_cells(&self) -> &[usize] {
        &self.boundary_cells
    }

    pub fn collar_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&c| !self.interior[c])
    }

    /// Ω as an indicator over the box.
    pub fn interior_set(&self) -> IndicatorSet {
        IndicatorSet::from_vec(&self.grid, self.interior.clone())
    }

    /// ∂Ω as an indicator over the box.
    pub fn boundary_set(&self) -> IndicatorSet {
        IndicatorSet::from_vec(&self.grid, self.boundary.clone())
    }

    pub fn interior_volume(&self) -> f64 {
        self.interior_cells.len() as f64 * self.grid.cell_volume()
    }
}

/// Rasterizes `shape` at spacing `h` and pads the interior's bounding box by
/// `collar` cells in every direction.
pub fn build_domain(shape: &Shape, h: f64, collar: usize) -> Result<DiscreteDomain, DomainError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(DomainError::InvalidSpacing(h));
    }
    if collar < MIN_COLLAR {
        return Err(DomainError::CollarTooThin {
            width: collar,
            min: MIN_COLLAR,
        });
    }
    let dim = shape.dim();
    let (lo, hi) = shape.bounds(h);
    let mut imin = [0i64; 3];
    let mut imax = [0i64; 3];
    for a in 0..dim {
        imin[a] = (lo[a] / h).floor() as i64 - 1;
        imax[a] = (hi[a] / h).ceil() as i64 + 1;
    }
    let inside = |l: [i64; 3]| -> bool {
        match shape {
            Shape::Raster(m) => m.at(l[0], l[1]),
            s => {
                let mut x = [0.0; 3];
                for a in 0..dim {
                    x[a] = (l[a] as f64 + 0.5) * h;
                }
                s.contains(x)
            }
        }
    };
    let mut cells = Vec::new();
    for k in imin[2]..=imax[2] {
        for j in imin[1]..=imax[1] {
            for i in imin[0]..=imax[0] {
                let l = [i, j, k];
                if inside(l) {
                    cells.push(l);
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(DomainError::EmptyInterior { h });
    }
    let mut bmin = [i64::MAX; 3];
    let mut bmax = [i64::MIN; 3];
    for l in &cells {
        for a in 0..3 {
            bmin[a] = bmin[a].min(l[a]);
            bmax[a] = bmax[a].max(l[a]);
        }
    }
    let pad = collar as i64;
    let mut origin = [0i64; 3];
    let mut dims = [1usize; 3];
    for a in 0..dim {
        origin[a] = bmin[a] - pad;
        dims[a] = (bmax[a] - bmin[a] + 1 + 2 * pad) as usize;
    }
    let grid = Grid::new(dim, dims, origin, h);
    let mut interior = vec![false; grid.len()];
    for l in cells {
        let idx = grid.from_lattice(l).expect("cell inside padded box");
        interior[idx] = true;
    }
    DiscreteDomain::from_mask(grid, interior, collar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_half_spacing() {
        let s = Shape::Rect {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        };
        let d = build_domain(&s, 0.5, 3).unwrap();
        assert_eq!(d.interior_cells().len(), 4);
        assert_eq!(d.boundary_cells().len(), 4);
        assert_eq!(d.grid().dims(), [8, 8, 1]);
    }

    #[test]
    fn unit_disk_cell_count() {
        let h = 1.0 / 32.0;
        let d = build_domain(&Shape::unit_disk(), h, 4).unwrap();
        // Direct enumeration of cell centers with |x| < 1.
        let mut expected = 0;
        for j in -40..40 {
            for i in -40..40 {
                let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if x.hypot(y) < 1.0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(d.interior_cells().len(), expected);
        let n = d.interior_cells().len() as f64;
        assert!((n - 3200.0).abs() <= 0.05 * 3200.0);
        for &c in d.boundary_cells() {
            assert!(d.grid().face_neighbors(c).any(|q| !d.is_interior(q)));
        }
    }

    #[test]
    fn two_disks_are_disconnected() {
        let s = Shape::Union(vec![
            Shape::Disk {
                center: [-1.0, 0.0],
                radius: 0.5,
            },
            Shape::Disk {
                center: [1.0, 0.0],
                radius: 0.5,
            },
        ]);
        assert_eq!(
            build_domain(&s, 0.125, 3),
            Err(DomainError::DisconnectedInterior { components: 2 })
        );
    }

    #[test]
    fn annulus_boundary_is_disconnected() {
        let h = 0.1;
        let d = build_domain(&Shape::unit_disk(), h, 3).unwrap();
        let grid = d.grid().clone();
        let mask: Vec<bool> = (0..grid.len())
            .map(|c| {
                let x = grid.center(c);
                let r = x[0].hypot(x[1]);
                r < 1.0 && r > 0.45
            })
            .collect();
        assert_eq!(
            DiscreteDomain::from_mask(grid, mask, 3),
            Err(DomainError::DisconnectedBoundary { components: 2 })
        );
    }

    #[test]
    fn rejects_thin_collar_and_empty_shape() {
        assert!(matches!(
            build_domain(&Shape::unit_disk(), 0.1, 2),
            Err(DomainError::CollarTooThin { .. })
        ));
        let tiny = Shape::Disk {
            center: [0.0, 0.0],
            radius: 0.01,
        };
        assert!(matches!(
            build_domain(&tiny, 1.0, 3),
            Err(DomainError::EmptyInterior { .. })
        ));
    }

    #[test]
    fn raster_orientation() {
        // Top row set: those pixels map to the highest cell row.
        let m = RasterMask {
            width: 3,
            height: 2,
            inside: vec![true, true, true, false, true, false],
        };
        let d = build_domain(&Shape::Raster(m), 1.0, 3).unwrap();
        assert_eq!(d.interior_cells().len(), 4);
        let top: Vec<_> = d
            .interior_cells()
            .iter()
            .filter(|&&c| d.grid().lattice(c)[1] == 1)
            .collect();
        assert_eq!(top.len(), 3);
    }

    #[test]
    fn deterministic() {
        let a = build_domain(&Shape::unit_disk(), 1.0 / 16.0, 4).unwrap();
        let b = build_domain(&Shape::unit_disk(), 1.0 / 16.0, 4).unwrap();
        assert_eq!(a, b);
    }
}
