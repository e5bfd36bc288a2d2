//! Dirichlet data on the boundary layer, its nearest-point extension to the
//! collar, and the exterior superlevel sets `L_t = {G >= t}`.

use std::fmt;
use std::sync::Arc;

use crate::domain::DiscreteDomain;
use crate::error::DomainError;
use crate::field::{IndicatorSet, ScalarField};

/// Boundary values, given either as a function of position or per cell.
#[derive(Clone)]
pub enum BoundaryValues {
    Function(Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>),
    PerCell(Vec<(usize, f64)>),
}

impl fmt::Debug for BoundaryValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryValues::Function(_) => write!(f, "Function"),
            BoundaryValues::PerCell(v) => write!(f, "PerCell({} cells)", v.len()),
        }
    }
}

impl BoundaryValues {
    pub fn function(f: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryValues::Function(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        Self::function(move |_| c)
    }

    /// `cos θ` about `center`, i.e. `x₁ / |x|` after centering.
    pub fn cos_theta(center: [f64; 2]) -> Self {
        Self::function(move |x| {
            let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
            let r = dx.hypot(dy);
            if r == 0.0 {
                0.0
            } else {
                dx / r
            }
        })
    }
}

/// `g` on the boundary layer and its extension `G` on the collar.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    values: ScalarField,
    source: Vec<usize>,
    range: (f64, f64),
}

/// Extends boundary values to every collar cell by the value of the nearest
/// boundary cell (Euclidean distance between centers, ties to the lowest index).
pub fn extend_boundary_data(
    dom: &DiscreteDomain,
    g: &BoundaryValues,
) -> Result<BoundaryData, DomainError> {
    let grid = dom.grid();
    let mut values = vec![f64::NAN; grid.len()];
    match g {
        BoundaryValues::Function(f) => {
            for &c in dom.boundary_cells() {
                values[c] = f(grid.center(c));
            }
        }
        BoundaryValues::PerCell(list) => {
            for &(c, v) in list {
                if c < values.len() && dom.is_boundary(c) {
                    values[c] = v;
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &c in dom.boundary_cells() {
        let v = values[c];
        if !v.is_finite() {
            return Err(DomainError::MissingBoundaryValue(c));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let lattice: Vec<[i64; 3]> = dom
        .boundary_cells()
        .iter()
        .map(|&b| grid.lattice(b))
        .collect();
    let mut source = vec![usize::MAX; grid.len()];
    for &b in dom.boundary_cells() {
        source[b] = b;
    }
    for c in 0..grid.len() {
        if dom.is_interior(c) {
            continue;
        }
        let b = nearest(grid.lattice(c), &lattice, dom.boundary_cells());
        source[c] = b;
        values[c] = values[b];
    }
    Ok(BoundaryData {
        values: ScalarField::from_vec(grid, values),
        source,
        range: (lo, hi),
    })
}

/// Nearest boundary cell by exact integer squared distance; `cells` is sorted
/// so the first strict minimum is the lowest index.
fn nearest(x: [i64; 3], lattice: &[[i64; 3]], cells: &[usize]) -> usize {
    let mut best = i64::MAX;
    let mut arg = cells[0];
    for (l, &b) in lattice.iter().zip(cells) {
        let d = (0..3).map(|a| (l[a] - x[a]).pow(2)).sum::<i64>();
        if d < best {
            best = d;
            arg = b;
        }
    }
    arg
}

impl BoundaryData {
    /// `g` on boundary cells, `G` on collar cells, NaN on strict-interior cells.
    pub fn values(&self) -> &ScalarField {
        &self.values
    }

    #[inline]
    pub fn value(&self, c: usize) -> f64 {
        self.values.get(c)
    }

    /// Boundary cell whose value a boundary or collar cell carries.
    pub fn source(&self, c: usize) -> Option<usize> {
        (self.source[c] != usize::MAX).then_some(self.source[c])
    }

    /// `[min g, max g]`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn is_constant(&self) -> bool {
        self.range.0 == self.range.1
    }

    /// `L_t = {G >= t}` on the collar.
    pub fn superlevel_exterior(&self, dom: &DiscreteDomain, t: f64) -> IndicatorSet {
        IndicatorSet::from_fn(dom.grid(), |c| dom.is_collar(c) && self.values.get(c) >= t)
    }

    /// Field equal to `G` on the collar and the nearest-boundary value inside.
    pub fn nearest_extension(&self, dom: &DiscreteDomain) -> ScalarField {
        let grid = dom.grid();
        let lattice: Vec<[i64; 3]> = dom
            .boundary_cells()
            .iter()
            .map(|&b| grid.lattice(b))
            .collect();
        ScalarField::from_fn(grid, |c| {
            if dom.is_collar(c) || dom.is_boundary(c) {
                self.values.get(c)
            } else {
                self.values
                    .get(nearest(grid.lattice(c), &lattice, dom.boundary_cells()))
            }
        })
    }

    /// `ω_g(r)`: largest jump of `g` between boundary cells at most `r` apart.
    pub fn modulus_of_continuity(&self, dom: &DiscreteDomain, r: f64) -> f64 {
        let cells = dom.boundary_cells();
        let grid = dom.grid();
        let mut w: f64 = 0.0;
        for (i, &p) in cells.iter().enumerate() {
            for &q in &cells[i + 1..] {
                if grid.distance(p, q) <= r {
                    w = w.max((self.value(p) - self.value(q)).abs());
                }
            }
        }
        w
    }

    /// Values of `g` attained on at least `min_cells` boundary cells.
    pub fn plateau_values(&self, dom: &DiscreteDomain, min_cells: usize) -> Vec<f64> {
        let mut vals: Vec<f64> = dom.boundary_cells().iter().map(|&c| self.value(c)).collect();
        vals.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        let mut i = 0;
        while i < vals.len() {
            let mut j = i;
            while j < vals.len() && vals[j] == vals[i] {
                j += 1;
            }
            if j - i >= min_cells {
                out.push(vals[i]);
            }
            i = j;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn constant_extends_to_constant() {
        let d = build_domain(&Shape::unit_disk(), 0.125, 4).unwrap();
        let bd = extend_boundary_data(&d, &BoundaryValues::constant(5.0)).unwrap();
        assert!(d.collar_cells().all(|c| bd.value(c) == 5.0));
        assert!(bd.is_constant());
    }

    #[test]
    fn cos_theta_extension_matches_radial_projection() {
        let h = 1.0 / 32.0;
        let d = build_domain(&Shape::unit_disk(), h, 4).unwrap();
        let bd = extend_boundary_data(&d, &BoundaryValues::cos_theta([0.0, 0.0])).unwrap();
        let omega = bd.modulus_of_continuity(&d, 2.0 * h);
        let grid = d.grid();
        for c in d.collar_cells() {
            // Only cells touching the boundary layer carry the trace.
            if !grid.face_neighbors(c).any(|q| d.is_boundary(q)) {
                continue;
            }
            let x = grid.center(c);
            let exact = x[0] / x[0].hypot(x[1]);
            assert!(
                (bd.value(c) - exact).abs() <= omega + 1e-12,
                "cell {c}: {} vs {exact}",
                bd.value(c)
            );
        }
    }

    #[test]
    fn superlevel_is_monotone_and_saturates() {
        let d = build_domain(&Shape::unit_disk(), 0.1, 4).unwrap();
        let bd = extend_boundary_data(&d, &BoundaryValues::cos_theta([0.0, 0.0])).unwrap();
        let (lo, hi) = bd.range();
        let all = bd.superlevel_exterior(&d, lo);
        assert_eq!(all.count(), d.collar_cells().count());
        assert_eq!(bd.superlevel_exterior(&d, hi + 1e-9).count(), 0);
        let mut prev = all;
        for k in 1..=20 {
            let t = lo + (hi - lo) * k as f64 / 20.0;
            let cur = bd.superlevel_exterior(&d, t);
            assert!(cur.is_subset(&prev));
            prev = cur;
        }
    }

    #[test]
    fn square_corner_tie_break_is_lowest_index() {
        let s = Shape::Rect {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        };
        let d = build_domain(&s, 0.25, 3).unwrap();
        // One value per side; corner cells take the lower/left side.
        let g = BoundaryValues::function(|x| {
            if x[1] < 0.25 {
                1.0
            } else if x[1] > 0.75 {
                3.0
            } else if x[0] < 0.25 {
                4.0
            } else {
                2.0
            }
        });
        let bd = extend_boundary_data(&d, &g).unwrap();
        let grid = d.grid();
        // Collar cell diagonal to the lower-left corner cell.
        let corner = grid.from_lattice([-1, -1, 0]).unwrap();
        let src = bd.source(corner).unwrap();
        assert_eq!(grid.lattice(src), [0, 0, 0]);
        // Equidistant candidates resolve to the lowest cell index.
        let lat = [[2, 0, 0], [0, 0, 0], [1, 1, 0]];
        assert_eq!(nearest([1, 0, 0], &lat[1..], &[3, 9]), 3);
        assert_eq!(nearest([1, 0, 0], &lat[..2], &[4, 7]), 4);
        let again = extend_boundary_data(&d, &g).unwrap();
        let bits = |f: &ScalarField| f.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(bd.values()), bits(again.values()));
    }

    #[test]
    fn missing_per_cell_value_is_reported() {
        let d = build_domain(&Shape::unit_disk(), 0.25, 3).unwrap();
        let first = d.boundary_cells()[0];
        let r = extend_boundary_data(&d, &BoundaryValues::PerCell(vec![(first, 1.0)]));
        assert!(matches!(r, Err(DomainError::MissingBoundaryValue(_))));
    }
}
