//! The family of per-level minimizers and the solution assembled from it.

use rayon::prelude::*;

use crate::boundary::BoundaryData;
use crate::domain::DiscreteDomain;
use crate::error::LevelSetError;
use crate::field::{IndicatorSet, ScalarField};
use crate::grid::components;
use crate::metric::CutMetric;
use crate::setmin::{solve_star, MinimizerPair};

/// Minimal sets on a uniform grid of levels, nested downward.
#[derive(Debug, Clone)]
pub struct LevelSetFamily {
    levels: Vec<f64>,
    pairs: Vec<MinimizerPair>,
}

/// Solves the per-level problems for `K + 1` uniform levels on `[min g, max g]`.
///
/// Constant data gives a single level. Levels are solved concurrently on the
/// current rayon pool.
pub fn build_family(
    dom: &DiscreteDomain,
    metric: &CutMetric,
    bd: &BoundaryData,
    k: usize,
) -> Result<LevelSetFamily, LevelSetError> {
    if k == 0 {
        return Err(LevelSetError::NoLevels);
    }
    let (lo, hi) = bd.range();
    let levels: Vec<f64> = if bd.is_constant() {
        vec![lo]
    } else {
        (0..=k)
            .map(|i| if i == k { hi } else { lo + (hi - lo) * i as f64 / k as f64 })
            .collect()
    };
    let pairs = levels
        .par_iter()
        .map(|&t| solve_star(dom, metric, &bd.superlevel_exterior(dom, t)))
        .collect::<Result<Vec<_>, _>>()?;
    let fam = LevelSetFamily { levels, pairs };
    fam.check_nested()?;
    Ok(fam)
}

impl LevelSetFamily {
    /// Builds a family from precomputed parts; used to probe the checkers.
    pub fn from_parts(levels: Vec<f64>, pairs: Vec<MinimizerPair>) -> Result<Self, LevelSetError> {
        if levels.is_empty() || levels.len() != pairs.len() {
            return Err(LevelSetError::NoLevels);
        }
        Ok(Self { levels, pairs })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn pair(&self, k: usize) -> &MinimizerPair {
        &self.pairs[k]
    }

    /// The chosen representative `E_{t_k}`: the maximal minimizer.
    pub fn set(&self, k: usize) -> &IndicatorSet {
        &self.pairs[k].e_max
    }

    /// `A_{t_k} = E_{t_k} ∩ Ω`.
    pub fn closure_set(&self, k: usize, dom: &DiscreteDomain) -> IndicatorSet {
        self.set(k).intersection(&dom.interior_set())
    }

    /// Replaces one representative; the family is no longer guaranteed optimal.
    pub fn replace_set(&mut self, k: usize, set: IndicatorSet) {
        self.pairs[k].e_max = set;
    }

    pub fn check_nested(&self) -> Result<(), LevelSetError> {
        for k in 1..self.len() {
            if let Some(cell) = self.set(k).first_excess(self.set(k - 1)) {
                return Err(LevelSetError::NestednessViolation {
                    lower: k - 1,
                    upper: k,
                    cell,
                });
            }
        }
        Ok(())
    }
}

/// Cells of `Ω` whose face neighbor disagrees on membership in `set`.
fn edge_cells(set: &IndicatorSet, dom: &DiscreteDomain, p: usize) -> bool {
    let inside = set.contains(p);
    dom.grid().face_neighbors(p).any(|q| set.contains(q) != inside)
}

/// Per-level deviation of `g` from the level along `∂E_t ∩ ∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValueReport {
    pub pass: bool,
    pub tolerance: f64,
    pub worst: f64,
    /// Level and cell of the worst deviation.
    pub witness: Option<(usize, usize)>,
    pub per_level: Vec<f64>,
}

pub fn check_boundary_values(
    fam: &LevelSetFamily,
    dom: &DiscreteDomain,
    bd: &BoundaryData,
    tol: f64,
) -> BoundaryValueReport {
    let per: Vec<(f64, Option<usize>)> = (0..fam.len())
        .into_par_iter()
        .map(|k| {
            let t = fam.levels()[k];
            let set = fam.set(k);
            let mut worst = (0.0, None);
            for &p in dom.boundary_cells() {
                if edge_cells(set, dom, p) {
                    let d = (bd.value(p) - t).abs();
                    if d > worst.0 {
                        worst = (d, Some(p));
                    }
                }
            }
            worst
        })
        .collect();
    let mut worst = 0.0;
    let mut witness = None;
    for (k, &(d, c)) in per.iter().enumerate() {
        if d > worst {
            worst = d;
            witness = c.map(|c| (k, c));
        }
    }
    BoundaryValueReport {
        pass: worst <= tol,
        tolerance: tol,
        worst,
        witness,
        per_level: per.into_iter().map(|(d, _)| d).collect(),
    }
}

/// Interior boundary cells of `set`: cells of `Ω \ ∂Ω` in the set with a
/// face neighbor outside it.
pub fn inner_boundary(set: &IndicatorSet, dom: &DiscreteDomain) -> Vec<usize> {
    dom.interior_cells()
        .iter()
        .copied()
        .filter(|&p| !dom.is_boundary(p) && set.contains(p) && edge_cells(set, dom, p))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub pass: bool,
    /// Level pairs skipped because a plateau value of `g` lies between them.
    pub exempt_pairs: usize,
    /// `(lower level, upper level, shared cell)` for every offending pair found.
    pub conflicts: Vec<(usize, usize, usize)>,
    /// Smallest distance between the interior boundaries of consecutive levels.
    pub adjacent_distance: Vec<Option<f64>>,
}

/// Checks that interior boundaries of distinct levels share no cell, except
/// across plateau values of the data.
pub fn check_separation(
    fam: &LevelSetFamily,
    dom: &DiscreteDomain,
    plateaus: &[f64],
) -> SeparationReport {
    let levels = fam.levels();
    let bounds: Vec<Vec<usize>> = (0..fam.len())
        .into_par_iter()
        .map(|k| inner_boundary(fam.set(k), dom))
        .collect();
    let exempt = |i: usize, j: usize| {
        levels[i] == levels[j] || plateaus.iter().any(|&v| levels[i] <= v && v <= levels[j])
    };
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); dom.len()];
    for (k, cells) in bounds.iter().enumerate() {
        for &c in cells {
            owners[c].push(k);
        }
    }
    let mut conflicts = Vec::new();
    let mut exempt_pairs = 0;
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            if exempt(i, j) {
                exempt_pairs += 1;
            }
        }
    }
    for (c, ks) in owners.iter().enumerate() {
        for (a, &i) in ks.iter().enumerate() {
            for &j in &ks[a + 1..] {
                if !exempt(i, j) {
                    conflicts.push((i, j, c));
                }
            }
        }
    }
    conflicts.sort_unstable();
    conflicts.dedup_by_key(|x| (x.0, x.1));
    let grid = dom.grid();
    let adjacent_distance = bounds
        .par_windows(2)
        .map(|w| {
            w[0].iter()
                .flat_map(|&p| w[1].iter().map(move |&q| grid.distance(p, q)))
                .min_by(f64::total_cmp)
        })
        .collect();
    SeparationReport {
        pass: conflicts.is_empty(),
        exempt_pairs,
        conflicts,
        adjacent_distance,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub pass: bool,
    pub components: usize,
    /// One cell of every component that stays away from `∂Ω`.
    pub failing: Vec<usize>,
}

/// Every face-connected piece of the interface of `set` inside `Ω` must come
/// within one face step of `∂Ω`.
pub fn check_component_reaches_boundary(set: &IndicatorSet, dom: &DiscreteDomain) -> ComponentReport {
    let grid = dom.grid();
    let mut band = vec![false; dom.len()];
    for &p in dom.interior_cells() {
        for q in grid.face_neighbors(p) {
            if dom.is_interior(q) && set.contains(p) != set.contains(q) {
                band[p] = true;
                band[q] = true;
            }
        }
    }
    let (label, n) = components(grid, &band, &grid.face_offsets());
    let mut touches = vec![false; n];
    let mut rep = vec![usize::MAX; n];
    for (c, &on) in band.iter().enumerate() {
        if !on {
            continue;
        }
        let l = label[c];
        rep[l] = rep[l].min(c);
        if dom.is_boundary(c) || grid.face_neighbors(c).any(|q| dom.is_boundary(q)) {
            touches[l] = true;
        }
    }
    let failing: Vec<usize> = (0..n).filter(|&l| !touches[l]).map(|l| rep[l]).collect();
    ComponentReport {
        pass: failing.is_empty(),
        components: n,
        failing,
    }
}

/// `u_⋆(x) = max{t_k : x ∈ E_{t_k} ∩ Ω}` inside, `G` on the collar.
pub fn assemble_solution(
    fam: &LevelSetFamily,
    dom: &DiscreteDomain,
    bd: &BoundaryData,
) -> Result<ScalarField, LevelSetError> {
    fam.check_nested()?;
    let levels = fam.levels();
    Ok(ScalarField::from_fn(dom.grid(), |c| {
        if !dom.is_interior(c) {
            return bd.value(c);
        }
        // Membership is monotone in k, so the containing levels form a prefix.
        let n = fam.pairs.partition_point(|pair| pair.e_max.contains(c));
        if n == 0 {
            levels[0]
        } else {
            levels[n - 1]
        }
    }))
}

/// First `(level, cell)` where `{u ≥ t_k} ∩ Ω` differs from `E_{t_k} ∩ Ω`.
pub fn superlevel_mismatch(
    u: &ScalarField,
    fam: &LevelSetFamily,
    dom: &DiscreteDomain,
) -> Option<(usize, usize)> {
    (0..fam.len()).find_map(|k| {
        let t = fam.levels()[k];
        dom.interior_cells()
            .iter()
            .copied()
            .find(|&c| (u.get(c) >= t) != fam.set(k).contains(c))
            .map(|c| (k, c))
    })
}

/// Largest jump of `u` across a face shared by two cells of `Ω`.
pub fn max_adjacent_jump(u: &ScalarField, dom: &DiscreteDomain) -> f64 {
    let grid = dom.grid();
    dom.interior_cells()
        .iter()
        .flat_map(|&p| {
            grid.face_neighbors(p)
                .filter(move |&q| q > p && dom.is_interior(q))
                .map(move |q| (u.get(p) - u.get(q)).abs())
        })
        .fold(0.0, f64::max)
}

/// Midpoints of faces separating `set` from its complement with at least one
/// side in `Ω`.
pub fn interface_points(set: &IndicatorSet, dom: &DiscreteDomain) -> Vec<[f64; 3]> {
    let grid = dom.grid();
    let mut out = Vec::new();
    for p in 0..dom.len() {
        for q in grid.face_neighbors(p) {
            if q > p && set.contains(p) != set.contains(q) && (dom.is_interior(p) || dom.is_interior(q)) {
                let (a, b) = (grid.center(p), grid.center(q));
                out.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{extend_boundary_data, BoundaryValues};
    use crate::domain::{build_domain, Shape};
    use crate::stencil::{CutStencil, Neighborhood};
    use crate::weight::WeightField;

    fn setup(shape: Shape, h: f64, g: BoundaryValues) -> (DiscreteDomain, CutMetric, BoundaryData) {
        let d = build_domain(&shape, h, 3).unwrap();
        let st = CutStencil::new(Neighborhood::N16, h);
        let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
        let bd = extend_boundary_data(&d, &g).unwrap();
        (d, m, bd)
    }

    #[test]
    fn constant_data_gives_one_level() {
        let (d, m, bd) = setup(Shape::unit_disk(), 0.125, BoundaryValues::constant(0.7));
        let fam = build_family(&d, &m, &bd, 8).unwrap();
        assert_eq!(fam.levels(), &[0.7]);
        assert!(d.interior_set().is_subset(fam.set(0)));
        let u = assemble_solution(&fam, &d, &bd).unwrap();
        assert!(d.interior_cells().iter().all(|&c| u.get(c) == 0.7));
        assert!(check_boundary_values(&fam, &d, &bd, 0.0).pass);
    }

    #[test]
    fn zero_levels_rejected() {
        let (d, m, bd) = setup(Shape::unit_disk(), 0.25, BoundaryValues::cos_theta([0.0, 0.0]));
        assert!(matches!(build_family(&d, &m, &bd, 0), Err(LevelSetError::NoLevels)));
    }

    #[test]
    fn slabs_in_square() {
        let sq = Shape::Rect {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        };
        let (d, m, bd) = setup(sq, 1.0 / 32.0, BoundaryValues::function(|x| x[0]));
        let fam = build_family(&d, &m, &bd, 16).unwrap();
        let u = assemble_solution(&fam, &d, &bd).unwrap();
        assert_eq!(superlevel_mismatch(&u, &fam, &d), None);
        let (lo, hi) = bd.range();
        let dt = (hi - lo) / 16.0;
        let grid = d.grid();
        let err = d
            .interior_cells()
            .iter()
            .map(|&c| (u.get(c) - grid.center(c)[0]).abs())
            .fold(0.0, f64::max);
        assert!(err <= dt + d.spacing(), "err {err}");
        let rep = check_separation(&fam, &d, &bd.plateau_values(&d, 3));
        assert!(rep.pass, "{:?}", rep.conflicts);
    }

    #[test]
    fn dilated_level_breaks_boundary_values() {
        let (d, m, bd) = setup(Shape::unit_disk(), 1.0 / 16.0, BoundaryValues::cos_theta([0.0, 0.0]));
        let mut fam = build_family(&d, &m, &bd, 8).unwrap();
        let tol = 2.0 / 8.0 + 5.0 * d.spacing();
        assert!(check_boundary_values(&fam, &d, &bd, tol).pass);
        let k = 4;
        let grid = d.grid();
        let dilated = IndicatorSet::from_fn(grid, |c| {
            fam.set(k).contains(c) || grid.center(c)[0] >= -0.6
        });
        fam.replace_set(k, dilated);
        let rep = check_boundary_values(&fam, &d, &bd, tol);
        assert!(!rep.pass);
        assert_eq!(rep.witness.unwrap().0, k);
    }

    #[test]
    fn bubble_fails_component_check() {
        let (d, _, _) = setup(Shape::unit_disk(), 1.0 / 16.0, BoundaryValues::constant(0.0));
        let grid = d.grid();
        let full = d.interior_set();
        let rep = check_component_reaches_boundary(&full, &d);
        assert!(rep.pass && rep.components == 0);
        let half = IndicatorSet::from_fn(grid, |c| grid.center(c)[0] >= 0.1);
        assert!(check_component_reaches_boundary(&half, &d).pass);
        let bubble = IndicatorSet::from_fn(grid, |c| {
            let x = grid.center(c);
            x[0].hypot(x[1]) > 0.3
        });
        let rep = check_component_reaches_boundary(&bubble, &d);
        assert!(!rep.pass);
        assert_eq!(rep.failing.len(), 1);
    }

    #[test]
    fn nestedness_violation_detected() {
        let (d, m, bd) = setup(Shape::unit_disk(), 0.25, BoundaryValues::cos_theta([0.0, 0.0]));
        let mut fam = build_family(&d, &m, &bd, 4).unwrap();
        fam.replace_set(3, IndicatorSet::full(d.grid()));
        assert!(matches!(
            assemble_solution(&fam, &d, &bd),
            Err(LevelSetError::NestednessViolation { lower: 2, upper: 3, .. })
        ));
    }
}
