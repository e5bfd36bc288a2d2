//! Exact minimizers of the weighted perimeter under exterior constraints.
//!
//! A [`CutProblem`] pins some cells inside or outside the set and leaves the
//! rest free. Pinned-in cells hang from the source and pinned-out cells from
//! the sink with capacity `1 + Σ finite capacities`, so no minimum cut ever
//! severs a pin. After a maximum flow, the cells reachable from the source in
//! the residual graph form the smallest optimal set; the complement of the
//! cells that still reach the sink forms the largest. Optimal sets are closed
//! under union and intersection, so the largest one is also the one of
//! maximal volume.

use std::fmt::Write as _;

use crate::domain::DiscreteDomain;
use crate::error::CutError;
use crate::field::IndicatorSet;
use crate::grid::Offset;
use crate::maxflow::FlowNetwork;
use crate::metric::CutMetric;

/// Role of a cell in a cut problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pin {
    Free,
    In,
    Out,
}

#[derive(Debug, Clone)]
pub struct CutProblem<'m> {
    metric: &'m CutMetric,
    pins: Vec<Pin>,
}

/// Smallest and largest optimal sets of a cut problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerPair {
    pub e_min: IndicatorSet,
    pub e_max: IndicatorSet,
    /// Optimal cut in capacity units.
    pub value_units: i64,
    /// Optimal cut as a real weighted perimeter.
    pub value: f64,
}

impl<'m> CutProblem<'m> {
    pub fn new(metric: &'m CutMetric, pins: Vec<Pin>) -> Self {
        assert_eq!(pins.len(), metric.grid().len());
        Self { metric, pins }
    }

    /// Interior cells free, collar cells pinned to their membership in `exterior`.
    pub fn star(dom: &DiscreteDomain, metric: &'m CutMetric, exterior: &IndicatorSet) -> Self {
        let pins = (0..dom.len())
            .map(|c| {
                if dom.is_interior(c) {
                    Pin::Free
                } else if exterior.contains(c) {
                    Pin::In
                } else {
                    Pin::Out
                }
            })
            .collect();
        Self::new(metric, pins)
    }

    pub fn metric(&self) -> &CutMetric {
        self.metric
    }

    pub fn pins(&self) -> &[Pin] {
        &self.pins
    }

    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.pins.len())
            .filter(|&c| self.pins[c] == Pin::Free)
            .collect()
    }

    fn network(&self) -> (FlowNetwork, usize, usize) {
        let n = self.pins.len();
        let (s, t) = (n, n + 1);
        let mut g = FlowNetwork::new(n + 2);
        for e in self.metric.edges() {
            g.add_undirected(e.p as usize, e.q as usize, e.cap);
        }
        let pin = self.metric.pin_units();
        for (c, &p) in self.pins.iter().enumerate() {
            match p {
                Pin::In => g.add_edge(s, c, pin),
                Pin::Out => g.add_edge(c, t, pin),
                Pin::Free => {}
            }
        }
        (g, s, t)
    }

    /// Solves the problem by maximum flow.
    pub fn solve(&self) -> MinimizerPair {
        let (mut g, s, t) = self.network();
        let flow = g.max_flow(s, t);
        let n = self.pins.len();
        let src = g.reachable_from(s);
        let snk = g.reaching(t);
        let grid = self.metric.grid();
        let e_min = IndicatorSet::from_fn(grid, |c| src[c]);
        let e_max = IndicatorSet::from_fn(grid, |c| !snk[c]);
        debug_assert!(src[..n].iter().zip(&snk[..n]).all(|(&a, &b)| !(a && b)));
        let value_units = self.metric.cut_units(&e_max, None);
        assert_eq!(value_units, flow, "cut capacity differs from flow value");
        debug_assert_eq!(self.metric.cut_units(&e_min, None), flow);
        MinimizerPair {
            e_min,
            e_max,
            value_units,
            value: self.metric.to_real(value_units),
        }
    }

    /// Cut value of a set that respects the pins.
    pub fn objective_units(&self, set: &IndicatorSet) -> i64 {
        self.metric.cut_units(set, None)
    }

    pub fn respects_pins(&self, set: &IndicatorSet) -> bool {
        self.pins.iter().enumerate().all(|(c, &p)| match p {
            Pin::In => set.contains(c),
            Pin::Out => !set.contains(c),
            Pin::Free => true,
        })
    }

    /// DIMACS max-flow listing of the network (nodes 1-based, source `n+1`, sink `n+2`).
    pub fn to_dimacs(&self) -> String {
        let n = self.pins.len();
        let pin = self.metric.pin_units();
        let terminals = self.pins.iter().filter(|&&p| p != Pin::Free).count();
        let arcs = 2 * self.metric.edges().len() + terminals;
        let mut out = String::new();
        let _ = writeln!(out, "c weighted perimeter cut, capacity quantum {:e}", self.metric.quantum());
        let _ = writeln!(out, "p max {} {}", n + 2, arcs);
        let _ = writeln!(out, "n {} s", n + 1);
        let _ = writeln!(out, "n {} t", n + 2);
        for e in self.metric.edges() {
            let _ = writeln!(out, "a {} {} {}", e.p + 1, e.q + 1, e.cap);
            let _ = writeln!(out, "a {} {} {}", e.q + 1, e.p + 1, e.cap);
        }
        for (c, &p) in self.pins.iter().enumerate() {
            match p {
                Pin::In => {
                    let _ = writeln!(out, "a {} {} {}", n + 1, c + 1, pin);
                }
                Pin::Out => {
                    let _ = writeln!(out, "a {} {} {}", c + 1, n + 2, pin);
                }
                Pin::Free => {}
            }
        }
        out
    }
}

/// Minimal and maximal volume-maximizing solutions for the exterior data `exterior`.
pub fn solve_star(
    dom: &DiscreteDomain,
    metric: &CutMetric,
    exterior: &IndicatorSet,
) -> Result<MinimizerPair, CutError> {
    exterior.check_same(&dom.interior_set())?;
    Ok(CutProblem::star(dom, metric, exterior).solve())
}

/// Free-cell limit for brute-force enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Every optimal set of a small problem, found by enumerating all `2^k`
/// assignments of the free cells in Gray-code order.
pub fn exhaustive_optima(problem: &CutProblem<'_>) -> Result<(i64, Vec<IndicatorSet>), CutError> {
    let free = problem.free_cells();
    if free.len() > EXHAUSTIVE_LIMIT {
        return Err(CutError::TooLarge {
            got: free.len(),
            max: EXHAUSTIVE_LIMIT,
        });
    }
    let metric = problem.metric();
    let grid = metric.grid();
    let mut state = IndicatorSet::from_fn(grid, |c| problem.pins()[c] == Pin::In);
    let mut value = metric.cut_units(&state, None);
    let mut best = value;
    let mut optima: Vec<u32> = vec![0];
    let mut code: u32 = 0;
    for step in 1u64..(1u64 << free.len()) {
        let bit = step.trailing_zeros() as usize;
        let c = free[bit];
        let now = state.contains(c);
        for &ei in metric.incident(c) {
            let e = &metric.edges()[ei as usize];
            let o = metric.other(e, c);
            if state.contains(o) == now {
                value += e.cap;
            } else {
                value -= e.cap;
            }
        }
        state.set(c, !now);
        code ^= 1 << bit;
        if value < best {
            best = value;
            optima.clear();
            optima.push(code);
        } else if value == best {
            optima.push(code);
        }
    }
    let sets = optima
        .into_iter()
        .map(|m| {
            let mut s = IndicatorSet::from_fn(grid, |c| problem.pins()[c] == Pin::In);
            for (b, &c) in free.iter().enumerate() {
                if m & (1 << b) != 0 {
                    s.set(c, true);
                }
            }
            s
        })
        .collect::<Vec<_>>();
    debug_assert!(sets.iter().all(|s| metric.cut_units(s, None) == best));
    Ok((best, sets))
}

/// Brute-force counterpart of [`solve_star`] for at most [`EXHAUSTIVE_LIMIT`] free cells.
pub fn exhaustive_min(
    dom: &DiscreteDomain,
    metric: &CutMetric,
    exterior: &IndicatorSet,
) -> Result<MinimizerPair, CutError> {
    let problem = CutProblem::star(dom, metric, exterior);
    exhaustive_pair(&problem)
}

/// Smallest and largest optimum by cell count, verified to bracket every optimum.
pub fn exhaustive_pair(problem: &CutProblem<'_>) -> Result<MinimizerPair, CutError> {
    let (best, sets) = exhaustive_optima(problem)?;
    let e_min = sets.iter().min_by_key(|s| s.count()).cloned().expect("nonempty");
    let e_max = sets.iter().max_by_key(|s| s.count()).cloned().expect("nonempty");
    if !sets.iter().all(|s| e_min.is_subset(s) && s.is_subset(&e_max)) {
        return Err(CutError::LatticeViolation);
    }
    Ok(MinimizerPair {
        e_min,
        e_max,
        value_units: best,
        value: problem.metric().to_real(best),
    })
}

/// Outcome of a local minimality scan.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityVerdict {
    pub pass: bool,
    pub patches_checked: usize,
    /// Cells of the first improvable patch and the achievable decrease.
    pub witness: Option<(Vec<usize>, f64)>,
}

/// Patches with at most this many cells are scanned by enumeration.
const PATCH_ENUMERATION_CELLS: usize = 9;

/// Checks that no change of `set` inside any cube patch of side `r`, compactly
/// contained in `region`, lowers the weighted perimeter.
pub fn local_minimality_check(
    set: &IndicatorSet,
    region: &IndicatorSet,
    metric: &CutMetric,
    r: usize,
) -> Result<MinimalityVerdict, CutError> {
    set.check_same(region)?;
    let grid = metric.grid();
    let dim = grid.dim();
    let radius = metric.stencil_radius();
    let reach: Vec<Offset> = {
        let zr = if dim == 3 { -radius..=radius } else { 0..=0 };
        let mut v = Vec::new();
        for k in zr {
            for j in -radius..=radius {
                for i in -radius..=radius {
                    v.push([i, j, k]);
                }
            }
        }
        v
    };
    let patch_offsets: Vec<Offset> = {
        let r = r as i32;
        let zr = if dim == 3 { 0..r } else { 0..1 };
        let mut v = Vec::new();
        for k in zr {
            for j in 0..r {
                for i in 0..r {
                    v.push([i, j, k]);
                }
            }
        }
        v
    };
    // Cells whose whole stencil neighborhood lies in the region.
    let deep: Vec<bool> = (0..grid.len())
        .map(|c| {
            region.contains(c)
                && reach
                    .iter()
                    .all(|&o| grid.neighbor(c, o).is_some_and(|n| region.contains(n)))
        })
        .collect();
    let s = set.as_slice();
    let mut checked = 0;
    let mut in_patch = vec![false; grid.len()];
    for corner in 0..grid.len() {
        let Some(cells) = patch_offsets
            .iter()
            .map(|&o| grid.neighbor(corner, o).filter(|&c| deep[c]))
            .collect::<Option<Vec<usize>>>()
        else {
            continue;
        };
        let touches_cut = cells.iter().any(|&c| {
            metric.incident(c).iter().any(|&ei| {
                let e = &metric.edges()[ei as usize];
                s[e.p as usize] != s[e.q as usize]
            })
        });
        if !touches_cut {
            continue;
        }
        checked += 1;
        for &c in &cells {
            in_patch[c] = true;
        }
        let (current, best) = if cells.len() <= PATCH_ENUMERATION_CELLS {
            patch_enumerate(set, &cells, metric)
        } else {
            patch_cut(set, &cells, &in_patch, metric)
        };
        for &c in &cells {
            in_patch[c] = false;
        }
        if best < current {
            return Ok(MinimalityVerdict {
                pass: false,
                patches_checked: checked,
                witness: Some((cells, metric.to_real(current - best))),
            });
        }
    }
    Ok(MinimalityVerdict {
        pass: true,
        patches_checked: checked,
        witness: None,
    })
}

/// Local cost of the current patch assignment and the best over all assignments.
fn patch_enumerate(set: &IndicatorSet, cells: &[usize], metric: &CutMetric) -> (i64, i64) {
    let mut state = set.clone();
    let local = |st: &IndicatorSet| -> i64 {
        let mut seen = std::collections::BTreeSet::new();
        for &c in cells {
            for &ei in metric.incident(c) {
                seen.insert(ei);
            }
        }
        seen.iter()
            .map(|&ei| &metric.edges()[ei as usize])
            .filter(|e| st.contains(e.p as usize) != st.contains(e.q as usize))
            .map(|e| e.cap)
            .sum()
    };
    let current = local(&state);
    let mut value = current;
    let mut best = current;
    for step in 1u64..(1u64 << cells.len()) {
        let c = cells[step.trailing_zeros() as usize];
        let now = state.contains(c);
        for &ei in metric.incident(c) {
            let e = &metric.edges()[ei as usize];
            if state.contains(metric.other(e, c)) == now {
                value += e.cap;
            } else {
                value -= e.cap;
            }
        }
        state.set(c, !now);
        best = best.min(value);
    }
    (current, best)
}

fn patch_cut(set: &IndicatorSet, cells: &[usize], in_patch: &[bool], metric: &CutMetric) -> (i64, i64) {
    let mut local_id = std::collections::HashMap::new();
    for (i, &c) in cells.iter().enumerate() {
        local_id.insert(c, i);
    }
    let n = cells.len();
    let (s, t) = (n, n + 1);
    let mut g = FlowNetwork::new(n + 2);
    let mut current = 0;
    let mut seen = std::collections::BTreeSet::new();
    for &c in cells {
        for &ei in metric.incident(c) {
            if !seen.insert(ei) {
                continue;
            }
            let e = &metric.edges()[ei as usize];
            let (p, q) = (e.p as usize, e.q as usize);
            if set.contains(p) != set.contains(q) {
                current += e.cap;
            }
            match (in_patch[p], in_patch[q]) {
                (true, true) => g.add_undirected(local_id[&p], local_id[&q], e.cap),
                (true, false) | (false, true) => {
                    let (inner, outer) = if in_patch[p] { (p, q) } else { (q, p) };
                    if set.contains(outer) {
                        g.add_edge(s, local_id[&inner], e.cap);
                    } else {
                        g.add_edge(local_id[&inner], t, e.cap);
                    }
                }
                (false, false) => unreachable!(),
            }
        }
    }
    (current, g.max_flow(s, t))
}

/// Result of the barrier test at one boundary cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOutcome {
    pub pass: bool,
    /// Smallest minimizer; its contacts are contained in every other minimizer's.
    pub v_star: IndicatorSet,
    /// Boundary cells in the ball, away from its rim, that `v_star` keeps.
    pub contacts: Vec<usize>,
    /// Verdict for the largest minimizer over the whole open ball.
    pub strict_pass: bool,
    pub strict_contacts: Vec<usize>,
    pub value: f64,
}

/// Minimizes the perimeter over subsets of Ω that contain every interior
/// cell outside the ball `B_eps(x0)` and reports whether some minimizer's
/// boundary avoids the boundary layer inside the ball.
///
/// Digitized perimeters tie often, so the minimizers form a lattice. A
/// boundary cell kept by the smallest minimizer is kept by all of them, which
/// makes `E_min` the witness for existence.
pub fn barrier_check(
    dom: &DiscreteDomain,
    metric: &CutMetric,
    x0: usize,
    eps: f64,
) -> Result<BarrierOutcome, CutError> {
    let h = dom.spacing();
    if !dom.is_boundary(x0) {
        return Err(CutError::NotBoundaryCell(x0));
    }
    if eps <= 2.0 * h {
        return Err(CutError::BallTooSmall { eps, h });
    }
    let grid = dom.grid();
    let in_ball = |c: usize| grid.distance(c, x0) < eps;
    if dom.interior_cells().iter().all(|&c| in_ball(c)) {
        return Err(CutError::BallCoversDomain { eps });
    }
    let pins = (0..dom.len())
        .map(|c| {
            if !dom.is_interior(c) {
                Pin::Out
            } else if in_ball(c) {
                Pin::Free
            } else {
                Pin::In
            }
        })
        .collect();
    let pair = CutProblem::new(metric, pins).solve();
    // Cells within one spacing of the sphere straddle it; the continuum
    // minimizer meets the boundary exactly there, outside the open ball.
    let inner = |c: usize| grid.distance(c, x0) < eps - h;
    let touching = |v: &IndicatorSet, ball: &dyn Fn(usize) -> bool| -> Vec<usize> {
        dom.boundary_cells()
            .iter()
            .copied()
            .filter(|&c| ball(c) && v.contains(c) && grid.face_neighbors(c).any(|q| !v.contains(q)))
            .collect()
    };
    let contacts = touching(&pair.e_min, &inner);
    let strict_contacts = touching(&pair.e_max, &in_ball);
    Ok(BarrierOutcome {
        pass: contacts.is_empty(),
        strict_pass: strict_contacts.is_empty(),
        v_star: pair.e_min,
        contacts,
        strict_contacts,
        value: pair.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use crate::stencil::{CutStencil, Neighborhood};
    use crate::weight::WeightField;

    fn square_domain(n: usize) -> DiscreteDomain {
        let s = Shape::Rect {
            min: [0.0, 0.0],
            max: [n as f64, n as f64],
        };
        build_domain(&s, 1.0, 3).unwrap()
    }

    fn unit_metric(d: &DiscreteDomain, k: Neighborhood) -> CutMetric {
        let st = CutStencil::new(k, d.spacing());
        CutMetric::new(d, &WeightField::constant(d, 1.0).unwrap(), &st).unwrap()
    }

    #[test]
    fn full_and_empty_exterior() {
        let d = square_domain(3);
        let m = unit_metric(&d, Neighborhood::N16);
        let g = d.grid();
        let all = IndicatorSet::from_fn(g, |c| d.is_collar(c));
        let p = solve_star(&d, &m, &all).unwrap();
        assert_eq!(p.value, 0.0);
        assert_eq!(p.e_max.count(), g.len());
        let none = IndicatorSet::empty(g);
        let p = solve_star(&d, &m, &none).unwrap();
        assert_eq!(p.e_max.count(), 0);
        assert_eq!(p.value, 0.0);
        let ex = exhaustive_min(&d, &m, &none).unwrap();
        assert_eq!(ex, p);
    }

    #[test]
    fn exhaustive_two_by_two_all_in() {
        let d = square_domain(2);
        let m = unit_metric(&d, Neighborhood::N4);
        let all = IndicatorSet::from_fn(d.grid(), |c| d.is_collar(c));
        let ex = exhaustive_min(&d, &m, &all).unwrap();
        assert!(d.interior_cells().iter().all(|&c| ex.e_max.contains(c)));
        assert_eq!(ex.value, 0.0);
    }

    #[test]
    fn exhaustive_rejects_large_instances() {
        let d = square_domain(5);
        let m = unit_metric(&d, Neighborhood::N4);
        let none = IndicatorSet::empty(d.grid());
        assert_eq!(
            exhaustive_min(&d, &m, &none),
            Err(CutError::TooLarge { got: 25, max: 20 })
        );
    }

    #[test]
    fn tie_yields_distinct_min_and_max() {
        // Half-plane exterior on a 1×2 interior with 4-neighborhood: the
        // boundary can sit on either side of the free column pair only if the
        // costs tie; the pair must bracket every optimum.
        let d = square_domain(2);
        let m = unit_metric(&d, Neighborhood::N4);
        let g = d.grid();
        let ext = IndicatorSet::from_fn(g, |c| d.is_collar(c) && g.lattice(c)[0] >= 1);
        let p = solve_star(&d, &m, &ext).unwrap();
        let ex = exhaustive_min(&d, &m, &ext).unwrap();
        assert_eq!(p, ex);
        assert!(p.e_min.is_subset(&p.e_max));
    }

    #[test]
    fn flipped_cell_fails_local_check() {
        let d = square_domain(12);
        let m = unit_metric(&d, Neighborhood::N4);
        let g = d.grid();
        let half = IndicatorSet::from_fn(g, |c| g.lattice(c)[0] >= 6);
        let region = d.interior_set();
        let v = local_minimality_check(&half, &region, &m, 3).unwrap();
        assert!(v.pass);
        assert!(v.patches_checked > 0);
        let mut bad = half.clone();
        bad.set(g.from_lattice([3, 6, 0]).unwrap(), true);
        let v = local_minimality_check(&bad, &region, &m, 3).unwrap();
        assert!(!v.pass);
        let (_, dec) = v.witness.unwrap();
        assert_eq!(dec, 4.0);
        // Min-cut route on larger patches agrees.
        assert!(local_minimality_check(&half, &region, &m, 4).unwrap().pass);
        assert!(!local_minimality_check(&bad, &region, &m, 4).unwrap().pass);
    }

    #[test]
    fn dimacs_header() {
        let d = square_domain(2);
        let m = unit_metric(&d, Neighborhood::N4);
        let none = IndicatorSet::empty(d.grid());
        let text = CutProblem::star(&d, &m, &none).to_dimacs();
        let n = d.len();
        let arcs = 2 * m.edges().len() + (n - 4);
        assert!(text.contains(&format!("p max {} {}", n + 2, arcs)));
        assert_eq!(text.lines().filter(|l| l.starts_with("a ")).count(), arcs);
    }

    #[test]
    fn barrier_errors() {
        let d = build_domain(&Shape::unit_disk(), 0.125, 3).unwrap();
        let m = unit_metric(&d, Neighborhood::N16);
        let x0 = d.boundary_cells()[0];
        assert!(matches!(
            barrier_check(&d, &m, x0, 0.2),
            Err(CutError::BallTooSmall { .. })
        ));
        assert!(matches!(
            barrier_check(&d, &m, x0, 5.0),
            Err(CutError::BallCoversDomain { .. })
        ));
        let inner = d.interior_cells().iter().copied().find(|&c| !d.is_boundary(c)).unwrap();
        assert!(matches!(
            barrier_check(&d, &m, inner, 0.3),
            Err(CutError::NotBoundaryCell(_))
        ));
    }
}
