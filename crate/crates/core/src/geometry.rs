//! Weighted perimeter, weighted total variation (edge and cell forms), the
//! dual pairing, the layer-cake quadrature and the submodularity defect.

use crate::error::DomainError;
use crate::field::{DiscreteVectorField, GridKey, IndicatorSet, ScalarField};
use crate::grid::Grid;
use crate::metric::CutMetric;
use crate::weight::WeightField;

/// Compensated (Neumaier) summation in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn region_mask<'a>(
    metric: &CutMetric,
    region: Option<&'a IndicatorSet>,
) -> Result<Option<&'a [bool]>, DomainError> {
    match region {
        None => Ok(None),
        Some(r) if r.key() == metric.key() => Ok(Some(r.as_slice())),
        Some(_) => Err(DomainError::DomainMismatch),
    }
}

/// `P_a(E, region)`: capacity of stencil edges cut by `E` with an endpoint in
/// `region` (every edge when `region` is `None`).
pub fn alpha_perimeter(
    set: &IndicatorSet,
    region: Option<&IndicatorSet>,
    metric: &CutMetric,
) -> Result<f64, DomainError> {
    Ok(metric.to_real(alpha_perimeter_units(set, region, metric)?))
}

/// Exact integer form of [`alpha_perimeter`].
pub fn alpha_perimeter_units(
    set: &IndicatorSet,
    region: Option<&IndicatorSet>,
    metric: &CutMetric,
) -> Result<i64, DomainError> {
    if set.key() != metric.key() {
        return Err(DomainError::DomainMismatch);
    }
    let mask = region_mask(metric, region)?;
    Ok(metric.cut_units(set, mask))
}

/// Edge form of the weighted variation, `Σ a_f w_e |u_p - u_q|` over edges
/// touching `region`; coincides with [`alpha_perimeter`] on indicators.
pub fn alpha_total_variation(
    u: &ScalarField,
    region: Option<&IndicatorSet>,
    metric: &CutMetric,
) -> Result<f64, DomainError> {
    u.check_same(metric.key())?;
    let mask = region_mask(metric, region)?;
    let v = u.as_slice();
    Ok(compensated_sum(metric.region_edges(mask).map(|e| {
        metric.capacity(e) * (v[e.p as usize] - v[e.q as usize]).abs()
    })))
}

/// Forward-difference gradient; components vanish where the forward
/// neighbor leaves the box.
pub fn gradient(grid: &Grid, u: &[f64]) -> DiscreteVectorField {
    let mut y = DiscreteVectorField::zeros(grid);
    gradient_into(grid, u, &mut y);
    y
}

pub fn gradient_into(grid: &Grid, u: &[f64], out: &mut DiscreteVectorField) {
    let h = grid.spacing();
    let dims = grid.dims();
    let stride = [1, dims[0], dims[0] * dims[1]];
    for a in 0..grid.dim() {
        let comp = out.component_mut(a);
        for (p, slot) in comp.iter_mut().enumerate() {
            let c = grid.coords(p)[a];
            *slot = if c + 1 < dims[a] {
                (u[p + stride[a]] - u[p]) / h
            } else {
                0.0
            };
        }
    }
}

/// Discrete divergence, the exact negative adjoint of [`gradient`]:
/// `Σ ∇u · Y = -Σ u div Y`.
pub fn divergence(grid: &Grid, y: &DiscreteVectorField) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    divergence_into(grid, y, &mut out);
    out
}

pub fn divergence_into(grid: &Grid, y: &DiscreteVectorField, out: &mut [f64]) {
    let h = grid.spacing();
    let dims = grid.dims();
    let stride = [1, dims[0], dims[0] * dims[1]];
    out.iter_mut().for_each(|v| *v = 0.0);
    for a in 0..grid.dim() {
        let comp = y.component(a);
        for (p, slot) in out.iter_mut().enumerate() {
            let c = grid.coords(p)[a];
            let mut v = 0.0;
            if c + 1 < dims[a] {
                v += comp[p];
            }
            if c > 0 {
                v -= comp[p - stride[a]];
            }
            *slot += v / h;
        }
    }
}

/// Cell form of the weighted variation, `Σ_{p ∈ region} a_p |∇u(p)| h^n`:
/// the functional paired with per-cell dual fields `|Y| <= a`.
pub fn isotropic_total_variation(
    u: &ScalarField,
    region: Option<&IndicatorSet>,
    grid: &Grid,
    w: &WeightField,
) -> Result<f64, DomainError> {
    let key: GridKey = grid.into();
    u.check_same(key)?;
    if region.is_some_and(|r| r.key() != key) {
        return Err(DomainError::DomainMismatch);
    }
    let g = gradient(grid, u.as_slice());
    let vol = grid.cell_volume();
    Ok(compensated_sum(
        (0..grid.len())
            .filter(|&p| region.is_none_or(|r| r.contains(p)))
            .map(|p| w.cell(p) * g.norm_at(p) * vol),
    ))
}

/// `(Σ u div Y h^n, max(0, max |Y| - a))`.
pub fn dual_pairing_and_gap(
    u: &ScalarField,
    y: &DiscreteVectorField,
    grid: &Grid,
    w: &WeightField,
) -> Result<(f64, f64), DomainError> {
    let key: GridKey = grid.into();
    u.check_same(key)?;
    if y.key() != key {
        return Err(DomainError::DomainMismatch);
    }
    let div = divergence(grid, y);
    let vol = grid.cell_volume();
    let pairing = compensated_sum(
        u.as_slice()
            .iter()
            .zip(&div)
            .map(|(&a, &b)| a * b * vol),
    );
    let violation = (0..grid.len())
        .map(|p| y.norm_at(p) - w.cell(p))
        .fold(0.0f64, f64::max);
    Ok((pairing, violation))
}

/// Result of the layer-cake evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coarea {
    pub tv_value: f64,
    pub coarea_value: f64,
    pub levels_used: usize,
}

/// Evaluates the edge-form variation directly and by summing perimeters of
/// superlevel sets at midpoints between consecutive distinct values.
pub fn coarea_quadrature(
    u: &ScalarField,
    region: Option<&IndicatorSet>,
    metric: &CutMetric,
) -> Result<Coarea, DomainError> {
    let tv_value = alpha_total_variation(u, region, metric)?;
    let mask = region_mask(metric, region)?;
    let v = u.as_slice();
    let mut touched = vec![false; v.len()];
    for e in metric.region_edges(mask) {
        touched[e.p as usize] = true;
        touched[e.q as usize] = true;
    }
    let mut vals: Vec<f64> = (0..v.len()).filter(|&c| touched[c]).map(|c| v[c]).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let mut terms = Vec::with_capacity(vals.len());
    for pair in vals.windows(2) {
        let t = 0.5 * (pair[0] + pair[1]);
        let set = u.superlevel(t);
        let per = metric.to_real(metric.cut_units(&set, mask));
        terms.push((pair[1] - pair[0]) * per);
    }
    Ok(Coarea {
        tv_value,
        coarea_value: compensated_sum(terms),
        levels_used: vals.len().saturating_sub(1),
    })
}

/// `P(E1) + P(E2) - P(E1 ∪ E2) - P(E1 ∩ E2)`, nonnegative for cut metrics.
pub fn submodularity_defect(
    e1: &IndicatorSet,
    e2: &IndicatorSet,
    region: Option<&IndicatorSet>,
    metric: &CutMetric,
) -> Result<f64, DomainError> {
    e1.check_same(e2)?;
    let p = |s: &IndicatorSet| alpha_perimeter_units(s, region, metric);
    let d = p(e1)? + p(e2)? - p(&e1.union(e2))? - p(&e1.intersection(e2))?;
    Ok(metric.to_real(d))
}

/// Symmetric Hausdorff distance between two finite point clouds.
pub fn hausdorff_distance(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let d = |x: &[f64; 3], y: &[f64; 3]| {
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
    };
    let one_sided = |p: &[[f64; 3]], q: &[[f64; 3]]| {
        p.iter()
            .map(|x| q.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    one_sided(a, b).max(one_sided(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use crate::stencil::{CutStencil, Neighborhood};

    fn square(n: usize, h: f64) -> crate::domain::DiscreteDomain {
        let s = Shape::Rect {
            min: [0.0, 0.0],
            max: [n as f64 * h, n as f64 * h],
        };
        build_domain(&s, h, 3).unwrap()
    }

    #[test]
    fn single_cell_perimeters() {
        let d = square(1, 1.0);
        let st = CutStencil::new(Neighborhood::N4, 1.0);
        let one = WeightField::constant(&d, 1.0).unwrap();
        let two = WeightField::constant(&d, 2.0).unwrap();
        let e = IndicatorSet::from_vec(d.grid(), d.interior_mask().to_vec());
        let m1 = CutMetric::new(&d, &one, &st).unwrap();
        let m2 = CutMetric::new(&d, &two, &st).unwrap();
        assert_eq!(alpha_perimeter(&e, None, &m1).unwrap(), 4.0);
        assert_eq!(alpha_perimeter(&e, None, &m2).unwrap(), 8.0);
    }

    #[test]
    fn constant_field_has_no_variation() {
        let d = square(4, 0.25);
        let st = CutStencil::new(Neighborhood::N16, 0.25);
        let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
        let u = ScalarField::constant(d.grid(), 3.5);
        assert_eq!(alpha_total_variation(&u, None, &m).unwrap(), 0.0);
    }

    #[test]
    fn linear_ramp_on_unit_square() {
        // Direct summation: each interior row has n-1 horizontal faces of
        // jump h and length h, so the interior total is n(n-1)h^2 -> 1.
        for n in [4usize, 8, 16] {
            let h = 1.0 / n as f64;
            let d = square(n, h);
            let st = CutStencil::new(Neighborhood::N4, h);
            let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
            let g = d.grid();
            let u = ScalarField::from_fn(g, |c| g.center(c)[0]);
            // Restrict to edges with both ends inside.
            let direct: f64 = m
                .edges()
                .iter()
                .filter(|e| d.is_interior(e.p as usize) && d.is_interior(e.q as usize))
                .map(|e| m.capacity(e) * (u.get(e.p as usize) - u.get(e.q as usize)).abs())
                .sum();
            let expected = (n * (n - 1)) as f64 * h * h;
            assert!((direct - expected).abs() < 1e-12);
            assert!((direct - 1.0).abs() <= h + 1e-12);
        }
    }

    #[test]
    fn divergence_is_negative_adjoint() {
        let d = square(5, 0.2);
        let g = d.grid();
        let u: Vec<f64> = (0..g.len()).map(|c| ((c * 37) % 11) as f64 - 5.0).collect();
        let mut y = DiscreteVectorField::zeros(g);
        for c in 0..g.len() {
            y.set(c, [((c * 13) % 7) as f64 - 3.0, ((c * 5) % 3) as f64, 0.0]);
        }
        let gu = gradient(g, &u);
        let lhs: f64 = (0..g.len())
            .map(|c| gu.get(c)[0] * y.get(c)[0] + gu.get(c)[1] * y.get(c)[1])
            .sum();
        let div = divergence(g, &y);
        let rhs: f64 = u.iter().zip(&div).map(|(a, b)| a * b).sum();
        assert!((lhs + rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn pairing_zero_field_and_violation() {
        let d = square(3, 1.0);
        let w = WeightField::constant(&d, 1.0).unwrap();
        let g = d.grid();
        let u = ScalarField::from_fn(g, |c| c as f64);
        let mut y = DiscreteVectorField::zeros(g);
        assert_eq!(dual_pairing_and_gap(&u, &y, g, &w).unwrap(), (0.0, 0.0));
        y.set(d.interior_cells()[0], [2.0, 0.0, 0.0]);
        let (_, viol) = dual_pairing_and_gap(&u, &y, g, &w).unwrap();
        assert_eq!(viol, 1.0);
    }

    #[test]
    fn overlapping_squares_defect() {
        // 3x3 squares offset by (2,2) overlap in one cell. Counting cut faces
        // by hand: each square has perimeter 12, the union 20, the
        // intersection 4, so the defect is 12 + 12 - 20 - 4 = 0.
        let d = square(8, 1.0);
        let g = d.grid();
        let st = CutStencil::new(Neighborhood::N4, 1.0);
        let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
        let sq = |x0: i64, y0: i64| {
            IndicatorSet::from_fn(g, |c| {
                let l = g.lattice(c);
                (x0..x0 + 3).contains(&l[0]) && (y0..y0 + 3).contains(&l[1])
            })
        };
        let (a, b) = (sq(1, 1), sq(3, 3));
        assert_eq!(alpha_perimeter(&a, None, &m).unwrap(), 12.0);
        assert_eq!(alpha_perimeter(&a.union(&b), None, &m).unwrap(), 20.0);
        assert_eq!(alpha_perimeter(&a.intersection(&b), None, &m).unwrap(), 4.0);
        assert_eq!(submodularity_defect(&a, &b, None, &m).unwrap(), 0.0);
        // With diagonal edges the defect becomes strictly positive.
        let st8 = CutStencil::new(Neighborhood::N8, 1.0);
        let m8 = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st8).unwrap();
        assert!(submodularity_defect(&a, &b, None, &m8).unwrap() > 0.0);
    }

    #[test]
    fn nested_and_separated_pairs_have_zero_defect() {
        let d = square(10, 1.0);
        let g = d.grid();
        let st = CutStencil::new(Neighborhood::N16, 1.0);
        let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
        let bx = |x0: i64, x1: i64| {
            IndicatorSet::from_fn(g, |c| {
                let l = g.lattice(c);
                (x0..x1).contains(&l[0]) && (2..5).contains(&l[1])
            })
        };
        assert_eq!(submodularity_defect(&bx(2, 4), &bx(1, 6), None, &m).unwrap(), 0.0);
        assert_eq!(submodularity_defect(&bx(0, 2), &bx(5, 8), None, &m).unwrap(), 0.0);
    }

    #[test]
    fn disk_perimeter_sixteen_neighborhood() {
        // Analytic circumference of the r = 0.5 circle is π.
        let h = 1.0 / 128.0;
        let box_ = Shape::Rect {
            min: [-1.0, -1.0],
            max: [1.0, 1.0],
        };
        let d = build_domain(&box_, h, 3).unwrap();
        let g = d.grid();
        let st = CutStencil::new(Neighborhood::N16, h);
        let m = CutMetric::new(&d, &WeightField::constant(&d, 1.0).unwrap(), &st).unwrap();
        let e = IndicatorSet::from_fn(g, |c| {
            let x = g.center(c);
            x[0].hypot(x[1]) < 0.5
        });
        let p = alpha_perimeter(&e, None, &m).unwrap();
        assert!((p - std::f64::consts::PI).abs() <= 0.02 * std::f64::consts::PI, "{p}");
    }
}
