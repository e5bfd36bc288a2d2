//! Barrier outcomes that are pinned as regressions.

use least_gradient::setmin::barrier_check;
use least_gradient::{build_domain, CutMetric, CutStencil, DiscreteDomain, Neighborhood, Shape, WeightField, WeightFn};

fn nearest_boundary(dom: &DiscreteDomain, p: [f64; 2]) -> usize {
    let grid = dom.grid();
    let d = |c: usize| {
        let x = grid.center(c);
        (x[0] - p[0]).hypot(x[1] - p[1])
    };
    *dom.boundary_cells().iter().min_by(|&&a, &&b| d(a).total_cmp(&d(b))).unwrap()
}

fn outcomes(a: WeightFn) -> Vec<bool> {
    let h = 1.0 / 64.0;
    let dom = build_domain(&Shape::unit_disk(), h, 3).unwrap();
    let w = WeightField::analytic(&dom, a).unwrap();
    let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N16, h)).unwrap();
    (0..8)
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.5) / 8.0;
            barrier_check(&dom, &metric, nearest_boundary(&dom, [t.cos(), t.sin()]), 0.3).unwrap().pass
        })
        .collect()
}

#[test]
fn constant_weight_disk_passes_off_axis() {
    assert!(outcomes(WeightFn::Constant(1.0)).iter().all(|&p| p));
}

// Cutting close to the boundary is cheapest when the weight grows inward,
// so the minimizer keeps hugging the boundary inside the ball.
#[test]
fn inward_growing_weight_fails_everywhere() {
    let inward = WeightFn::InwardDistance {
        base: 1.0,
        slope: 5.0,
        shape: Shape::unit_disk(),
    };
    assert!(outcomes(inward).iter().all(|&p| !p));
}
