//! Barrier test at boundary points: the unit disk passes everywhere, the
//! unit square fails at the middle of each edge where the boundary is flat.
//!
//! `cargo run --release --example barrier -- [n] [eps]` with `h = 1/n`.

use std::time::Instant;

use least_gradient::setmin::barrier_check;
use least_gradient::{build_domain, CutMetric, CutStencil, DiscreteDomain, Neighborhood, Shape, WeightField, WeightFn};

/// Boundary cell whose center is closest to `p`.
fn nearest_boundary(dom: &DiscreteDomain, p: [f64; 2]) -> usize {
    let grid = dom.grid();
    *dom.boundary_cells()
        .iter()
        .min_by(|&&a, &&b| {
            let d = |c: usize| {
                let x = grid.center(c);
                (x[0] - p[0]).hypot(x[1] - p[1])
            };
            d(a).total_cmp(&d(b))
        })
        .expect("nonempty boundary")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(64), |s| s.parse())?;
    let eps: f64 = args.next().map_or(Ok(0.3), |s| s.parse())?;
    let h = 1.0 / n as f64;
    let started = Instant::now();

    let circle: Vec<[f64; 2]> = (0..16)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 16.0;
            [t.cos(), t.sin()]
        })
        .collect();
    let square = Shape::Rect { min: [0.0, 0.0], max: [1.0, 1.0] };
    // A weight growing inward makes interior cuts expensive; no outcome is
    // predicted, the run just records it.
    let inward = WeightFn::InwardDistance { base: 1.0, slope: 5.0, shape: Shape::unit_disk() };
    let cases = [
        ("disk", Shape::unit_disk(), WeightFn::Constant(1.0), circle.clone()),
        ("square", square, WeightFn::Constant(1.0), vec![[0.5, 0.0], [1.0, 0.5], [0.5, 1.0], [0.0, 0.5]]),
        ("inward", Shape::unit_disk(), inward, circle),
    ];
    for (name, shape, a, points) in cases {
        let dom = build_domain(&shape, h, 3)?;
        let w = WeightField::analytic(&dom, a)?;
        let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N16, h))?;
        let mut passed = 0;
        for p in &points {
            let x0 = nearest_boundary(&dom, *p);
            let out = barrier_check(&dom, &metric, x0, eps)?;
            passed += out.pass as usize;
            println!(
                "{name:6} at ({:+.3}, {:+.3}): {} (removed {} cells, {} contacts; largest minimizer {} with {})",
                p[0],
                p[1],
                if out.pass { "pass" } else { "fail" },
                dom.interior_cells().len() - out.v_star.iter_ones().filter(|&c| dom.is_interior(c)).count(),
                out.contacts.len(),
                if out.strict_pass { "clear" } else { "touching" },
                out.strict_contacts.len()
            );
        }
        println!("{name}: {passed}/{} points pass", points.len());
    }
    println!("total {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}
