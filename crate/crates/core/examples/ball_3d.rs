//! Three-dimensional run: unit ball, unit weight, data `x₁/|x|` on the
//! boundary. The level sets are flat discs, so the solution is `x₁`.
//!
//! `cargo run --release --example ball_3d -- [n] [K]` with `h = 1/n`.

use std::time::Instant;

use least_gradient::levelset::{assemble_solution, build_family, check_separation};
use least_gradient::{
    build_domain, extend_boundary_data, BoundaryValues, CutMetric, CutStencil, Neighborhood, Shape,
    WeightField,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(12), |s| s.parse())?;
    let k: usize = args.next().map_or(Ok(12), |s| s.parse())?;
    let h = 1.0 / n as f64;
    let started = Instant::now();

    let dom = build_domain(&Shape::Ball { center: [0.0; 3], radius: 1.0 }, h, 3)?;
    let w = WeightField::constant(&dom, 1.0)?;
    let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N26, h))?;
    let g = BoundaryValues::function(|x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r == 0.0 { 0.0 } else { x[0] / r }
    });
    let bd = extend_boundary_data(&dom, &g)?;
    let fam = build_family(&dom, &metric, &bd, k)?;
    let u = assemble_solution(&fam, &dom, &bd)?;

    let grid = dom.grid();
    let (mut sup, mut sum) = (0.0f64, 0.0);
    for &c in dom.interior_cells() {
        let e = (u.get(c) - grid.center(c)[0]).abs();
        sup = sup.max(e);
        sum += e;
    }
    let sep = check_separation(&fam, &dom, &[]);
    println!(
        "{} cells in Ω, {} levels: sup error {sup:.4}, mean error {:.4}, separation {} ({:.1} s)",
        dom.interior_cells().len(),
        fam.len(),
        sum / dom.interior_cells().len() as f64,
        if sep.pass { "holds" } else { "violated" },
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
