//! Solves the disk problem twice, by stacked minimal cuts and by a
//! primal-dual total-variation iteration, and compares the two answers.
//!
//! `cargo run --release --example tv_crosscheck -- [n] [K]` with `h = 1/n`.

use least_gradient::geometry::alpha_perimeter;
use least_gradient::levelset::{assemble_solution, build_family};
use least_gradient::tv::{compare_solutions, objective_primal, solve_dirichlet_tv, TvParams};
use least_gradient::{
    build_domain, extend_boundary_data, BoundaryValues, CutMetric, CutStencil, Neighborhood,
    ScalarField, Shape, WeightField,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(64), |s| s.parse())?;
    let k: usize = args.next().map_or(Ok(64), |s| s.parse())?;
    let h = 1.0 / n as f64;

    let dom = build_domain(&Shape::unit_disk(), h, 3)?;
    let w = WeightField::constant(&dom, 1.0)?;
    let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N16, h))?;
    let bd = extend_boundary_data(&dom, &BoundaryValues::cos_theta([0.0, 0.0]))?;
    let fam = build_family(&dom, &metric, &bd, k)?;
    let u_star = assemble_solution(&fam, &dom, &bd)?;

    let tv = solve_dirichlet_tv(&dom, &w, &bd, &TvParams::default())?;
    let cert = &tv.certificate;
    println!(
        "primal-dual: {} iterations, relative gap {:.3e}, converged {}",
        cert.iterations, cert.gap, cert.converged
    );

    let grid = dom.grid();
    let omega = dom.interior_set();
    let vol = grid.cell_volume();
    let x1 = ScalarField::from_fn(grid, |c| grid.center(c)[0]);
    let a = compare_solutions(&tv.u, &u_star, &omega, vol)?;
    let b = compare_solutions(&tv.u, &x1, &omega, vol)?;
    let c = compare_solutions(&u_star, &x1, &omega, vol)?;
    println!("L1/|Ω|  u_pd vs u_star {:.5}", a.l1 / a.measure);
    println!("L1/|Ω|  u_pd vs x1     {:.5}", b.l1 / b.measure);
    println!("L1/|Ω|  u_star vs x1   {:.5}", c.l1 / c.measure);
    println!("edge objective of u_pd {:.5} (area {:.5})", objective_primal(&tv.u, &dom, &metric)?, dom.interior_volume());

    let mut worst = 0.0f64;
    for (i, &t) in fam.levels().iter().enumerate() {
        let mine = alpha_perimeter(&tv.u.superlevel(t), Some(&omega), &metric)?;
        let theirs = alpha_perimeter(fam.set(i), Some(&omega), &metric)?;
        let r = if theirs > 0.0 { mine / theirs } else if mine == 0.0 { 1.0 } else { f64::INFINITY };
        worst = worst.max(r);
    }
    println!("worst superlevel perimeter ratio {worst:.4}");
    Ok(())
}
