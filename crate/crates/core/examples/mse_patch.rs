//! Weighted minimal graphs: Newton solves against a first-integral oracle,
//! the linearized operator and the discrete comparison principle.
//!
//! `cargo run --release --example mse_patch -- [nodes]`

use std::sync::Arc;

use least_gradient::mse::{
    comparison_test, ellipticity_certificate, first_integral_profile, homotopy_coefficients,
    jacobian_fd_error, solve_mse_dirichlet, GraphWeight, NewtonParams, PatchGeometry,
    SpatialWeight,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cells: usize = std::env::args().nth(1).map_or(Ok(200), |s| s.parse())?;
    let a = |x: f64| 2.0 + x.sin();
    let weight: Arc<dyn GraphWeight> = Arc::new(SpatialWeight(move |x: &[f64]| a(x[0])));
    let geom = PatchGeometry::interval(0.0, 1.0, cells)?;
    let params = NewtonParams::default();

    let xs: Vec<f64> = (0..geom.node_count()).map(|n| geom.node_position(n)[0]).collect();
    let mut solutions = Vec::new();
    for c in [0.5, 1.0] {
        let exact = first_integral_profile(a, c, 0.0, 0.0, &xs, 64)?;
        let end = *exact.last().unwrap();
        let (patch, rep) = solve_mse_dirichlet(geom, weight.clone(), |x| if x[0] < 0.5 { 0.0 } else { end }, &params)?;
        let err = patch
            .heights()
            .iter()
            .zip(&exact)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        let coeffs = homotopy_coefficients(&patch, &patch)?;
        let cert = ellipticity_certificate(&coeffs, patch.non_degeneracy(), coeffs.gradient_bound);
        println!(
            "flux {c}: {} Newton steps, residual {:.1e}, max error vs oracle {:.2e}, ellipticity margin {:.2e}",
            rep.iterations, rep.residual, err, cert.margin
        );
        solutions.push(patch);
    }
    let coarse = PatchGeometry::interval(0.0, 1.0, 40)?;
    let (p, _) = solve_mse_dirichlet(coarse, weight.clone(), |x| 0.3 * x[0], &params)?;
    println!("Jacobian vs differences: relative {:.2e}", jacobian_fd_error(&p, 1e-6)?);

    let report = comparison_test(&solutions[1], &solutions[0], &params)?;
    println!(
        "comparison: pass {}, min gap {:.3e}, touching {}",
        report.pass, report.min_gap, report.touching
    );
    Ok(())
}
