//! Weighted area of a hypersurface equals its area in the conformal metric
//! `a^σ δ`. Both quadratures are evaluated on a circle, the parametric sphere
//! and a triangulated sphere.
//!
//! `cargo run --release --example conformal_mass`

use least_gradient::conformal::{conformal_mass, Surface};
use least_gradient::WeightFn;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pi = std::f64::consts::PI;
    let radial = WeightFn::Radial { base: 1.0, coeff: 1.0, center: [0.0; 3] };
    let cases = [
        ("circle r=0.5, 10⁴ segments", Surface::circle([0.0, 0.0], 0.5, 10_000), radial, 2.0, 1.25 * pi),
        ("unit sphere, 16² panels", Surface::sphere([0.0; 3], 1.0, 16), WeightFn::Constant(4.0), 1.0, 16.0 * pi),
        ("icosphere, 5 subdivisions", Surface::icosphere([0.0; 3], 1.0, 5), WeightFn::Constant(4.0), 1.0, 16.0 * pi),
    ];
    for (name, surface, a, sigma, exact) in cases {
        let m = conformal_mass(&surface, &a, sigma)?;
        println!(
            "{name:28} weighted {:.9}  conformal {:.9}  exact {exact:.9}  errors {:.1e} / {:.1e}",
            m.weighted_area,
            m.riemannian_area,
            (m.weighted_area - exact).abs(),
            (m.riemannian_area - exact).abs()
        );
    }
    Ok(())
}
