//! Two identities of the cut perimeter: the layer-cake formula for the
//! weighted variation and the submodular inequality for pairs of sets.
//!
//! `cargo run --release --example coarea_submodularity -- [fields] [pairs] [seed]`

use least_gradient::geometry::{coarea_quadrature, submodularity_defect};
use least_gradient::{
    build_domain, CutMetric, CutStencil, IndicatorSet, Neighborhood, ScalarField, Shape, WeightField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let fields: usize = args.next().map_or(Ok(100), |s| s.parse())?;
    let pairs: usize = args.next().map_or(Ok(500), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / 16.0;
    let dom = build_domain(&Shape::Rect { min: [0.0, 0.0], max: [1.0, 1.0] }, h, 3)?;
    let grid = dom.grid();
    let omega = dom.interior_set();

    let mut worst_gap = 0.0f64;
    for i in 0..fields {
        let w = WeightField::random_uniform(&dom, 0.5, 2.0, &mut rng)?;
        let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N16, h))?;
        // Every third field is quantized so that plateaus occur.
        let values = (0..grid.len())
            .map(|_| {
                let v: f64 = rng.gen_range(-1.0..1.0);
                if i % 3 == 0 { (v * 4.0).round() / 4.0 } else { v }
            })
            .collect();
        let u = ScalarField::from_vec(grid, values);
        let c = coarea_quadrature(&u, Some(&omega), &metric)?;
        worst_gap = worst_gap.max((c.tv_value - c.coarea_value).abs());
    }
    println!("coarea: {fields} random fields, largest |TV - layer-cake sum| = {worst_gap:.2e}");

    let w = WeightField::random_uniform(&dom, 1.0, 3.0, &mut rng)?;
    let metric = CutMetric::new(&dom, &w, &CutStencil::new(Neighborhood::N16, h))?;
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let (p, q) = (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
        let a = IndicatorSet::from_vec(grid, (0..grid.len()).map(|_| rng.gen_bool(p)).collect());
        let b = IndicatorSet::from_vec(grid, (0..grid.len()).map(|_| rng.gen_bool(q)).collect());
        worst = worst.min(submodularity_defect(&a, &b, None, &metric)?);
    }
    println!("submodularity: {pairs} random pairs, smallest defect = {worst:.3e}");
    Ok(())
}
