//! Exact minimal cuts against brute-force enumeration on tiny grids with
//! random weights and random exterior data.
//!
//! `cargo run --release --example oracle_equivalence -- [instances] [seed]`

use std::time::Instant;

use least_gradient::setmin::exhaustive_pair;
use least_gradient::{
    build_domain, CutMetric, CutProblem, CutStencil, IndicatorSet, Neighborhood, Shape, WeightField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(Ok(200), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();
    let kinds = [Neighborhood::N4, Neighborhood::N8, Neighborhood::N16];
    let mut agree = 0;
    for i in 0..count {
        let (nx, ny) = [(4, 4), (2, 8), (3, 5), (4, 3), (1, 16)][i % 5];
        let shape = Shape::Rect { min: [0.0, 0.0], max: [nx as f64, ny as f64] };
        let dom = build_domain(&shape, 1.0, 3)?;
        let w = WeightField::random_uniform(&dom, 1.0, 3.0, &mut rng)?;
        let kind = kinds[i % kinds.len()];
        let metric = CutMetric::new(&dom, &w, &CutStencil::new(kind, 1.0))?;
        let density = rng.gen_range(0.2..0.8);
        let exterior = IndicatorSet::from_vec(dom.grid(), (0..dom.len()).map(|_| rng.gen_bool(density)).collect());
        let problem = CutProblem::star(&dom, &metric, &exterior);
        let flow = problem.solve();
        let brute = exhaustive_pair(&problem)?;
        if flow.value_units == brute.value_units && flow.e_max == brute.e_max && flow.e_min == brute.e_min {
            agree += 1;
        } else {
            println!("instance {i}: flow {} vs enumeration {}", flow.value_units, brute.value_units);
        }
    }
    println!("{agree}/{count} instances agree exactly ({:.2} s)", started.elapsed().as_secs_f64());
    Ok(())
}
