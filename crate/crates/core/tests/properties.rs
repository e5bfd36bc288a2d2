//! Randomized properties of cut minimizers and discrete perimeters.

use least_gradient::geometry::{alpha_perimeter_units, coarea_quadrature, submodularity_defect};
use least_gradient::setmin::{exhaustive_min, exhaustive_optima, CutProblem};
use least_gradient::{
    build_domain, solve_star, CutMetric, CutStencil, DiscreteDomain, IndicatorSet, Neighborhood,
    ScalarField, Shape, WeightField,
};
use proptest::prelude::*;

/// 4x4 interior, small enough to enumerate.
fn tiny() -> DiscreteDomain {
    let shape = Shape::Rect {
        min: [0.0, 0.0],
        max: [1.0, 1.0],
    };
    build_domain(&shape, 0.25, 3).unwrap()
}

fn metric(dom: &DiscreteDomain, samples: &[f64], hood: Neighborhood) -> CutMetric {
    let cells = (0..dom.len()).map(|c| samples[c % samples.len()]).collect();
    let w = WeightField::from_samples(cells).unwrap();
    CutMetric::new(dom, &w, &CutStencil::new(hood, dom.spacing())).unwrap()
}

/// Exterior data `{a x + b y ≥ t}`.
fn half_plane(dom: &DiscreteDomain, a: f64, b: f64, t: f64) -> IndicatorSet {
    let g = dom.grid();
    IndicatorSet::from_fn(g, |c| {
        let x = g.center(c);
        a * x[0] + b * x[1] >= t
    })
}

fn hood() -> impl Strategy<Value = Neighborhood> {
    prop_oneof![Just(Neighborhood::N4), Just(Neighborhood::N8), Just(Neighborhood::N16)]
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..3.0, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_matches_enumeration(w in weights(), nb in hood(), a in -1.0f64..1.0, b in -1.0f64..1.0, t in -0.5f64..0.5) {
        let dom = tiny();
        let m = metric(&dom, &w, nb);
        let ext = half_plane(&dom, a, b, t);
        let flow = solve_star(&dom, &m, &ext).unwrap();
        let brute = exhaustive_min(&dom, &m, &ext).unwrap();
        prop_assert_eq!(flow.value_units, brute.value_units);
        prop_assert_eq!(&flow.e_min, &brute.e_min);
        prop_assert_eq!(&flow.e_max, &brute.e_max);
    }

    #[test]
    fn optima_form_a_lattice(w in weights(), nb in hood(), a in -1.0f64..1.0, t in -0.5f64..0.5) {
        let dom = tiny();
        let m = metric(&dom, &w, nb);
        let problem = CutProblem::star(&dom, &m, &half_plane(&dom, a, 1.0, t));
        let (best, sets) = exhaustive_optima(&problem).unwrap();
        for x in sets.iter().take(6) {
            for y in sets.iter().take(6) {
                prop_assert_eq!(m.cut_units(&x.union(y), None), best);
                prop_assert_eq!(m.cut_units(&x.intersection(y), None), best);
            }
        }
    }

    #[test]
    fn minimizers_shrink_as_the_level_rises(w in weights(), nb in hood(), s in -0.8f64..0.8, dt in 0.0f64..0.8) {
        let dom = tiny();
        let m = metric(&dom, &w, nb);
        let lo = solve_star(&dom, &m, &half_plane(&dom, 1.0, 0.5, s)).unwrap();
        let hi = solve_star(&dom, &m, &half_plane(&dom, 1.0, 0.5, s + dt)).unwrap();
        prop_assert!(hi.e_max.is_subset(&lo.e_max));
        prop_assert!(hi.e_min.is_subset(&lo.e_min));
        prop_assert!(lo.e_min.is_subset(&lo.e_max));
    }

    #[test]
    fn perimeter_is_complement_symmetric_and_submodular(
        w in weights(), nb in hood(),
        bits_a in prop::collection::vec(any::<bool>(), 1..200),
        bits_b in prop::collection::vec(any::<bool>(), 1..200),
    ) {
        let dom = tiny();
        let m = metric(&dom, &w, nb);
        let g = dom.grid();
        let a = IndicatorSet::from_fn(g, |c| bits_a[c % bits_a.len()]);
        let b = IndicatorSet::from_fn(g, |c| bits_b[c % bits_b.len()]);
        let ac = IndicatorSet::from_fn(g, |c| !a.contains(c));
        prop_assert_eq!(alpha_perimeter_units(&a, None, &m).unwrap(), alpha_perimeter_units(&ac, None, &m).unwrap());
        prop_assert!(submodularity_defect(&a, &b, None, &m).unwrap() >= 0.0);
    }

    #[test]
    fn coarea_holds_for_step_fields(w in weights(), nb in hood(), vals in prop::collection::vec(-4i32..4, 1..60)) {
        let dom = tiny();
        let m = metric(&dom, &w, nb);
        let u = ScalarField::from_fn(dom.grid(), |c| vals[c % vals.len()] as f64 * 0.25);
        let r = coarea_quadrature(&u, None, &m).unwrap();
        prop_assert!((r.tv_value - r.coarea_value).abs() <= 1e-12 * (1.0 + r.tv_value));
    }
}

#[test]
fn solving_twice_gives_identical_pairs() {
    let dom = build_domain(&Shape::unit_disk(), 1.0 / 24.0, 3).unwrap();
    let m = metric(&dom, &[1.0, 1.3, 0.8, 2.1, 1.7], Neighborhood::N16);
    let ext = half_plane(&dom, 0.3, 1.0, 0.1);
    assert_eq!(solve_star(&dom, &m, &ext).unwrap(), solve_star(&dom, &m, &ext).unwrap());
}
