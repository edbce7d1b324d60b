use cahnbc_core::graphs::{admissible_catalog, check_contracts, GraphKind, ROOT_TOL};
use cahnbc_core::{MonotoneGraph, Perturbation, PotentialPair};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn graphs() -> impl Strategy<Value = MonotoneGraph> {
    prop_oneof![
        (0.0..5.0f64).prop_map(MonotoneGraph::linear),
        (0.1..5.0f64).prop_map(MonotoneGraph::cubic),
        Just(MonotoneGraph::obstacle()),
        Just(MonotoneGraph::logarithmic()),
        (0.5..3.0f64, 0.0..2.0f64, 0usize..4).prop_map(|(a, b, k)| {
            let kind = [GraphKind::Linear, GraphKind::Cubic, GraphKind::Obstacle, GraphKind::Logarithmic][k];
            MonotoneGraph::composite(kind, a, b).unwrap()
        }),
    ]
}

fn eps() -> impl Strategy<Value = f64> {
    prop_oneof![1e-4..1e-2f64, 1e-2..1.0f64, Just(1.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn resolvent_is_nonexpansive(g in graphs(), e in eps(), r in -10.0..10.0f64, s in -10.0..10.0f64) {
        let (jr, js) = (g.resolvent(e, r).unwrap(), g.resolvent(e, s).unwrap());
        prop_assert!((jr - js).abs() <= (r - s).abs() + 2.0 * ROOT_TOL);
        prop_assert!(g.domain().contains(jr));
    }

    #[test]
    fn resolvent_solves_its_equation(g in graphs(), e in eps(), j in -0.99..0.99f64) {
        // forward map r = j + ε·β(j), then invert
        let r = j + e * g.min_section(j).unwrap();
        prop_assert!((g.resolvent(e, r).unwrap() - j).abs() <= 1e-9 * (1.0 + r.abs()));
    }

    #[test]
    fn yosida_is_lipschitz_and_monotone(g in graphs(), e in eps(), r in -10.0..10.0f64, s in -10.0..10.0f64) {
        let (br, bs) = (g.yosida(e, r).unwrap(), g.yosida(e, s).unwrap());
        prop_assert!((br - bs).abs() <= (r - s).abs() / e + TOL / e);
        prop_assert!((br - bs) * (r - s) >= -TOL);
        prop_assert_eq!(g.yosida(e, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn yosida_is_below_minimal_section(g in graphs(), e in eps(), r in -0.999..0.999f64) {
        prop_assert!(g.yosida(e, r).unwrap().abs() <= g.min_section(r).unwrap().abs() + TOL);
    }

    #[test]
    fn coarser_parameter_gives_smaller_yosida(g in graphs(), e in 1e-4..0.5f64, rho in 1.0..2.0f64, r in -5.0..5.0f64) {
        prop_assert!(g.yosida(e * rho, r).unwrap().abs() <= g.yosida(e, r).unwrap().abs() + TOL);
    }

    #[test]
    fn moreau_envelope_is_sandwiched(g in graphs(), e in eps(), r in -3.0..3.0f64) {
        let env = g.moreau(e, r).unwrap();
        prop_assert!(env >= -TOL);
        prop_assert!(env <= g.primitive(r) + TOL);
    }

    #[test]
    fn moreau_grows_as_eps_shrinks(g in graphs(), e in 1e-3..0.5f64, r in -3.0..3.0f64) {
        prop_assert!(g.moreau(e, r).unwrap() <= g.moreau(0.5 * e, r).unwrap() + TOL);
    }

    #[test]
    fn moreau_derivative_is_yosida(g in graphs(), e in 1e-2..1.0f64, r in -2.0..2.0f64) {
        let h = 1e-6;
        let fd = (g.moreau(e, r + h).unwrap() - g.moreau(e, r - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - g.yosida(e, r).unwrap()).abs() <= 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn perturbations_are_lipschitz(slope in -5.0..5.0f64, r in -10.0..10.0f64, s in -10.0..10.0f64) {
        for p in [Perturbation::Zero, Perturbation::linear(slope)] {
            prop_assert!((p.eval(r) - p.eval(s)).abs() <= p.lipschitz() * (r - s).abs() + 1e-12);
        }
    }
}

#[test]
fn yosida_converges_monotonically_to_minimal_section() {
    for g in [MonotoneGraph::cubic(1.0), MonotoneGraph::logarithmic(), MonotoneGraph::linear(2.0), MonotoneGraph::obstacle()] {
        for r in [-0.9, -0.4, 0.1, 0.5, 0.95] {
            let target = g.min_section(r).unwrap().abs();
            let mut prev = 0.0;
            let mut e = 1.0;
            for _ in 0..20 {
                let v = g.yosida(e, r).unwrap().abs();
                assert!(v + 1e-12 >= prev, "{:?} r={r} eps={e}", g.kind);
                assert!(v <= target + 1e-10);
                prev = v;
                e *= 0.5;
            }
            assert!((target - prev).abs() <= 1e-4 * (1.0 + target), "{:?} r={r}: {prev} vs {target}", g.kind);
        }
    }
}

#[test]
fn catalog_contracts_hold() {
    let samples: Vec<(f64, f64, f64)> = (0..1000)
        .map(|k| {
            let t = k as f64;
            let r = 4.0 * (0.37 * t).sin();
            let s = 4.0 * (0.73 * t + 1.0).cos();
            let e = 10f64.powf(-4.0 * ((0.11 * t).sin() * 0.5 + 0.5));
            (r, s, e)
        })
        .collect();
    for (name, pair) in admissible_catalog(2.0, 1.0) {
        for g in [pair.bulk, pair.boundary] {
            let rep = check_contracts(&g, &samples, pair.rho.max(1.5));
            assert!(rep.passed(), "{name}: {rep:?}");
        }
    }
}

#[test]
fn domination_examples() {
    let pts: Vec<f64> = (0..100).map(|k| -3.0 + 6.0 * k as f64 / 99.0).collect();
    let composite = PotentialPair {
        bulk: MonotoneGraph::cubic(1.0),
        pi: Perturbation::Zero,
        boundary: MonotoneGraph::composite(GraphKind::Cubic, 2.0, 1.0).unwrap(),
        pi_gamma: Perturbation::Zero,
        rho: 1.0,
        c0: 0.01,
        same_growth: false,
    };
    assert!(composite.check_domination(&[1.0, 0.1, 0.01], &pts).passed);

    let obstacle = PotentialPair::obstacle(1.0);
    assert!(obstacle.check_domination(&[1.0, 0.1, 0.01], &pts).passed);

    let bad = PotentialPair {
        bulk: MonotoneGraph::cubic(2.0),
        boundary: MonotoneGraph::cubic(1.0),
        same_growth: false,
        ..PotentialPair::regular()
    };
    let pts2: Vec<f64> = (0..81).map(|k| -2.0 + 4.0 * k as f64 / 80.0).collect();
    let rep = bad.check_domination(&[1.0, 0.1, 0.01], &pts2);
    assert!(!rep.passed);
    assert_eq!(rep.section_worst_r.abs(), 2.0);
}

#[test]
fn admissible_pairs_dominate_for_all_eps() {
    let pts: Vec<f64> = (0..400).map(|k| -4.0 + 8.0 * k as f64 / 399.0).collect();
    let eps: Vec<f64> = (0..10).map(|k| 0.5f64.powi(k)).collect();
    for (name, pair) in admissible_catalog(2.0, 1.0) {
        let rep = pair.check_domination(&eps, &pts);
        assert!(rep.passed, "{name}: {rep:?}");
    }
}
