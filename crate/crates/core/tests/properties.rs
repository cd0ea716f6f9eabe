mod common;

use carpet_core::exec::Exec;
use carpet_core::geometry::{generate_standard_carpet, Side};
use carpet_core::modulus::{
    check_admissible, solve_modulus, AdmissibilityOptions, ChainFamily, ModulusProblem, Tolerances,
};
use carpet_core::passage::{build_passage_graph, default_resolution};
use carpet_core::potential::{
    check_comparison, check_maximum_principle, potential_from_weights, recover_potential, surgery,
};
use common::{all_simple_chains, connected_graph, rel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn column_generation_matches_brute_force(g in connected_graph(12)) {
        let chains = all_simple_chains(&g, Side::Left, Side::Right, 5_000);
        prop_assume!(chains.is_some());
        let tol = Tolerances::default();
        let cg = solve_modulus(&ModulusProblem::crossing(g.clone(), Side::Left, Side::Right), &tol).unwrap();
        let bf = solve_modulus(
            &ModulusProblem { graph: g, family: ChainFamily::Explicit(chains.unwrap()), excluded: vec![] },
            &tol,
        ).unwrap();
        prop_assert!(rel(cg.modulus, bf.modulus) <= 1e-6, "{} vs {}", cg.modulus, bf.modulus);
    }

    #[test]
    fn metric_is_admissible_and_consistent(g in connected_graph(12)) {
        let tol = Tolerances::default();
        let m = solve_modulus(&ModulusProblem::crossing(g.clone(), Side::Left, Side::Right), &tol).unwrap();
        prop_assert!(m.invariant_failures(&tol).is_empty(), "{:?}", m.invariant_failures(&tol));
        let energy: f64 = m.lambda.iter().map(|l| l * l).sum();
        prop_assert!(rel(energy, m.modulus) <= 1e-9);
        let adm = check_admissible(
            &g, &m.lambda, Side::Left, Side::Right, &AdmissibilityOptions::default(), Exec::Sequential,
        ).unwrap();
        prop_assert!(adm.passed(), "min weight {}", adm.min_weight);
    }

    #[test]
    fn removing_a_disk_never_raises_modulus(g in connected_graph(10), pick in 0usize..10) {
        let tol = Tolerances::default();
        let full = solve_modulus(&ModulusProblem::crossing(g.clone(), Side::Left, Side::Right), &tol).unwrap();
        let id = g.disk_ids[pick % g.n_disks];
        let mut p = ModulusProblem::crossing(g, Side::Left, Side::Right);
        p.excluded = vec![id];
        match solve_modulus(&p, &tol) {
            Ok(m) => prop_assert!(m.modulus <= full.modulus * (1.0 + 1e-9) + 1e-12),
            Err(e) => prop_assert!(e.to_string().contains("graph-disconnected"), "{e}"),
        }
    }

    #[test]
    fn maximum_principle_on_random_graphs(g in connected_graph(12), seed in any::<u64>()) {
        let m = solve_modulus(&ModulusProblem::crossing(g.clone(), Side::Left, Side::Right), &Tolerances::default()).unwrap();
        let sol = recover_potential(&g, &m).unwrap();
        let r = check_maximum_principle(&sol, &g, 50, seed, 1e-9, Exec::Sequential);
        prop_assert_eq!(r.violations, 0, "worst {}", r.worst_deviation);
    }

    #[test]
    fn comparison_after_removing_left_disks(g in connected_graph(12), k in 1usize..3) {
        let m = solve_modulus(&ModulusProblem::crossing(g.clone(), Side::Left, Side::Right), &Tolerances::default()).unwrap();
        let sol = recover_potential(&g, &m).unwrap();
        let cut: Vec<usize> = g.side_disks(Side::Left).into_iter().take(k).collect();
        let (gb, sb) = surgery(&g, &sol, &cut);
        let c = check_comparison(&sol, &sb, &g, &gb, 1e-12).unwrap();
        prop_assert!(c.passed, "worst {}", c.worst);
    }

    #[test]
    fn potential_is_monotone_in_weights(g in connected_graph(10), bump in 0usize..10, by in 0.0f64..1.0) {
        let w: Vec<f64> = (0..g.n_disks).map(|i| 0.1 + 0.05 * i as f64).collect();
        let mut w2 = w.clone();
        w2[bump % g.n_disks] += by;
        let a = potential_from_weights(&g, &w, Side::Left);
        let b = potential_from_weights(&g, &w2, Side::Left);
        for i in 0..g.n_disks {
            prop_assert!(b.u_minus[i] >= a.u_minus[i] - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn modulus_is_scale_invariant(c in 0.01f64..100.0) {
        let base = generate_standard_carpet(2).unwrap();
        let tol = Tolerances::default();
        let md = |cfg: &carpet_core::geometry::CarpetConfig| {
            let g = build_passage_graph(cfg, default_resolution(cfg)).unwrap();
            solve_modulus(&ModulusProblem::crossing(g, Side::Left, Side::Right), &tol).unwrap().modulus
        };
        prop_assert!(rel(md(&base), md(&base.scale(c))) <= 1e-9);
    }
}
