mod common;

use common::max_diff;
use proptest::prelude::*;
use treeiso::instances::{generate, InstanceSpec, LossKind, Shape, Weights};
use treeiso::io::ProblemFile;
use treeiso::loss::equilibrium_t;
use treeiso::oracle::{enumerate, pava, solve_reduced, SignPattern};
use treeiso::solver::kkt::residual_on_edges;
use treeiso::tree::{tree_linear_solve, Arborescence, Subtree};
use treeiso::{solve, LossFunction, LossGroup};

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![Just(Shape::Chain), Just(Shape::Star), Just(Shape::Random)]
}

fn loss() -> impl Strategy<Value = LossFunction> {
    prop_oneof![
        (0.1..5.0f64, -20.0..20.0f64).prop_map(|(w, y)| LossFunction::quadratic(w, y).unwrap()),
        (0.1..3.0f64, 0.0..2.0f64, -50.0..50.0f64).prop_map(|(a, b, c)| LossFunction::quartic(a, b, c).unwrap()),
    ]
}

fn parents() -> impl Strategy<Value = Vec<usize>> {
    (1usize..30).prop_flat_map(|n| (0..n).map(|v| 0..=v).collect::<Vec<_>>())
}

proptest! {
    #[test]
    fn inverse_derivative_round_trips(f in loss(), s in -200.0..200.0f64) {
        let x = f.inverse_derivative(s);
        prop_assert!((f.derivative(x) - s).abs() <= 1e-10 * (1.0 + s.abs()));
    }

    #[test]
    fn group_inverse_matches_member_sum(fs in prop::collection::vec(loss(), 1..6), s in -100.0..100.0f64) {
        let g = LossGroup::from_losses(&fs).unwrap();
        let x = g.inverse_derivative(s);
        let total: f64 = fs.iter().map(|f| f.derivative(x)).sum();
        prop_assert!((total - s).abs() <= 1e-9 * (1.0 + s.abs()));
    }

    #[test]
    fn crossing_gap_is_increasing(fs in prop::collection::vec(loss(), 1..5), attach in loss(),
                                  beta in -20.0..20.0f64, t1 in -30.0..30.0f64, dt in 0.01..10.0f64) {
        let g = LossGroup::from_losses(&fs).unwrap();
        let gap = |t: f64| g.inverse_derivative(t + beta) - attach.inverse_derivative(-t);
        prop_assert!(gap(t1) < gap(t1 + dt));
        let (t, x) = equilibrium_t(&g, beta, &attach);
        prop_assert!(gap(t).abs() <= 1e-8 * (1.0 + x.abs()));
    }

    #[test]
    fn tree_solve_balances_every_other_node(ps in parents(), seed in 0u64..1000) {
        let n = ps.len() + 1;
        let arb = Arborescence::from_parents(&ps, &vec![1.0; ps.len()], &vec![1.0; ps.len()]).unwrap();
        let b: Vec<f64> = (0..n).map(|v| ((v as u64 * 2654435761 + seed) % 1000) as f64 / 37.0 - 13.0).collect();
        let ancestor = (seed as usize) % n;
        let sub = Subtree::prefix(&arb, n);
        let z = tree_linear_solve(&arb, &sub, ancestor, &b).unwrap();
        let mut balance = vec![0.0; n];
        for (e, ze) in z {
            balance[arb.tail(e)] += ze;
            balance[arb.head(e)] -= ze;
        }
        for v in (0..n).filter(|&v| v != ancestor) {
            prop_assert!((balance[v] - b[v]).abs() <= 1e-12 * (1.0 + b.iter().map(|x| x.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn pava_is_monotone_and_preserves_the_total(data in prop::collection::vec((-50.0..50.0f64, 0.1..5.0f64), 0..60)) {
        let (y, w): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
        let x = pava(&y, &w);
        prop_assert!(x.windows(2).all(|p| p[0] <= p[1] + 1e-12));
        let before: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
        let after: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()));
    }

    #[test]
    fn problem_files_round_trip(sh in shape(), n in 1usize..15, seed in 0u64..10_000) {
        let inst = generate(&InstanceSpec::new(sh, n, seed).loss(LossKind::Mixed));
        let file = ProblemFile::from_parts(&inst.tree, &inst.losses, None).unwrap();
        let back = ProblemFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        let loaded = back.resolve().unwrap();
        prop_assert_eq!(loaded.tree, inst.tree);
        prop_assert_eq!(loaded.losses, inst.losses);
    }

    #[test]
    fn mapped_back_solution_certifies_the_input(sh in shape(), n in 1usize..60, seed in 0u64..10_000, mixed in any::<bool>()) {
        let kind = if mixed { LossKind::Mixed } else { LossKind::Quadratic };
        let inst = generate(&InstanceSpec::new(sh, n, seed).loss(kind));
        let p = inst.problem().unwrap();
        let sol = solve(&p).unwrap();
        prop_assert!(sol.stats.kkt_residual <= 1e-8);
        let (x, z) = p.to_input_order(&sol.x, &sol.z);
        prop_assert!(residual_on_edges(inst.tree.edges().iter().copied(), &inst.losses, &x, &z) <= 1e-8);
    }

    #[test]
    fn solver_matches_oracle(sh in shape(), n in 1usize..9, seed in 0u64..100_000, mixed in any::<bool>()) {
        let kind = if mixed { LossKind::Mixed } else { LossKind::Quadratic };
        let p = generate(&InstanceSpec::new(sh, n, seed).loss(kind)).problem().unwrap();
        let sol = solve(&p).unwrap();
        let orc = enumerate(&p).unwrap();
        prop_assert!(max_diff(&sol.x, &orc.x) <= 1e-6);
    }

    #[test]
    fn accepted_pattern_beats_every_reduced_minimizer(n in 1usize..6, seed in 0u64..10_000) {
        let p = generate(&InstanceSpec::new(Shape::Random, n, seed).loss(LossKind::Mixed)).problem().unwrap();
        let best = p.objective(&enumerate(&p).unwrap().x);
        let edges = p.edge_count();
        for index in 0..3u64.pow(edges as u32) {
            let pattern = SignPattern::from_index(index, edges);
            if !pattern.is_feasible(&p) {
                continue;
            }
            let (x, _) = solve_reduced(&p, &pattern).unwrap();
            prop_assert!(best <= p.objective(&x) + 1e-9);
        }
    }

    #[test]
    fn isotonic_chains_match_pava(n in 1usize..200, seed in 0u64..10_000, sorted in any::<bool>()) {
        let inst = generate(&InstanceSpec::new(Shape::Chain, n, seed).weights(Weights::Isotonic).monotone_y(sorted));
        let w: Vec<f64> = inst.losses.iter().map(|f| match f {
            LossFunction::Quadratic { w, .. } => *w,
            _ => unreachable!(),
        }).collect();
        let sol = solve(&inst.problem().unwrap()).unwrap();
        prop_assert!(max_diff(&sol.x, &pava(&inst.y, &w)) <= 1e-8);
        if sorted {
            prop_assert_eq!(sol.stats.inner_iterations(), 0);
        }
    }
}
