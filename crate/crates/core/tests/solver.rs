mod common;

use common::{five_node, max_diff};
use treeiso::instances::{generate, InstanceSpec, LossKind, Shape};
use treeiso::oracle::enumerate;
use treeiso::solver::{generate as attach_one, Branch, StepTolerances};
use treeiso::tree::decompose;
use treeiso::{solve, Problem};

#[test]
fn five_node_optimum() {
    let sol = solve(&five_node()).unwrap();
    assert!(max_diff(&sol.x, &[3.0, 3.0, 3.0, 4.0, 1.0]) < 1e-10, "{:?}", sol.x);
    assert!(max_diff(&sol.z, &[-1.0, 0.0, 4.0, -3.0]) < 1e-10, "{:?}", sol.z);
}

#[test]
fn five_node_intermediate_pairs() {
    let p = five_node();
    let tol = StepTolerances::default();
    let mut x = vec![p.losses()[0].minimizer()];
    let mut z = vec![];
    let expected: [(&[f64], &[f64]); 4] = [
        (&[3.0, 3.0], &[-1.0]),
        (&[3.0, 3.0, 2.0], &[-1.0, 0.0]),
        (&[4.0, 4.0, 4.0, 4.0], &[-2.0, 2.0, 4.0]),
        (&[3.0, 3.0, 3.0, 4.0, 1.0], &[-1.0, 0.0, 4.0, -3.0]),
    ];
    let branches = [Branch::Decreasing, Branch::ZeroBound, Branch::Increasing, Branch::Decreasing];
    for ((attach, (ex, ez)), branch) in decompose(p.arborescence()).iter().zip(expected).zip(branches) {
        let (nx, nz, rec) = attach_one(&p, &x, &z, attach, &tol).unwrap();
        assert!(max_diff(&nx, ex) < 1e-10, "{nx:?}");
        assert!(max_diff(&nz, ez) < 1e-10, "{nz:?}");
        assert_eq!(rec.branch, branch);
        x = nx;
        z = nz;
    }
}

fn agree(spec: InstanceSpec) {
    let inst = generate(&spec);
    let p: Problem = inst.problem().unwrap();
    let sol = solve(&p).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
    let orc = enumerate(&p).unwrap();
    assert!(max_diff(&sol.x, &orc.x) < 1e-6, "{spec:?}\n{:?}\n{:?}", sol.x, orc.x);
}

#[test]
fn random_trees_match_the_oracle() {
    for seed in 0..300 {
        let n = 1 + (seed as usize % 8);
        agree(InstanceSpec::new(Shape::Random, n, seed).loss(LossKind::Mixed));
    }
}

#[test]
fn chains_and_stars_match_the_oracle() {
    for seed in 0..60 {
        agree(InstanceSpec::new(Shape::Chain, 7, seed));
        agree(InstanceSpec::new(Shape::Star, 7, seed).loss(LossKind::Mixed));
    }
}

#[test]
fn five_node_parameter_paths() {
    let sol = solve(&five_node()).unwrap();
    let paths: Vec<Vec<f64>> = sol
        .stats
        .generate
        .iter()
        .map(|r| r.steps.iter().map(|s| s.t).collect())
        .collect();
    assert_eq!(sol.stats.iterations_per_node(), vec![1, 0, 2, 2]);
    assert_eq!(sol.stats.equilibrium_calls(), 2);
    let expected: [&[f64]; 4] = [&[-1.0], &[], &[1.0, 4.0], &[0.0, -3.0]];
    for (got, want) in paths.iter().zip(expected) {
        assert!(max_diff(got, want) < 1e-12, "{paths:?}");
    }
    // Node 3 pulls edge (2,0) into the block; node 4 pushes edge (2,3) out.
    assert_eq!(sol.stats.generate[2].steps[0].joined_equal, vec![1]);
    assert_eq!(sol.stats.generate[3].steps[0].left_equal, vec![2]);
}

#[test]
fn kkt_residual_flags_bad_pairs() {
    let p = five_node();
    let x = [3.0, 3.0, 3.0, 4.0, 1.0];
    assert!(p.kkt_residual(&x, &[-1.0, 0.0, 4.0, -3.0]) < 1e-15);
    // Dual outside [−λ, μ] on edge (2,4).
    assert!(p.kkt_residual(&x, &[-1.0, 0.0, 4.0, -3.5]) >= 0.5);
    // Strict order with a dual off its bound.
    assert!(p.kkt_residual(&x, &[-1.0, 0.0, 3.0, -3.0]) >= 1.0);
    assert_eq!(p.objective(&x), 20.75);
    assert_eq!(p.objective(&[3.0, 2.0, 3.0, 4.0, 1.0]), f64::INFINITY);
}

#[test]
fn to_input_order_negates_flipped_duals() {
    use treeiso::tree::{DirectedTree, Edge};
    use treeiso::LossFunction;
    let tree = DirectedTree::new(2, vec![Edge::new(1, 0, 2.0, 0.0)]).unwrap();
    let losses = vec![LossFunction::quadratic(1.0, 0.0).unwrap(), LossFunction::quadratic(1.0, 4.0).unwrap()];
    let p = Problem::from_tree(&tree, losses.clone(), Some(0)).unwrap();
    assert!(p.arborescence().is_flipped(0));
    let sol = solve(&p).unwrap();
    let (x, z) = p.to_input_order(&sol.x, &sol.z);
    assert_eq!(x, vec![2.0, 2.0]);
    assert_eq!(z, vec![-2.0]);
    let res = treeiso::solver::kkt::residual_on_edges(tree.edges().iter().copied(), &losses, &x, &z);
    assert!(res < 1e-15);
}
