#![allow(dead_code)]

use treeiso::tree::Arborescence;
use treeiso::{LossFunction, Problem};

pub const INF: f64 = f64::INFINITY;

/// Five-node instance with edges (0,1), (0,2), (2,3), (2,4).
pub fn five_node() -> Problem {
    let arb = Arborescence::from_parents(&[0, 0, 2, 2], &[INF, 0.0, 0.0, 3.0], &[0.0, INF, 4.0, 3.0]).unwrap();
    let losses = vec![
        LossFunction::quadratic(1.0, 4.0).unwrap(),
        LossFunction::quadratic(1.0, 2.0).unwrap(),
        LossFunction::quadratic(1.0, 2.0).unwrap(),
        LossFunction::quadratic(1.0, 8.0).unwrap(),
        LossFunction::quartic(1.0, 0.25, 0.0).unwrap(),
    ];
    Problem::new(arb, losses).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
