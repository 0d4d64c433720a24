//! Seeded random instances for tests and benchmarks.
//!
//! Targets `y` are uniform on `[0, 10]`. With [`Weights::Mixed`] each of
//! `λ` and `μ` is drawn independently from `{0, 0.5, 2, +∞}` with
//! probability 1/4 each; [`Weights::Isotonic`] uses `λ = +∞, μ = 0`, i.e.
//! `x_tail <= x_head`. [`LossKind::Mixed`] makes each node quadratic or
//! quartic with probability 1/2; a quartic node is `a·x² + b·x⁴ + c·x` with
//! `c` chosen so that its minimizer is the node's `y`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::loss::LossFunction;
use crate::solver::Problem;
use crate::tree::{DirectedTree, Edge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Path `0 → 1 → … → n−1`.
    Chain,
    /// Node 0 pointing at every other node.
    Star,
    /// Uniform random recursive tree with random edge orientation and
    /// shuffled labels.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Quadratic,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    Mixed,
    Isotonic,
}

const WEIGHT_CHOICES: [f64; 4] = [0.0, 0.5, 2.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub shape: Shape,
    pub n: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub weights: Weights,
    /// Sort the targets so they increase with node index.
    pub monotone_y: bool,
}

impl InstanceSpec {
    pub fn new(shape: Shape, n: usize, seed: u64) -> Self {
        InstanceSpec {
            shape,
            n,
            seed,
            loss: LossKind::Quadratic,
            weights: Weights::Mixed,
            monotone_y: false,
        }
    }

    pub fn loss(mut self, loss: LossKind) -> Self {
        self.loss = loss;
        self
    }

    pub fn weights(mut self, weights: Weights) -> Self {
        self.weights = weights;
        self
    }

    pub fn monotone_y(mut self, on: bool) -> Self {
        self.monotone_y = on;
        self
    }
}

/// A generated instance in input labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub tree: DirectedTree,
    pub losses: Vec<LossFunction>,
    /// Targets, for reference (the minimizer of each loss).
    pub y: Vec<f64>,
}

impl Instance {
    pub fn problem(&self) -> Result<Problem> {
        Problem::from_tree(&self.tree, self.losses.clone(), None)
    }
}

/// Builds the instance described by `spec`; the same spec always gives the
/// same instance.
///
/// # Panics
/// If `spec.n == 0`.
pub fn generate(spec: &InstanceSpec) -> Instance {
    assert!(spec.n >= 1, "an instance needs at least one node");
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=10.0)).collect();
    if spec.monotone_y {
        y.sort_by(f64::total_cmp);
    }
    let losses = y
        .iter()
        .map(|&yi| {
            let quartic = spec.loss == LossKind::Mixed && rng.random_bool(0.5);
            if quartic {
                let a = rng.random_range(0.25..=1.0);
                let b = rng.random_range(0.0..=0.05);
                LossFunction::Quartic {
                    a,
                    b,
                    c: -(2.0 * a * yi + 4.0 * b * yi * yi * yi),
                }
            } else {
                LossFunction::Quadratic {
                    w: rng.random_range(0.5..=2.0),
                    y: yi,
                }
            }
        })
        .collect();

    let weight = |rng: &mut ChaCha8Rng| match spec.weights {
        Weights::Mixed => (
            WEIGHT_CHOICES[rng.random_range(0..4)],
            WEIGHT_CHOICES[rng.random_range(0..4)],
        ),
        Weights::Isotonic => (f64::INFINITY, 0.0),
    };

    let edges = match spec.shape {
        Shape::Chain => (1..n)
            .map(|v| {
                let (l, m) = weight(&mut rng);
                Edge::new(v - 1, v, l, m)
            })
            .collect(),
        Shape::Star => (1..n)
            .map(|v| {
                let (l, m) = weight(&mut rng);
                Edge::new(0, v, l, m)
            })
            .collect(),
        Shape::Random => {
            let mut label: Vec<usize> = (0..n).collect();
            label.shuffle(&mut rng);
            (1..n)
                .map(|v| {
                    let p = rng.random_range(0..v);
                    let (l, m) = weight(&mut rng);
                    if rng.random_bool(0.5) {
                        Edge::new(label[p], label[v], l, m)
                    } else {
                        Edge::new(label[v], label[p], l, m)
                    }
                })
                .collect()
        }
    };
    let tree = DirectedTree::new(n, edges).expect("generated graph is a tree");
    Instance { tree, losses, y }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let spec = InstanceSpec::new(Shape::Random, 9, 42).loss(LossKind::Mixed);
        assert_eq!(generate(&spec), generate(&spec));
        assert_ne!(generate(&spec), generate(&InstanceSpec { seed: 43, ..spec }));
    }

    #[test]
    fn losses_are_minimized_at_targets() {
        let inst = generate(&InstanceSpec::new(Shape::Star, 30, 1).loss(LossKind::Mixed));
        for (f, y) in inst.losses.iter().zip(&inst.y) {
            assert!((f.minimizer() - y).abs() < 1e-9);
            assert!((0.0..=10.0).contains(y));
        }
    }

    #[test]
    fn isotonic_chain_with_sorted_targets() {
        let inst = generate(&InstanceSpec::new(Shape::Chain, 20, 3).weights(Weights::Isotonic).monotone_y(true));
        assert!(inst.y.windows(2).all(|w| w[0] <= w[1]));
        assert!(inst.tree.edges().iter().all(|e| e.lambda.is_infinite() && e.mu == 0.0 && e.head == e.tail + 1));
    }

    #[test]
    fn single_node() {
        let inst = generate(&InstanceSpec::new(Shape::Random, 1, 0));
        assert_eq!(inst.tree.node_count(), 1);
        assert!(inst.tree.edges().is_empty());
    }
}
