//! The pooled block containing the attachment node and its closed-form
//! primal and dual trajectories in the parameter `t`.
//!
//! With the active set fixed, every node of the block takes the common value
//! `x_B(t) = ((Σ_B f)*)'(t + beta)`, nodes outside stay frozen, and the
//! attached node sits at `(f*)'(−t)`. Rooting the block at the anchor, the
//! dual of a block edge is `±(S_C(x_B) − alpha)`, where `C` is the side of
//! the edge away from the anchor, `S_C` the summed derivative over `C`, and
//! `alpha` the net boundary flow out of `C`. The sign is `+` when the edge
//! leaves `C` (its tail is in `C`).

use crate::loss::{LossFunction, LossGroup};
use crate::tree::{component_of, Subtree};

use super::{PrimalDualState, Problem};

/// A block edge together with the data of the side away from the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEdge {
    pub edge: usize,
    /// Endpoint on the far side from the anchor.
    pub lower: usize,
    /// True when `lower` is the edge's tail, so the edge dual increases
    /// with the block value.
    pub tail_is_lower: bool,
    /// Summed losses over the far side.
    pub closure: LossGroup,
    /// Net boundary flow out of the far side, `Σ z(out) − Σ z(in)` over
    /// edges leaving the block.
    pub alpha: f64,
}

impl BlockEdge {
    /// Dual of this edge when the block sits at `x`.
    pub fn dual(&self, x: f64) -> f64 {
        let s = self.closure.derivative(x) - self.alpha;
        if self.tail_is_lower {
            s
        } else {
            -s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentView {
    pub anchor: usize,
    pub block: Subtree,
    pub beta: f64,
    pub group: LossGroup,
    pub edges: Vec<BlockEdge>,
    /// Boundary edges whose tail is in the block.
    pub omega_plus: Vec<usize>,
    /// Boundary edges whose head is in the block.
    pub omega_minus: Vec<usize>,
}

impl ComponentView {
    /// Common value of the block nodes at parameter `t`.
    pub fn block_value(&self, t: f64) -> f64 {
        self.group.inverse_derivative(t + self.beta)
    }

    /// The parameter at which the block value equals `x`.
    pub fn parameter_at(&self, x: f64) -> f64 {
        self.group.derivative(x) - self.beta
    }

    /// Block-edge duals at parameter `t`, in the order of `self.edges`.
    pub fn dual_at(&self, t: f64) -> Vec<(usize, f64)> {
        self.dual_at_value(self.block_value(t))
    }

    pub fn dual_at_value(&self, x: f64) -> Vec<(usize, f64)> {
        self.edges.iter().map(|be| (be.edge, be.dual(x))).collect()
    }

    /// Primal point over the prefix plus the attached node at parameter `t`.
    /// `frozen` supplies the values outside the block; its last slot is the
    /// attached node.
    pub fn primal_at(&self, frozen: &[f64], attach: &LossFunction, t: f64) -> Vec<f64> {
        let mut x = frozen.to_vec();
        let xb = self.block_value(t);
        for &v in &self.block.nodes {
            x[v] = xb;
        }
        let last = x.len() - 1;
        x[last] = attach.inverse_derivative(-t);
        x
    }
}

/// Assembles the block of `anchor` under the current active set, its
/// boundary aggregates and the per-edge closure data, in one traversal.
pub fn build_component_view(problem: &Problem, state: &PrimalDualState, anchor: usize) -> ComponentView {
    let arb = problem.arborescence();
    let prefix = state.prefix_len();
    let block = component_of(arb, prefix, |e| state.active.is_equal(e), anchor);

    let mut omega_plus = Vec::new();
    let mut omega_minus = Vec::new();
    // Net flow out of each block node through boundary edges.
    let mut boundary = vec![0.0; block.nodes.len()];
    for (k, &v) in block.nodes.iter().enumerate() {
        if let Some(p) = arb.parent(v) {
            if !block.contains(p) {
                let e = v - 1;
                boundary[k] -= state.z[e];
                omega_minus.push(e);
            }
        }
        for &c in arb.children(v) {
            if c >= prefix {
                break;
            }
            if !block.contains(c) {
                let e = c - 1;
                boundary[k] += state.z[e];
                omega_plus.push(e);
            }
        }
    }

    // Children in the anchor rooting come after their parent in BFS order,
    // so a reverse sweep accumulates every closure.
    let losses = problem.losses();
    let mut position = vec![usize::MAX; prefix];
    for (k, &v) in block.nodes.iter().enumerate() {
        position[v] = k;
    }
    let mut closure: Vec<LossGroup> = block.nodes.iter().map(|&v| LossGroup::new(&losses[v])).collect();
    let mut flow = boundary;
    let mut edges = Vec::with_capacity(block.nodes.len().saturating_sub(1));
    for k in (1..block.nodes.len()).rev() {
        let v = block.nodes[k];
        let e = block.links[k].expect("non-root block node has a link");
        let up = if arb.head(e) == v { arb.tail(e) } else { arb.head(e) };
        let pk = position[up];
        let (c, f) = (closure[k], flow[k]);
        closure[pk].merge(&c);
        flow[pk] += f;
        edges.push(BlockEdge {
            edge: e,
            lower: v,
            tail_is_lower: arb.tail(e) == v,
            closure: c,
            alpha: f,
        });
    }
    edges.reverse();

    ComponentView {
        anchor,
        beta: flow[0],
        group: closure[0],
        block,
        edges,
        omega_plus,
        omega_minus,
    }
}
