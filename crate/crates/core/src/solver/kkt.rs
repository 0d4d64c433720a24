//! Optimality certificate and objective for a primal-dual pair.

use crate::loss::LossFunction;
use crate::tree::Edge;

use super::active_set::{nearly_equal, EQUALITY_TOLERANCE};

/// Distance from `z` to the interval `[lo, hi]`.
fn distance_to_interval(z: f64, lo: f64, hi: f64) -> f64 {
    (lo - z).max(z - hi).max(0.0)
}

/// Violation of the optimality system by `(x, z)` on an arbitrary directed
/// tree: the worst node-balance error plus the worst edge violation.
///
/// Node balance is `Σ z(out) − Σ z(in) = f_i'(x_i)`. An edge dual must lie in
/// `[−λ, μ]`, and must equal `−λ` when `x_tail > x_head` or `μ` when
/// `x_tail < x_head` (values within the equality tolerance count as tied).
pub fn residual_on_edges<I>(edges: I, losses: &[LossFunction], x: &[f64], z: &[f64]) -> f64
where
    I: IntoIterator<Item = Edge>,
{
    let mut balance = vec![0.0; x.len()];
    let mut edge_violation: f64 = 0.0;
    for (e, edge) in edges.into_iter().enumerate() {
        let ze = z[e];
        balance[edge.tail] += ze;
        balance[edge.head] -= ze;
        let (xi, xj) = (x[edge.tail], x[edge.head]);
        let mut v = distance_to_interval(ze, -edge.lambda, edge.mu);
        if !nearly_equal(xi, xj, EQUALITY_TOLERANCE) {
            let forced = if xi > xj { -edge.lambda } else { edge.mu };
            v += (ze - forced).abs();
        }
        edge_violation = edge_violation.max(if v.is_nan() { f64::INFINITY } else { v });
    }
    let node_violation = balance
        .iter()
        .zip(losses)
        .zip(x)
        .map(|((b, f), &xi)| {
            let r = (b - f.derivative(xi)).abs();
            if r.is_nan() {
                f64::INFINITY
            } else {
                r
            }
        })
        .fold(0.0, f64::max);
    node_violation + edge_violation
}

fn penalty(weight: f64, gap: f64, tied: bool) -> f64 {
    if gap <= 0.0 || (tied && weight.is_infinite()) {
        0.0
    } else {
        weight * gap
    }
}

/// `Σ f_i(x_i) + Σ λ (x_i − x_j)_+ + Σ μ (x_j − x_i)_+`. An infinite weight
/// on a violated order gives `+∞`; ties within tolerance cost nothing.
pub fn objective_on_edges<I>(edges: I, losses: &[LossFunction], x: &[f64]) -> f64
where
    I: IntoIterator<Item = Edge>,
{
    let fit: f64 = losses.iter().zip(x).map(|(f, &xi)| f.value(xi)).sum();
    let reg: f64 = edges
        .into_iter()
        .map(|e| {
            let (xi, xj) = (x[e.tail], x[e.head]);
            let tied = nearly_equal(xi, xj, EQUALITY_TOLERANCE);
            penalty(e.lambda, xi - xj, tied) + penalty(e.mu, xj - xi, tied)
        })
        .sum();
    fit + reg
}
