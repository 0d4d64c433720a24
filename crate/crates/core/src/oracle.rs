//! Brute-force reference solvers.
//!
//! [`enumerate`] tries every sign pattern over the edges, solves the
//! problem with those signs fixed, rebuilds duals and keeps the first
//! candidate that passes the KKT screen. [`pava`] is the textbook
//! pool-adjacent-violators fit for weighted least squares on a chain.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::loss::{LossFunction, LossGroup};
use crate::solver::{kkt_residual, Problem, Sign, DEFAULT_KKT_TOLERANCE};
use crate::tree::{component_of, tree_linear_solve};

/// Largest edge count [`enumerate`] accepts (3^12 = 531441 patterns).
pub const MAX_ORACLE_EDGES: usize = 12;

/// One sign per internal edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<Sign>,
}

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Self {
        SignPattern { signs }
    }

    /// The `index`-th pattern in lexicographic order over `<, =, >` with edge
    /// 0 most significant.
    pub fn from_index(mut index: u64, edges: usize) -> Self {
        let mut signs = vec![Sign::Less; edges];
        for slot in signs.iter_mut().rev() {
            *slot = match index % 3 {
                0 => Sign::Less,
                1 => Sign::Equal,
                _ => Sign::Greater,
            };
            index /= 3;
        }
        SignPattern { signs }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn sign(&self, e: usize) -> Sign {
        self.signs[e]
    }

    pub fn is_feasible(&self, problem: &Problem) -> bool {
        let arb = problem.arborescence();
        self.signs.len() == arb.edge_count()
            && self
                .signs
                .iter()
                .enumerate()
                .all(|(e, s)| s.is_feasible(arb.lambda(e), arb.mu(e)))
    }

    /// Linear slope each node picks up from the strict edges.
    fn slopes(&self, problem: &Problem) -> Vec<f64> {
        let arb = problem.arborescence();
        let mut slope = vec![0.0; arb.node_count()];
        for (e, &s) in self.signs.iter().enumerate() {
            let (i, j) = (arb.tail(e), arb.head(e));
            let w = match s {
                Sign::Greater => arb.lambda(e),
                Sign::Less => -arb.mu(e),
                Sign::Equal => continue,
            };
            slope[i] += w;
            slope[j] -= w;
        }
        slope
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signs {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Minimizes the objective with the signs of `pattern` imposed: strict edges
/// become linear terms and equality edges pool their endpoints. Returns the
/// minimizer and the objective value of that reduced problem.
///
/// The minimizer may violate the strict signs it was built from.
pub fn solve_reduced(problem: &Problem, pattern: &SignPattern) -> Result<(Vec<f64>, f64)> {
    if !pattern.is_feasible(problem) {
        return Err(Error::ContractViolation(format!("sign pattern {pattern} is infeasible")));
    }
    let arb = problem.arborescence();
    let n = arb.node_count();
    let shifted: Vec<LossFunction> = problem
        .losses()
        .iter()
        .zip(pattern.slopes(problem))
        .map(|(f, s)| f.clone().shifted(s))
        .collect();

    let mut x = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for seed in 0..n {
        if seen[seed] {
            continue;
        }
        let block = component_of(arb, n, |e| pattern.sign(e) == Sign::Equal, seed);
        let group = LossGroup::from_losses(block.nodes.iter().map(|&v| &shifted[v]))?;
        let value = group.inverse_derivative(0.0);
        for &v in &block.nodes {
            seen[v] = true;
            x[v] = value;
        }
    }
    let objective = shifted.iter().zip(&x).map(|(f, &xi)| f.value(xi)).sum();
    Ok((x, objective))
}

/// Duals consistent with `pattern` at `x`: strict edges sit at their bound,
/// equality edges balance each pooled block.
pub fn reconstruct_duals(problem: &Problem, pattern: &SignPattern, x: &[f64]) -> Result<Vec<f64>> {
    let arb = problem.arborescence();
    let n = arb.node_count();
    let mut z = vec![0.0; arb.edge_count()];
    // Right-hand side per node: f'(x) minus the strict-edge flow.
    let mut b: Vec<f64> = problem.losses().iter().zip(x).map(|(f, &xi)| f.derivative(xi)).collect();
    for (e, &s) in pattern.signs().iter().enumerate() {
        let ze = match s {
            Sign::Greater => -arb.lambda(e),
            Sign::Less => arb.mu(e),
            Sign::Equal => continue,
        };
        z[e] = ze;
        b[arb.tail(e)] -= ze;
        b[arb.head(e)] += ze;
    }
    let mut seen = vec![false; n];
    for seed in 0..n {
        if seen[seed] {
            continue;
        }
        let block = component_of(arb, n, |e| pattern.sign(e) == Sign::Equal, seed);
        for &v in &block.nodes {
            seen[v] = true;
        }
        for (e, ze) in tree_linear_solve(arb, &block, seed, &b)? {
            z[e] = ze;
        }
    }
    Ok(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub pattern: SignPattern,
    /// Lexicographic index of the accepted pattern.
    pub index: u64,
    pub kkt_residual: f64,
}

pub fn enumerate(problem: &Problem) -> Result<OracleSolution> {
    enumerate_with(problem, Execution::default())
}

/// Screens every feasible sign pattern and returns the first (in
/// lexicographic order) whose reduced minimizer and rebuilt duals pass the
/// KKT check.
pub fn enumerate_with(problem: &Problem, exec: Execution) -> Result<OracleSolution> {
    let edges = problem.edge_count();
    if edges > MAX_ORACLE_EDGES {
        return Err(Error::OracleTooLarge {
            edges,
            cap: MAX_ORACLE_EDGES,
        });
    }
    let count = 3u64.pow(edges as u32);
    exec.find_map_first(count, |index| {
        let pattern = SignPattern::from_index(index, edges);
        if !pattern.is_feasible(problem) {
            return None;
        }
        let (x, _) = solve_reduced(problem, &pattern).ok()?;
        let z = reconstruct_duals(problem, &pattern, &x).ok()?;
        let residual = kkt_residual(problem, &x, &z);
        (residual <= DEFAULT_KKT_TOLERANCE).then_some(OracleSolution {
            x,
            z,
            pattern,
            index,
            kkt_residual: residual,
        })
    })
    .ok_or(Error::OracleNoPattern)
}

/// Weighted least-squares nondecreasing fit of `y`.
///
/// # Panics
/// If `y` and `w` differ in length.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len(), "pava needs one weight per value");
    // (weighted mean, total weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        let mut cur = (yi, wi, 1);
        while let Some(&(m, wt, len)) = blocks.last() {
            if m < cur.0 {
                break;
            }
            blocks.pop();
            let total = wt + cur.1;
            cur = ((m * wt + cur.0 * cur.1) / total, total, len + cur.2);
        }
        blocks.push(cur);
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, len)| std::iter::repeat_n(m, len))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Arborescence;

    fn five_node() -> Problem {
        let inf = f64::INFINITY;
        let arb = Arborescence::from_parents(&[0, 0, 2, 2], &[inf, 0.0, 0.0, 3.0], &[0.0, inf, 4.0, 3.0]).unwrap();
        let losses = vec![
            LossFunction::quadratic(1.0, 4.0).unwrap(),
            LossFunction::quadratic(1.0, 2.0).unwrap(),
            LossFunction::quadratic(1.0, 2.0).unwrap(),
            LossFunction::quadratic(1.0, 8.0).unwrap(),
            LossFunction::quartic(1.0, 0.25, 0.0).unwrap(),
        ];
        Problem::new(arb, losses).unwrap()
    }

    #[test]
    fn pattern_indexing_is_lexicographic() {
        assert_eq!(SignPattern::from_index(0, 2).to_string(), "<<");
        assert_eq!(SignPattern::from_index(1, 2).to_string(), "<=");
        assert_eq!(SignPattern::from_index(3, 2).to_string(), "=<");
        assert_eq!(SignPattern::from_index(8, 2).to_string(), ">>");
    }

    #[test]
    fn reduced_solve_at_the_optimal_pattern() {
        let p = five_node();
        let pattern = SignPattern::new(vec![Sign::Equal, Sign::Equal, Sign::Less, Sign::Greater]);
        let (x, _) = solve_reduced(&p, &pattern).unwrap();
        for (a, b) in x.iter().zip([3.0, 3.0, 3.0, 4.0, 1.0]) {
            assert!((a - b).abs() < 1e-12, "{x:?}");
        }
        let z = reconstruct_duals(&p, &pattern, &x).unwrap();
        for (a, b) in z.iter().zip([-1.0, 0.0, 4.0, -3.0]) {
            assert!((a - b).abs() < 1e-12, "{z:?}");
        }
    }

    #[test]
    fn reduced_solve_trivial_patterns() {
        let arb = Arborescence::from_parents(&[0, 1], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let losses = vec![
            LossFunction::quadratic(1.0, 1.0).unwrap(),
            LossFunction::quadratic(3.0, 5.0).unwrap(),
            LossFunction::quadratic(2.0, -2.0).unwrap(),
        ];
        let p = Problem::new(arb, losses).unwrap();
        let (x, _) = solve_reduced(&p, &SignPattern::new(vec![Sign::Equal; 2])).unwrap();
        let mean = (1.0 + 15.0 - 4.0) / 6.0;
        assert!(x.iter().all(|v| (v - mean).abs() < 1e-12));
        let (x, _) = solve_reduced(&p, &SignPattern::new(vec![Sign::Less, Sign::Greater])).unwrap();
        assert_eq!(x, vec![1.0, 5.0, -2.0]);
    }

    #[test]
    fn enumerate_finds_the_five_node_optimum() {
        let p = five_node();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let sol = enumerate_with(&p, exec).unwrap();
            for (a, b) in sol.x.iter().zip([3.0, 3.0, 3.0, 4.0, 1.0]) {
                assert!((a - b).abs() < 1e-10);
            }
            assert_eq!(sol.pattern.to_string(), "==<>");
        }
    }

    #[test]
    fn enumerate_single_node() {
        let arb = Arborescence::from_parents(&[], &[], &[]).unwrap();
        let p = Problem::new(arb, vec![LossFunction::quadratic(2.0, 7.5).unwrap()]).unwrap();
        let sol = enumerate(&p).unwrap();
        assert_eq!(sol.x, vec![7.5]);
        assert!(sol.z.is_empty());
    }

    #[test]
    fn enumerate_refuses_large_trees() {
        let parents: Vec<usize> = (0..13).collect();
        let arb = Arborescence::from_parents(&parents, &[1.0; 13], &[1.0; 13]).unwrap();
        let losses = (0..14).map(|i| LossFunction::quadratic(1.0, i as f64).unwrap()).collect();
        let p = Problem::new(arb, losses).unwrap();
        assert_eq!(
            enumerate(&p).unwrap_err(),
            Error::OracleTooLarge { edges: 13, cap: 12 }
        );
    }

    #[test]
    fn pava_examples() {
        assert_eq!(pava(&[2.0, 1.0], &[1.0, 1.0]), vec![1.5, 1.5]);
        assert_eq!(pava(&[1.0, 2.0, 2.0, 9.0], &[1.0; 4]), vec![1.0, 2.0, 2.0, 9.0]);
        assert_eq!(pava(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava(&[4.0, 0.0], &[3.0, 1.0]), vec![3.0, 3.0]);
        assert!(pava(&[], &[]).is_empty());
    }
}
