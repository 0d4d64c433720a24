use std::fmt;

use crate::error::{Error, Result};
use crate::tree::Arborescence;

/// Relative tolerance for treating two node values as equal.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// `|a − b| <= rel·(1 + max(|a|, |b|))`.
pub fn nearly_equal(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// The relation asserted between the tail and head value of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Less,
    Equal,
    Greater,
}

impl Sign {
    /// Whether the sign is allowed for an edge with weights `(lambda, mu)`.
    pub fn is_feasible(self, lambda: f64, mu: f64) -> bool {
        match self {
            Sign::Less => mu.is_finite(),
            Sign::Equal => true,
            Sign::Greater => lambda.is_finite(),
        }
    }

    pub fn reversed(self) -> Sign {
        match self {
            Sign::Less => Sign::Greater,
            Sign::Equal => Sign::Equal,
            Sign::Greater => Sign::Less,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Less => "<",
            Sign::Equal => "=",
            Sign::Greater => ">",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One sign per edge of a prefix, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    signs: Vec<Sign>,
}

impl ActiveSet {
    pub fn new(signs: Vec<Sign>) -> Self {
        ActiveSet { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign(&self, e: usize) -> Sign {
        self.signs[e]
    }

    pub fn set(&mut self, e: usize, sign: Sign) {
        self.signs[e] = sign;
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn is_equal(&self, e: usize) -> bool {
        self.signs[e] == Sign::Equal
    }

    pub fn edges_with(&self, sign: Sign) -> impl Iterator<Item = usize> + '_ {
        self.signs.iter().enumerate().filter(move |(_, &s)| s == sign).map(|(e, _)| e)
    }

    pub fn equal_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_with(Sign::Equal)
    }

    pub fn less_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_with(Sign::Less)
    }

    pub fn greater_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges_with(Sign::Greater)
    }

    /// First edge whose sign its weights forbid.
    pub fn first_infeasible(&self, arb: &Arborescence) -> Option<usize> {
        (0..self.signs.len()).find(|&e| !self.signs[e].is_feasible(arb.lambda(e), arb.mu(e)))
    }
}

/// Reads off `x_i # x_j` for every edge of the prefix `0..x.len()`.
///
/// An infinite weight makes the matching strict sign impossible at an
/// optimum, so seeing one means the certificate has been corrupted; it is
/// reported rather than repaired.
pub fn build_initial_active_set(arb: &Arborescence, x: &[f64], rel_tol: f64) -> Result<ActiveSet> {
    let edges = x.len().saturating_sub(1);
    let mut signs = Vec::with_capacity(edges);
    for e in 0..edges {
        let (xi, xj) = (x[arb.tail(e)], x[arb.head(e)]);
        let sign = if nearly_equal(xi, xj, rel_tol) {
            Sign::Equal
        } else if xi > xj {
            Sign::Greater
        } else {
            Sign::Less
        };
        if !sign.is_feasible(arb.lambda(e), arb.mu(e)) {
            return Err(Error::CertificateCorruption {
                edge: e,
                detail: format!("values {xi} {sign} {xj} contradict an infinite weight"),
            });
        }
        signs.push(sign);
    }
    Ok(ActiveSet::new(signs))
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn five_node_arb() -> Arborescence {
        Arborescence::from_parents(&[0, 0, 2, 2], &[INF, 0.0, 0.0, 3.0], &[0.0, INF, 4.0, 3.0]).unwrap()
    }

    #[test]
    fn reads_signs_of_third_prefix() {
        let set = build_initial_active_set(&five_node_arb(), &[3.0, 3.0, 2.0], EQUALITY_TOLERANCE).unwrap();
        assert_eq!(set.signs(), &[Sign::Equal, Sign::Greater]);
        assert_eq!(set.greater_edges().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn all_equal_and_strictly_decreasing() {
        let chain = Arborescence::from_parents(&[0, 1, 2], &[1.0; 3], &[1.0; 3]).unwrap();
        let set = build_initial_active_set(&chain, &[2.0; 4], EQUALITY_TOLERANCE).unwrap();
        assert!(set.signs().iter().all(|&s| s == Sign::Equal));
        let set = build_initial_active_set(&chain, &[4.0, 3.0, 2.0, 1.0], EQUALITY_TOLERANCE).unwrap();
        assert!(set.signs().iter().all(|&s| s == Sign::Greater));
    }

    #[test]
    fn infinite_weight_violation_is_reported() {
        // Edge (1,2) has lambda = +inf, so x_1 > x_2 is impossible.
        let err = build_initial_active_set(&five_node_arb(), &[3.5, 3.0], EQUALITY_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::CertificateCorruption { edge: 0, .. }));
    }

    #[test]
    fn tiny_differences_count_as_equal() {
        let set = build_initial_active_set(&five_node_arb(), &[3.0, 3.0 + 1e-12], EQUALITY_TOLERANCE).unwrap();
        assert_eq!(set.sign(0), Sign::Equal);
    }
}
