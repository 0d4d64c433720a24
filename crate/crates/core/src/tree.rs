//! Directed trees, their normalization to leaf-ordered arborescences, and
//! the closed-form solve of the node-balance system on a subtree.
//!
//! Inside an [`Arborescence`] nodes are numbered `0..n` in breadth-first
//! order from the root, so every edge points from a smaller to a larger id.
//! Edge ids are derived from their head: edge `e` is `(parent(e + 1), e + 1)`.
//! Dropping the largest node therefore always removes a leaf, and the prefix
//! `0..m` with edges `0..m-1` is itself an arborescence.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};

/// A weighted directed edge of the input graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    /// Penalty on `(x_tail − x_head)_+`; `+∞` forbids `x_tail > x_head`.
    pub lambda: f64,
    /// Penalty on `(x_head − x_tail)_+`; `+∞` forbids `x_tail < x_head`.
    pub mu: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, lambda: f64, mu: f64) -> Self {
        Edge { tail, head, lambda, mu }
    }
}

/// A directed graph whose underlying undirected graph is a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedTree {
    node_count: usize,
    edges: Vec<Edge>,
}

impl DirectedTree {
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::MalformedInstance("a tree needs at least one node".into()));
        }
        if edges.len() + 1 != node_count {
            return Err(Error::MalformedInstance(format!(
                "{} nodes need exactly {} edges, got {}",
                node_count,
                node_count - 1,
                edges.len()
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= node_count || e.head >= node_count {
                return Err(Error::MalformedInstance(format!("edge {k} references a node outside 0..{node_count}")));
            }
            if e.tail == e.head {
                return Err(Error::MalformedInstance(format!("edge {k} is a self-loop on node {}", e.tail)));
            }
            if !seen.insert((e.tail.min(e.head), e.tail.max(e.head))) {
                return Err(Error::MalformedInstance(format!(
                    "duplicate edge between {} and {}",
                    e.tail, e.head
                )));
            }
            for (name, w) in [("lambda", e.lambda), ("mu", e.mu)] {
                if w.is_nan() || w < 0.0 {
                    return Err(Error::MalformedInstance(format!("edge {k} has invalid {name} = {w}")));
                }
            }
        }
        let tree = DirectedTree { node_count, edges };
        // n - 1 edges and connected implies acyclic.
        let adjacency = tree.adjacency();
        let mut visited = vec![false; node_count];
        let mut stack = vec![0];
        visited[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        if reached != node_count {
            return Err(Error::MalformedInstance(
                "graph is disconnected or contains a cycle".into(),
            ));
        }
        Ok(tree)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The unique node with zero in-degree if there is one, else node 0.
    pub fn default_root(&self) -> usize {
        let mut indegree = vec![0usize; self.node_count];
        for e in &self.edges {
            indegree[e.head] += 1;
        }
        let mut sources = indegree.iter().enumerate().filter(|(_, &d)| d == 0).map(|(v, _)| v);
        match (sources.next(), sources.next()) {
            (Some(v), None) => v,
            _ => 0,
        }
    }

    /// Neighbor lists `(neighbor, edge index)` sorted by neighbor.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.tail].push((e.head, k));
            adj[e.head].push((e.tail, k));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// A leaf-ordered rooted tree plus the bookkeeping needed to map results back
/// to the directed tree it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Arborescence {
    parent: Vec<usize>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    children: Vec<Vec<usize>>,
    original_label: Vec<usize>,
    internal_label: Vec<usize>,
    source_edge: Vec<usize>,
    flipped: Vec<bool>,
}

impl Arborescence {
    /// Builds an arborescence directly from a parent array with
    /// `parents[k] < k + 1` for the node `k + 1`; labels are the identity.
    pub fn from_parents(parents: &[usize], lambda: &[f64], mu: &[f64]) -> Result<Self> {
        let n = parents.len() + 1;
        if lambda.len() != parents.len() || mu.len() != parents.len() {
            return Err(Error::MalformedInstance("weight vectors must match the edge count".into()));
        }
        let edges = parents
            .iter()
            .enumerate()
            .map(|(e, &p)| {
                if p > e {
                    return Err(Error::MalformedInstance(format!(
                        "node {} must have a smaller parent, got {p}",
                        e + 1
                    )));
                }
                Ok(Edge::new(p, e + 1, lambda[e], mu[e]))
            })
            .collect::<Result<Vec<_>>>()?;
        normalize(&DirectedTree::new(n, edges)?, 0)
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| self.parent[v])
    }

    /// Children sorted ascending.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn tail(&self, e: usize) -> usize {
        self.parent[e + 1]
    }

    pub fn head(&self, e: usize) -> usize {
        e + 1
    }

    pub fn lambda(&self, e: usize) -> f64 {
        self.lambda[e]
    }

    pub fn mu(&self, e: usize) -> f64 {
        self.mu[e]
    }

    pub fn edge(&self, e: usize) -> Edge {
        Edge::new(self.tail(e), self.head(e), self.lambda[e], self.mu[e])
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(|e| self.edge(e))
    }

    /// The input node that internal node `v` came from.
    pub fn original_label(&self, v: usize) -> usize {
        self.original_label[v]
    }

    /// The internal node for input node `v`.
    pub fn internal_label(&self, v: usize) -> usize {
        self.internal_label[v]
    }

    /// Index of the input edge that internal edge `e` came from.
    pub fn source_edge(&self, e: usize) -> usize {
        self.source_edge[e]
    }

    /// Whether internal edge `e` points the opposite way to its input edge.
    pub fn is_flipped(&self, e: usize) -> bool {
        self.flipped[e]
    }

    /// Internal edge corresponding to input edge `k`.
    pub fn internal_edge(&self, k: usize) -> usize {
        // source_edge is a permutation; invert on demand.
        self.source_edge.iter().position(|&s| s == k).expect("edge index in range")
    }
}

/// Reorients `tree` away from `root` and relabels nodes breadth-first.
///
/// Edges pointing toward the root are reversed with their weights swapped,
/// so the penalized problem is unchanged.
pub fn normalize(tree: &DirectedTree, root: usize) -> Result<Arborescence> {
    let n = tree.node_count();
    if root >= n {
        return Err(Error::MalformedInstance(format!("root {root} is not a node")));
    }
    let adjacency = tree.adjacency();
    let mut internal_label = vec![usize::MAX; n];
    let mut original_label = Vec::with_capacity(n);
    let mut parent = vec![0usize; n];
    let mut lambda = vec![0.0; n - 1];
    let mut mu = vec![0.0; n - 1];
    let mut source_edge = vec![0usize; n - 1];
    let mut flipped = vec![false; n - 1];

    let mut queue = VecDeque::from([root]);
    internal_label[root] = 0;
    original_label.push(root);
    while let Some(v) = queue.pop_front() {
        for &(w, k) in &adjacency[v] {
            if internal_label[w] != usize::MAX {
                continue;
            }
            let id = original_label.len();
            internal_label[w] = id;
            original_label.push(w);
            parent[id] = internal_label[v];
            let e = id - 1;
            let input = tree.edges[k];
            source_edge[e] = k;
            if input.tail == v {
                lambda[e] = input.lambda;
                mu[e] = input.mu;
            } else {
                flipped[e] = true;
                lambda[e] = input.mu;
                mu[e] = input.lambda;
            }
            queue.push_back(w);
        }
    }

    let mut children = vec![Vec::new(); n];
    for v in 1..n {
        children[parent[v]].push(v);
    }
    Ok(Arborescence {
        parent,
        lambda,
        mu,
        children,
        original_label,
        internal_label,
        source_edge,
        flipped,
    })
}

/// One step of the leaf-by-leaf construction: `node` joins the prefix
/// through the edge `(anchor, node)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttachRecord {
    pub node: usize,
    pub anchor: usize,
    pub lambda: f64,
    pub mu: f64,
}

pub fn decompose(arb: &Arborescence) -> Vec<AttachRecord> {
    (1..arb.node_count())
        .map(|v| AttachRecord {
            node: v,
            anchor: arb.parent[v],
            lambda: arb.lambda[v - 1],
            mu: arb.mu[v - 1],
        })
        .collect()
}

/// A connected set of nodes inside the prefix `0..prefix` of an arborescence.
///
/// `nodes` is in breadth-first order from the seed it was grown from and
/// `links[k]` is the edge joining `nodes[k]` to its predecessor in that
/// order. `edges` lists every edge with both endpoints in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree {
    pub nodes: Vec<usize>,
    pub links: Vec<Option<usize>>,
    pub edges: Vec<usize>,
    pub member: Vec<bool>,
}

impl Subtree {
    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The whole prefix `0..prefix` rooted at node 0.
    pub fn prefix(arb: &Arborescence, prefix: usize) -> Subtree {
        component_of(arb, prefix, |_| true, 0)
    }
}

/// Nodes reachable from `seed` through edges of the prefix accepted by
/// `is_equal`, treated as undirected.
pub fn component_of<F>(arb: &Arborescence, prefix: usize, is_equal: F, seed: usize) -> Subtree
where
    F: Fn(usize) -> bool,
{
    debug_assert!(seed < prefix && prefix <= arb.node_count());
    let mut member = vec![false; prefix];
    let mut nodes = vec![seed];
    let mut links = vec![None];
    member[seed] = true;
    let mut head = 0;
    while head < nodes.len() {
        let v = nodes[head];
        head += 1;
        if let Some(p) = arb.parent(v) {
            let e = v - 1;
            if !member[p] && is_equal(e) {
                member[p] = true;
                nodes.push(p);
                links.push(Some(e));
            }
        }
        for &c in arb.children(v) {
            if c >= prefix {
                break;
            }
            let e = c - 1;
            if !member[c] && is_equal(e) {
                member[c] = true;
                nodes.push(c);
                links.push(Some(e));
            }
        }
    }
    let edges = links.iter().flatten().copied().collect();
    Subtree {
        nodes,
        links,
        edges,
        member,
    }
}

/// Breadth-first order of `sub` from `ancestor`, each node paired with the
/// edge to its predecessor.
pub(crate) fn rooted_order(arb: &Arborescence, sub: &Subtree, ancestor: usize) -> Vec<(usize, Option<usize>)> {
    if sub.nodes.first() == Some(&ancestor) {
        return sub.nodes.iter().copied().zip(sub.links.iter().copied()).collect();
    }
    let mut seen = vec![false; sub.member.len()];
    seen[ancestor] = true;
    let mut order = vec![(ancestor, None)];
    let mut head = 0;
    while head < order.len() {
        let v = order[head].0;
        head += 1;
        if let Some(p) = arb.parent(v) {
            if sub.contains(p) && !seen[p] {
                seen[p] = true;
                order.push((p, Some(v - 1)));
            }
        }
        for &c in arb.children(v) {
            if sub.contains(c) && !seen[c] {
                seen[c] = true;
                order.push((c, Some(c - 1)));
            }
        }
    }
    order
}

/// Solves the node-balance system on `sub` with the row of `ancestor`
/// dropped: for every other node `v`,
/// `Σ_{out-edges} z − Σ_{in-edges} z = b[v]`.
///
/// Each edge dual is the sum of `b` over the side of the edge away from
/// the ancestor, negated when that side is the edge's head. One pass,
/// no matrix. `b` is indexed by node id; entries outside `sub` and the
/// ancestor's own entry are ignored. Returns `(edge, z)` in the order of
/// `sub.edges`.
pub fn tree_linear_solve(arb: &Arborescence, sub: &Subtree, ancestor: usize, b: &[f64]) -> Result<Vec<(usize, f64)>> {
    if !sub.contains(ancestor) {
        return Err(Error::ContractViolation(format!("ancestor {ancestor} is not in the subtree")));
    }
    let order = rooted_order(arb, sub, ancestor);
    let mut below = vec![0.0; sub.member.len()];
    let mut z_of_edge = vec![0.0; sub.member.len()];
    for &(v, link) in order.iter().rev() {
        let Some(e) = link else { continue };
        below[v] += b[v];
        let other = if arb.head(e) == v { arb.tail(e) } else { arb.head(e) };
        below[other] += below[v];
        // The node below sits at the edge's tail: the edge leaves it.
        z_of_edge[e] = if arb.tail(e) == v { below[v] } else { -below[v] };
    }
    Ok(sub.edges.iter().map(|&e| (e, z_of_edge[e])).collect())
}
