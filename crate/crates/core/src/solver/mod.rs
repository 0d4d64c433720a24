//! Leaf-by-leaf solver for tree-structured isotonic regression.
//!
//! Nodes are attached one at a time in arborescence order. Each attachment
//! turns the optimum over the first `m` nodes into the optimum over `m + 1`
//! nodes by searching for the dual `t` of the new edge: starting at `t = 0`
//! the search moves monotonically toward the edge's weight bound, changing
//! the active set at each threshold, until the anchor and the new node meet
//! or the bound is reached.

pub mod active_set;
pub mod component;
pub mod kkt;
pub mod step;

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::tree::{decompose, normalize, AttachRecord, Arborescence, DirectedTree};

pub use active_set::{build_initial_active_set, nearly_equal, ActiveSet, Sign, EQUALITY_TOLERANCE};
pub use component::{build_component_view, BlockEdge, ComponentView};
pub use step::{
    step, step_minus, step_plus, thresholds, thresholds_minus, thresholds_plus, Direction, EdgeThreshold,
    StepOutcome, StepTolerances, Thresholds,
};

/// Default gate on the final KKT residual.
pub const DEFAULT_KKT_TOLERANCE: f64 = 1e-8;

/// Slack allowed on the sign of the new edge's dual against the anchor
/// derivative.
pub const SIGN_SLACK: f64 = 1e-12;

/// An instance over a normalized arborescence; `losses[v]` belongs to
/// internal node `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    arb: Arborescence,
    losses: Vec<LossFunction>,
}

impl Problem {
    pub fn new(arb: Arborescence, losses: Vec<LossFunction>) -> Result<Self> {
        if losses.len() != arb.node_count() {
            return Err(Error::MalformedInstance(format!(
                "{} losses for {} nodes",
                losses.len(),
                arb.node_count()
            )));
        }
        for loss in &losses {
            loss.validate()?;
        }
        Ok(Problem { arb, losses })
    }

    /// Normalizes `tree` at `root` (or its default root). `losses` follow the
    /// input node order.
    pub fn from_tree(tree: &DirectedTree, losses: Vec<LossFunction>, root: Option<usize>) -> Result<Self> {
        if losses.len() != tree.node_count() {
            return Err(Error::MalformedInstance(format!(
                "{} losses for {} nodes",
                losses.len(),
                tree.node_count()
            )));
        }
        let arb = normalize(tree, root.unwrap_or_else(|| tree.default_root()))?;
        let mut slots: Vec<Option<LossFunction>> = losses.into_iter().map(Some).collect();
        let internal = (0..arb.node_count())
            .map(|v| slots[arb.original_label(v)].take().expect("labels are a permutation"))
            .collect();
        Problem::new(arb, internal)
    }

    pub fn arborescence(&self) -> &Arborescence {
        &self.arb
    }

    pub fn losses(&self) -> &[LossFunction] {
        &self.losses
    }

    pub fn node_count(&self) -> usize {
        self.arb.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.arb.edge_count()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        kkt::objective_on_edges(self.arb.edges(), &self.losses, x)
    }

    pub fn kkt_residual(&self, x: &[f64], z: &[f64]) -> f64 {
        kkt_residual(self, x, z)
    }

    /// Maps an internal primal-dual pair to input node and edge order,
    /// negating duals of reoriented edges.
    pub fn to_input_order(&self, x: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xo = vec![0.0; x.len()];
        for (v, &xv) in x.iter().enumerate() {
            xo[self.arb.original_label(v)] = xv;
        }
        let mut zo = vec![0.0; z.len()];
        for (e, &ze) in z.iter().enumerate() {
            zo[self.arb.source_edge(e)] = if self.arb.is_flipped(e) { -ze } else { ze };
        }
        (xo, zo)
    }
}

/// KKT residual of `(x, z)` on the normalized instance.
pub fn kkt_residual(problem: &Problem, x: &[f64], z: &[f64]) -> f64 {
    kkt::residual_on_edges(problem.arb.edges(), &problem.losses, x, z)
}

/// The search state while attaching node `x.len() − 1`: the parameter, the
/// optimal pair of the parametric problem at `t`, and a compatible active
/// set over the prefix edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub t: f64,
    /// Values over the prefix and, last, the attached node.
    pub x: Vec<f64>,
    /// Duals over the prefix edges.
    pub z: Vec<f64>,
    pub active: ActiveSet,
}

impl PrimalDualState {
    /// Number of nodes in the prefix (excluding the attached node).
    pub fn prefix_len(&self) -> usize {
        self.x.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The anchor already minimizes the new loss; the new edge dual is 0.
    Zero,
    /// The weight bound in the search direction is 0, so the dual stays 0.
    ZeroBound,
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub terminal: bool,
    pub used_equilibrium: bool,
    pub left_equal: Vec<usize>,
    pub joined_equal: Vec<usize>,
}

/// What happened while attaching one node.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateRecord {
    pub node: usize,
    pub anchor: usize,
    pub branch: Branch,
    /// `f'_new(x_anchor)` before attachment.
    pub anchor_derivative: f64,
    /// The bound of the search interval (`−λ` or `μ`), 0 for [`Branch::Zero`].
    pub bound: f64,
    pub t_star: f64,
    pub equilibrium_calls: usize,
    pub steps: Vec<StepRecord>,
}

impl GenerateRecord {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Size of the prefix before attachment.
    pub fn prefix_len(&self) -> usize {
        self.node
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub generate: Vec<GenerateRecord>,
    pub kkt_residual: f64,
}

impl SolveStats {
    pub fn inner_iterations(&self) -> usize {
        self.generate.iter().map(GenerateRecord::iterations).sum()
    }

    pub fn equilibrium_calls(&self) -> usize {
        self.generate.iter().map(|g| g.equilibrium_calls).sum()
    }

    pub fn iterations_per_node(&self) -> Vec<usize> {
        self.generate.iter().map(GenerateRecord::iterations).collect()
    }
}

/// Primal values per node and duals per edge, in internal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub kkt_tolerance: f64,
    pub step: StepTolerances,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tolerance: DEFAULT_KKT_TOLERANCE,
            step: StepTolerances::default(),
        }
    }
}

pub fn solve(problem: &Problem) -> Result<Solution> {
    solve_with(problem, &SolverOptions::default())
}

/// Attaches every node in order and certifies the result.
pub fn solve_with(problem: &Problem, options: &SolverOptions) -> Result<Solution> {
    let mut x = vec![problem.losses[0].minimizer()];
    let mut z = Vec::new();
    let mut stats = SolveStats::default();
    for attach in decompose(&problem.arb) {
        let (nx, nz, record) = generate(problem, &x, &z, &attach, &options.step)?;
        x = nx;
        z = nz;
        stats.generate.push(record);
    }
    let residual = kkt_residual(problem, &x, &z);
    stats.kkt_residual = residual;
    if residual.is_nan() || residual > options.kkt_tolerance {
        return Err(Error::CertificateFailed {
            residual,
            tolerance: options.kkt_tolerance,
        });
    }
    Ok(Solution { x, z, stats })
}

/// Extends the optimal pair over the prefix `0..attach.node` to the prefix
/// including `attach.node`.
pub fn generate(
    problem: &Problem,
    x: &[f64],
    z: &[f64],
    attach: &AttachRecord,
    tol: &StepTolerances,
) -> Result<(Vec<f64>, Vec<f64>, GenerateRecord)> {
    let m = attach.node;
    if x.len() != m || z.len() + 1 != m.max(1) {
        return Err(Error::ContractViolation(format!(
            "attaching node {m} needs {m} values and {} duals",
            m.saturating_sub(1)
        )));
    }
    let loss = &problem.losses[m];
    let anchor_value = x[attach.anchor];
    let anchor_derivative = loss.derivative(anchor_value);
    let fresh = loss.minimizer();

    let mut record = GenerateRecord {
        node: m,
        anchor: attach.anchor,
        branch: Branch::Zero,
        anchor_derivative,
        bound: 0.0,
        t_star: 0.0,
        equilibrium_calls: 0,
        steps: Vec::new(),
    };

    let extend = |value: f64, dual: f64| {
        let mut nx = x.to_vec();
        nx.push(value);
        let mut nz = z.to_vec();
        nz.push(dual);
        (nx, nz)
    };

    if anchor_derivative == 0.0 || nearly_equal(anchor_value, fresh, tol.equality) {
        let (nx, nz) = extend(anchor_value, 0.0);
        return Ok((nx, nz, record));
    }
    let dir = if anchor_derivative > 0.0 {
        Direction::Decreasing
    } else {
        Direction::Increasing
    };
    let bound = dir.bound(attach);
    record.bound = bound;
    if bound == 0.0 {
        record.branch = Branch::ZeroBound;
        let (nx, nz) = extend(fresh, 0.0);
        return Ok((nx, nz, record));
    }
    record.branch = match dir {
        Direction::Decreasing => Branch::Decreasing,
        Direction::Increasing => Branch::Increasing,
    };

    let mut state = PrimalDualState {
        t: 0.0,
        x: {
            let mut v = x.to_vec();
            v.push(fresh);
            v
        },
        z: z.to_vec(),
        active: build_initial_active_set(&problem.arb, x, tol.equality)?,
    };

    let max_iterations = 2 * m - 1;
    let mut ever_left = vec![false; z.len()];
    loop {
        if record.steps.len() == max_iterations {
            return Err(Error::InvariantViolation(format!(
                "attaching node {m} did not finish within {max_iterations} iterations"
            )));
        }
        let view = build_component_view(problem, &state, attach.anchor);
        let outcome = step(problem, &state, &view, attach, dir, tol)?;

        let t = outcome.state.t;
        let inside = match dir {
            Direction::Decreasing => t >= bound && t <= 0.0,
            Direction::Increasing => t <= bound && t >= 0.0,
        };
        if !inside {
            return Err(Error::InvariantViolation(format!(
                "parameter {t} left the interval between 0 and {bound}"
            )));
        }
        if outcome.used_equilibrium {
            record.equilibrium_calls += 1;
            if record.equilibrium_calls > 1 {
                return Err(Error::InvariantViolation(format!(
                    "crossing point computed twice while attaching node {m}"
                )));
            }
        }
        for &e in &outcome.left_equal {
            ever_left[e] = true;
        }
        if let Some(&e) = outcome.joined_equal.iter().find(|&&e| ever_left[e]) {
            return Err(Error::InvariantViolation(format!(
                "edge {e} rejoined the equality set while attaching node {m}"
            )));
        }

        record.steps.push(StepRecord {
            t,
            terminal: outcome.terminal,
            used_equilibrium: outcome.used_equilibrium,
            left_equal: outcome.left_equal,
            joined_equal: outcome.joined_equal,
        });
        state = outcome.state;
        if outcome.terminal {
            break;
        }
    }

    record.t_star = state.t;
    if record.t_star * anchor_derivative > SIGN_SLACK {
        return Err(Error::InvariantViolation(format!(
            "new edge dual {} has the sign of the anchor derivative {anchor_derivative}",
            record.t_star
        )));
    }
    let mut nz = state.z;
    nz.push(record.t_star);
    Ok((state.x, nz, record))
}
