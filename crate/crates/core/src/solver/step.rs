//! One move of the parameter search: compute how far `t` can travel before
//! the active set stops describing the optimum, take that move (or stop at
//! the crossing point / weight bound), and update the active set.

use crate::loss::equilibrium_t;
use crate::tree::AttachRecord;

use super::active_set::{nearly_equal, Sign};
use super::component::ComponentView;
use super::{PrimalDualState, Problem};
use crate::error::{Error, Result};

/// Which way the new edge's dual travels from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The anchor starts above the attached node; `t` falls toward `−λ`.
    Decreasing,
    /// The anchor starts below the attached node; `t` rises toward `μ`.
    Increasing,
}

impl Direction {
    /// The sentinel for "no threshold in this direction".
    pub fn unbounded(self) -> f64 {
        match self {
            Direction::Decreasing => f64::NEG_INFINITY,
            Direction::Increasing => f64::INFINITY,
        }
    }

    /// The nearer of two thresholds.
    fn nearer(self, a: f64, b: f64) -> f64 {
        match self {
            Direction::Decreasing => a.max(b),
            Direction::Increasing => a.min(b),
        }
    }

    /// Restricts a move to point in this direction.
    fn clamp(self, dt: f64) -> f64 {
        match self {
            Direction::Decreasing => dt.min(0.0),
            Direction::Increasing => dt.max(0.0),
        }
    }

    /// Whether `t` lies past `bound` along this direction.
    fn beyond(self, t: f64, bound: f64) -> bool {
        match self {
            Direction::Decreasing => t < bound,
            Direction::Increasing => t > bound,
        }
    }

    /// The attachment weight limiting the new edge's dual.
    pub fn bound(self, attach: &AttachRecord) -> f64 {
        match self {
            Direction::Decreasing => -attach.lambda,
            Direction::Increasing => attach.mu,
        }
    }
}

/// How far one edge lets `t` move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeThreshold {
    pub edge: usize,
    /// Signed move from the current `t`; an infinite value means the edge
    /// never binds.
    pub dt: f64,
    /// Block value at which the edge binds.
    pub level: f64,
    /// Sign the edge takes when it binds.
    pub becomes: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    /// Nearest block-edge threshold.
    pub block: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// The admissible move, the nearest of the three above.
    pub step: f64,
    pub block_edges: Vec<EdgeThreshold>,
    /// Boundary edges whose frozen neighbor the block is approaching.
    pub boundary_edges: Vec<EdgeThreshold>,
}

impl Thresholds {
    fn binding_level(&self, dir: Direction, tie: f64) -> Option<f64> {
        let tied = |th: &&EdgeThreshold| is_tied(th.dt, self.step, tie);
        // A boundary merge pins the block exactly onto its neighbor's value.
        self.boundary_edges
            .iter()
            .find(tied)
            .or_else(|| {
                self.block_edges
                    .iter()
                    .filter(tied)
                    .reduce(|a, b| if dir.nearer(a.dt, b.dt) == a.dt { a } else { b })
            })
            .map(|th| th.level)
    }
}

fn is_tied(dt: f64, step: f64, tie: f64) -> bool {
    dt.is_finite() && (dt - step).abs() <= tie * (1.0 + step.abs())
}

/// Thresholds for a move of `t` in `dir` from `state.t`.
pub fn thresholds(problem: &Problem, view: &ComponentView, state: &PrimalDualState, dir: Direction) -> Thresholds {
    let arb = problem.arborescence();
    let tq = state.t;
    let unbounded = dir.unbounded();

    let mut block = unbounded;
    let block_edges: Vec<EdgeThreshold> = view
        .edges
        .iter()
        .map(|be| {
            // The dual rises with t iff the tail is on the far side.
            let rises = be.tail_is_lower == (dir == Direction::Increasing);
            let (target, becomes) = if rises {
                (arb.mu(be.edge), Sign::Less)
            } else {
                (-arb.lambda(be.edge), Sign::Greater)
            };
            let (dt, level) = if target.is_finite() {
                let s = if be.tail_is_lower { target } else { -target };
                let level = be.closure.inverse_derivative(be.alpha + s);
                (dir.clamp(view.parameter_at(level) - tq), level)
            } else {
                (unbounded, f64::NAN)
            };
            block = dir.nearer(block, dt);
            EdgeThreshold {
                edge: be.edge,
                dt,
                level,
                becomes,
            }
        })
        .collect();

    // A decreasing block meets neighbors below it, an increasing one
    // neighbors above it.
    let approaching = match dir {
        Direction::Decreasing => (Sign::Greater, Sign::Less),
        Direction::Increasing => (Sign::Less, Sign::Greater),
    };
    let mut boundary_edges = Vec::new();
    let mut omega = |edges: &[usize], wanted: Sign, tail_inside: bool| {
        let mut nearest = unbounded;
        for &e in edges {
            if state.active.sign(e) != wanted {
                continue;
            }
            let outside = if tail_inside { arb.head(e) } else { arb.tail(e) };
            let level = state.x[outside];
            let dt = dir.clamp(view.parameter_at(level) - tq);
            nearest = dir.nearer(nearest, dt);
            boundary_edges.push(EdgeThreshold {
                edge: e,
                dt,
                level,
                becomes: Sign::Equal,
            });
        }
        nearest
    };
    let omega_plus = omega(&view.omega_plus, approaching.0, true);
    let omega_minus = omega(&view.omega_minus, approaching.1, false);

    Thresholds {
        block,
        omega_plus,
        omega_minus,
        step: dir.nearer(block, dir.nearer(omega_plus, omega_minus)),
        block_edges,
        boundary_edges,
    }
}

pub fn thresholds_minus(problem: &Problem, view: &ComponentView, state: &PrimalDualState) -> Thresholds {
    thresholds(problem, view, state, Direction::Decreasing)
}

pub fn thresholds_plus(problem: &Problem, view: &ComponentView, state: &PrimalDualState) -> Thresholds {
    thresholds(problem, view, state, Direction::Increasing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTolerances {
    /// Relative tolerance for equal node values.
    pub equality: f64,
    /// Relative tolerance for coinciding thresholds.
    pub tie: f64,
}

impl Default for StepTolerances {
    fn default() -> Self {
        StepTolerances {
            equality: super::active_set::EQUALITY_TOLERANCE,
            tie: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: PrimalDualState,
    /// The new edge's optimal dual was found at `state.t`.
    pub terminal: bool,
    pub used_equilibrium: bool,
    pub left_equal: Vec<usize>,
    pub joined_equal: Vec<usize>,
    pub thresholds: Thresholds,
}

/// Advances the search by one move along `dir`.
///
/// On a terminal outcome the returned active set is the input one; the
/// caller only needs the primal-dual pair.
pub fn step(
    problem: &Problem,
    state: &PrimalDualState,
    view: &ComponentView,
    attach: &AttachRecord,
    dir: Direction,
    tol: &StepTolerances,
) -> Result<StepOutcome> {
    let attach_loss = &problem.losses()[attach.node];
    let bound = dir.bound(attach);
    let th = thresholds(problem, view, state, dir);
    let tq = state.t;

    // (t, block value, attached value, terminal, equilibrium)
    let mut crossing = None;
    if th.step.is_finite() {
        let t_cand = tq + th.step;
        let level = th.binding_level(dir, tol.tie).expect("finite step has a binding edge");
        let attached = attach_loss.inverse_derivative(-t_cand);
        let gap = level - attached;
        let still_apart = match dir {
            Direction::Decreasing => gap >= 0.0,
            Direction::Increasing => gap <= 0.0,
        };
        if still_apart {
            crossing = Some(if dir.beyond(t_cand, bound) || t_cand == bound {
                (bound, view.block_value(bound), attach_loss.inverse_derivative(-bound), true)
            } else if nearly_equal(level, attached, tol.equality) {
                (t_cand, level, level, true)
            } else {
                (t_cand, level, attached, false)
            });
        }
    }
    let used_equilibrium = crossing.is_none();
    let (t_next, x_block, x_attached, terminal) = match crossing {
        Some((t, xb, xa, term)) => (t, xb, xa, term),
        None => {
            let (t_eq, x_eq) = equilibrium_t(&view.group, view.beta, attach_loss);
            if dir.beyond(t_eq, bound) {
                (bound, view.block_value(bound), attach_loss.inverse_derivative(-bound), true)
            } else {
                (t_eq, x_eq, x_eq, true)
            }
        }
    };

    let drift = match dir {
        Direction::Decreasing => t_next - tq,
        Direction::Increasing => tq - t_next,
    };
    if drift > tol.tie * (1.0 + tq.abs()) {
        return Err(Error::InvariantViolation(format!(
            "parameter moved against the search direction: {tq} -> {t_next}"
        )));
    }

    let mut next = state.clone();
    next.t = t_next;
    for &v in &view.block.nodes {
        next.x[v] = x_block;
    }
    let last = next.x.len() - 1;
    next.x[last] = x_attached;
    for be in &view.edges {
        next.z[be.edge] = be.dual(x_block);
    }

    let mut left_equal = Vec::new();
    let mut joined_equal = Vec::new();
    if !terminal {
        let arb = problem.arborescence();
        for th_e in th.block_edges.iter().filter(|e| is_tied(e.dt, th.step, tol.tie)) {
            next.active.set(th_e.edge, th_e.becomes);
            next.z[th_e.edge] = match th_e.becomes {
                Sign::Less => arb.mu(th_e.edge),
                _ => -arb.lambda(th_e.edge),
            };
            left_equal.push(th_e.edge);
        }
        for th_e in th.boundary_edges.iter().filter(|e| is_tied(e.dt, th.step, tol.tie)) {
            next.active.set(th_e.edge, Sign::Equal);
            joined_equal.push(th_e.edge);
        }
    }

    Ok(StepOutcome {
        state: next,
        terminal,
        used_equilibrium,
        left_equal,
        joined_equal,
        thresholds: th,
    })
}

pub fn step_minus(
    problem: &Problem,
    state: &PrimalDualState,
    view: &ComponentView,
    attach: &AttachRecord,
) -> Result<StepOutcome> {
    step(problem, state, view, attach, Direction::Decreasing, &StepTolerances::default())
}

pub fn step_plus(
    problem: &Problem,
    state: &PrimalDualState,
    view: &ComponentView,
    attach: &AttachRecord,
) -> Result<StepOutcome> {
    step(problem, state, view, attach, Direction::Increasing, &StepTolerances::default())
}
