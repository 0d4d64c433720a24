//! JSON problem files and solution reports.
//!
//! ```json
//! {
//!   "nodes": [{"id": 1, "loss": {"type": "quadratic", "y": 4.0, "w": 1.0}},
//!             {"id": 2, "loss": {"type": "quartic", "a": 1.0, "b": 0.25, "c": 0.0}}],
//!   "edges": [{"from": 1, "to": 2, "lambda": "inf", "mu": 0}],
//!   "root": 1
//! }
//! ```
//!
//! Infinite weights are written as the string `"inf"`. Reports print every
//! float with 17 significant digits so identical runs give identical bytes.

use std::collections::HashMap;
use std::fmt;

use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::solver::kkt::{objective_on_edges, residual_on_edges};
use crate::solver::{Problem, SolveStats};
use crate::tree::{DirectedTree, Edge};

/// A node identifier as written in the file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeId {
    Int(i64),
    Name(String),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Int(i) => write!(f, "{i}"),
            NodeId::Name(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum LossSpec {
    Quadratic { y: f64, w: f64 },
    Quartic { a: f64, b: f64, c: f64 },
}

impl LossSpec {
    pub fn to_loss(&self) -> Result<LossFunction> {
        match *self {
            LossSpec::Quadratic { y, w } => LossFunction::quadratic(w, y),
            LossSpec::Quartic { a, b, c } => LossFunction::quartic(a, b, c),
        }
    }

    pub fn from_loss(loss: &LossFunction) -> Result<Self> {
        match *loss {
            LossFunction::Quadratic { w, y } => Ok(LossSpec::Quadratic { y, w }),
            LossFunction::Quartic { a, b, c } => Ok(LossSpec::Quartic { a, b, c }),
            LossFunction::LinearShift { .. } => Err(Error::InvalidLoss("shifted losses have no file encoding".into())),
        }
    }
}

/// A penalty weight: a nonnegative number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight(pub f64);

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Token(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Weight(v)),
            Raw::Token(t) if t == "inf" => Ok(Weight(f64::INFINITY)),
            Raw::Token(t) => Err(serde::de::Error::custom(format!("weight must be a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: NodeId,
    pub loss: LossSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: NodeId,
    pub to: NodeId,
    pub lambda: Weight,
    pub mu: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<NodeId>,
}

/// A problem file resolved to node indices (file order).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInstance {
    pub ids: Vec<NodeId>,
    pub tree: DirectedTree,
    pub losses: Vec<LossFunction>,
    pub root: Option<usize>,
}

impl LoadedInstance {
    pub fn problem(&self) -> Result<Problem> {
        Problem::from_tree(&self.tree, self.losses.clone(), self.root)
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Input ids are numbered `0..n` in the order given.
    pub fn from_parts(tree: &DirectedTree, losses: &[LossFunction], root: Option<usize>) -> Result<Self> {
        let id = |v: usize| NodeId::Int(v as i64);
        Ok(ProblemFile {
            nodes: losses
                .iter()
                .enumerate()
                .map(|(v, f)| Ok(NodeSpec { id: id(v), loss: LossSpec::from_loss(f)? }))
                .collect::<Result<_>>()?,
            edges: tree
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    from: id(e.tail),
                    to: id(e.head),
                    lambda: Weight(e.lambda),
                    mu: Weight(e.mu),
                })
                .collect(),
            root: root.map(id),
        })
    }

    pub fn resolve(&self) -> Result<LoadedInstance> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        for (k, node) in self.nodes.iter().enumerate() {
            if index.insert(node.id.clone(), k).is_some() {
                return Err(Error::Parse {
                    location: format!("nodes[{k}].id"),
                    message: format!("duplicate node id {}", node.id),
                });
            }
        }
        let lookup = |id: &NodeId, location: String| {
            index.get(id).copied().ok_or_else(|| Error::Parse {
                location,
                message: format!("unknown node id {id}"),
            })
        };
        let losses = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| {
                n.loss.to_loss().map_err(|e| Error::Parse {
                    location: format!("nodes[{k}].loss"),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| {
                Ok(Edge::new(
                    lookup(&e.from, format!("edges[{k}].from"))?,
                    lookup(&e.to, format!("edges[{k}].to"))?,
                    e.lambda.0,
                    e.mu.0,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let root = self.root.as_ref().map(|r| lookup(r, "root".into())).transpose()?;
        let tree = DirectedTree::new(self.nodes.len(), edges)?;
        Ok(LoadedInstance {
            ids: self.nodes.iter().map(|n| n.id.clone()).collect(),
            tree,
            losses,
            root,
        })
    }
}

/// A float printed with 17 significant digits; non-finite values become
/// the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Negative zero prints as zero.
        let v = self.0 + 0.0;
        if v.is_nan() {
            f.write_str("nan")
        } else if v.is_infinite() {
            f.write_str(if v > 0.0 { "inf" } else { "-inf" })
        } else {
            write!(f, "{v:.16e}")
        }
    }
}

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(self.to_string())
                .map_err(serde::ser::Error::custom)?
                .serialize(s)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeValue {
    pub id: NodeId,
    pub x: Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDual {
    pub from: NodeId,
    pub to: NodeId,
    pub z: Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportStats {
    pub inner_iterations: usize,
    pub equilibrium_calls: usize,
    pub iterations_per_node: Vec<usize>,
}

impl From<&SolveStats> for ReportStats {
    fn from(s: &SolveStats) -> Self {
        ReportStats {
            inner_iterations: s.inner_iterations(),
            equilibrium_calls: s.equilibrium_calls(),
            iterations_per_node: s.iterations_per_node(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub x: Vec<NodeValue>,
    pub z: Vec<EdgeDual>,
    pub objective: Float,
    pub kkt_residual: Float,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<ReportStats>,
    /// Accepted sign pattern, one of `<`, `=`, `>` per input edge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
}

impl SolutionReport {
    /// `x` per input node and `z` per input edge. Objective and residual are
    /// evaluated on the input orientation.
    pub fn new(instance: &LoadedInstance, x: &[f64], z: &[f64]) -> Self {
        let edges = instance.tree.edges();
        SolutionReport {
            x: instance
                .ids
                .iter()
                .zip(x)
                .map(|(id, &v)| NodeValue { id: id.clone(), x: Float(v) })
                .collect(),
            z: edges
                .iter()
                .zip(z)
                .map(|(e, &v)| EdgeDual {
                    from: instance.ids[e.tail].clone(),
                    to: instance.ids[e.head].clone(),
                    z: Float(v),
                })
                .collect(),
            objective: Float(objective_on_edges(edges.iter().copied(), &instance.losses, x)),
            kkt_residual: Float(residual_on_edges(edges.iter().copied(), &instance.losses, x, z)),
            stats: None,
            pattern: None,
        }
    }

    pub fn with_stats(mut self, stats: &SolveStats) -> Self {
        self.stats = Some(stats.into());
        self
    }

    pub fn with_pattern(mut self, pattern: String) -> Self {
        self.pattern = Some(pattern);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("node  x\n");
        for v in &self.x {
            out += &format!("{}  {}\n", v.id, v.x);
        }
        out += "\nedge  z\n";
        for e in &self.z {
            out += &format!("{} -> {}  {}\n", e.from, e.to, e.z);
        }
        out += &format!("\nobjective     {}\nkkt_residual  {}\n", self.objective, self.kkt_residual);
        if let Some(p) = &self.pattern {
            out += &format!("pattern       {p}\n");
        }
        out
    }
}
