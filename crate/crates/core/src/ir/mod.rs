//! Hardware automaton network: homogeneous states plus counter and bit
//! vector modules, wired port to port.
//!
//! Node ids are `h<state>` for states, `c<instance>` for counters and
//! `v<instance>` for bit vectors. The pseudo node `$start` drives the
//! `pre` port of repetitions that open the pattern; its `startOfData`
//! port is raised once before the first byte and its `always` port before
//! every byte.

mod compile;
mod json;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charclass::CharClass;
use crate::placement::PlacementRecord;

pub use compile::{compile, CompileOptions};
pub use json::{emit_json, load_json, validate};
pub use simulate::{simulate_ir, ActivityTrace, CycleActivity, IrSimulator};

pub const IR_VERSION: u32 = 1;
pub const START_NODE: &str = "$start";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Enable {
    OnStartOfData,
    OnActivateIn,
    Always,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    HState { class: CharClass, enable: Enable, report: bool },
    Counter { min: u32, max: u32, instance: u32, report: bool },
    Bitvector { size: u32, min: u32, max: u32, instance: u32, report: bool },
}

impl NodeKind {
    pub fn type_name(&self) -> &'static str {
        match self {
            NodeKind::HState { .. } => "hState",
            NodeKind::Counter { .. } => "counter",
            NodeKind::Bitvector { .. } => "bitvector",
        }
    }

    pub fn inputs(&self) -> &'static [&'static str] {
        match self {
            NodeKind::HState { .. } => &["i"],
            NodeKind::Counter { .. } => &["pre", "fst", "lst"],
            NodeKind::Bitvector { .. } => &["pre", "body"],
        }
    }

    pub fn outputs(&self) -> &'static [&'static str] {
        match self {
            NodeKind::HState { .. } => &["o"],
            NodeKind::Counter { .. } => &["en_fst", "en_out"],
            NodeKind::Bitvector { .. } => &["en_body", "en_out"],
        }
    }

    pub fn report(&self) -> bool {
        match *self {
            NodeKind::HState { report, .. } | NodeKind::Counter { report, .. } | NodeKind::Bitvector { report, .. } => {
                report
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub node: String,
    pub port: String,
}

impl Endpoint {
    pub fn new(node: impl Into<String>, port: impl Into<String>) -> Endpoint {
        Endpoint { node: node.into(), port: port.into() }
    }
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrConnection {
    pub from: Endpoint,
    pub to: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrMetadata {
    pub regex: String,
    pub unfold_threshold: u32,
    pub force_unfold: bool,
    pub mode: String,
    pub placements: Vec<PlacementRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonIr {
    pub version: u32,
    pub metadata: IrMetadata,
    pub nodes: Vec<IrNode>,
    pub connections: Vec<IrConnection>,
}

impl AutomatonIr {
    pub fn node(&self, id: &str) -> Option<&IrNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn hstate_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::HState { .. })).count()
    }

    pub fn counter_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Counter { .. })).count()
    }

    pub fn bitvector_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Bitvector { .. })).count()
    }

    /// Sources wired into `node.port`.
    pub fn sources(&self, node: &str, port: &str) -> Vec<&Endpoint> {
        self.connections.iter().filter(|c| c.to.node == node && c.to.port == port).map(|c| &c.from).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("malformed IR JSON: {0}")]
    Json(String),
    #[error("unsupported IR version {0}")]
    Version(u32),
    #[error("node {id}: {message}")]
    Node { id: String, message: String },
    #[error("connection {index} ({from} -> {to}): {message}")]
    Connection { index: usize, from: String, to: String, message: String },
}
