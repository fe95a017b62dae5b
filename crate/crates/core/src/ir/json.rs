//! Canonical JSON encoding: keys sorted, two-space indentation, trailing
//! newline.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{AutomatonIr, Enable, IrConnection, IrError, IrMetadata, IrNode, NodeKind, IR_VERSION, START_NODE};
use crate::syntax::{class_to_string, parse_class};

const START_PORTS: [&str; 2] = ["startOfData", "always"];

fn node_value(n: &IrNode) -> Value {
    let attributes = match &n.kind {
        NodeKind::HState { class, enable, report } => json!({
            "symbolSet": class_to_string(class),
            "enable": enable,
            "report": report,
        }),
        NodeKind::Counter { min, max, instance, report } => json!({
            "min": min, "max": max, "id": instance, "report": report,
        }),
        NodeKind::Bitvector { size, min, max, instance, report } => json!({
            "size": size, "min": min, "max": max, "id": instance, "report": report,
        }),
    };
    json!({ "id": n.id, "type": n.kind.type_name(), "attributes": attributes })
}

pub fn emit_json(ir: &AutomatonIr) -> String {
    let v = json!({
        "version": ir.version,
        "metadata": ir.metadata,
        "nodes": ir.nodes.iter().map(node_value).collect::<Vec<_>>(),
        "connections": ir.connections,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("IR values always serialize");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIr {
    version: u32,
    metadata: IrMetadata,
    nodes: Vec<RawNode>,
    connections: Vec<IrConnection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    #[serde(rename = "type")]
    ty: String,
    attributes: Map<String, Value>,
}

fn node_err(id: &str, message: impl Into<String>) -> IrError {
    IrError::Node { id: id.to_string(), message: message.into() }
}

fn field<'a>(raw: &'a RawNode, key: &str) -> Result<&'a Value, IrError> {
    raw.attributes.get(key).ok_or_else(|| node_err(&raw.id, format!("missing attribute {key:?}")))
}

fn num(raw: &RawNode, key: &str) -> Result<u32, IrError> {
    field(raw, key)?
        .as_u64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| node_err(&raw.id, format!("attribute {key:?} must be a 32-bit unsigned integer")))
}

fn flag(raw: &RawNode, key: &str) -> Result<bool, IrError> {
    field(raw, key)?.as_bool().ok_or_else(|| node_err(&raw.id, format!("attribute {key:?} must be a boolean")))
}

fn check_keys(raw: &RawNode, allowed: &[&str]) -> Result<(), IrError> {
    match raw.attributes.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(node_err(&raw.id, format!("unknown attribute {k:?} for type {}", raw.ty))),
        None => Ok(()),
    }
}

fn convert(raw: &RawNode) -> Result<IrNode, IrError> {
    let kind = match raw.ty.as_str() {
        "hState" => {
            check_keys(raw, &["symbolSet", "enable", "report"])?;
            let text = field(raw, "symbolSet")?
                .as_str()
                .ok_or_else(|| node_err(&raw.id, "attribute \"symbolSet\" must be a string"))?;
            let class = parse_class(text).map_err(|e| node_err(&raw.id, format!("bad symbolSet {text:?}: {e}")))?;
            let enable = Enable::deserialize(field(raw, "enable")?)
                .map_err(|_| node_err(&raw.id, "attribute \"enable\" must be onStartOfData, onActivateIn or always"))?;
            NodeKind::HState { class, enable, report: flag(raw, "report")? }
        }
        "counter" => {
            check_keys(raw, &["min", "max", "id", "report"])?;
            NodeKind::Counter {
                min: num(raw, "min")?,
                max: num(raw, "max")?,
                instance: num(raw, "id")?,
                report: flag(raw, "report")?,
            }
        }
        "bitvector" => {
            check_keys(raw, &["size", "min", "max", "id", "report"])?;
            NodeKind::Bitvector {
                size: num(raw, "size")?,
                min: num(raw, "min")?,
                max: num(raw, "max")?,
                instance: num(raw, "id")?,
                report: flag(raw, "report")?,
            }
        }
        other => return Err(node_err(&raw.id, format!("unknown node type {other:?}"))),
    };
    Ok(IrNode { id: raw.id.clone(), kind })
}

/// Parses and validates an IR document.
pub fn load_json(text: &str) -> Result<AutomatonIr, IrError> {
    let raw: RawIr = serde_json::from_str(text).map_err(|e| IrError::Json(e.to_string()))?;
    let nodes = raw.nodes.iter().map(convert).collect::<Result<Vec<_>, _>>()?;
    let ir = AutomatonIr { version: raw.version, metadata: raw.metadata, nodes, connections: raw.connections };
    validate(&ir)?;
    Ok(ir)
}

/// Checks node attributes, port/kind compatibility of every connection,
/// module input arity and that every reporting node can be reached from a
/// start-enabled node.
pub fn validate(ir: &AutomatonIr) -> Result<(), IrError> {
    if ir.version != IR_VERSION {
        return Err(IrError::Version(ir.version));
    }
    let mut by_id: HashMap<&str, &NodeKind> = HashMap::new();
    for n in &ir.nodes {
        if n.id == START_NODE {
            return Err(node_err(&n.id, "reserved id"));
        }
        if by_id.insert(&n.id, &n.kind).is_some() {
            return Err(node_err(&n.id, "duplicate id"));
        }
        match n.kind {
            NodeKind::HState { class, .. } if class.is_empty() => return Err(node_err(&n.id, "empty symbolSet")),
            NodeKind::Counter { min, max, .. } if min == 0 || min > max => {
                return Err(node_err(&n.id, format!("bounds {min}..{max} must satisfy 1 <= min <= max")))
            }
            NodeKind::Bitvector { size, min, max, .. } if min == 0 || min > max || size != max => {
                return Err(node_err(&n.id, format!("size {size}, bounds {min}..{max}: need 1 <= min <= max = size")))
            }
            _ => {}
        }
    }

    for (index, c) in ir.connections.iter().enumerate() {
        let bad =
            |message: String| IrError::Connection { index, from: c.from.to_string(), to: c.to.to_string(), message };
        if c.from.node == START_NODE {
            if !START_PORTS.contains(&c.from.port.as_str()) {
                return Err(bad(format!("{START_NODE} has no output port {:?}", c.from.port)));
            }
        } else {
            let Some(k) = by_id.get(c.from.node.as_str()) else {
                return Err(bad(format!("unknown source node {:?}", c.from.node)));
            };
            if !k.outputs().contains(&c.from.port.as_str()) {
                return Err(bad(format!("{} node has no output port {:?}", k.type_name(), c.from.port)));
            }
        }
        let Some(k) = by_id.get(c.to.node.as_str()) else {
            return Err(bad(format!("unknown target node {:?}", c.to.node)));
        };
        if !k.inputs().contains(&c.to.port.as_str()) {
            return Err(bad(format!("{} node has no input port {:?}", k.type_name(), c.to.port)));
        }
    }

    for n in &ir.nodes {
        let single: &[&str] = match n.kind {
            NodeKind::HState { .. } => &[],
            NodeKind::Counter { .. } => &["fst", "lst"],
            NodeKind::Bitvector { .. } => &["body"],
        };
        for port in single {
            let srcs = ir.sources(&n.id, port);
            if srcs.len() != 1 {
                return Err(node_err(&n.id, format!("port {port:?} needs exactly one source, found {}", srcs.len())));
            }
            let ok = srcs[0].port == "o" && matches!(by_id.get(srcs[0].node.as_str()), Some(NodeKind::HState { .. }));
            if !ok {
                return Err(node_err(&n.id, format!("port {port:?} must be driven by a state output")));
            }
        }
    }

    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for c in &ir.connections {
        adj.entry(c.from.node.as_str()).or_default().push(c.to.node.as_str());
    }
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    queue.push_back(START_NODE);
    for n in &ir.nodes {
        if matches!(n.kind, NodeKind::HState { enable, .. } if enable != Enable::OnActivateIn) {
            queue.push_back(&n.id);
        }
    }
    while let Some(v) = queue.pop_front() {
        if seen.insert(v) {
            queue.extend(adj.get(v).into_iter().flatten().copied());
        }
    }
    if let Some(n) = ir.nodes.iter().find(|n| n.kind.report() && !seen.contains(n.id.as_str())) {
        return Err(node_err(&n.id, "reporting node is unreachable from any start-enabled node"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{compile, CompileOptions};
    use crate::syntax::parse;

    fn counted_group() -> AutomatonIr {
        compile(&parse("a(bc){1,3}d").unwrap(), &CompileOptions::default()).unwrap()
    }

    #[test]
    fn round_trip() {
        let ir = counted_group();
        let text = emit_json(&ir);
        assert_eq!(load_json(&text).unwrap(), ir);
        assert_eq!(emit_json(&load_json(&text).unwrap()), text);
    }

    #[test]
    fn corrupted_port_names_the_connection() {
        let text = emit_json(&counted_group()).replace("\"en_out\"", "\"en_outt\"");
        let err = load_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, IrError::Connection { .. }), "{msg}");
        assert!(msg.contains("c0.en_outt -> h4.i"), "{msg}");
    }

    #[test]
    fn rejects_bad_nodes() {
        let mut ir = counted_group();
        ir.nodes[4].kind = NodeKind::Counter { min: 4, max: 3, instance: 0, report: false };
        assert!(matches!(validate(&ir), Err(IrError::Node { .. })));
        let mut ir = counted_group();
        ir.connections.retain(|c| c.to.port != "lst");
        assert!(validate(&ir).unwrap_err().to_string().contains("\"lst\""));
    }
}
