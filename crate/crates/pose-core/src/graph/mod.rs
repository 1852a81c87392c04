//! DAG families used by the erasure protocols.
//!
//! Graphs are materialized explicitly: dense node ids in construction order
//! (which is always a topological order), per-node ordered predecessor lists,
//! and a designated ordered output set `O(G)`. Label inputs are sensitive to
//! predecessor order, so every constructor fixes that order deterministically.

mod butterfly;
mod compose;
mod family;

pub use butterfly::{build_butterfly, ButterflyInstance, StageWiring};
pub use compose::{
    build_arbitrary, build_lightweight, build_q, ArbitraryGraph, BuiltGraph, LightweightGraph,
    QGraph,
};
pub use family::{base_rs, build_g, build_structural, GGraph, GTree};

use serde::Serialize;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("structure error: {0}")]
    Structure(String),
}

/// Dense node index. Construction order is a topological order: every edge
/// `(u, v)` satisfies `u.index() < v.index()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Explicit DAG with ordered predecessor lists, output set and base list.
#[derive(Debug, Clone)]
pub struct Dag {
    preds: Vec<Vec<NodeId>>,
    outputs: Vec<NodeId>,
    base: Vec<NodeId>,
    word_bits: u32,
}

impl Dag {
    pub fn new(word_bits: u32) -> Self {
        Dag {
            preds: Vec::new(),
            outputs: Vec::new(),
            base: Vec::new(),
            word_bits,
        }
    }

    pub(crate) fn add_node(&mut self) -> NodeId {
        let id = NodeId(self.preds.len() as u32);
        self.preds.push(Vec::new());
        id
    }

    /// Append `from` to `to`'s predecessor list. Panics if the edge would
    /// break the topological-index invariant or duplicate a predecessor.
    pub(crate) fn add_edge(&mut self, from: NodeId, to: NodeId) {
        assert!(
            from.index() < to.index(),
            "edge {from:?} -> {to:?} violates topological numbering"
        );
        let list = &mut self.preds[to.index()];
        assert!(!list.contains(&from), "duplicate edge {from:?} -> {to:?}");
        list.push(from);
    }

    pub(crate) fn set_outputs(&mut self, outputs: Vec<NodeId>) {
        self.outputs = outputs;
    }

    pub(crate) fn set_base(&mut self, base: Vec<NodeId>) {
        self.base = base;
    }

    pub fn node_count(&self) -> usize {
        self.preds.len()
    }

    pub fn preds(&self, v: NodeId) -> &[NodeId] {
        &self.preds[v.index()]
    }

    /// The designated ordered output set `O(G)`.
    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    /// Base node list, empty for graphs without one.
    pub fn base(&self) -> &[NodeId] {
        &self.base
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    /// Nodes with no predecessors, in index order.
    pub fn input_nodes(&self) -> Vec<NodeId> {
        (0..self.preds.len())
            .filter(|&i| self.preds[i].is_empty())
            .map(|i| NodeId(i as u32))
            .collect()
    }

    pub fn max_in_degree(&self) -> usize {
        self.preds.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Successor lists, derived on demand.
    pub fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut succs = vec![Vec::new(); self.node_count()];
        for (i, preds) in self.preds.iter().enumerate() {
            for p in preds {
                succs[p.index()].push(NodeId(i as u32));
            }
        }
        succs
    }

    /// All ancestors of `targets` including the targets themselves.
    pub fn ancestor_closure(&self, targets: &[NodeId]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        for &t in targets {
            if !seen[t.index()] {
                seen[t.index()] = true;
                queue.push_back(t);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &p in self.preds(v) {
                if !seen[p.index()] {
                    seen[p.index()] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Asserts the topological-index invariant and duplicate-freeness.
    /// Constructors call this before handing a graph out.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (i, preds) in self.preds.iter().enumerate() {
            for (k, p) in preds.iter().enumerate() {
                if p.index() >= i {
                    return Err(GraphError::Structure(format!(
                        "edge {p:?} -> node {i} breaks topological numbering"
                    )));
                }
                if preds[..k].contains(p) {
                    return Err(GraphError::Structure(format!(
                        "duplicate predecessor {p:?} of node {i}"
                    )));
                }
            }
        }
        for list in [&self.outputs, &self.base] {
            let mut seen = vec![false; self.node_count()];
            for v in list.iter() {
                if v.index() >= self.node_count() {
                    return Err(GraphError::Structure("node list out of range".into()));
                }
                if seen[v.index()] {
                    return Err(GraphError::Structure("duplicate in node list".into()));
                }
                seen[v.index()] = true;
            }
        }
        Ok(())
    }

    /// Compact binary adjacency dump, little-endian u32 throughout:
    /// node count, then per node its predecessor count and predecessors,
    /// then the output list and base list each prefixed by their length.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let push = |out: &mut Vec<u8>, x: u32| out.extend_from_slice(&x.to_le_bytes());
        push(&mut out, self.node_count() as u32);
        for preds in &self.preds {
            push(&mut out, preds.len() as u32);
            for p in preds {
                push(&mut out, p.0);
            }
        }
        push(&mut out, self.outputs.len() as u32);
        for v in &self.outputs {
            push(&mut out, v.0);
        }
        push(&mut out, self.base.len() as u32);
        for v in &self.base {
            push(&mut out, v.0);
        }
        out
    }

    /// DOT export, one node per line, colored by component tag when given.
    pub fn to_dot(&self, map: Option<&ComponentMap>) -> String {
        let mut s = String::from("digraph g {\n  rankdir=LR;\n");
        for i in 0..self.node_count() {
            let color = map
                .map(|m| m.tag(NodeId(i as u32)).color())
                .unwrap_or("white");
            let label = map
                .map(|m| format!("{} [{}]", i, m.tag(NodeId(i as u32))))
                .unwrap_or_else(|| i.to_string());
            s.push_str(&format!(
                "  n{i} [label=\"{label}\", style=filled, fillcolor={color}];\n"
            ));
        }
        for (i, preds) in self.preds.iter().enumerate() {
            for p in preds {
                s.push_str(&format!("  n{} -> n{};\n", p.0, i));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Which structural component a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentTag {
    /// Single-node base case.
    Leaf,
    /// Inside the left component at some recursion depth.
    Left,
    /// Inside the central connector of some component.
    Connector,
    /// Inside the right component.
    Right,
    /// Inside a fresh connector copy introduced by the edge-hook gadget,
    /// carrying the copy id.
    Hook(u32),
    /// Member of a union copy (lightweight / arbitrary-size assemblies).
    Copy(u32),
    /// Member of the partial ancestor-closed component of a lightweight graph.
    Partial,
}

impl ComponentTag {
    fn color(self) -> &'static str {
        match self {
            ComponentTag::Leaf => "gray",
            ComponentTag::Left => "lightblue",
            ComponentTag::Connector => "gold",
            ComponentTag::Right => "lightgreen",
            ComponentTag::Hook(_) => "orange",
            ComponentTag::Copy(_) => "plum",
            ComponentTag::Partial => "salmon",
        }
    }
}

impl std::fmt::Display for ComponentTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComponentTag::Leaf => write!(f, "leaf"),
            ComponentTag::Left => write!(f, "L"),
            ComponentTag::Connector => write!(f, "C"),
            ComponentTag::Right => write!(f, "R"),
            ComponentTag::Hook(i) => write!(f, "hook{i}"),
            ComponentTag::Copy(i) => write!(f, "copy{i}"),
            ComponentTag::Partial => write!(f, "partial"),
        }
    }
}

/// Per-node component tags; every node has exactly one.
#[derive(Debug, Clone)]
pub struct ComponentMap {
    tags: Vec<ComponentTag>,
}

impl ComponentMap {
    pub(crate) fn new(tags: Vec<ComponentTag>) -> Self {
        ComponentMap { tags }
    }

    pub fn tag(&self, v: NodeId) -> ComponentTag {
        self.tags[v.index()]
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Set of removed nodes, as a mask over the graph's node range.
#[derive(Debug, Clone)]
pub struct RemovalSet {
    mask: Vec<bool>,
    count: usize,
}

impl RemovalSet {
    pub fn empty(node_count: usize) -> Self {
        RemovalSet {
            mask: vec![false; node_count],
            count: 0,
        }
    }

    pub fn from_nodes(node_count: usize, nodes: &[NodeId]) -> Result<Self, GraphError> {
        let mut set = RemovalSet::empty(node_count);
        for &v in nodes {
            if v.index() >= node_count {
                return Err(GraphError::Parameter(format!("{v:?} not in graph")));
            }
            if !set.mask[v.index()] {
                set.mask[v.index()] = true;
                set.count += 1;
            }
        }
        Ok(set)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.mask[v.index()]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub(crate) fn insert(&mut self, v: NodeId) {
        if !self.mask[v.index()] {
            self.mask[v.index()] = true;
            self.count += 1;
        }
    }

    pub(crate) fn remove(&mut self, v: NodeId) {
        if self.mask[v.index()] {
            self.mask[v.index()] = false;
            self.count -= 1;
        }
    }
}

/// Length (in edges) of the longest path ending at `v` in `g \ removed`,
/// computed in one topological sweep. Zero when no surviving predecessor.
pub fn llp(g: &Dag, v: NodeId, removed: &RemovalSet) -> Result<usize, GraphError> {
    if removed.contains(v) {
        return Err(GraphError::Parameter(format!("{v:?} is removed")));
    }
    Ok(llp_all(g, removed)[v.index()].expect("surviving node has a depth"))
}

/// Longest-path-ending-here for every surviving node; `None` for removed ones.
pub fn llp_all(g: &Dag, removed: &RemovalSet) -> Vec<Option<usize>> {
    let mut depth: Vec<Option<usize>> = vec![None; g.node_count()];
    for i in 0..g.node_count() {
        let v = NodeId(i as u32);
        if removed.contains(v) {
            continue;
        }
        let mut best = 0usize;
        for &p in g.preds(v) {
            if let Some(d) = depth[p.index()] {
                best = best.max(d + 1);
            }
        }
        depth[i] = Some(best);
    }
    depth
}

/// Disjoint union: nodes of `g2` shifted by `|V(g1)|`, outputs and bases
/// concatenated.
pub fn disjoint_union(g1: &Dag, g2: &Dag) -> Result<Dag, GraphError> {
    if g1.word_bits != g2.word_bits {
        return Err(GraphError::Parameter(
            "disjoint union requires equal word_bits".into(),
        ));
    }
    let shift = g1.node_count() as u32;
    let mut out = Dag::new(g1.word_bits);
    out.preds = g1.preds.clone();
    out.preds.extend(
        g2.preds
            .iter()
            .map(|list| list.iter().map(|p| NodeId(p.0 + shift)).collect()),
    );
    out.outputs = g1.outputs.clone();
    out.outputs
        .extend(g2.outputs.iter().map(|v| NodeId(v.0 + shift)));
    out.base = g1.base.clone();
    out.base.extend(g2.base.iter().map(|v| NodeId(v.0 + shift)));
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Dag {
        let mut g = Dag::new(256);
        let ids: Vec<NodeId> = (0..n).map(|_| g.add_node()).collect();
        for w in ids.windows(2) {
            g.add_edge(w[0], w[1]);
        }
        g.set_outputs(vec![ids[n - 1]]);
        g
    }

    #[test]
    fn llp_basics() {
        let g = chain(3);
        let none = RemovalSet::empty(3);
        assert_eq!(llp(&g, NodeId(0), &none).unwrap(), 0);
        assert_eq!(llp(&g, NodeId(2), &none).unwrap(), 2);
        // Severing the middle node resets the tail to an input.
        let cut = RemovalSet::from_nodes(3, &[NodeId(1)]).unwrap();
        assert_eq!(llp(&g, NodeId(2), &cut).unwrap(), 0);
        assert!(llp(&g, NodeId(1), &cut).is_err());
    }

    #[test]
    fn union_shifts_and_concats() {
        let g = chain(3);
        let u = disjoint_union(&g, &g).unwrap();
        assert_eq!(u.node_count(), 6);
        assert_eq!(u.outputs(), &[NodeId(2), NodeId(5)]);
        assert_eq!(u.preds(NodeId(4)), &[NodeId(3)]);
        u.validate().unwrap();
    }

    #[test]
    fn union_with_empty_is_identity() {
        let g = chain(4);
        let empty = Dag::new(256);
        let u = disjoint_union(&g, &empty).unwrap();
        assert_eq!(u.node_count(), g.node_count());
        assert_eq!(u.outputs(), g.outputs());
    }

    #[test]
    fn union_word_bits_mismatch() {
        let g = chain(2);
        let other = Dag::new(128);
        assert!(disjoint_union(&g, &other).is_err());
    }

    #[test]
    fn binary_dump_roundtrip_shape() {
        let g = chain(3);
        let bytes = g.to_binary();
        // count + (1 + 0) + (1 + 1) + (1 + 1) + outputs(1 + 1) + base(1)
        assert_eq!(bytes.len(), 4 * (1 + 1 + 2 + 2 + 2 + 1));
        assert_eq!(&bytes[0..4], &3u32.to_le_bytes());
    }
}
