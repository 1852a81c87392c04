//! Composite graphs: ancestor-closed partial components, the lightweight
//! family (disjoint copies of the 16-output graph plus one partial copy) and
//! the arbitrary-output-count family (two copies with a trimmed output set).

use super::family::{build_g, build_structural, GGraph, GTree};
use super::{ComponentMap, ComponentTag, Dag, GraphError, NodeId};

/// Ancestor-closed subgraph of the 16-output graph that supports the first
/// `i` outputs, renumbered densely in the original order.
#[derive(Debug, Clone)]
pub struct QGraph {
    pub dag: Dag,
    pub map: ComponentMap,
    pub i: usize,
    /// Structure tree of the source graph, in source-local node ids.
    pub source_tree: GTree,
    /// Source-local id to local id; `None` for nodes outside the closure.
    pub relabel: Vec<Option<NodeId>>,
}

/// Build `Q_i`: all nodes lying on some path ending in one of the first `i`
/// outputs of `g16`, with `O(Q_i)` being those `i` outputs.
pub fn build_q(i: usize, g16: &GGraph) -> Result<QGraph, GraphError> {
    let m = g16.dag.outputs().len();
    if m != 16 {
        return Err(GraphError::Parameter(format!(
            "partial component expects the 16-output graph, got {m} outputs"
        )));
    }
    if i < 1 || i > m {
        return Err(GraphError::Parameter(format!("i = {i} out of 1..={m}")));
    }
    let targets = &g16.dag.outputs()[..i];
    let keep = g16.dag.ancestor_closure(targets);

    let mut relabel: Vec<Option<NodeId>> = vec![None; g16.dag.node_count()];
    let mut dag = Dag::new(g16.dag.word_bits());
    let mut tags = Vec::new();
    for (old, kept) in keep.iter().enumerate() {
        if *kept {
            let new = dag.add_node();
            relabel[old] = Some(new);
            tags.push(g16.map.tag(NodeId(old as u32)));
        }
    }
    for (old, kept) in keep.iter().enumerate() {
        if !kept {
            continue;
        }
        let new = relabel[old].unwrap();
        for &p in g16.dag.preds(NodeId(old as u32)) {
            let np = relabel[p.index()]
                .expect("ancestor closure keeps every predecessor of a kept node");
            dag.add_edge(np, new);
        }
    }
    dag.set_outputs(
        targets
            .iter()
            .map(|v| relabel[v.index()].unwrap())
            .collect(),
    );
    dag.set_base(
        g16.dag
            .base()
            .iter()
            .filter_map(|v| relabel[v.index()])
            .collect(),
    );
    dag.validate()?;
    Ok(QGraph {
        dag,
        map: ComponentMap::new(tags),
        i,
        source_tree: g16.tree.clone(),
        relabel,
    })
}

/// Lightweight family: for `m = 16k + i` (Euclidean division), `k` disjoint
/// copies of the 16-output graph followed by one partial copy `Q_i` when
/// `i > 0`. Output order: full copies first, then the partial outputs.
#[derive(Debug, Clone)]
pub struct LightweightGraph {
    pub dag: Dag,
    pub map: ComponentMap,
    pub m: usize,
    /// Structure tree of one full copy, in copy-local ids.
    pub copy_tree: GTree,
    /// Node-id offsets of the full copies.
    pub copy_offsets: Vec<u32>,
    /// The partial component and its node-id offset.
    pub partial: Option<(u32, QGraph)>,
}

pub fn build_lightweight(m: usize) -> Result<LightweightGraph, GraphError> {
    if m < 1 {
        return Err(GraphError::Parameter("m must be at least 1".into()));
    }
    let template = build_g(4);
    let copies = m / 16;
    let rest = m % 16;

    let mut dag = Dag::new(template.dag.word_bits());
    let mut tags = Vec::new();
    let mut outputs = Vec::new();
    let mut copy_offsets = Vec::new();

    for c in 0..copies {
        let offset = dag.node_count() as u32;
        copy_offsets.push(offset);
        append_shifted(&mut dag, &template.dag, offset);
        tags.extend(std::iter::repeat(ComponentTag::Copy(c as u32)).take(template.dag.node_count()));
        outputs.extend(template.dag.outputs().iter().map(|v| NodeId(v.0 + offset)));
    }

    let partial = if rest > 0 {
        let q = build_q(rest, &template)?;
        let offset = dag.node_count() as u32;
        append_shifted(&mut dag, &q.dag, offset);
        tags.extend(std::iter::repeat(ComponentTag::Partial).take(q.dag.node_count()));
        outputs.extend(q.dag.outputs().iter().map(|v| NodeId(v.0 + offset)));
        Some((offset, q))
    } else {
        None
    };

    dag.set_outputs(outputs);
    dag.validate()?;
    Ok(LightweightGraph {
        dag,
        map: ComponentMap::new(tags),
        m,
        copy_tree: template.tree,
        copy_offsets,
        partial,
    })
}

/// Arbitrary output count: two copies of the structural graph one level above
/// the smallest `n` with `2^(n+1) >= m`; the output set is the whole output
/// set of the first copy plus the first `m - 2^n` outputs of the second.
#[derive(Debug, Clone)]
pub struct ArbitraryGraph {
    pub dag: Dag,
    pub map: ComponentMap,
    pub m: usize,
    /// `gamma = 2^n` for the depth-robustness pair `(m, 2^n)`.
    pub n: usize,
    pub copy_tree: GTree,
    pub copy_offsets: [u32; 2],
    /// How many outputs the second copy contributes.
    pub o_prime: usize,
}

pub fn build_arbitrary(m: usize) -> Result<ArbitraryGraph, GraphError> {
    if m < 1 {
        return Err(GraphError::Parameter("m must be at least 1".into()));
    }
    let mut n = 0usize;
    while (1usize << (n + 1)) < m {
        n += 1;
    }
    let template = build_structural(n + 1);
    let per_copy = template.dag.outputs().len();
    debug_assert_eq!(per_copy, 1 << n);
    let o_prime = m - per_copy;

    let mut dag = Dag::new(template.dag.word_bits());
    let mut tags = Vec::new();
    let mut outputs = Vec::new();
    let mut copy_offsets = [0u32; 2];
    for c in 0..2 {
        let offset = dag.node_count() as u32;
        copy_offsets[c] = offset;
        append_shifted(&mut dag, &template.dag, offset);
        tags.extend(std::iter::repeat(ComponentTag::Copy(c as u32)).take(template.dag.node_count()));
    }
    outputs.extend(
        template
            .dag
            .outputs()
            .iter()
            .map(|v| NodeId(v.0 + copy_offsets[0])),
    );
    outputs.extend(
        template.dag.outputs()[..o_prime]
            .iter()
            .map(|v| NodeId(v.0 + copy_offsets[1])),
    );
    dag.set_outputs(outputs);
    dag.validate()?;
    Ok(ArbitraryGraph {
        dag,
        map: ComponentMap::new(tags),
        m,
        n,
        copy_tree: template.tree,
        copy_offsets,
        o_prime,
    })
}

fn append_shifted(dag: &mut Dag, src: &Dag, offset: u32) {
    for i in 0..src.node_count() {
        let v = dag.add_node();
        debug_assert_eq!(v.0, i as u32 + offset);
    }
    for i in 0..src.node_count() {
        for &p in src.preds(NodeId(i as u32)) {
            dag.add_edge(NodeId(p.0 + offset), NodeId(i as u32 + offset));
        }
    }
}

/// Any graph produced by this crate's protocol-facing constructors, with the
/// structure the in-place labeller needs.
#[derive(Debug, Clone)]
pub enum BuiltGraph {
    G(GGraph),
    Lightweight(LightweightGraph),
    Arbitrary(ArbitraryGraph),
}

impl BuiltGraph {
    pub fn dag(&self) -> &Dag {
        match self {
            BuiltGraph::G(g) => &g.dag,
            BuiltGraph::Lightweight(g) => &g.dag,
            BuiltGraph::Arbitrary(g) => &g.dag,
        }
    }

    pub fn map(&self) -> &ComponentMap {
        match self {
            BuiltGraph::G(g) => &g.map,
            BuiltGraph::Lightweight(g) => &g.map,
            BuiltGraph::Arbitrary(g) => &g.map,
        }
    }

    pub fn outputs(&self) -> &[NodeId] {
        self.dag().outputs()
    }

    /// Guaranteed path length of the depth-robustness pair `(|O|, gamma)`.
    pub fn gamma(&self) -> usize {
        match self {
            // The n-output graph is (2^n, 2^n)-depth-robust: gamma = |O|.
            BuiltGraph::G(g) => g.dag.outputs().len(),
            // Fixed small kappa for the lightweight family.
            BuiltGraph::Lightweight(_) => 16,
            BuiltGraph::Arbitrary(g) => 1 << g.n,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            BuiltGraph::G(_) => "g",
            BuiltGraph::Lightweight(_) => "lightweight",
            BuiltGraph::Arbitrary(_) => "arbitrary",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::family::g_node_count;

    #[test]
    fn q16_is_the_full_ancestor_closure() {
        let g = build_g(4);
        let q = build_q(16, &g).unwrap();
        let keep = g.dag.ancestor_closure(g.dag.outputs());
        let expected = keep.iter().filter(|k| **k).count();
        assert_eq!(q.dag.node_count(), expected);
        assert_eq!(q.dag.outputs().len(), 16);
    }

    #[test]
    fn q1_single_output_and_connected() {
        let g = build_g(4);
        let q = build_q(1, &g).unwrap();
        assert_eq!(q.dag.outputs().len(), 1);
        // Every node reaches the single output.
        let succs = q.dag.successors();
        let target = q.dag.outputs()[0];
        for i in 0..q.dag.node_count() {
            let mut seen = vec![false; q.dag.node_count()];
            let mut stack = vec![NodeId(i as u32)];
            seen[i] = true;
            let mut hit = false;
            while let Some(v) = stack.pop() {
                if v == target {
                    hit = true;
                    break;
                }
                for &s in &succs[v.index()] {
                    if !seen[s.index()] {
                        seen[s.index()] = true;
                        stack.push(s);
                    }
                }
            }
            assert!(hit, "node {i} does not reach the output");
        }
    }

    #[test]
    fn q_rejects_out_of_range() {
        let g = build_g(4);
        assert!(build_q(0, &g).is_err());
        assert!(build_q(17, &g).is_err());
    }

    #[test]
    fn lightweight_power_of_two_counts() {
        for k in 4..=7 {
            let g = build_lightweight(1 << k).unwrap();
            assert_eq!(g.dag.node_count(), (1 << (k - 4)) * g_node_count(4));
            assert_eq!(g.dag.outputs().len(), 1 << k);
        }
    }

    #[test]
    fn lightweight_16_is_one_copy() {
        let g = build_lightweight(16).unwrap();
        let template = build_g(4);
        assert_eq!(g.dag.node_count(), template.dag.node_count());
        assert_eq!(g.dag.edge_count(), template.dag.edge_count());
        assert_eq!(g.dag.outputs(), template.dag.outputs());
        assert!(g.partial.is_none());
    }

    #[test]
    fn lightweight_20_is_copy_plus_partial() {
        let g = build_lightweight(20).unwrap();
        assert_eq!(g.copy_offsets.len(), 1);
        let (_, q) = g.partial.as_ref().unwrap();
        assert_eq!(q.i, 4);
        assert_eq!(g.dag.outputs().len(), 20);
        assert_eq!(
            g.dag.node_count(),
            g_node_count(4) + q.dag.node_count()
        );
    }

    #[test]
    fn arbitrary_output_counts() {
        for m in [1usize, 2, 3, 5, 16, 20, 31] {
            let g = build_arbitrary(m).unwrap();
            assert_eq!(g.dag.outputs().len(), m, "m = {m}");
            assert!((1 << (g.n + 1)) >= m);
            if g.n > 0 {
                assert!((1 << g.n) < m || m <= 2);
            }
        }
    }

    #[test]
    fn arbitrary_3_uses_two_level_two_copies() {
        let g = build_arbitrary(3).unwrap();
        assert_eq!(g.n, 1);
        // Each copy is the 18-node structural level-2 graph.
        assert_eq!(g.dag.node_count(), 36);
        assert_eq!(g.o_prime, 1);
    }

    #[test]
    fn arbitrary_power_of_two_takes_all_of_first_copy() {
        let g = build_arbitrary(4).unwrap();
        assert_eq!(g.o_prime, 0);
        let first_copy_outputs = g.dag.outputs();
        assert!(first_copy_outputs
            .iter()
            .all(|v| (v.0 as usize) < g.dag.node_count() / 2));
    }
}
