//! The recursive depth-robust family.
//!
//! Structural recursion: level 0 is a single node; level `k` glues a left
//! copy and a right copy of level `k-1` through a central butterfly `H_(k-1)`
//! (base of the left copy feeds the connector inputs) and hooks the connector
//! outputs into the right copy's left spine through fresh butterflies, one
//! per spine depth, ending with a direct edge into the spine's leaf.
//!
//! The public family `build_g(n)` is indexed by output count: its output set
//! (the right copy's base) has `2^n` nodes, so `build_g(n)` is the structural
//! level `n+1` graph for `n >= 1`, and the single node for `n = 0`. Node
//! counts follow `(n^2 + n + 3) * 2^(n+1) - 2`; at `n = 4` that is 734.

use super::butterfly::{emit_butterfly, ButterflyInstance};
use super::{ComponentMap, ComponentTag, Dag, GraphError, NodeId};

/// Recursive structure of one component, with node handles into the host DAG.
#[derive(Debug, Clone)]
pub struct GTree {
    level: usize,
    base: Vec<NodeId>,
    kind: GTreeKind,
}

#[derive(Debug, Clone)]
enum GTreeKind {
    Leaf(NodeId),
    Node(Box<GInner>),
}

#[derive(Debug, Clone)]
struct GInner {
    left: GTree,
    cs: ButterflyInstance,
    /// Hook connectors of the internal edge gadget: `hooks[j]` feeds the
    /// connector inputs of the right copy's depth-`j` left-spine component.
    hooks: Vec<ButterflyInstance>,
    right: GTree,
}

impl GTree {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Base node list, in construction order (left base then right base).
    pub fn base(&self) -> &[NodeId] {
        &self.base
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, GTreeKind::Leaf(_))
    }

    pub fn leaf_node(&self) -> Option<NodeId> {
        match self.kind {
            GTreeKind::Leaf(v) => Some(v),
            GTreeKind::Node(_) => None,
        }
    }

    pub fn left(&self) -> Option<&GTree> {
        match &self.kind {
            GTreeKind::Leaf(_) => None,
            GTreeKind::Node(inner) => Some(&inner.left),
        }
    }

    pub fn right(&self) -> Option<&GTree> {
        match &self.kind {
            GTreeKind::Leaf(_) => None,
            GTreeKind::Node(inner) => Some(&inner.right),
        }
    }

    pub fn connector(&self) -> Option<&ButterflyInstance> {
        match &self.kind {
            GTreeKind::Leaf(_) => None,
            GTreeKind::Node(inner) => Some(&inner.cs),
        }
    }

    pub fn hooks(&self) -> &[ButterflyInstance] {
        match &self.kind {
            GTreeKind::Leaf(_) => &[],
            GTreeKind::Node(inner) => &inner.hooks,
        }
    }

    /// Follow the left spine `depth` steps down.
    pub fn left_spine(&self, depth: usize) -> &GTree {
        let mut t = self;
        for _ in 0..depth {
            t = t.left().expect("spine shorter than requested depth");
        }
        t
    }

    /// Base of the right component; the protocol's output set.
    pub fn base_rs(&self) -> Result<&[NodeId], GraphError> {
        self.right()
            .map(|r| r.base())
            .ok_or_else(|| GraphError::Structure("level-0 graph has no right component".into()))
    }
}

/// Product of the recursive constructors: the DAG plus its component map and
/// the structure tree the in-place labeller schedules over.
#[derive(Debug, Clone)]
pub struct GGraph {
    pub dag: Dag,
    pub map: ComponentMap,
    pub tree: GTree,
}

impl GGraph {
    pub fn base_rs(&self) -> Result<&[NodeId], GraphError> {
        self.tree.base_rs()
    }
}

struct Builder {
    dag: Dag,
    tags: Vec<ComponentTag>,
    hook_counter: u32,
}

impl Builder {
    fn emit(&mut self, level: usize) -> GTree {
        if level == 0 {
            let v = self.dag.add_node();
            self.tags.push(ComponentTag::Leaf);
            return GTree {
                level: 0,
                base: vec![v],
                kind: GTreeKind::Leaf(v),
            };
        }

        let left = self.emit(level - 1);

        let cs = emit_butterfly(
            &mut self.dag,
            level - 1,
            &mut self.tags,
            ComponentTag::Connector,
        );
        for (b, c) in left.base.iter().zip(cs.inputs()) {
            self.dag.add_edge(*b, *c);
        }

        // Fresh hook connectors for the edge gadget into the right copy's
        // left spine: one of order level-2-j per spine depth j.
        let mut hooks = Vec::new();
        if level >= 2 {
            for j in 0..=(level - 2) {
                let id = self.hook_counter;
                self.hook_counter += 1;
                hooks.push(emit_butterfly(
                    &mut self.dag,
                    level - 2 - j,
                    &mut self.tags,
                    ComponentTag::Hook(id),
                ));
            }
        }

        let right = self.emit(level - 1);

        // Wire connector outputs into the right copy: at each spine depth the
        // second half of the remaining outputs goes through the hook
        // connector into that component's connector inputs, the first half
        // recurses; the last remaining output feeds the spine leaf directly.
        let mut x: &[NodeId] = cs.outputs();
        for (j, hook) in hooks.iter().enumerate() {
            let half = x.len() / 2;
            let (x1, x2) = x.split_at(half);
            for (s, t) in x2.iter().zip(hook.inputs()) {
                self.dag.add_edge(*s, *t);
            }
            let spine = right.left_spine(j);
            let cs_in = spine
                .connector()
                .expect("spine component at hooked depth has a connector")
                .inputs();
            for (s, t) in hook.outputs().iter().zip(cs_in) {
                self.dag.add_edge(*s, *t);
            }
            x = x1;
        }
        debug_assert_eq!(x.len(), 1);
        let leaf = right
            .left_spine(level - 1)
            .leaf_node()
            .expect("left spine bottoms out at a leaf");
        self.dag.add_edge(x[0], leaf);

        let mut base = left.base.clone();
        base.extend_from_slice(&right.base);
        GTree {
            level,
            base,
            kind: GTreeKind::Node(Box::new(GInner {
                left,
                cs,
                hooks,
                right,
            })),
        }
    }
}

/// Build the structural family at an explicit recursion level.
pub fn build_structural(level: usize) -> GGraph {
    let mut b = Builder {
        dag: Dag::new(256),
        tags: Vec::new(),
        hook_counter: 0,
    };
    let tree = b.emit(level);
    let mut dag = b.dag;
    dag.set_base(tree.base().to_vec());
    let outputs = match tree.base_rs() {
        Ok(rs) => rs.to_vec(),
        Err(_) => tree.base().to_vec(),
    };
    dag.set_outputs(outputs);
    dag.validate().expect("family construction is topological");

    // Re-tag relative to the root so the flat map distinguishes L/C/R.
    let tags = retag_root(&tree, dag.node_count(), &b.tags);
    GGraph {
        dag,
        map: ComponentMap::new(tags),
        tree,
    }
}

fn retag_root(tree: &GTree, node_count: usize, raw: &[ComponentTag]) -> Vec<ComponentTag> {
    let mut tags = raw.to_vec();
    debug_assert_eq!(tags.len(), node_count);
    if let (Some(left), Some(right)) = (tree.left(), tree.right()) {
        mark_range(&mut tags, left, ComponentTag::Left);
        mark_range(&mut tags, right, ComponentTag::Right);
    }
    tags
}

fn mark_range(tags: &mut [ComponentTag], tree: &GTree, tag: ComponentTag) {
    match &tree.kind {
        GTreeKind::Leaf(v) => tags[v.index()] = tag,
        GTreeKind::Node(inner) => {
            mark_range(tags, &inner.left, tag);
            for layer_t in 0..inner.cs.layer_count() {
                for v in inner.cs.layer(layer_t) {
                    tags[v.index()] = tag;
                }
            }
            for hook in &inner.hooks {
                for layer_t in 0..hook.layer_count() {
                    for v in hook.layer(layer_t) {
                        tags[v.index()] = tag;
                    }
                }
            }
            mark_range(tags, &inner.right, tag);
        }
    }
}

/// The protocol-facing family, indexed by output count: `|O(build_g(n))| = 2^n`.
///
/// `build_g(0)` is the single-node base case; for `n >= 1` the graph is the
/// structural level `n+1` construction, whose node count is
/// `(n^2 + n + 3) * 2^(n+1) - 2`.
pub fn build_g(n: usize) -> GGraph {
    if n == 0 {
        build_structural(0)
    } else {
        build_structural(n + 1)
    }
}

/// Closed-form node count of `build_g(n)` for `n >= 1`.
pub fn g_node_count(n: usize) -> usize {
    (n * n + n + 3) * (1 << (n + 1)) - 2
}

/// Ordered base nodes of the right component, recovered from the flat
/// component map: the base nodes tagged as belonging to the right side.
pub fn base_rs(dag: &Dag, map: &ComponentMap) -> Result<Vec<NodeId>, GraphError> {
    let rs: Vec<NodeId> = dag
        .base()
        .iter()
        .copied()
        .filter(|v| map.tag(*v) == ComponentTag::Right)
        .collect();
    if rs.is_empty() {
        return Err(GraphError::Structure(
            "graph has no right component (level 0?)".into(),
        ));
    }
    Ok(rs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_is_single_node() {
        let g = build_g(0);
        assert_eq!(g.dag.node_count(), 1);
        assert_eq!(g.dag.base().len(), 1);
        assert!(g.tree.base_rs().is_err());
    }

    #[test]
    fn structural_level_one_is_a_path() {
        let g = build_structural(1);
        assert_eq!(g.dag.node_count(), 4);
        assert_eq!(g.dag.edge_count(), 3);
        assert_eq!(g.dag.base().len(), 2);
        assert_eq!(g.tree.base_rs().unwrap().len(), 1);
    }

    #[test]
    fn node_counts_match_appendix_recurrence() {
        // Structural counts 1, 4, 18, 70, 238, 734 shift into the
        // output-indexed closed form (n^2+n+3)*2^(n+1) - 2 for n >= 1.
        assert_eq!(build_structural(0).dag.node_count(), 1);
        assert_eq!(build_structural(1).dag.node_count(), 4);
        for (n, want) in [(1, 18), (2, 70), (3, 238), (4, 734)] {
            let g = build_g(n);
            assert_eq!(g.dag.node_count(), want, "build_g({n})");
            assert_eq!(g.dag.node_count(), g_node_count(n));
        }
    }

    #[test]
    fn base_and_output_sizes() {
        for n in 1..=6 {
            let g = build_g(n);
            assert_eq!(g.dag.base().len(), 1 << (n + 1));
            let rs = g.base_rs().unwrap();
            assert_eq!(rs.len(), 1 << n);
            assert_eq!(g.dag.outputs(), rs);
            // Right base is the second half of the full base.
            assert_eq!(&g.dag.base()[1 << n..], rs);
            // All output nodes are members of the base.
            for v in rs {
                assert!(g.dag.base().contains(v));
            }
        }
    }

    #[test]
    fn base_rs_from_component_map_matches_tree() {
        for n in 1..=5 {
            let g = build_g(n);
            let via_map = base_rs(&g.dag, &g.map).unwrap();
            assert_eq!(via_map.as_slice(), g.tree.base_rs().unwrap());
        }
    }

    #[test]
    fn in_degree_bounded_by_two_across_levels() {
        let mut max_seen = 0;
        for n in 1..=10 {
            let g = build_structural(n);
            max_seen = max_seen.max(g.dag.max_in_degree());
            assert!(g.dag.max_in_degree() <= 2, "level {n}");
        }
        assert_eq!(max_seen, 2);
    }

    #[test]
    fn exactly_one_input_node() {
        // The left spine bottoms out in the unique source of the whole graph.
        for n in 1..=5 {
            let g = build_structural(n);
            assert_eq!(g.dag.input_nodes().len(), 1, "level {n}");
        }
    }

    #[test]
    fn hook_connector_orders_shrink_along_spine() {
        let g = build_structural(4);
        let hooks = g.tree.hooks();
        assert_eq!(hooks.len(), 3);
        let orders: Vec<usize> = hooks.iter().map(|h| h.order()).collect();
        assert_eq!(orders, vec![2, 1, 0]);
    }
}
