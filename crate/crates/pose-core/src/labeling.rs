//! h-labellings of DAGs.
//!
//! `l(v) = h(enc(v) || l(v_1) || ... || l(v_d))` over the ordered predecessor
//! list of `v`; input nodes hash their encoding alone. Two labellers exist:
//! an unmetered reference sweep used by verifiers and test oracles, and an
//! in-place scheduler whose peak label storage is measured by [`LabelStore`].
//!
//! The store is the honesty mechanism for the in-place claim: a label can
//! only be read between its `store` and `evict`; resurrecting an evicted
//! label without recomputation is impossible through this interface. Peak
//! usage of the family schedules is `|target| + 2` words (the two transient
//! words come from pairwise butterfly-stage updates), so the documented
//! overhead constant of the in-place labeller is 2.

use crate::graph::{ArbitraryGraph, BuiltGraph, ButterflyInstance, Dag, GGraph, GTree, LightweightGraph, NodeId, StageWiring};
use crate::oracle::{HashOracle, Label, OracleError};
use thiserror::Error;

/// Domain tag prefixing the fixed-width node index inside pre-labels.
const NODE_TAG: u8 = 0x4e;

#[derive(Debug, Error)]
pub enum LabelingError {
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("meter: {0}")]
    Meter(String),
}

/// Fixed-width encoding of a node id: tag byte plus 8-byte big-endian index.
pub fn encode_node(v: NodeId) -> [u8; 9] {
    let mut buf = [0u8; 9];
    buf[0] = NODE_TAG;
    buf[1..].copy_from_slice(&(v.index() as u64).to_be_bytes());
    buf
}

/// One oracle call: the label of `v` from its ordered predecessor labels.
pub fn label_node(
    oracle: &mut HashOracle,
    v: NodeId,
    pred_labels: &[&Label],
) -> Result<Label, LabelingError> {
    let mut input = Vec::with_capacity(9 + pred_labels.len() * oracle.word_bytes());
    input.extend_from_slice(&encode_node(v));
    for l in pred_labels {
        input.extend_from_slice(l.as_bytes());
    }
    Ok(oracle.query(&input)?)
}

/// The byte string fed to the oracle to produce `l(v)`, given a full label
/// assignment. Used by the harness to recognize valid pre-labels.
pub fn pre_label(v: NodeId, g: &Dag, labels: &[Label]) -> Vec<u8> {
    let mut input = Vec::from(encode_node(v));
    for p in g.preds(v) {
        input.extend_from_slice(labels[p.index()].as_bytes());
    }
    input
}

/// Label every node in one topological sweep; `|V|` oracle calls.
pub fn label_all_reference(oracle: &mut HashOracle, g: &Dag) -> Result<Vec<Label>, LabelingError> {
    let mut labels: Vec<Label> = Vec::with_capacity(g.node_count());
    for i in 0..g.node_count() {
        let v = NodeId(i as u32);
        let preds: Vec<&Label> = g.preds(v).iter().map(|p| &labels[p.index()]).collect();
        let l = label_node(oracle, v, &preds)?;
        labels.push(l);
    }
    Ok(labels)
}

/// Reference labelling restricted to a node mask (typically the ancestor
/// closure of the output set); one call per present node.
pub fn label_reference_restricted(
    oracle: &mut HashOracle,
    g: &Dag,
    mask: &[bool],
) -> Result<Vec<Option<Label>>, LabelingError> {
    let mut labels: Vec<Option<Label>> = vec![None; g.node_count()];
    for i in 0..g.node_count() {
        if !mask[i] {
            continue;
        }
        let v = NodeId(i as u32);
        let preds: Vec<&Label> = g
            .preds(v)
            .iter()
            .map(|p| {
                labels[p.index()]
                    .as_ref()
                    .expect("mask must be ancestor-closed")
            })
            .collect();
        labels[i] = Some(label_node(oracle, v, &preds)?);
    }
    Ok(labels)
}

/// Metered label storage. `words_now` counts live labels, `words_peak` the
/// historical maximum; reads of absent slots are errors.
#[derive(Debug)]
pub struct LabelStore {
    slots: Vec<Option<Label>>,
    words_now: usize,
    words_peak: usize,
}

impl LabelStore {
    pub fn new(node_count: usize) -> Self {
        LabelStore {
            slots: vec![None; node_count],
            words_now: 0,
            words_peak: 0,
        }
    }

    pub fn store(&mut self, v: NodeId, label: Label) -> Result<(), LabelingError> {
        let slot = &mut self.slots[v.index()];
        if slot.is_some() {
            return Err(LabelingError::Meter(format!("{v:?} already stored")));
        }
        *slot = Some(label);
        self.words_now += 1;
        self.words_peak = self.words_peak.max(self.words_now);
        Ok(())
    }

    pub fn read(&self, v: NodeId) -> Result<&Label, LabelingError> {
        self.slots[v.index()]
            .as_ref()
            .ok_or_else(|| LabelingError::Meter(format!("{v:?} not live in the store")))
    }

    pub fn evict(&mut self, v: NodeId) -> Result<(), LabelingError> {
        match self.slots[v.index()].take() {
            Some(_) => {
                self.words_now -= 1;
                Ok(())
            }
            None => Err(LabelingError::Meter(format!("{v:?} evicted while absent"))),
        }
    }

    pub fn is_live(&self, v: NodeId) -> bool {
        self.slots[v.index()].is_some()
    }

    pub fn words_now(&self) -> usize {
        self.words_now
    }

    pub fn words_peak(&self) -> usize {
        self.words_peak
    }
}

/// Which label set an in-place run must end up holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTarget {
    /// The full base list.
    Base,
    /// The right component's base (the protocol output set of the family).
    BaseRs,
    /// The graph's designated `O(G)`.
    Outputs,
}

#[derive(Debug)]
pub struct LabelingResult {
    /// Labels of the target list, in target order.
    pub output_labels: Vec<Label>,
    /// Peak number of label words held at any point.
    pub words_peak: usize,
    /// Oracle calls spent by this labelling run.
    pub oracle_calls: u64,
}

/// Translation from tree-local node ids to host-graph ids, with optional
/// membership restriction (partial components label only present nodes).
#[derive(Clone, Copy)]
struct View<'a> {
    relabel: Option<&'a [Option<NodeId>]>,
    offset: u32,
}

impl<'a> View<'a> {
    fn full(offset: u32) -> Self {
        View {
            relabel: None,
            offset,
        }
    }

    fn resolve(&self, v: NodeId) -> Option<NodeId> {
        match self.relabel {
            None => Some(NodeId(v.0 + self.offset)),
            Some(map) => map[v.index()].map(|x| NodeId(x.0 + self.offset)),
        }
    }
}

struct Scheduler<'a> {
    oracle: &'a mut HashOracle,
    dag: &'a Dag,
    store: LabelStore,
}

impl<'a> Scheduler<'a> {
    /// Compute the label of a host node from its live predecessor labels.
    fn compute_host(&mut self, host: NodeId) -> Result<(), LabelingError> {
        let mut pred_labels = Vec::with_capacity(self.dag.preds(host).len());
        for p in self.dag.preds(host) {
            pred_labels.push(self.store.read(*p)?.clone());
        }
        let refs: Vec<&Label> = pred_labels.iter().collect();
        let l = label_node(self.oracle, host, &refs)?;
        self.store.store(host, l)
    }

    fn compute(&mut self, view: View, v: NodeId) -> Result<(), LabelingError> {
        if let Some(host) = view.resolve(v) {
            self.compute_host(host)?;
        }
        Ok(())
    }

    fn evict(&mut self, view: View, v: NodeId) -> Result<(), LabelingError> {
        if let Some(host) = view.resolve(v) {
            if self.store.is_live(host) {
                self.store.evict(host)?;
            }
        }
        Ok(())
    }

    /// Label a butterfly layer by layer, overwriting rails: after each stage
    /// the previous layer is dead and gets evicted. Transient overhead is at
    /// most two words (the stride stages update rail pairs).
    fn sweep_butterfly(
        &mut self,
        view: View,
        inst: &ButterflyInstance,
    ) -> Result<(), LabelingError> {
        for t in 1..inst.layer_count() {
            let prev = inst.layer(t - 1);
            let cur = inst.layer(t);
            match inst.stage(t) {
                StageWiring::Identity => {
                    for r in 0..cur.len() {
                        self.compute(view, cur[r])?;
                        self.evict(view, prev[r])?;
                    }
                }
                StageWiring::Stride(s) => {
                    for r in 0..cur.len() {
                        if r & s != 0 {
                            continue;
                        }
                        let partner = r | s;
                        self.compute(view, cur[r])?;
                        self.compute(view, cur[partner])?;
                        self.evict(view, prev[r])?;
                        self.evict(view, prev[partner])?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Label a free-standing component, ending with its full base held.
    fn label_base(&mut self, view: View, t: &GTree) -> Result<(), LabelingError> {
        if let Some(v) = t.leaf_node() {
            return self.compute(view, v);
        }
        let left = t.left().unwrap();
        let cs = t.connector().unwrap();
        self.label_base(view, left)?;
        // Connector inputs read the left base, which stays held: it is part
        // of this component's own output.
        for c in cs.inputs() {
            self.compute(view, *c)?;
        }
        self.sweep_butterfly(view, cs)?;
        self.label_into_base(view, t.right().unwrap(), cs.outputs(), t.hooks())
    }

    /// Label a hooked component fed by the live labels at `x`, consuming
    /// them and ending with the component's full base held.
    fn label_into_base(
        &mut self,
        view: View,
        t: &GTree,
        x: &[NodeId],
        hooks: &[ButterflyInstance],
    ) -> Result<(), LabelingError> {
        if let Some(v) = t.leaf_node() {
            debug_assert_eq!(x.len(), 1);
            self.compute(view, v)?;
            return self.evict(view, x[0]);
        }
        let half = x.len() / 2;
        let (x1, x2) = x.split_at(half);
        self.label_into_base(view, t.left().unwrap(), x1, &hooks[1..])?;

        let hook = &hooks[0];
        for (s, c) in x2.iter().zip(hook.inputs()) {
            self.compute(view, *c)?;
            self.evict(view, *s)?;
        }
        self.sweep_butterfly(view, hook)?;

        let cs = t.connector().unwrap();
        for (h, c) in hook.outputs().iter().zip(cs.inputs()) {
            self.compute(view, *c)?;
            self.evict(view, *h)?;
        }
        self.sweep_butterfly(view, cs)?;
        self.label_into_base(view, t.right().unwrap(), cs.outputs(), t.hooks())
    }

    /// Label toward the right component's base only: the left base is
    /// overwritten by the connector inputs one slot at a time.
    fn label_base_rs(&mut self, view: View, t: &GTree) -> Result<(), LabelingError> {
        let left = t
            .left()
            .ok_or_else(|| LabelingError::Schedule("level-0 graph has no right base".into()))?;
        let cs = t.connector().unwrap();
        self.label_base(view, left)?;
        for (b, c) in left.base().iter().zip(cs.inputs()) {
            self.compute(view, *c)?;
            self.evict(view, *b)?;
        }
        self.sweep_butterfly(view, cs)?;
        self.label_into_base(view, t.right().unwrap(), cs.outputs(), t.hooks())
    }
}

/// In-place labelling of any graph built by this crate's constructors.
///
/// The output labels equal the reference labelling restricted to the target
/// set; peak label storage is `|target| + 2` words for every family at every
/// size. The meter in `LabelingResult` reports the measured peak, not the
/// assumed one.
pub fn label_inplace(
    oracle: &mut HashOracle,
    graph: &BuiltGraph,
    target: LabelTarget,
) -> Result<LabelingResult, LabelingError> {
    let calls_before = oracle.calls_made();
    let dag = graph.dag();
    let mut sched = Scheduler {
        oracle,
        dag,
        store: LabelStore::new(dag.node_count()),
    };
    let view = View::full(0);

    let target_nodes: Vec<NodeId> = match graph {
        BuiltGraph::G(g) => match target {
            LabelTarget::Base => {
                sched.label_base(view, &g.tree)?;
                g.dag.base().to_vec()
            }
            LabelTarget::BaseRs | LabelTarget::Outputs => {
                if g.tree.is_leaf() {
                    if target == LabelTarget::BaseRs {
                        return Err(LabelingError::Schedule(
                            "level-0 graph has no right base".into(),
                        ));
                    }
                    sched.compute(view, g.tree.leaf_node().unwrap())?;
                    g.dag.outputs().to_vec()
                } else {
                    sched.label_base_rs(view, &g.tree)?;
                    g.dag.outputs().to_vec()
                }
            }
        },
        BuiltGraph::Lightweight(g) => {
            if target != LabelTarget::Outputs {
                return Err(LabelingError::Schedule(
                    "composite graphs are labelled toward their output set".into(),
                ));
            }
            label_lightweight(&mut sched, g)?;
            g.dag.outputs().to_vec()
        }
        BuiltGraph::Arbitrary(g) => {
            if target != LabelTarget::Outputs {
                return Err(LabelingError::Schedule(
                    "composite graphs are labelled toward their output set".into(),
                ));
            }
            label_arbitrary(&mut sched, g)?;
            g.dag.outputs().to_vec()
        }
    };

    let mut output_labels = Vec::with_capacity(target_nodes.len());
    for v in &target_nodes {
        output_labels.push(sched.store.read(*v)?.clone());
    }
    let words_peak = sched.store.words_peak();
    let oracle_calls = oracle.calls_made() - calls_before;
    Ok(LabelingResult {
        output_labels,
        words_peak,
        oracle_calls,
    })
}

/// Partial component first (it needs at most one copy's worth of space),
/// then each full copy independently.
fn label_lightweight(sched: &mut Scheduler, g: &LightweightGraph) -> Result<(), LabelingError> {
    if let Some((offset, q)) = &g.partial {
        let view = View {
            relabel: Some(&q.relabel),
            offset: *offset,
        };
        sched.label_base_rs(view, &q.source_tree)?;
    }
    for offset in &g.copy_offsets {
        sched.label_base_rs(View::full(*offset), &g.copy_tree)?;
    }
    Ok(())
}

/// Second copy first, keeping only its contributed outputs, then the first.
fn label_arbitrary(sched: &mut Scheduler, g: &ArbitraryGraph) -> Result<(), LabelingError> {
    let view2 = View::full(g.copy_offsets[1]);
    sched.label_base_rs(view2, &g.copy_tree)?;
    let copy_outputs = g.copy_tree.base_rs().map_err(|e| {
        LabelingError::Schedule(format!("arbitrary-size copy lacks a right base: {e}"))
    })?;
    for v in &copy_outputs[g.o_prime..] {
        sched.evict(view2, *v)?;
    }
    sched.label_base_rs(View::full(g.copy_offsets[0]), &g.copy_tree)
}

/// Convenience wrapper: in-place labelling of a family graph's own output
/// set, returning the result alongside the host graph's output node list.
pub fn label_outputs_inplace(
    oracle: &mut HashOracle,
    graph: &BuiltGraph,
) -> Result<LabelingResult, LabelingError> {
    label_inplace(oracle, graph, LabelTarget::Outputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_arbitrary, build_g, build_lightweight};

    fn oracle(seed: &[u8]) -> HashOracle {
        HashOracle::new(seed, 256, None).unwrap()
    }

    #[test]
    fn input_node_label_hashes_encoding_alone() {
        let g = build_g(0);
        let mut o = oracle(b"s");
        let labels = label_all_reference(&mut o, &g.dag).unwrap();
        let expected = o.fork(None).query(&encode_node(NodeId(0))).unwrap();
        assert_eq!(labels[0], expected);
    }

    #[test]
    fn reference_label_count_is_one_call_per_node() {
        let g = build_g(2);
        let mut o = oracle(b"s");
        label_all_reference(&mut o, &g.dag).unwrap();
        assert_eq!(o.calls_made(), g.dag.node_count() as u64);
    }

    #[test]
    fn inplace_matches_reference_on_outputs() {
        for n in 1..=4 {
            let g = build_g(n);
            let mut o_ref = oracle(b"equiv");
            let reference = label_all_reference(&mut o_ref, &g.dag).unwrap();
            let mut o_inp = oracle(b"equiv");
            let built = BuiltGraph::G(g);
            let res = label_inplace(&mut o_inp, &built, LabelTarget::Outputs).unwrap();
            let outs = built.outputs();
            for (k, v) in outs.iter().enumerate() {
                assert_eq!(res.output_labels[k], reference[v.index()], "n={n} output {k}");
            }
            assert_eq!(res.oracle_calls, built.dag().node_count() as u64);
        }
    }

    #[test]
    fn inplace_base_target_matches_reference() {
        let g = build_g(2);
        let mut o_ref = oracle(b"base");
        let reference = label_all_reference(&mut o_ref, &g.dag).unwrap();
        let base = g.dag.base().to_vec();
        let built = BuiltGraph::G(g);
        let mut o_inp = oracle(b"base");
        let res = label_inplace(&mut o_inp, &built, LabelTarget::Base).unwrap();
        for (k, v) in base.iter().enumerate() {
            assert_eq!(res.output_labels[k], reference[v.index()]);
        }
        assert_eq!(res.words_peak, base.len() + 2);
    }

    #[test]
    fn peak_overhead_is_two_words() {
        for n in 1..=5 {
            let g = build_g(n);
            let m = g.dag.outputs().len();
            let built = BuiltGraph::G(g);
            let mut o = oracle(b"peak");
            let res = label_inplace(&mut o, &built, LabelTarget::BaseRs).unwrap();
            assert_eq!(res.words_peak, m + 2, "n={n}");
        }
    }

    #[test]
    fn lightweight_labels_match_reference() {
        for m in [16usize, 20, 48] {
            let g = build_lightweight(m).unwrap();
            let mut o_ref = oracle(b"lw");
            let reference = label_all_reference(&mut o_ref, &g.dag).unwrap();
            let outs = g.dag.outputs().to_vec();
            let node_count = g.dag.node_count() as u64;
            let built = BuiltGraph::Lightweight(g);
            let mut o_inp = oracle(b"lw");
            let res = label_inplace(&mut o_inp, &built, LabelTarget::Outputs).unwrap();
            for (k, v) in outs.iter().enumerate() {
                assert_eq!(res.output_labels[k], reference[v.index()], "m={m}");
            }
            assert_eq!(res.words_peak, m + 2);
            assert_eq!(res.oracle_calls, node_count);
        }
    }

    #[test]
    fn arbitrary_labels_match_reference() {
        for m in [1usize, 3, 5, 20] {
            let g = build_arbitrary(m).unwrap();
            let mut o_ref = oracle(b"arb");
            let reference = label_all_reference(&mut o_ref, &g.dag).unwrap();
            let outs = g.dag.outputs().to_vec();
            let built = BuiltGraph::Arbitrary(g);
            let mut o_inp = oracle(b"arb");
            let res = label_inplace(&mut o_inp, &built, LabelTarget::Outputs).unwrap();
            for (k, v) in outs.iter().enumerate() {
                assert_eq!(res.output_labels[k], reference[v.index()], "m={m}");
            }
            assert_eq!(res.oracle_calls, built.dag().node_count() as u64);
        }
    }

    #[test]
    fn store_forbids_resurrection_and_double_store() {
        let mut store = LabelStore::new(2);
        let l = Label::from_bytes(vec![1, 2, 3]);
        store.store(NodeId(0), l.clone()).unwrap();
        assert!(store.store(NodeId(0), l.clone()).is_err());
        store.evict(NodeId(0)).unwrap();
        assert!(store.read(NodeId(0)).is_err());
        assert!(store.evict(NodeId(0)).is_err());
        assert_eq!(store.words_peak(), 1);
        assert_eq!(store.words_now(), 0);
    }

    #[test]
    fn budget_exhaustion_propagates() {
        let g = build_g(1);
        let mut o = HashOracle::new(b"s", 256, Some(3)).unwrap();
        let err = label_all_reference(&mut o, &g.dag).unwrap_err();
        assert!(matches!(err, LabelingError::Oracle(OracleError::BudgetExhausted)));
    }
}
