//! Butterfly connectors: `H_i` has `2^i` rails and `2(i+1)` layers, wired as
//! two mirrored FFT butterflies joined by an identity stage (largest stride
//! outermost). Total node count `2*(i+1)*2^i`, in-degree at most 2.
//!
//! The connector property (any partial input/output pairing admits vertex-
//! disjoint routes) is not assumed here; the analysis module certifies it
//! exhaustively at small sizes.

use super::{ComponentTag, Dag, NodeId};

/// Wiring of one inter-layer stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageWiring {
    /// Node `(t, r)` has predecessors `(t-1, r)` and `(t-1, r ^ stride)`.
    Stride(usize),
    /// Node `(t, r)` has the single predecessor `(t-1, r)`.
    Identity,
}

/// Handle to one butterfly copy embedded in a larger graph.
#[derive(Debug, Clone)]
pub struct ButterflyInstance {
    order: usize,
    layers: Vec<Vec<NodeId>>,
}

impl ButterflyInstance {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rails(&self) -> usize {
        1 << self.order
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, t: usize) -> &[NodeId] {
        &self.layers[t]
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.layers[0]
    }

    pub fn outputs(&self) -> &[NodeId] {
        self.layers.last().expect("butterfly has layers")
    }

    /// Wiring of the stage feeding layer `t` (so `t >= 1`).
    pub fn stage(&self, t: usize) -> StageWiring {
        stage_wiring(self.order, t - 1)
    }
}

/// Wiring of gap `g` (between layers `g` and `g+1`) for order `i`:
/// strides `2^(i-1) .. 1`, identity, `1 .. 2^(i-1)`.
pub(crate) fn stage_wiring(order: usize, gap: usize) -> StageWiring {
    if gap < order {
        StageWiring::Stride(1 << (order - 1 - gap))
    } else if gap == order {
        StageWiring::Identity
    } else {
        StageWiring::Stride(1 << (gap - order - 1))
    }
}

/// Append one butterfly copy to `dag`, tagging its nodes.
pub(crate) fn emit_butterfly(
    dag: &mut Dag,
    order: usize,
    tags: &mut Vec<ComponentTag>,
    tag: ComponentTag,
) -> ButterflyInstance {
    let rails = 1usize << order;
    let layer_count = 2 * (order + 1);
    let mut layers = Vec::with_capacity(layer_count);
    for t in 0..layer_count {
        let layer: Vec<NodeId> = (0..rails)
            .map(|_| {
                tags.push(tag);
                dag.add_node()
            })
            .collect();
        if t > 0 {
            let prev: Vec<NodeId> = layers[t - 1].clone();
            match stage_wiring(order, t - 1) {
                StageWiring::Identity => {
                    for r in 0..rails {
                        dag.add_edge(prev[r], layer[r]);
                    }
                }
                StageWiring::Stride(s) => {
                    for r in 0..rails {
                        dag.add_edge(prev[r], layer[r]);
                        dag.add_edge(prev[r ^ s], layer[r]);
                    }
                }
            }
        }
        layers.push(layer);
    }
    ButterflyInstance { order, layers }
}

/// Standalone butterfly `H_i` as a DAG; outputs are the last layer.
pub fn build_butterfly(i: usize) -> (Dag, ButterflyInstance) {
    let mut dag = Dag::new(256);
    let mut tags = Vec::new();
    let inst = emit_butterfly(&mut dag, i, &mut tags, ComponentTag::Connector);
    dag.set_outputs(inst.outputs().to_vec());
    dag.validate().expect("butterfly construction is topological");
    (dag, inst)
}

/// Node count of `H_i`: `2*(i+1)*2^i`.
pub fn butterfly_node_count(i: usize) -> usize {
    2 * (i + 1) * (1 << i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_butterfly_is_a_single_edge() {
        let (dag, inst) = build_butterfly(0);
        assert_eq!(dag.node_count(), 2);
        assert_eq!(dag.edge_count(), 1);
        assert_eq!(inst.inputs().len(), 1);
        assert_eq!(inst.outputs().len(), 1);
        assert_eq!(dag.input_nodes().len(), 1);
    }

    #[test]
    fn node_counts_match_closed_form() {
        for i in 0..=6 {
            let (dag, _) = build_butterfly(i);
            assert_eq!(dag.node_count(), butterfly_node_count(i), "H_{i}");
        }
        let (dag2, _) = build_butterfly(2);
        assert_eq!(dag2.node_count(), 24);
    }

    #[test]
    fn in_degree_at_most_two() {
        for i in 0..=5 {
            let (dag, _) = build_butterfly(i);
            assert!(dag.max_in_degree() <= 2);
        }
    }

    #[test]
    fn stride_pattern_is_mirrored() {
        // order 2: strides 2,1, identity, 1,2
        let expect = [
            StageWiring::Stride(2),
            StageWiring::Stride(1),
            StageWiring::Identity,
            StageWiring::Stride(1),
            StageWiring::Stride(2),
        ];
        for (g, want) in expect.iter().enumerate() {
            assert_eq!(stage_wiring(2, g), *want);
        }
    }

    #[test]
    fn every_output_reachable_from_every_input() {
        let (dag, inst) = build_butterfly(3);
        let succs = dag.successors();
        for &input in inst.inputs() {
            let mut seen = vec![false; dag.node_count()];
            let mut stack = vec![input];
            seen[input.index()] = true;
            while let Some(v) = stack.pop() {
                for &s in &succs[v.index()] {
                    if !seen[s.index()] {
                        seen[s.index()] = true;
                        stack.push(s);
                    }
                }
            }
            for &out in inst.outputs() {
                assert!(seen[out.index()]);
            }
        }
    }
}
