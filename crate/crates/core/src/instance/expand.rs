//! Node-copy expansion used by the arc-flow MILP.
//!
//! The MILP carries one energy variable per node, so a node can be visited at
//! most once. Every transit node and MED point receives `copies` duplicates so
//! a walk may pass through it several times; SCS nodes are never copied.

use std::collections::HashSet;

use super::{Arc, Instance, Node, NodeIx, NodeKey, NodeRole, ValidationError};

#[derive(Debug, Clone)]
pub struct ExpandedInstance {
    base: Instance,
    graph: Instance,
    copies_per_node: usize,
    /// `copy_of[v]` is the base node of expanded node `v`.
    copy_of: Vec<NodeIx>,
    /// `copies[v]` lists the copies of base node `v` (empty for SCS nodes).
    copies: Vec<Vec<NodeIx>>,
}

impl ExpandedInstance {
    pub fn base(&self) -> &Instance {
        &self.base
    }

    /// The graph over `N'` (originals first, then copies).
    pub fn graph(&self) -> &Instance {
        &self.graph
    }

    pub fn copies_per_node(&self) -> usize {
        self.copies_per_node
    }

    pub fn original_of(&self, v: NodeIx) -> NodeIx {
        self.copy_of[v]
    }

    pub fn copies_of(&self, v: NodeIx) -> &[NodeIx] {
        &self.copies[v]
    }

    /// The `k`-th instance of base node `v`: `k = 0` is the original itself.
    pub fn instance_of(&self, v: NodeIx, k: usize) -> Option<NodeIx> {
        if k == 0 {
            Some(v)
        } else {
            self.copies[v].get(k - 1).copied()
        }
    }

    /// Nodes of `S'` (equal to `S`).
    pub fn scs_nodes(&self) -> Vec<NodeIx> {
        (0..self.graph.node_count())
            .filter(|&v| self.graph.is_scs(v))
            .collect()
    }

    /// Nodes of `M'` (MED points and their copies).
    pub fn med_nodes(&self) -> Vec<NodeIx> {
        (0..self.graph.node_count())
            .filter(|&v| self.graph.is_med_point(v))
            .collect()
    }
}

/// Default number of copies per node for MILP use: `|S| + P`.
pub fn default_copies(instance: &Instance) -> usize {
    instance.count_role(NodeRole::Scs) + instance.params().med_count_cap
}

fn copy_key(key: &NodeKey, k: usize, taken: &HashSet<String>) -> NodeKey {
    let mut text = format!("{key}#{k}");
    while taken.contains(&text) {
        text.insert(0, '~');
    }
    NodeKey::Text(text)
}

/// Builds `N'` by adding `copies` duplicates of every non-SCS node.
///
/// Copies inherit role, wait and every incident arc of their original, so for
/// a base arc `(i, j)` the expanded graph holds `(u, v)` for every instance
/// `u` of `i` and `v` of `j`. No arc joins a node and its own copies.
#[allow(clippy::needless_range_loop)]
pub fn expand(instance: &Instance, copies: usize) -> Result<ExpandedInstance, ValidationError> {
    if instance.is_expanded() {
        return Err(ValidationError::AlreadyExpanded);
    }
    let n = instance.node_count();
    let mut taken: HashSet<String> = instance.nodes().iter().map(|v| v.key.to_string()).collect();
    let mut nodes: Vec<Node> = instance.nodes().to_vec();
    let mut copy_of: Vec<NodeIx> = (0..n).collect();
    let mut copy_lists: Vec<Vec<NodeIx>> = vec![Vec::new(); n];

    for v in 0..n {
        if instance.is_scs(v) {
            continue;
        }
        for k in 1..=copies {
            let original = instance.node(v);
            let key = copy_key(&original.key, k, &taken);
            taken.insert(key.to_string());
            copy_lists[v].push(nodes.len());
            copy_of.push(v);
            nodes.push(Node {
                key,
                ..original.clone()
            });
        }
    }

    let instances = |v: NodeIx| std::iter::once(v).chain(copy_lists[v].iter().copied());
    let mut arcs = Vec::new();
    for arc in instance.arcs() {
        for u in instances(arc.from) {
            for w in instances(arc.to) {
                arcs.push(Arc { from: u, to: w, ..*arc });
            }
        }
    }

    let graph = Instance::from_parts(
        nodes,
        arcs,
        *instance.params(),
        instance.origin(),
        instance.destination(),
        instance.metadata().cloned(),
        true,
    );
    Ok(ExpandedInstance {
        base: instance.clone(),
        graph,
        copies_per_node: copies,
        copy_of,
        copies: copy_lists,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::RawInstance;

    fn revisit_loop() -> Instance {
        RawInstance::builder(500.0, 2.0, 0.2, 250.0, 0)
            .node(1, NodeRole::Transit)
            .node(2, NodeRole::Transit)
            .node(3, NodeRole::Transit)
            .scs(4, 5.0, 100.0)
            .arc(1, 2, 10.0, 300.0)
            .arc(2, 3, 10.0, 300.0)
            .arc(2, 4, 5.0, 100.0)
            .arc(4, 2, 5.0, 100.0)
            .trip(1, 3)
            .validate()
            .unwrap()
    }

    #[test]
    fn revisit_loop_with_one_copy_has_seven_nodes() {
        let inst = revisit_loop();
        let ex = expand(&inst, 1).unwrap();
        assert_eq!(ex.graph().node_count(), 7);
        assert!(ex.copies_of(3).is_empty(), "SCS 4 must not be copied");
        assert_eq!(ex.scs_nodes(), vec![3]);
        for v in 0..3 {
            assert_eq!(ex.copies_of(v).len(), 1);
            let c = ex.copies_of(v)[0];
            assert_eq!(ex.original_of(c), v);
            assert_eq!(ex.graph().role(c), inst.role(v));
        }
    }

    #[test]
    fn zero_copies_is_identity() {
        let inst = revisit_loop();
        let ex = expand(&inst, 0).unwrap();
        assert_eq!(ex.graph().nodes(), inst.nodes());
        assert_eq!(ex.graph().arcs(), inst.arcs());
        assert_eq!(ex.graph().origin(), inst.origin());
    }

    #[test]
    fn node_count_matches_closed_form() {
        // 3 transit nodes and one SCS, two copies each: 4 + 2 * 3.
        let ex = expand(&revisit_loop(), 2).unwrap();
        let produced: Vec<_> = ex.graph().nodes().iter().map(|n| n.key.to_string()).collect();
        assert_eq!(produced.len(), 10);
        let unique: HashSet<_> = produced.iter().collect();
        assert_eq!(unique.len(), 10, "copy ids are distinct from each other and from base ids");
    }

    #[test]
    fn arcs_are_inherited_without_loops_to_own_copies() {
        let inst = revisit_loop();
        let ex = expand(&inst, 1).unwrap();
        let g = ex.graph();
        // (1,2): 2x2, (2,3): 2x2, (2,4): 2x1, (4,2): 1x2
        assert_eq!(g.arc_count(), 4 + 4 + 2 + 2);
        for arc in g.arcs() {
            assert_ne!(ex.original_of(arc.from), ex.original_of(arc.to));
            let base = inst
                .find_arc(ex.original_of(arc.from), ex.original_of(arc.to))
                .expect("every expanded arc has a base arc");
            assert_eq!(inst.arc(base).time, arc.time);
            assert_eq!(inst.arc(base).energy, arc.energy);
        }
    }

    #[test]
    fn expanding_twice_is_rejected() {
        let ex = expand(&revisit_loop(), 1).unwrap();
        assert_eq!(
            expand(ex.graph(), 1).unwrap_err(),
            ValidationError::AlreadyExpanded
        );
    }

    #[test]
    fn copy_keys_avoid_collisions() {
        let inst = RawInstance::builder(10.0, 1.0, 0.0, 0.0, 0)
            .node("a", NodeRole::Transit)
            .node("a#1", NodeRole::Transit)
            .arc("a", "a#1", 1.0, 1.0)
            .trip("a", "a#1")
            .validate()
            .unwrap();
        let ex = expand(&inst, 1).unwrap();
        let keys: HashSet<_> = ex.graph().nodes().iter().map(|n| n.key.to_string()).collect();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn default_copies_counts_scs_and_med_cap() {
        let inst = revisit_loop();
        assert_eq!(default_copies(&inst), 1);
    }
}
