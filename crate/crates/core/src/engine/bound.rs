use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Drive-time distance from every node to the destination, ignoring energy,
/// waits and slowdown. Nodes that cannot reach the destination get `+inf`.
pub fn reverse_time_bound(inst: &Instance) -> Vec<f64> {
    let mut h = vec![f64::INFINITY; inst.node_count()];
    let t = inst.destination();
    h[t] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Dist(0.0), t)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if d > h[v] {
            continue;
        }
        for &a in inst.in_arcs(v) {
            let arc = inst.arc(a);
            let nd = d + arc.time;
            if nd < h[arc.from] {
                h[arc.from] = nd;
                heap.push(Reverse((Dist(nd), arc.from)));
            }
        }
    }
    h
}
