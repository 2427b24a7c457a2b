//! Exact label-setting search.
//!
//! Labels are expanded best-first on `tau + h(node)`, where `h` is the
//! drive-time distance to the destination. Labels arriving at the destination
//! tighten the incumbent; the loop stops once the best open key cannot beat it.
//! Per-node frontiers of open and closed labels discard dominated labels.

mod bound;
mod label;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use thiserror::Error;

use crate::instance::{default_copies, Instance, NodeIx};
use crate::solution::{evaluate, DecisionPattern, Induction, Solution};
use crate::DEFAULT_TOLERANCE;

pub use bound::reverse_time_bound;
pub use label::{
    attach_child, can_attach, can_recharge, covers, dominates, expand_label, max_induction, recharge_child, Decision,
    Label, LabelId,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Discard labels covered by another label at the same node.
    pub dominance: bool,
    /// Discard generated labels whose key cannot beat the incumbent.
    pub bound: bool,
    pub tolerance: f64,
    /// Abort once this many labels have been stored.
    pub max_labels: Option<usize>,
    /// Longest walk (in arcs) the search may extend. `None` picks
    /// `|N| * (|S| + P + 1)` with dominance and no cap without it.
    pub max_depth: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dominance: true,
            bound: true,
            tolerance: DEFAULT_TOLERANCE,
            max_labels: None,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Labels(usize),
    Depth(usize),
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Labels(n) => write!(f, "label limit of {n} reached"),
            Limit::Depth(n) => write!(f, "walks longer than {n} arcs were cut off before optimality was proven"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("no feasible walk reaches the destination")]
    Infeasible,
    #[error("search aborted: {0}")]
    LimitExceeded(Limit),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub stored: usize,
    pub generated: usize,
    pub expanded: usize,
    pub dominated: usize,
    pub bounded: usize,
    pub evicted: usize,
    pub depth_cutoffs: usize,
    pub incumbent_updates: usize,
}

pub fn default_max_depth(inst: &Instance) -> usize {
    inst.node_count() * (default_copies(inst) + 1)
}

/// Labels at each node; no member covers another.
#[derive(Debug, Clone)]
pub struct DominanceFrontier {
    sets: Vec<Vec<LabelId>>,
}

impl DominanceFrontier {
    pub fn new(node_count: usize) -> Self {
        DominanceFrontier {
            sets: vec![Vec::new(); node_count],
        }
    }

    pub fn at(&self, node: NodeIx) -> &[LabelId] {
        &self.sets[node]
    }

    pub fn is_covered(&self, inst: &Instance, labels: &[Label], l: &Label, tol: f64) -> bool {
        self.sets[l.node].iter().any(|&o| covers(inst, &labels[o], l, tol))
    }

    /// Adds `id` and returns the members it covers, which are removed.
    pub fn insert(&mut self, inst: &Instance, labels: &[Label], id: LabelId, tol: f64) -> Vec<LabelId> {
        let l = &labels[id];
        let set = &mut self.sets[l.node];
        let mut removed = Vec::new();
        set.retain(|&o| {
            let gone = covers(inst, l, &labels[o], tol);
            if gone {
                removed.push(o);
            }
            !gone
        });
        set.push(id);
        removed
    }

    pub fn remove(&mut self, node: NodeIx, id: LabelId) {
        if let Some(k) = self.sets[node].iter().position(|&o| o == id) {
            self.sets[node].swap_remove(k);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    time: f64,
    meds: usize,
    energy: f64,
    id: LabelId,
}

impl Entry {
    // Smaller is better: key, then time, then MEDs, then higher energy, then age.
    fn rank(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.time.total_cmp(&other.time))
            .then(self.meds.cmp(&other.meds))
            .then(other.energy.total_cmp(&self.energy))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank(self)
    }
}

pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<Solution, SolveError> {
    solve_with_stats(inst, opts).0
}

pub fn solve_with_stats(inst: &Instance, opts: &SolveOptions) -> (Result<Solution, SolveError>, SearchStats) {
    let tol = opts.tolerance;
    let mut stats = SearchStats::default();
    let (s, t) = (inst.origin(), inst.destination());
    if s == t {
        let sol = evaluate(inst, &DecisionPattern::empty(s), Induction::Greedy, tol).expect("empty walk is feasible");
        return (Ok(sol), stats);
    }
    let h = reverse_time_bound(inst);
    if !h[s].is_finite() {
        return (Err(SolveError::Infeasible), stats);
    }
    let max_depth = opts.max_depth.unwrap_or(if opts.dominance {
        default_max_depth(inst)
    } else {
        usize::MAX
    });

    let mut labels = vec![Label::start(inst)];
    let mut alive = vec![true];
    let mut open = DominanceFrontier::new(inst.node_count());
    let mut closed = DominanceFrontier::new(inst.node_count());
    let mut heap = BinaryHeap::new();
    heap.push(Entry { key: h[s], time: 0.0, meds: 0, energy: labels[0].energy, id: 0 });
    if opts.dominance {
        open.insert(inst, &labels, 0, tol);
    }
    let mut best = f64::INFINITY;
    let mut incumbent: Option<LabelId> = None;
    let mut cut_key = f64::INFINITY;

    while let Some(entry) = heap.pop() {
        if !alive[entry.id] {
            continue;
        }
        if entry.key >= best - tol {
            break;
        }
        let id = entry.id;
        alive[id] = false;
        let node = labels[id].node;
        if opts.dominance {
            open.remove(node, id);
            if closed.is_covered(inst, &labels, &labels[id], tol) {
                stats.dominated += 1;
                continue;
            }
            closed.insert(inst, &labels, id, tol);
        }
        if labels[id].depth >= max_depth {
            stats.depth_cutoffs += 1;
            cut_key = cut_key.min(entry.key);
            continue;
        }
        stats.expanded += 1;
        for child in expand_label(inst, &labels[id], id, tol) {
            stats.generated += 1;
            let key = child.time + h[child.node];
            if !key.is_finite() {
                continue;
            }
            if child.node == t {
                if child.time < best - tol {
                    best = child.time;
                    incumbent = Some(labels.len());
                    labels.push(child);
                    alive.push(false);
                    stats.incumbent_updates += 1;
                }
                continue;
            }
            if opts.bound && key >= best - tol {
                stats.bounded += 1;
                continue;
            }
            if opts.dominance
                && (closed.is_covered(inst, &labels, &child, tol) || open.is_covered(inst, &labels, &child, tol))
            {
                stats.dominated += 1;
                continue;
            }
            if let Some(cap) = opts.max_labels {
                if labels.len() >= cap {
                    stats.stored = labels.len();
                    return (Err(SolveError::LimitExceeded(Limit::Labels(cap))), stats);
                }
            }
            let cid = labels.len();
            heap.push(Entry { key, time: child.time, meds: child.meds, energy: child.energy, id: cid });
            labels.push(child);
            alive.push(true);
            if opts.dominance {
                for gone in open.insert(inst, &labels, cid, tol) {
                    alive[gone] = false;
                    stats.evicted += 1;
                }
            }
        }
    }
    stats.stored = labels.len();
    if cut_key < best - tol {
        return (Err(SolveError::LimitExceeded(Limit::Depth(max_depth))), stats);
    }
    match incumbent {
        Some(id) => (Ok(build_solution(inst, &labels, id, tol)), stats),
        None => (Err(SolveError::Infeasible), stats),
    }
}

fn build_solution(inst: &Instance, labels: &[Label], last: LabelId, tol: f64) -> Solution {
    let mut chain = vec![last];
    while let Some(p) = labels[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();
    let mut pattern = DecisionPattern::empty(inst.origin());
    let mut gammas = Vec::new();
    for &id in &chain[1..] {
        let pos = pattern.arcs.len();
        let (arc, attached, induced) = match labels[id].decision {
            Decision::Start => unreachable!("start label has no parent"),
            Decision::Recharge => {
                pattern.recharge[pos] = true;
                continue;
            }
            Decision::Attach => {
                pattern.attach[pos] = true;
                continue;
            }
            Decision::Move { arc } | Decision::DetachMove { arc } => (arc, false, 0.0),
            Decision::MoveAttached { arc, induced } => (arc, true, induced),
        };
        pattern.arcs.push(arc);
        pattern.attached.push(attached);
        pattern.recharge.push(false);
        pattern.attach.push(false);
        gammas.push(induced);
    }
    let sol = evaluate(inst, &pattern, Induction::Given(&gammas), tol).expect("engine walk replays as a valid pattern");
    debug_assert!((sol.totals.objective - labels[last].time).abs() <= 1e-6 * (1.0 + labels[last].time));
    sol
}
