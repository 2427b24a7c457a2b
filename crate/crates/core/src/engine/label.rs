//! Search labels, the five expansion rules and walk dominance.

use crate::instance::{ArcIx, Instance, NodeIx};

pub type LabelId = usize;

/// The action that produced a label from its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Start,
    Move { arc: ArcIx },
    MoveAttached { arc: ArcIx, induced: f64 },
    /// Leave the current MED at this node, then drive.
    DetachMove { arc: ArcIx },
    Recharge,
    Attach,
}

/// A partial walk ending at `node`.
#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub node: NodeIx,
    /// Elapsed time.
    pub time: f64,
    /// MEDs used so far.
    pub meds: usize,
    pub energy: f64,
    pub attached: bool,
    /// Energy transferred by the currently attached MED.
    pub transferred: f64,
    /// Energy charged at `node` by this label's own recharge (0 otherwise).
    pub charged: f64,
    /// Number of arcs on the walk.
    pub depth: usize,
    pub parent: Option<LabelId>,
    pub decision: Decision,
}

impl Label {
    pub fn start(inst: &Instance) -> Label {
        Label {
            node: inst.origin(),
            time: 0.0,
            meds: 0,
            energy: inst.params().battery_capacity,
            attached: false,
            transferred: 0.0,
            charged: 0.0,
            depth: 0,
            parent: None,
            decision: Decision::Start,
        }
    }

    fn child(&self, parent: LabelId, decision: Decision) -> Label {
        Label {
            charged: 0.0,
            parent: Some(parent),
            decision,
            ..self.clone()
        }
    }
}

/// Largest induction on `arc` for an attached label:
/// `min(rho/(1-delta) * d, W - eta, Q - (eps - c))`, floored at 0.
pub fn max_induction(inst: &Instance, label: &Label, arc: ArcIx) -> f64 {
    let p = inst.params();
    let a = inst.arc(arc);
    let by_rate = p.induction_per_drive_time() * a.time;
    let by_budget = p.med_energy_cap - label.transferred;
    let by_headroom = p.battery_capacity - (label.energy - a.energy);
    by_rate.min(by_budget).min(by_headroom).max(0.0)
}

pub fn can_recharge(inst: &Instance, label: &Label, tol: f64) -> bool {
    inst.is_scs(label.node)
        && label.charged <= 0.0
        && label.energy < inst.params().battery_capacity - tol
}

pub fn can_attach(inst: &Instance, label: &Label, tol: f64) -> bool {
    inst.is_med_point(label.node)
        && label.decision != Decision::Attach
        && label.meds < inst.params().med_count_cap
        && (label.attached || label.energy < inst.params().battery_capacity - tol)
}

/// The label after a full recharge at its node. Any attached MED is left behind.
pub fn recharge_child(inst: &Instance, label: &Label, id: LabelId) -> Label {
    let q = inst.params().battery_capacity;
    let beta = q - label.energy;
    let mut c = label.child(id, Decision::Recharge);
    c.time += inst.wait(label.node) + inst.charge_time(label.node) / q * beta;
    c.charged = beta;
    c.energy = q;
    c.attached = false;
    c.transferred = 0.0;
    c
}

/// The label after attaching a fresh MED at its node.
pub fn attach_child(inst: &Instance, label: &Label, id: LabelId) -> Label {
    let mut c = label.child(id, Decision::Attach);
    c.time += inst.wait(label.node);
    c.attached = true;
    c.transferred = 0.0;
    c.meds += 1;
    c
}

/// All feasible one-step extensions of `label` (which must not sit at the destination).
pub fn expand_label(inst: &Instance, label: &Label, id: LabelId, tol: f64) -> Vec<Label> {
    let p = inst.params();
    let mut out = Vec::new();
    for &a in inst.out_arcs(label.node) {
        let arc = inst.arc(a);
        // An exhausted MED only slows the vehicle down.
        if label.attached && p.med_energy_cap - label.transferred > tol {
            let gamma = max_induction(inst, label, a);
            let energy = label.energy - arc.energy + gamma;
            if energy >= -tol {
                let mut c = label.child(id, Decision::MoveAttached { arc: a, induced: gamma });
                c.node = arc.to;
                c.time += arc.time / (1.0 - p.slowdown);
                c.energy = energy.clamp(0.0, p.battery_capacity);
                c.transferred += gamma;
                c.depth += 1;
                out.push(c);
            }
        }
        let energy = label.energy - arc.energy;
        if energy >= -tol {
            let decision = if label.attached {
                Decision::DetachMove { arc: a }
            } else {
                Decision::Move { arc: a }
            };
            let mut c = label.child(id, decision);
            c.node = arc.to;
            c.time += arc.time;
            c.energy = energy.max(0.0);
            c.attached = false;
            c.transferred = 0.0;
            c.depth += 1;
            out.push(c);
        }
    }
    if can_recharge(inst, label, tol) {
        out.push(recharge_child(inst, label, id));
    }
    if can_attach(inst, label, tol) {
        out.push(attach_child(inst, label, id));
    }
    out
}

/// Walk dominance between two labels at the same node.
///
/// `a` dominates `b` when it is no slower, holds at least as much energy both
/// now and before any recharge here, and its MED situation is no worse: fewer
/// MEDs used (and, if `b` is attached, `a` attached with no more transferred),
/// or the same count, same attachment and no more transferred.
pub fn dominates(a: &Label, b: &Label, tol: f64) -> bool {
    debug_assert_eq!(a.node, b.node);
    if a.time > b.time + tol {
        return false;
    }
    if a.energy - a.charged < b.energy - b.charged - tol || a.energy < b.energy - tol {
        return false;
    }
    if a.meds < b.meds {
        !b.attached || (a.attached && a.transferred <= b.transferred + tol)
    } else if a.meds == b.meds {
        a.attached == b.attached && a.transferred <= b.transferred + tol
    } else {
        false
    }
}

/// Dominance plus a capability guard: if `b` may still recharge or attach
/// here and `a` may not, `a` must also dominate that child of `b`.
pub fn covers(inst: &Instance, a: &Label, b: &Label, tol: f64) -> bool {
    if !dominates(a, b, tol) {
        return false;
    }
    if can_recharge(inst, b, tol)
        && !can_recharge(inst, a, tol)
        && !dominates(a, &recharge_child(inst, b, 0), tol)
    {
        return false;
    }
    if can_attach(inst, b, tol) && !can_attach(inst, a, tol) && !dominates(a, &attach_child(inst, b, 0), tol) {
        return false;
    }
    true
}
