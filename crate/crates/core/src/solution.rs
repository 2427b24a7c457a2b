//! Trips as decision patterns, and their evaluation into verified solutions.
//!
//! A [`DecisionPattern`] fixes the walk and every discrete choice along it
//! (where to recharge, where to attach a MED, which arcs are driven attached).
//! [`evaluate`] replays the pattern, propagating the battery level with
//!
//! ```text
//! eps_j = eps_i - c_ij + gamma_ij + beta_j
//! ```
//!
//! and returns a [`Solution`] with the full time decomposition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ArcIx, Instance, NodeIx, NodeKey};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionPattern {
    pub origin: NodeIx,
    pub arcs: Vec<ArcIx>,
    /// Recharge flag per visited position (`arcs.len() + 1` entries).
    pub recharge: Vec<bool>,
    /// MED attach flag per visited position (`arcs.len() + 1` entries).
    pub attach: Vec<bool>,
    /// Per arc: driven with the current MED attached.
    pub attached: Vec<bool>,
}

impl DecisionPattern {
    pub fn empty(origin: NodeIx) -> Self {
        DecisionPattern {
            origin,
            arcs: Vec::new(),
            recharge: vec![false],
            attach: vec![false],
            attached: Vec::new(),
        }
    }

    /// Plain walk without any recharge or MED decision.
    pub fn walk(origin: NodeIx, arcs: Vec<ArcIx>) -> Self {
        let n = arcs.len();
        DecisionPattern {
            origin,
            recharge: vec![false; n + 1],
            attach: vec![false; n + 1],
            attached: vec![false; n],
            arcs,
        }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn attached_arc_count(&self) -> usize {
        self.attached.iter().filter(|&&a| a).count()
    }

    /// Node at each visited position.
    pub fn nodes(&self, inst: &Instance) -> Vec<NodeIx> {
        let mut out = Vec::with_capacity(self.arcs.len() + 1);
        out.push(self.origin);
        out.extend(self.arcs.iter().map(|&a| inst.arc(a).to));
        out
    }
}

/// How induced energy is chosen on attached arcs.
#[derive(Debug, Clone, Copy)]
pub enum Induction<'a> {
    /// As much as rate, MED budget and battery headroom allow.
    Greedy,
    /// One amount per arc of the pattern (ignored on detached arcs).
    Given(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("pattern vectors have inconsistent lengths")]
    Shape,
    #[error("arc at position {0} does not start where the walk is")]
    Disconnected(usize),
    #[error("walk ends at node {0}, not at the destination")]
    WrongEnd(NodeIx),
    #[error("recharge at position {pos} not allowed: {reason}")]
    Recharge { pos: usize, reason: &'static str },
    #[error("MED attach at position {pos} not allowed: {reason}")]
    Attach { pos: usize, reason: &'static str },
    #[error("arc at position {0} is marked attached but no MED is attached")]
    NotAttached(usize),
    #[error("energy {energy} after arc at position {pos} is outside [0, Q]")]
    Energy { pos: usize, energy: f64 },
    #[error("induced energy {amount} on arc at position {pos} violates {bound}")]
    Induction {
        pos: usize,
        amount: f64,
        bound: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub node: NodeIx,
    pub arrival_energy: f64,
    /// Energy charged at an SCS (`beta`), zero if no recharge.
    pub recharged: f64,
    /// A MED is attached here.
    pub attach: bool,
    pub departure_energy: f64,
    /// Leaves this stop with a MED attached.
    pub attached_on_departure: bool,
    /// Energy already transferred by the MED attached on departure.
    pub transferred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub arc: ArcIx,
    pub from: NodeIx,
    pub to: NodeIx,
    pub attached: bool,
    /// Index into [`Solution::med_events`] of the MED attached on this arc.
    pub med: Option<usize>,
    pub induced: f64,
    pub drive_time: f64,
    pub travel_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedEvent {
    pub attach_stop: usize,
    /// Stop where the MED leaves the vehicle (the last stop reached attached).
    pub detach_stop: usize,
    pub induced: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub drive_time: f64,
    pub slowdown_time: f64,
    pub charge_time: f64,
    pub wait_time: f64,
    pub objective: f64,
    pub energy_recharged: f64,
    pub energy_induced: f64,
    pub recharges: usize,
    pub meds: usize,
}

/// A complete, feasible trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub pattern: DecisionPattern,
    pub stops: Vec<Stop>,
    pub legs: Vec<Leg>,
    pub med_events: Vec<MedEvent>,
    pub totals: Totals,
}

/// Replays `pattern` and returns the resulting solution, or the first violated rule.
///
/// The walk must end at the instance's destination.
pub fn evaluate(
    inst: &Instance,
    pattern: &DecisionPattern,
    induction: Induction<'_>,
    tol: f64,
) -> Result<Solution, PatternError> {
    let n = pattern.arcs.len();
    if pattern.recharge.len() != n + 1 || pattern.attach.len() != n + 1 || pattern.attached.len() != n {
        return Err(PatternError::Shape);
    }
    if let Induction::Given(g) = induction {
        if g.len() != n {
            return Err(PatternError::Shape);
        }
    }
    let params = inst.params();
    let q = params.battery_capacity;
    let rate = params.induction_per_drive_time();

    let mut stops = Vec::with_capacity(n + 1);
    let mut legs = Vec::with_capacity(n);
    let mut med_events: Vec<MedEvent> = Vec::new();
    let mut totals = Totals::default();

    let mut node = pattern.origin;
    let mut energy = q;
    let mut current_med: Option<usize> = None;
    let mut transferred = 0.0;

    for pos in 0..=n {
        let arrival_energy = energy;
        let mut recharged = 0.0;
        if pattern.recharge[pos] {
            if !inst.is_scs(node) {
                return Err(PatternError::Recharge { pos, reason: "not an SCS" });
            }
            if energy >= q - tol {
                return Err(PatternError::Recharge { pos, reason: "battery already full" });
            }
            // Recharging ends any attachment.
            current_med = None;
            transferred = 0.0;
            recharged = q - energy;
            energy = q;
            totals.recharges += 1;
            totals.energy_recharged += recharged;
            totals.charge_time += inst.charge_time(node) / q * recharged;
            totals.wait_time += inst.wait(node);
        }
        if pattern.attach[pos] {
            if !inst.is_med_point(node) {
                return Err(PatternError::Attach { pos, reason: "not a MED point" });
            }
            if med_events.len() >= params.med_count_cap {
                return Err(PatternError::Attach { pos, reason: "MED count cap reached" });
            }
            // Swapping an attached MED for a fresh one is allowed at any level.
            if current_med.is_none() && energy >= q - tol {
                return Err(PatternError::Attach { pos, reason: "battery is full" });
            }
            current_med = Some(med_events.len());
            transferred = 0.0;
            med_events.push(MedEvent {
                attach_stop: pos,
                detach_stop: pos,
                induced: 0.0,
            });
            totals.meds += 1;
            totals.wait_time += inst.wait(node);
        }
        let attached_on_departure = pos < n && pattern.attached[pos];
        if pos < n && !attached_on_departure {
            current_med = None;
            transferred = 0.0;
        }
        stops.push(Stop {
            node,
            arrival_energy,
            recharged,
            attach: pattern.attach[pos],
            departure_energy: energy,
            attached_on_departure,
            transferred,
        });
        if pos == n {
            break;
        }

        let a = pattern.arcs[pos];
        let arc = inst.arc(a);
        if arc.from != node {
            return Err(PatternError::Disconnected(pos));
        }
        let mut induced = 0.0;
        let mut travel_time = arc.time;
        if attached_on_departure {
            let med = current_med.ok_or(PatternError::NotAttached(pos))?;
            let rate_cap = rate * arc.time;
            let budget = params.med_energy_cap - transferred;
            let headroom = q - (energy - arc.energy);
            induced = match induction {
                Induction::Greedy => rate_cap.min(budget).min(headroom).max(0.0),
                Induction::Given(g) => g[pos],
            };
            if induced < -tol {
                return Err(PatternError::Induction { pos, amount: induced, bound: "non-negativity" });
            }
            if induced > rate_cap + tol {
                return Err(PatternError::Induction { pos, amount: induced, bound: "rate times travel time" });
            }
            if induced > budget + tol {
                return Err(PatternError::Induction { pos, amount: induced, bound: "MED energy budget" });
            }
            transferred += induced;
            med_events[med].induced += induced;
            med_events[med].detach_stop = pos + 1;
            travel_time = arc.time / (1.0 - params.slowdown);
            totals.slowdown_time += params.slowdown_factor() * arc.time;
            totals.energy_induced += induced;
        }
        energy = energy - arc.energy + induced;
        if energy < -tol || energy > q + tol {
            return Err(PatternError::Energy { pos, energy });
        }
        energy = energy.clamp(0.0, q);
        totals.drive_time += arc.time;
        legs.push(Leg {
            arc: a,
            from: node,
            to: arc.to,
            attached: attached_on_departure,
            med: if attached_on_departure { current_med } else { None },
            induced,
            drive_time: arc.time,
            travel_time,
        });
        node = arc.to;
    }

    if node != inst.destination() {
        return Err(PatternError::WrongEnd(node));
    }
    totals.objective = totals.drive_time + totals.slowdown_time + totals.charge_time + totals.wait_time;
    Ok(Solution {
        pattern: pattern.clone(),
        stops,
        legs,
        med_events,
        totals,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolutionError {
    #[error("energy trace broken at stop {stop}: expected {expected}, found {found}")]
    Trace { stop: usize, expected: f64, found: f64 },
    #[error("energy {energy} at stop {stop} is outside [0, Q]")]
    EnergyRange { stop: usize, energy: f64 },
    #[error("MED {med} induced {induced}, above the per-MED budget")]
    MedBudget { med: usize, induced: f64 },
    #[error("{count} MED attachments exceed the cap")]
    MedCount { count: usize },
    #[error("objective {stored} differs from recomputed {recomputed}")]
    Objective { stored: f64, recomputed: f64 },
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

impl Solution {
    pub fn objective(&self) -> f64 {
        self.totals.objective
    }

    pub fn walk(&self) -> Vec<NodeIx> {
        self.stops.iter().map(|s| s.node).collect()
    }

    /// Number of times each node appears on the walk.
    pub fn visit_counts(&self, node_count: usize) -> Vec<usize> {
        let mut counts = vec![0; node_count];
        for s in &self.stops {
            counts[s.node] += 1;
        }
        counts
    }

    /// Recomputes the energy trace, resource use and objective from the stored
    /// stops and legs, independently of how the solution was produced.
    pub fn verify(&self, inst: &Instance, tol: f64) -> Result<(), SolutionError> {
        let params = inst.params();
        let q = params.battery_capacity;
        for (k, stop) in self.stops.iter().enumerate() {
            for energy in [stop.arrival_energy, stop.departure_energy] {
                if energy < -tol || energy > q + tol {
                    return Err(SolutionError::EnergyRange { stop: k, energy });
                }
            }
            let expected = stop.arrival_energy + stop.recharged;
            if (expected - stop.departure_energy).abs() > tol {
                return Err(SolutionError::Trace { stop: k, expected, found: stop.departure_energy });
            }
        }
        if (self.stops[0].arrival_energy - q).abs() > tol {
            return Err(SolutionError::Trace { stop: 0, expected: q, found: self.stops[0].arrival_energy });
        }
        for (k, leg) in self.legs.iter().enumerate() {
            let arc = inst.arc(leg.arc);
            let from = &self.stops[k];
            let to = &self.stops[k + 1];
            // eps_j = eps_i - c_ij + gamma_ij + beta_j
            let expected = from.departure_energy - arc.energy + leg.induced + to.recharged;
            if (expected - to.departure_energy).abs() > tol {
                return Err(SolutionError::Trace { stop: k + 1, expected, found: to.departure_energy });
            }
        }
        let mut per_med = vec![0.0; self.med_events.len()];
        for leg in &self.legs {
            if let Some(m) = leg.med {
                per_med[m] += leg.induced;
            }
        }
        for (med, &induced) in per_med.iter().enumerate() {
            if induced > params.med_energy_cap + tol {
                return Err(SolutionError::MedBudget { med, induced });
            }
        }
        if self.med_events.len() > params.med_count_cap {
            return Err(SolutionError::MedCount { count: self.med_events.len() });
        }
        let recomputed = recompute_objective(inst, self);
        if (recomputed - self.totals.objective).abs() > tol * (1.0 + recomputed.abs()) {
            return Err(SolutionError::Objective { stored: self.totals.objective, recomputed });
        }
        // Replaying the pattern checks the decision rules themselves.
        let gammas: Vec<f64> = self.legs.iter().map(|l| l.induced).collect();
        evaluate(inst, &self.pattern, Induction::Given(&gammas), tol)?;
        Ok(())
    }

    pub fn to_document(&self, inst: &Instance) -> SolutionDocument {
        let key = |v: NodeIx| inst.node(v).key.clone();
        SolutionDocument {
            origin: key(inst.origin()),
            destination: key(inst.destination()),
            objective: self.totals.objective,
            totals: self.totals.clone(),
            walk: self
                .legs
                .iter()
                .map(|l| LegRecord {
                    from: key(l.from),
                    to: key(l.to),
                    attached: l.attached,
                    med: l.med,
                    induced: l.induced,
                    drive_time: l.drive_time,
                    travel_time: l.travel_time,
                })
                .collect(),
            recharges: self
                .stops
                .iter()
                .filter(|s| s.recharged > 0.0)
                .map(|s| RechargeRecord { node: key(s.node), energy: s.recharged })
                .collect(),
            med_events: self
                .med_events
                .iter()
                .map(|e| MedRecord {
                    attach: key(self.stops[e.attach_stop].node),
                    detach: key(self.stops[e.detach_stop].node),
                    induced: e.induced,
                })
                .collect(),
            trace: self
                .stops
                .iter()
                .map(|s| TraceStep {
                    node: key(s.node),
                    arrival_energy: s.arrival_energy,
                    departure_energy: s.departure_energy,
                    recharged: s.recharged,
                    attached: s.attached_on_departure,
                    transferred: s.transferred,
                })
                .collect(),
        }
    }
}

/// The objective as written in the model: arc times, slowdown on attached
/// arcs, proportional charge time, and waits at used SCSs and MED points.
pub fn recompute_objective(inst: &Instance, sol: &Solution) -> f64 {
    let params = inst.params();
    let q = params.battery_capacity;
    let mut total = 0.0;
    for leg in &sol.legs {
        let d = inst.arc(leg.arc).time;
        total += d;
        if leg.attached {
            total += params.slowdown_factor() * d;
        }
    }
    for stop in &sol.stops {
        if stop.recharged > 0.0 {
            total += inst.charge_time(stop.node) / q * stop.recharged + inst.wait(stop.node);
        }
        if stop.attach {
            total += inst.wait(stop.node);
        }
    }
    total
}

/// Serialized form of a solution, with node ids instead of indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub origin: NodeKey,
    pub destination: NodeKey,
    pub objective: f64,
    pub totals: Totals,
    pub walk: Vec<LegRecord>,
    pub recharges: Vec<RechargeRecord>,
    pub med_events: Vec<MedRecord>,
    /// One entry per stop: enough to re-check the energy recursion.
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub from: NodeKey,
    pub to: NodeKey,
    pub attached: bool,
    pub med: Option<usize>,
    pub induced: f64,
    pub drive_time: f64,
    pub travel_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RechargeRecord {
    pub node: NodeKey,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedRecord {
    pub attach: NodeKey,
    pub detach: NodeKey,
    pub induced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub node: NodeKey,
    pub arrival_energy: f64,
    pub departure_energy: f64,
    pub recharged: f64,
    pub attached: bool,
    pub transferred: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{NodeRole, RawInstance};

    const TOL: f64 = 1e-9;

    // 1 -> 2 -> 3 with a MED point at 2 and an SCS at 3 -> 4.
    fn line() -> Instance {
        RawInstance::builder(100.0, 2.0, 0.5, 30.0, 1)
            .node(1, NodeRole::Transit)
            .med(2, 3.0)
            .node(3, NodeRole::Transit)
            .scs(4, 2.0, 50.0)
            .node(5, NodeRole::Transit)
            .arc(1, 2, 10.0, 60.0)
            .arc(2, 3, 10.0, 50.0)
            .arc(3, 4, 4.0, 20.0)
            .arc(4, 5, 4.0, 90.0)
            .trip(1, 5)
            .validate()
            .unwrap()
    }

    #[test]
    fn plain_walk_without_enough_energy_fails() {
        let inst = line();
        let p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        assert!(matches!(evaluate(&inst, &p, Induction::Greedy, TOL), Err(PatternError::Energy { pos: 1, .. })));
    }

    #[test]
    fn attach_and_recharge_pattern_evaluates() {
        let inst = line();
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[1] = true;
        p.attached[1] = true;
        p.attached[2] = true;
        p.recharge[3] = true;
        let sol = evaluate(&inst, &p, Induction::Greedy, TOL).unwrap();
        // At 2: 40 left. Arc 2->3: rate 4/time * 10 = 40, budget 30, headroom 100-(40-50)=110 -> 30.
        assert_eq!(sol.legs[1].induced, 30.0);
        assert_eq!(sol.stops[2].departure_energy, 20.0);
        // Arc 3->4 attached: budget exhausted, induced 0 -> 0 left, recharge 100 at 4.
        assert_eq!(sol.legs[2].induced, 0.0);
        assert_eq!(sol.stops[3].arrival_energy, 0.0);
        assert_eq!(sol.stops[3].recharged, 100.0);
        assert!(!sol.stops[3].attached_on_departure);
        assert_eq!(sol.med_events, vec![MedEvent { attach_stop: 1, detach_stop: 3, induced: 30.0 }]);
        // drive 28, slowdown 1 * (10 + 4), charge 50/100*100, waits 3 + 2
        assert_eq!(sol.totals.objective, 28.0 + 14.0 + 50.0 + 5.0);
        sol.verify(&inst, TOL).unwrap();
        assert_eq!(recompute_objective(&inst, &sol), sol.totals.objective);
    }

    #[test]
    fn attach_rules_are_enforced() {
        let inst = line();
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[0] = true;
        assert!(matches!(evaluate(&inst, &p, Induction::Greedy, TOL), Err(PatternError::Attach { pos: 0, .. })));
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attached[1] = true;
        assert_eq!(evaluate(&inst, &p, Induction::Greedy, TOL).unwrap_err(), PatternError::NotAttached(1));
        // Node 3 is a transit node.
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[1] = true;
        p.attached[1] = true;
        p.attached[2] = true;
        p.recharge[3] = true;
        let mut twice = p.clone();
        twice.attach[2] = true;
        assert!(matches!(evaluate(&inst, &twice, Induction::Greedy, TOL), Err(PatternError::Attach { pos: 2, .. })));
    }

    #[test]
    fn given_induction_is_bounds_checked() {
        let inst = line();
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[1] = true;
        p.attached[1] = true;
        p.recharge[3] = true;
        let over_budget = [0.0, 31.0, 0.0, 0.0];
        assert!(matches!(
            evaluate(&inst, &p, Induction::Given(&over_budget), TOL),
            Err(PatternError::Induction { bound: "MED energy budget", .. })
        ));
        let ok = [0.0, 30.0, 0.0, 0.0];
        let sol = evaluate(&inst, &p, Induction::Given(&ok), TOL).unwrap();
        assert_eq!(sol.legs[1].induced, 30.0);
        assert_eq!(sol.stops[3].arrival_energy, 0.0);
    }

    #[test]
    fn verify_catches_tampering() {
        let inst = line();
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[1] = true;
        p.attached[1] = true;
        p.recharge[3] = true;
        let mut sol = evaluate(&inst, &p, Induction::Greedy, TOL).unwrap();
        sol.verify(&inst, TOL).unwrap();
        sol.totals.objective += 1.0;
        assert!(matches!(sol.verify(&inst, TOL), Err(SolutionError::Objective { .. })));
        let mut sol = evaluate(&inst, &p, Induction::Greedy, TOL).unwrap();
        sol.legs[1].induced += 1.0;
        assert!(matches!(sol.verify(&inst, TOL), Err(SolutionError::Trace { .. })));
    }

    #[test]
    fn document_trace_satisfies_energy_recursion() {
        let inst = line();
        let mut p = DecisionPattern::walk(0, vec![0, 1, 2, 3]);
        p.attach[1] = true;
        p.attached[1] = true;
        p.recharge[3] = true;
        let sol = evaluate(&inst, &p, Induction::Greedy, TOL).unwrap();
        let doc = sol.to_document(&inst);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SolutionDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        for (k, leg) in back.walk.iter().enumerate() {
            let energy = inst.arc(inst.find_arc(inst.index_of(&leg.from).unwrap(), inst.index_of(&leg.to).unwrap()).unwrap()).energy;
            let expect = back.trace[k].departure_energy - energy + leg.induced + back.trace[k + 1].recharged;
            assert!((expect - back.trace[k + 1].departure_energy).abs() < TOL);
        }
        assert_eq!(back.recharges.len(), 1);
        assert_eq!(back.med_events[0].attach, NodeKey::Int(2));
    }

    #[test]
    fn empty_pattern_at_destination() {
        let inst = line().with_trip(2, 2);
        let sol = evaluate(&inst, &DecisionPattern::empty(2), Induction::Greedy, TOL).unwrap();
        assert_eq!(sol.objective(), 0.0);
        assert_eq!(sol.walk(), vec![2]);
    }
}
