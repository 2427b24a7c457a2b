//! Exhaustive ground truth for small instances.
//!
//! Depth-first enumeration of every walk of at most `L` arcs together with
//! every recharge / attach / detach choice along it, inducing greedily on
//! attached arcs. The only pruning is energy feasibility and an incumbent on
//! elapsed time; no dominance and no lower bound.

use thiserror::Error;

use crate::instance::{ArcIx, Instance, NodeRole};
use crate::solution::{evaluate, DecisionPattern, Induction, Solution};
use crate::DEFAULT_TOLERANCE;

pub const DEFAULT_NODE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Longest walk in arcs; `None` uses `|N| + 2 (|S| + P)`.
    pub max_len: Option<usize>,
    pub node_cap: usize,
    pub tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_len: None,
            node_cap: DEFAULT_NODE_CAP,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {nodes} nodes, above the oracle cap of {cap}")]
    CapExceeded { nodes: usize, cap: usize },
    #[error("no feasible walk reaches the destination within {0} arcs")]
    Infeasible(usize),
}

pub fn default_max_len(inst: &Instance) -> usize {
    inst.node_count() + 2 * (inst.count_role(NodeRole::Scs) + inst.params().med_count_cap)
}

#[derive(Clone, Copy)]
struct State {
    node: usize,
    time: f64,
    energy: f64,
    attached: bool,
    transferred: f64,
    meds: usize,
    charged_here: bool,
    attached_here: bool,
}

struct Search<'a> {
    inst: &'a Instance,
    tol: f64,
    max_len: usize,
    arcs: Vec<ArcIx>,
    recharge: Vec<bool>,
    attach: Vec<bool>,
    attached: Vec<bool>,
    gammas: Vec<f64>,
    best: f64,
    best_pattern: Option<(DecisionPattern, Vec<f64>)>,
    visited: u64,
}

impl Search<'_> {
    fn dfs(&mut self, st: State) {
        self.visited += 1;
        if st.time >= self.best - self.tol {
            return;
        }
        let inst = self.inst;
        let p = inst.params();
        let q = p.battery_capacity;
        if st.node == inst.destination() {
            self.best = st.time;
            self.best_pattern = Some((
                DecisionPattern {
                    origin: inst.origin(),
                    arcs: self.arcs.clone(),
                    recharge: self.recharge.clone(),
                    attach: self.attach.clone(),
                    attached: self.attached.clone(),
                },
                self.gammas.clone(),
            ));
            return;
        }
        let pos = self.arcs.len();

        if inst.role(st.node) == NodeRole::Scs && !st.charged_here && st.energy < q - self.tol {
            let beta = q - st.energy;
            self.recharge[pos] = true;
            self.dfs(State {
                time: st.time + inst.node(st.node).wait + inst.node(st.node).charge_time.unwrap_or(0.0) / q * beta,
                energy: q,
                attached: false,
                transferred: 0.0,
                charged_here: true,
                ..st
            });
            self.recharge[pos] = false;
        }

        if inst.role(st.node) == NodeRole::MedPoint
            && !st.attached_here
            && st.meds < p.med_count_cap
            && (st.attached || st.energy < q - self.tol)
        {
            self.attach[pos] = true;
            self.dfs(State {
                time: st.time + inst.node(st.node).wait,
                attached: true,
                transferred: 0.0,
                meds: st.meds + 1,
                attached_here: true,
                ..st
            });
            self.attach[pos] = false;
        }

        if pos >= self.max_len {
            return;
        }
        for &a in inst.out_arcs(st.node) {
            let arc = *inst.arc(a);
            let mut moves = Vec::with_capacity(2);
            if st.attached {
                let gamma = (p.induction_rate / (1.0 - p.slowdown) * arc.time)
                    .min(p.med_energy_cap - st.transferred)
                    .min(q - (st.energy - arc.energy))
                    .max(0.0);
                moves.push((true, gamma));
            }
            moves.push((false, 0.0));
            for (on, gamma) in moves {
                let energy = st.energy - arc.energy + gamma;
                if energy < -self.tol {
                    continue;
                }
                let time = if on { arc.time / (1.0 - p.slowdown) } else { arc.time };
                self.arcs.push(a);
                self.attached.push(on);
                self.gammas.push(gamma);
                self.recharge.push(false);
                self.attach.push(false);
                self.dfs(State {
                    node: arc.to,
                    time: st.time + time,
                    energy: energy.clamp(0.0, q),
                    attached: on,
                    transferred: if on { st.transferred + gamma } else { 0.0 },
                    meds: st.meds,
                    charged_here: false,
                    attached_here: false,
                });
                self.arcs.pop();
                self.attached.pop();
                self.gammas.pop();
                self.recharge.pop();
                self.attach.pop();
            }
        }
    }
}

/// Minimum-objective trip over all decision patterns of at most `L` arcs.
pub fn enumerate_optimum(inst: &Instance, opts: &OracleOptions) -> Result<Solution, OracleError> {
    enumerate_with_count(inst, opts).0
}

/// As [`enumerate_optimum`], also returning the number of search nodes visited.
pub fn enumerate_with_count(inst: &Instance, opts: &OracleOptions) -> (Result<Solution, OracleError>, u64) {
    if inst.node_count() > opts.node_cap {
        return (
            Err(OracleError::CapExceeded { nodes: inst.node_count(), cap: opts.node_cap }),
            0,
        );
    }
    let max_len = opts.max_len.unwrap_or_else(|| default_max_len(inst));
    let mut search = Search {
        inst,
        tol: opts.tolerance,
        max_len,
        arcs: Vec::new(),
        recharge: vec![false],
        attach: vec![false],
        attached: Vec::new(),
        gammas: Vec::new(),
        best: f64::INFINITY,
        best_pattern: None,
        visited: 0,
    };
    search.dfs(State {
        node: inst.origin(),
        time: 0.0,
        energy: inst.params().battery_capacity,
        attached: false,
        transferred: 0.0,
        meds: 0,
        charged_here: false,
        attached_here: false,
    });
    let visited = search.visited;
    match search.best_pattern {
        Some((pattern, gammas)) => {
            let sol = evaluate(inst, &pattern, Induction::Given(&gammas), opts.tolerance)
                .expect("enumerated pattern is valid");
            (Ok(sol), visited)
        }
        None => (Err(OracleError::Infeasible(max_len)), visited),
    }
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
    fn revisit_loop_recharges_once() {
        let opts = OracleOptions { max_len: Some(5), ..OracleOptions::default() };
        let sol = enumerate_optimum(&revisit_loop(), &opts).unwrap();
        assert_eq!(sol.walk(), vec![0, 1, 3, 1, 2]);
        assert_eq!(sol.totals.recharges, 1);
        assert!((sol.objective() - 115.0).abs() < 1e-9);
    }

    #[test]
    fn too_short_a_walk_budget_is_infeasible() {
        let opts = OracleOptions { max_len: Some(3), ..OracleOptions::default() };
        assert_eq!(enumerate_optimum(&revisit_loop(), &opts).unwrap_err(), OracleError::Infeasible(3));
    }

    #[test]
    fn monotone_in_walk_length() {
        let inst = revisit_loop();
        let mut prev = f64::INFINITY;
        for l in 1..9 {
            let opts = OracleOptions { max_len: Some(l), ..OracleOptions::default() };
            let v = enumerate_optimum(&inst, &opts).map(|s| s.objective()).unwrap_or(f64::INFINITY);
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev.is_finite());
    }

    #[test]
    fn origin_is_destination() {
        let inst = revisit_loop().with_trip(2, 2);
        let sol = enumerate_optimum(&inst, &OracleOptions::default()).unwrap();
        assert_eq!(sol.objective(), 0.0);
        assert!(sol.legs.is_empty());
    }

    #[test]
    fn unreachable_is_infeasible() {
        let inst = revisit_loop().with_trip(2, 0);
        assert!(matches!(enumerate_optimum(&inst, &OracleOptions::default()), Err(OracleError::Infeasible(_))));
    }

    #[test]
    fn node_cap() {
        let opts = OracleOptions { node_cap: 3, ..OracleOptions::default() };
        assert_eq!(
            enumerate_optimum(&revisit_loop(), &opts).unwrap_err(),
            OracleError::CapExceeded { nodes: 4, cap: 3 }
        );
    }

    #[test]
    fn default_length() {
        assert_eq!(default_max_len(&revisit_loop()), 4 + 2);
    }
}
