//! Seeded random instances.
//!
//! A random in-arborescence towards the destination is laid down first, so
//! every node reaches it; the remaining arcs are drawn uniformly without
//! duplicates. SCS and MED roles are assigned to disjoint random node sets.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::instance::{Instance, NodeRole, RawArc, RawInstance, ValidationError};

pub const GENERATOR_VERSION: &str = concat!("evtrip-gen/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.hi > self.lo {
            rng.gen_range(self.lo..=self.hi)
        } else {
            self.lo
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub time: Range,
    pub energy: Range,
    pub wait: Range,
    pub charge_time: Range,
    pub battery_capacity: f64,
    pub induction_rate: f64,
    pub slowdown: f64,
    /// `None` means half the battery capacity.
    pub med_energy_cap: Option<f64>,
    pub med_count_cap: usize,
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            time: Range::new(1.0, 60.0),
            energy: Range::new(1.0, 50.0),
            wait: Range::new(0.0, 10.0),
            charge_time: Range::new(30.0, 120.0),
            battery_capacity: 500.0,
            induction_rate: 2.0,
            slowdown: 0.2,
            med_energy_cap: None,
            med_count_cap: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub nodes: usize,
    pub arcs: usize,
    pub pct_scs: f64,
    pub pct_med: f64,
    pub ranges: ParamRanges,
    pub seed: u64,
}

impl GenParams {
    pub fn new(nodes: usize, arcs: usize, seed: u64) -> Self {
        GenParams {
            nodes,
            arcs,
            pct_scs: 0.1,
            pct_med: 0.9,
            ranges: ParamRanges::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("{arcs} arcs requested but a simple digraph on {nodes} nodes has at most {max}")]
    TooManyEdges { nodes: usize, arcs: usize, max: usize },
    #[error("{arcs} arcs cannot connect {nodes} nodes to the destination (need at least {min})")]
    TooFewEdges { nodes: usize, arcs: usize, min: usize },
    #[error("{scs} SCS plus {med} MED nodes do not fit in {nodes} nodes")]
    RoleOverflow { scs: usize, med: usize, nodes: usize },
    #[error("instance needs at least one node")]
    Empty,
    #[error("generated instance is invalid: {0}")]
    Invalid(#[from] ValidationError),
}

pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    let n = params.nodes;
    let m = params.arcs;
    if n == 0 {
        return Err(GenError::Empty);
    }
    let max = n * (n - 1);
    if m > max {
        return Err(GenError::TooManyEdges { nodes: n, arcs: m, max });
    }
    if m < n - 1 {
        return Err(GenError::TooFewEdges { nodes: n, arcs: m, min: n - 1 });
    }
    let scs = (params.pct_scs * n as f64).round() as usize;
    let med = (params.pct_med * n as f64).round() as usize;
    if params.pct_scs < 0.0 || params.pct_med < 0.0 || params.pct_scs + params.pct_med > 1.0 + 1e-12 || scs > n {
        return Err(GenError::RoleOverflow { scs, med, nodes: n });
    }
    // Both counts may round up on odd n; the MED share gives way.
    let med = med.min(n - scs);

    let r = &params.ranges;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let destination = order[0];
    let origin = if n > 1 { order[rng.gen_range(1..n)] } else { destination };

    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(m);
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(m);
    // order[0] is the root; every later node points at an earlier one.
    for k in 1..n {
        let v = order[k];
        let parent = order[rng.gen_range(0..k)];
        pairs.push((v, parent));
        seen.insert((v, parent));
    }
    let extra = m - (n - 1);
    if extra > 0 && 2 * m > max {
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !seen.contains(&(i, j)))
            .collect();
        rest.shuffle(&mut rng);
        pairs.extend(rest.into_iter().take(extra));
    } else {
        while pairs.len() < m {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j && seen.insert((i, j)) {
                pairs.push((i, j));
            }
        }
    }

    let mut roles = vec![NodeRole::Transit; n];
    let mut shuffled: Vec<usize> = (0..n).collect();
    shuffled.shuffle(&mut rng);
    for &v in &shuffled[..scs] {
        roles[v] = NodeRole::Scs;
    }
    for &v in &shuffled[scs..scs + med] {
        roles[v] = NodeRole::MedPoint;
    }

    let q = r.battery_capacity;
    let mut raw = RawInstance::builder(
        q,
        r.induction_rate,
        r.slowdown,
        r.med_energy_cap.unwrap_or(q / 2.0),
        r.med_count_cap,
    );
    let id = |v: usize| v as i64 + 1;
    for (v, role) in roles.iter().enumerate() {
        raw = match role {
            NodeRole::Transit => raw.node(id(v), NodeRole::Transit),
            NodeRole::Scs => {
                let wait = r.wait.sample(&mut rng);
                let charge = r.charge_time.sample(&mut rng);
                raw.scs(id(v), wait, charge)
            }
            NodeRole::MedPoint => {
                let wait = r.wait.sample(&mut rng);
                raw.med(id(v), wait)
            }
        };
    }
    raw.arcs = pairs
        .into_iter()
        .map(|(i, j)| {
            let time = r.time.sample(&mut rng);
            let energy = r.energy.sample(&mut rng);
            RawArc::new(id(i), id(j), time, energy)
        })
        .collect();
    raw = raw.trip(id(origin), id(destination));
    raw.metadata = Some(json!({
        "generator": GENERATOR_VERSION,
        "seed": params.seed,
        "nodes": n,
        "arcs": m,
        "pct_scs": params.pct_scs,
        "pct_med": params.pct_med,
        "ranges": r,
    }));
    Ok(raw.validate()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::reverse_time_bound;
    use crate::instance::io::to_json_string;
    use proptest::prelude::*;

    #[test]
    fn exact_role_counts() {
        let inst = generate(&GenParams::new(1000, 3000, 7)).unwrap();
        assert_eq!(inst.count_role(NodeRole::Scs), 100);
        assert_eq!(inst.count_role(NodeRole::MedPoint), 900);
        assert_eq!(inst.arc_count(), 3000);
    }

    #[test]
    fn forty_thousand_nodes_get_four_thousand_scs() {
        let inst = generate(&GenParams::new(40_000, 100_000, 1)).unwrap();
        assert_eq!(inst.count_role(NodeRole::Scs), 4000);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = to_json_string(&generate(&GenParams::new(30, 80, 42)).unwrap());
        let b = to_json_string(&generate(&GenParams::new(30, 80, 42)).unwrap());
        assert_eq!(a, b);
        let c = to_json_string(&generate(&GenParams::new(30, 80, 43)).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn too_many_edges() {
        assert_eq!(
            generate(&GenParams::new(10, 200, 0)).unwrap_err(),
            GenError::TooManyEdges { nodes: 10, arcs: 200, max: 90 }
        );
    }

    #[test]
    fn role_overflow() {
        let mut p = GenParams::new(10, 20, 0);
        p.pct_scs = 0.5;
        p.pct_med = 0.6;
        assert!(matches!(generate(&p), Err(GenError::RoleOverflow { .. })));
    }

    #[test]
    fn complete_graph_is_reachable() {
        let inst = generate(&GenParams::new(6, 30, 3)).unwrap();
        assert_eq!(inst.arc_count(), 30);
    }

    #[test]
    fn metadata_records_seed_and_ranges() {
        let inst = generate(&GenParams::new(5, 8, 99)).unwrap();
        let meta = inst.metadata().unwrap();
        assert_eq!(meta["seed"], 99);
        assert_eq!(meta["ranges"]["time"]["hi"], 60.0);
        assert_eq!(meta["ranges"]["battery_capacity"], 500.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn every_node_reaches_destination(n in 2usize..25, extra in 0usize..40, seed in any::<u64>()) {
            let m = (n - 1 + extra).min(n * (n - 1));
            let inst = generate(&GenParams::new(n, m, seed)).unwrap();
            let h = reverse_time_bound(&inst);
            prop_assert!(h.iter().all(|d| d.is_finite()));
            prop_assert_eq!(inst.arc_count(), m);
        }
    }
}
