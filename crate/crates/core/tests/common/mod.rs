#![allow(dead_code)]

use evtrip::engine::reverse_time_bound;
use evtrip::gen::{generate, GenParams, ParamRanges, Range};
use evtrip::instance::{NodeRole, RawInstance};
use evtrip::Instance;

/// Small random instance with a tight battery, so recharges and MEDs matter.
/// The origin is moved to the node farthest (in driving time) from the
/// destination to get trips longer than one or two arcs.
pub fn small_instance(seed: u64) -> Instance {
    let n = 4 + (seed % 9) as usize;
    let m = ((n - 1) + (seed as usize * 7) % 20).min(30).min(n * (n - 1));
    let mut p = GenParams::new(n, m, seed);
    p.pct_scs = 0.2;
    p.pct_med = 0.5;
    p.ranges = ParamRanges {
        time: Range::new(1.0, 20.0),
        energy: Range::new(25.0, 60.0),
        wait: Range::new(0.0, 5.0),
        charge_time: Range::new(10.0, 40.0),
        battery_capacity: 80.0,
        induction_rate: 1.5 + (seed % 4) as f64,
        slowdown: 0.2,
        med_energy_cap: Some(40.0),
        med_count_cap: 1 + (seed % 2) as usize,
    };
    let inst = generate(&p).expect("generator parameters are valid");
    let h = reverse_time_bound(&inst);
    let far = (0..n)
        .filter(|&v| h[v].is_finite())
        .max_by(|&a, &b| h[a].total_cmp(&h[b]))
        .unwrap_or(inst.origin());
    inst.with_trip(far, inst.destination())
}

pub fn scs_detour() -> Instance {
    RawInstance::builder(500.0, 2.0, 0.2, 250.0, 0)
        .node(1, NodeRole::Transit)
        .scs(2, 5.0, 100.0)
        .node(3, NodeRole::Transit)
        .node(4, NodeRole::Transit)
        .arc(1, 2, 10.0, 100.0)
        .arc(2, 4, 5.0, 50.0)
        .arc(4, 2, 5.0, 50.0)
        .arc(2, 3, 10.0, 300.0)
        .trip(1, 3)
        .validate()
        .unwrap()
}

pub fn revisit_loop() -> Instance {
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
