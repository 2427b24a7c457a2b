#![allow(dead_code)]

use std::path::PathBuf;

use evtrip::engine::reverse_time_bound;
use evtrip::gen::{generate, GenParams, ParamRanges, Range};
use evtrip::instance::io;
use evtrip::Instance;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_fixture(name: &str) -> Instance {
    io::load(fixture(name)).unwrap()
}

fn tight(seed: u64, n: usize, m: usize, pct_scs: f64, pct_med: f64) -> Instance {
    let mut p = GenParams::new(n, m, seed);
    p.pct_scs = pct_scs;
    p.pct_med = pct_med;
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
    // Start as far from the destination as possible so trips run longer than an arc or two.
    let h = reverse_time_bound(&inst);
    let far = (0..n)
        .filter(|&v| h[v].is_finite())
        .max_by(|&a, &b| h[a].total_cmp(&h[b]))
        .unwrap_or(inst.origin());
    inst.with_trip(far, inst.destination())
}

/// n in 4..=12, m <= 30, P in {1, 2}, battery of 80 against arcs costing 25..60.
pub fn small_instance(seed: u64) -> Instance {
    let n = 4 + (seed % 9) as usize;
    let m = ((n - 1) + (seed as usize * 7) % 20).min(30).min(n * (n - 1));
    tight(seed, n, m, 0.2, 0.5)
}

/// Five or six nodes, most of them MED points; used where patterns are enumerated.
pub fn tiny_med_instance(seed: u64) -> Instance {
    let n = 5 + (seed % 2) as usize;
    let m = (n - 1) + (seed % 5) as usize;
    tight(seed, n, m, 0.2, 0.6)
}
