//! Command implementations behind the `evtrip` binary.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use evtrip::engine::{solve, Limit, SolveError, SolveOptions};
use evtrip::gen::{generate, GenParams};
use evtrip::instance::NodeKey;
use evtrip::{Instance, Solution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

pub fn exit_code(err: &SolveError) -> i32 {
    match err {
        SolveError::Infeasible => EXIT_INFEASIBLE,
        SolveError::LimitExceeded(_) => EXIT_LIMIT,
    }
}

/// Prints integers without a fractional part and everything else with up to
/// six decimals.
pub fn fmt_num(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        let s = format!("{x:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Totals reported for one solved trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub objective: f64,
    /// Wall time of the search alone.
    pub seconds: f64,
    /// Sum of arc driving times (the model has no distances).
    pub dist: f64,
    pub energy: f64,
    pub induced: f64,
    pub recharges: usize,
    pub meds: usize,
}

impl Summary {
    pub fn new(sol: &Solution, seconds: f64) -> Self {
        Summary {
            objective: sol.totals.objective,
            seconds,
            dist: sol.totals.drive_time,
            energy: sol.totals.energy_recharged,
            induced: sol.totals.energy_induced,
            recharges: sol.totals.recharges,
            meds: sol.totals.meds,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "objective {}, t {:.3}, dist {}, Energy {}, W. Energy {}, #Recharges {}, #MED {}",
            fmt_num(self.objective),
            self.seconds,
            fmt_num(self.dist),
            fmt_num(self.energy),
            fmt_num(self.induced),
            self.recharges,
            self.meds
        )
    }
}

/// Runs the engine and times the search.
pub fn timed_solve(inst: &Instance, opts: &SolveOptions) -> (std::result::Result<Solution, SolveError>, f64) {
    let start = Instant::now();
    let res = solve(inst, opts);
    (res, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub arcs: usize,
    pub seed: u64,
}

pub fn parse_bench_spec(text: &str) -> Result<Vec<BenchRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.deserialize() {
        rows.push(rec.context("bench spec rows need nodes,arcs,seed")?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
    pub status: String,
    pub wall_time_s: f64,
    pub objective: Option<f64>,
    pub energy: Option<f64>,
    pub w_energy: Option<f64>,
    pub recharges: Option<usize>,
    pub meds: Option<usize>,
}

pub fn bench_one(row: &BenchRow, opts: &SolveOptions) -> BenchResult {
    let mut out = BenchResult {
        nodes: row.nodes,
        edges: row.arcs,
        seed: row.seed,
        status: String::new(),
        wall_time_s: 0.0,
        objective: None,
        energy: None,
        w_energy: None,
        recharges: None,
        meds: None,
    };
    let inst = match generate(&GenParams::new(row.nodes, row.arcs, row.seed)) {
        Ok(inst) => inst,
        Err(e) => {
            out.status = format!("error: {e}");
            return out;
        }
    };
    let (res, secs) = timed_solve(&inst, opts);
    out.wall_time_s = secs;
    match res {
        Ok(sol) => {
            out.status = "optimal".into();
            out.objective = Some(sol.totals.objective);
            out.energy = Some(sol.totals.energy_recharged);
            out.w_energy = Some(sol.totals.energy_induced);
            out.recharges = Some(sol.totals.recharges);
            out.meds = Some(sol.totals.meds);
        }
        Err(SolveError::Infeasible) => out.status = "infeasible".into(),
        Err(SolveError::LimitExceeded(Limit::Labels(_))) => out.status = "label-limit".into(),
        Err(SolveError::LimitExceeded(Limit::Depth(_))) => out.status = "depth-limit".into(),
    }
    out
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")
}

/// Solves every row; results come back in input order.
pub fn run_bench(rows: &[BenchRow], opts: &SolveOptions, workers: usize) -> Result<Vec<BenchResult>> {
    let results: Vec<BenchResult> = pool(workers)?.install(|| rows.par_iter().map(|r| bench_one(r, opts)).collect());
    let mut by_edges: Vec<&BenchResult> = results.iter().filter(|r| r.status == "optimal").collect();
    by_edges.sort_by_key(|r| r.edges);
    for w in by_edges.windows(2) {
        if w[1].wall_time_s < w[0].wall_time_s {
            log::warn!(
                "wall time fell from {:.3}s at {} edges to {:.3}s at {} edges",
                w[0].wall_time_s,
                w[0].edges,
                w[1].wall_time_s,
                w[1].edges
            );
        }
    }
    Ok(results)
}

pub fn write_bench_csv<W: io::Write>(w: W, results: &[BenchResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "nodes", "edges", "seed", "status", "wall_time_s", "objective", "energy", "w_energy", "recharges", "meds",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
    for r in results {
        wtr.write_record([
            r.nodes.to_string(),
            r.edges.to_string(),
            r.seed.to_string(),
            r.status.clone(),
            format!("{:.6}", r.wall_time_s),
            opt(r.objective),
            opt(r.energy),
            opt(r.w_energy),
            r.recharges.map(|v| v.to_string()).unwrap_or_default(),
            r.meds.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Two whitespace-separated columns (edges, seconds) for plotting.
pub fn plot_data(results: &[BenchResult]) -> String {
    let mut out = String::from("# edges wall_time_s\n");
    for r in results.iter().filter(|r| r.status == "optimal") {
        let _ = writeln!(out, "{} {:.6}", r.edges, r.wall_time_s);
    }
    out
}

/// Trips file: one `origin destination` pair of node ids per line, `#` comments.
pub fn parse_trips(inst: &Instance, text: &str) -> Result<Vec<(usize, usize)>> {
    let mut trips = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ids: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if ids.len() != 2 {
            bail!("line {}: expected `origin destination`", k + 1);
        }
        let find = |id: &str| {
            inst.index_of_str(id)
                .with_context(|| format!("line {}: unknown node {id}", k + 1))
        };
        trips.push((find(ids[0])?, find(ids[1])?));
    }
    Ok(trips)
}

#[derive(Debug, Clone)]
pub struct TripOutcome {
    pub origin: NodeKey,
    pub destination: NodeKey,
    pub result: std::result::Result<Summary, SolveError>,
}

#[derive(Debug, Clone)]
pub struct MultiReport {
    pub trips: Vec<TripOutcome>,
    pub total: f64,
    /// Some trip had no solution, so `total` covers only the solved ones.
    pub partial: bool,
}

/// Trips share nothing, so each is solved on its own.
pub fn run_multi(inst: &Instance, trips: &[(usize, usize)], opts: &SolveOptions, workers: usize) -> Result<MultiReport> {
    let outcomes: Vec<TripOutcome> = pool(workers)?.install(|| {
        trips
            .par_iter()
            .map(|&(o, d)| {
                let trip = inst.with_trip(o, d);
                let (res, secs) = timed_solve(&trip, opts);
                TripOutcome {
                    origin: inst.node(o).key.clone(),
                    destination: inst.node(d).key.clone(),
                    result: res.map(|sol| Summary::new(&sol, secs)),
                }
            })
            .collect()
    });
    let total = outcomes.iter().filter_map(|t| t.result.as_ref().ok()).map(|s| s.objective).sum();
    let partial = outcomes.iter().any(|t| t.result.is_err());
    Ok(MultiReport { trips: outcomes, total, partial })
}

pub fn multi_report_text(report: &MultiReport) -> String {
    let mut out = String::new();
    for (k, t) in report.trips.iter().enumerate() {
        match &t.result {
            Ok(s) => {
                let _ = writeln!(out, "trip {} {} -> {}: {}", k + 1, t.origin, t.destination, s.line());
            }
            Err(e) => {
                let _ = writeln!(out, "trip {} {} -> {}: {e}", k + 1, t.origin, t.destination);
            }
        }
    }
    let _ = writeln!(
        out,
        "total objective {}{}",
        fmt_num(report.total),
        if report.partial { " (partial)" } else { "" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(115.0), "115");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333");
    }

    #[test]
    fn bench_spec_parsing() {
        let rows = parse_bench_spec("nodes,arcs,seed\n# comment\n10, 20, 1\n").unwrap();
        assert_eq!(rows, vec![BenchRow { nodes: 10, arcs: 20, seed: 1 }]);
        assert!(parse_bench_spec("nodes,arcs,seed\n").unwrap().is_empty());
        assert!(parse_bench_spec("nodes,arcs,seed\n1,x,2\n").is_err());
    }

    #[test]
    fn empty_bench_has_header_only() {
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "nodes,edges,seed,status,wall_time_s,objective,energy,w_energy,recharges,meds\n"
        );
    }

    #[test]
    fn bench_row_errors_are_recorded() {
        let bad = BenchRow { nodes: 10, arcs: 200, seed: 0 };
        let good = BenchRow { nodes: 10, arcs: 30, seed: 0 };
        let res = run_bench(&[bad, good], &SolveOptions::default(), 2).unwrap();
        assert!(res[0].status.starts_with("error"));
        assert_eq!(res[1].status, "optimal");
    }
}
