use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use evtrip::engine::{solve_with_stats, SolveOptions};
use evtrip::gen::{generate, GenParams, Range};
use evtrip::instance::{default_copies, expand, io as inst_io};
use evtrip::milp::{self, BuildOptions};
use evtrip::oracle::{enumerate_optimum, OracleOptions};
use evtrip::DEFAULT_TOLERANCE;
use evtrip_cli::*;

#[derive(Parser)]
#[command(name = "evtrip", version, about = "Minimum-time EV trips with charge stations and mobile energy disseminators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SearchFlags {
    /// Disable dominance pruning.
    #[arg(long)]
    no_dominance: bool,
    /// Disable incumbent-bound pruning of generated labels.
    #[arg(long)]
    no_bound: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Abort (exit 3) after storing this many labels.
    #[arg(long)]
    max_labels: Option<usize>,
    /// Longest walk, in arcs, the search may extend.
    #[arg(long)]
    max_depth: Option<usize>,
}

impl SearchFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            dominance: !self.no_dominance,
            bound: !self.no_bound,
            tolerance: self.tolerance,
            max_labels: self.max_labels,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Args)]
struct ModelFlags {
    /// Copies per non-SCS node in the expansion (default |S| + P).
    #[arg(long)]
    copies: Option<usize>,
    /// Use the raw unit-mixing forms of the full-battery and recharge rows.
    #[arg(long)]
    literal_units: bool,
    /// Leave out the redundant SCS in/out rows.
    #[arg(long)]
    no_optional: bool,
    /// Leave out the rows tying MED arcs to driven arcs.
    #[arg(long)]
    no_link: bool,
    /// Leave out the rows allowing one visit per expanded node.
    #[arg(long)]
    no_visit_cap: bool,
}

impl ModelFlags {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            literal_units: self.literal_units,
            optional_rows: !self.no_optional,
            link_med_to_vehicle: !self.no_link,
            single_visit: !self.no_visit_cap,
            ..BuildOptions::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one trip exactly and print a summary line.
    Solve {
        instance: PathBuf,
        /// Write the solution document here.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Write a random instance.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        arcs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        pct_scs: f64,
        #[arg(long, default_value_t = 0.9)]
        pct_med: f64,
        /// Battery capacity.
        #[arg(long)]
        q: Option<f64>,
        /// MED limit per trip.
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        time_range: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        energy_range: Option<Vec<f64>>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Enumerate every decision pattern (small instances only) and compare with the engine.
    Oracle {
        instance: PathBuf,
        /// Longest walk in arcs.
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value_t = evtrip::oracle::DEFAULT_NODE_CAP)]
        node_cap: usize,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Write the mixed-integer model in LP format.
    ExportLp {
        instance: PathBuf,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a `name value` assignment against the model and print its objective.
    CheckSolution {
        instance: PathBuf,
        assignment: PathBuf,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Generate and solve the instances listed in a CSV (nodes,arcs,seed).
    Bench {
        spec: PathBuf,
        #[arg(short, long, default_value = "bench.csv")]
        out: PathBuf,
        /// Edges-vs-time data file.
        #[arg(long, default_value = "bench.dat")]
        plot: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Solve several independent trips over one instance.
    Multi {
        instance: PathBuf,
        trips: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        search: SearchFlags,
    },
}

fn load(path: &PathBuf) -> Result<evtrip::Instance> {
    let (inst, warnings) = inst_io::load_with_warnings(path).with_context(|| format!("loading {}", path.display()))?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(inst)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { instance, out, search } => {
            let inst = load(&instance)?;
            let start = std::time::Instant::now();
            let (res, stats) = solve_with_stats(&inst, &search.options());
            let secs = start.elapsed().as_secs_f64();
            log::info!("{stats:?}");
            match res {
                Ok(sol) => {
                    if let Some(path) = out {
                        let doc = serde_json::to_string_pretty(&sol.to_document(&inst))?;
                        fs::write(&path, doc + "\n").with_context(|| format!("writing {}", path.display()))?;
                    }
                    println!("{}", Summary::new(&sol, secs).line());
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(exit_code(&e))
                }
            }
        }
        Command::Generate { nodes, arcs, seed, pct_scs, pct_med, q, p, time_range, energy_range, out } => {
            let mut params = GenParams::new(nodes, arcs, seed);
            params.pct_scs = pct_scs;
            params.pct_med = pct_med;
            if let Some(q) = q {
                params.ranges.battery_capacity = q;
            }
            if let Some(p) = p {
                params.ranges.med_count_cap = p;
            }
            if let Some(r) = time_range {
                params.ranges.time = Range::new(r[0], r[1]);
            }
            if let Some(r) = energy_range {
                params.ranges.energy = Range::new(r[0], r[1]);
            }
            let inst = generate(&params)?;
            inst_io::save(&inst, &out)?;
            Ok(EXIT_OK)
        }
        Command::Oracle { instance, max_len, node_cap, search } => {
            let inst = load(&instance)?;
            let opts = OracleOptions { max_len, node_cap, tolerance: search.tolerance };
            let start = std::time::Instant::now();
            let oracle = enumerate_optimum(&inst, &opts);
            let secs = start.elapsed().as_secs_f64();
            let engine = evtrip::solve(&inst, &search.options());
            match (oracle, engine) {
                (Ok(o), Ok(e)) => {
                    println!("oracle {}", Summary::new(&o, secs).line());
                    let gap = (o.objective() - e.objective()).abs();
                    if gap > 1e-6 {
                        println!("engine objective {} differs by {}", fmt_num(e.objective()), gap);
                        Ok(EXIT_OTHER)
                    } else {
                        println!("engine agrees");
                        Ok(EXIT_OK)
                    }
                }
                (Err(evtrip::oracle::OracleError::Infeasible(l)), Err(evtrip::SolveError::Infeasible)) => {
                    println!("infeasible within {l} arcs; engine agrees");
                    Ok(EXIT_INFEASIBLE)
                }
                (o, e) => {
                    println!("oracle: {:?}", o.map(|s| s.objective()));
                    println!("engine: {:?}", e.map(|s| s.objective()));
                    Ok(EXIT_OTHER)
                }
            }
        }
        Command::ExportLp { instance, model, out } => {
            let inst = load(&instance)?;
            let copies = model.copies.unwrap_or_else(|| default_copies(&inst));
            let ex = expand(&inst, copies)?;
            let m = milp::build(&ex, &model.options());
            milp::write_lp(&m, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} variables, {} rows, {} copies per node", m.vars.len(), m.rows.len(), copies);
            Ok(EXIT_OK)
        }
        Command::CheckSolution { instance, assignment, model } => {
            let inst = load(&instance)?;
            let copies = model.copies.unwrap_or_else(|| default_copies(&inst));
            let ex = expand(&inst, copies)?;
            let m = milp::build(&ex, &model.options());
            let cert = milp::import_solution(&m, &assignment)?;
            println!("feasible, objective {}", fmt_num(cert.objective));
            Ok(EXIT_OK)
        }
        Command::Bench { spec, out, plot, workers, search } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let rows = parse_bench_spec(&text)?;
            let results = run_bench(&rows, &search.options(), workers)?;
            let file = fs::File::create(&out).with_context(|| format!("writing {}", out.display()))?;
            write_bench_csv(file, &results)?;
            fs::write(&plot, plot_data(&results)).with_context(|| format!("writing {}", plot.display()))?;
            for r in &results {
                println!("{} edges: {} in {:.3}s", r.edges, r.status, r.wall_time_s);
            }
            Ok(EXIT_OK)
        }
        Command::Multi { instance, trips, workers, search } => {
            let inst = load(&instance)?;
            let text = fs::read_to_string(&trips).with_context(|| format!("reading {}", trips.display()))?;
            let trips = parse_trips(&inst, &text)?;
            let report = run_multi(&inst, &trips, &search.options(), workers)?;
            print!("{}", multi_report_text(&report));
            Ok(if report.partial { EXIT_INFEASIBLE } else { EXIT_OK })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_OTHER as u8)
        }
    }
}
