use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pcrpp::bench::{run_bench, summarize, summary_table, to_csv, BenchConfig};
use pcrpp::generate::{gen_random, GenParams};
use pcrpp::lp::{solve_pcrpp_lp_with, write_lp_format, DenseSimplex, LpConfig};
use pcrpp::preprocess::PreprocessedGraph;
use pcrpp::ratiocheck::{alpha_components, verify_bound, RatioParams};
use pcrpp::solvers::{
    best_of_many, exact_oracle, pctsp_reduction, DecompositionMode, DeskPctsp, Solution, SolverConfig,
};
use pcrpp::treedecomp::{DecompConfig, SharedTrace};
use pcrpp::{parse_instance, Error, Instance, Result};

#[derive(Parser)]
#[command(name = "pcrpp", version, about = "Prize-collecting rural postman solvers")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best-of-many approximation.
    Solve(SolveArgs),
    /// Exhaustive optimum for small instances.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 12)]
        cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// PCTSP reduction baseline.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        pctsp: PctspArgs,
        #[arg(long)]
        json: bool,
    },
    /// Runs both algorithms on many instances and reports gaps.
    Bench(BenchArgs),
    /// Certifies the constant of the ratio analysis on a grid.
    VerifyRatio {
        #[arg(long, default_value_t = 1e-8)]
        step: f64,
        #[arg(long, default_value_t = RatioParams::PAPER.kappa0)]
        kappa0: f64,
        #[arg(long, default_value_t = RatioParams::PAPER.kappa)]
        kappa: f64,
        #[arg(long, default_value_t = RatioParams::PAPER.beta)]
        beta: f64,
    },
    /// Writes a random connected instance.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        wmax: u32,
        #[arg(long, default_value_t = 10)]
        pmax: u32,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Shared,
    PerThreshold,
}

#[derive(Args)]
struct Tolerances {
    #[arg(long, default_value_t = LpConfig::default().feasibility_tol)]
    feasibility_tol: f64,
    #[arg(long, default_value_t = LpConfig::default().pricing_tol)]
    pricing_tol: f64,
    #[arg(long, default_value_t = LpConfig::default().snap_tol)]
    snap_tol: f64,
    #[arg(long, default_value_t = LpConfig::default().max_rounds)]
    max_rounds: usize,
    #[arg(long, default_value_t = DecompConfig::default().marginal_tol)]
    marginal_tol: f64,
    #[arg(long, value_enum, default_value_t = Mode::Shared)]
    mode: Mode,
    /// Return the best walk even when it breaks the 1.6 bound.
    #[arg(long)]
    no_guarantee_check: bool,
}

impl Tolerances {
    fn config(&self) -> SolverConfig {
        let lp = LpConfig {
            feasibility_tol: self.feasibility_tol,
            pricing_tol: self.pricing_tol,
            snap_tol: self.snap_tol,
            max_rounds: self.max_rounds,
        };
        let decomp = DecompConfig { marginal_tol: self.marginal_tol, ..DecompConfig::default() };
        let mode = match self.mode {
            Mode::Shared => DecompositionMode::SharedTrace,
            Mode::PerThreshold => DecompositionMode::PerThreshold,
        };
        SolverConfig { lp, decomp, mode, check_guarantee: !self.no_guarantee_check }
    }
}

#[derive(Args)]
struct PctspArgs {
    #[arg(long, default_value_t = 12)]
    pctsp_cap: usize,
    /// Use a nearest-neighbour tour above the cap instead of failing.
    #[arg(long)]
    pctsp_fallback: bool,
}

impl PctspArgs {
    fn solver(&self) -> DeskPctsp {
        DeskPctsp { cap: self.pctsp_cap, fallback: self.pctsp_fallback }
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    tol: Tolerances,
    #[arg(long)]
    json: bool,
    /// Write the final relaxation in LP format.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    /// Write the recorded split operations and tree distributions as JSON.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    files: Vec<PathBuf>,
    #[command(flatten)]
    tol: Tolerances,
    #[command(flatten)]
    pctsp: PctspArgs,
    #[arg(long, default_value_t = 12)]
    oracle_cap: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_instance(&text)?)
}

fn walk_ids(sol: &Solution) -> Vec<usize> {
    sol.walk.vertices.iter().map(|&v| Instance::display_id(v)).collect()
}

fn report(sol: &Solution, as_json: bool) -> Result<()> {
    if as_json {
        let v = json!({
            "value": sol.value,
            "lower_bound": sol.lower_bound,
            "walk": walk_ids(sol),
            "stats": sol.stats,
        });
        println!("{}", serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?);
        return Ok(());
    }
    println!("value       {:.6}", sol.value);
    if let Some(lb) = sol.lower_bound {
        println!("lower bound {lb:.6}");
    }
    let ids: Vec<String> = walk_ids(sol).iter().map(|v| v.to_string()).collect();
    println!("walk        {}", ids.join(" "));
    let s = &sol.stats;
    if s.lp_rounds > 0 {
        println!("thresholds  {}  trees {}  pairs {}  candidates {}", s.thresholds, s.trees, s.pairs, s.candidates);
        println!("lp rounds   {}  columns {}", s.lp_rounds, s.lp_columns);
    }
    if !s.exact {
        println!("note        inner solver was heuristic");
    }
    println!("time        lp {:.3}s  split {:.3}s  other {:.3}s", s.times.lp, s.times.split, s.times.other);
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    Ok(std::fs::write(path, text)?)
}

fn solve(args: &SolveArgs) -> Result<()> {
    let inst = load(&args.file)?;
    let cfg = args.tol.config();
    if args.dump_lp.is_some() || args.dump_trace.is_some() {
        let pg = PreprocessedGraph::build(&inst);
        let (lp, _) = solve_pcrpp_lp_with(&pg, &cfg.lp, &DenseSimplex::default())?;
        if let Some(path) = &args.dump_lp {
            std::fs::write(path, write_lp_format(&lp.program))?;
        }
        if let Some(path) = &args.dump_trace {
            let shared = SharedTrace::new(&pg, &lp.x, &lp.y, &cfg.decomp.split)?;
            let mut deltas: Vec<f64> = lp.y[1..].iter().copied().filter(|&v| v > 0.0).collect();
            deltas.sort_by(f64::total_cmp);
            deltas.dedup();
            let mut dists = Vec::with_capacity(deltas.len());
            for delta in deltas {
                let d = shared.distribution(&pg, delta)?;
                let trees: Vec<_> = d.trees.iter().zip(&d.lambda).map(|(t, l)| json!({ "lambda": l, "edges": t.edges })).collect();
                dists.push(json!({ "delta": delta, "trees": trees }));
            }
            write_json(path, &json!({ "order": shared.trace.order, "ops": shared.trace.ops, "distributions": dists }))?;
        }
    }
    report(&best_of_many(&inst, &cfg)?, args.json)
}

fn bench(args: &BenchArgs) -> Result<bool> {
    let cfg = BenchConfig { solver: args.tol.config(), pctsp: args.pctsp.solver(), oracle_cap: args.oracle_cap };
    let records = run_bench(&args.files, &cfg);
    let csv = to_csv(&records)?;
    match &args.csv {
        Some(path) => {
            std::fs::write(path, &csv)?;
            print!("{}", summary_table(&summarize(&records)));
        }
        None => {
            print!("{csv}");
            eprint!("{}", summary_table(&summarize(&records)));
        }
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.name, r.error.as_deref().unwrap_or_default());
    }
    Ok(records.iter().all(|r| r.error.is_none()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Solve(args) => solve(&args)?,
        Command::Oracle { file, cap, json } => report(&exact_oracle(&load(&file)?, cap)?, json)?,
        Command::Reduce { file, pctsp, json } => report(&pctsp_reduction(&load(&file)?, &pctsp.solver())?, json)?,
        Command::Bench(args) => {
            if !bench(&args)? {
                return Ok(ExitCode::from(2));
            }
        }
        Command::VerifyRatio { step, kappa0, kappa, beta } => {
            let p = RatioParams::new(kappa0, kappa, beta)?;
            let cert = verify_bound(&p, step)?;
            let parts = alpha_components(&p, step)?;
            print!("{}", cert.to_text());
            println!("  g               {:>20.12}", parts.g);
            println!("  1/(1-kappa0)    {:>20.12}", parts.invgap);
            print!("{}", cert.to_key_values());
            println!("g={:.17}", parts.g);
            println!("invgap={:.17}", parts.invgap);
        }
        Command::GenRandom { seed, n, m, wmax, pmax, density, output } => {
            let inst = gen_random(seed, &GenParams { n, m, wmax, pmax, positive_density: density })?;
            match output {
                Some(path) => std::fs::write(path, inst.to_text())?,
                None => print!("{}", inst.to_text()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
