//! One line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use pcrpp::bench::{run_bench, summarize, to_csv, from_csv, BenchConfig, BenchRecord};
use pcrpp::candidates::min_tjoin;
use pcrpp::lp::{solve_pcrpp_lp, LpSolution};
use pcrpp::preprocess::PreprocessedGraph;
use pcrpp::ratiocheck::alpha_terms;
use pcrpp::solvers::{best_of_many, exact_oracle, pctsp_reduction, DeskPctsp, SolverConfig};
use pcrpp::splitoff::{apply_threshold_split, SplitConfig, ThresholdSplit};
use pcrpp::treedecomp::{edge_profit_decomposition, DecompConfig, SharedTrace, TreeDistribution};
use pcrpp::Instance;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const SUITE: u64 = 200;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

struct Solved {
    seed: u64,
    pg: PreprocessedGraph,
    lp: LpSolution,
}

fn suite() -> Vec<(Instance, Solved)> {
    (0..SUITE)
        .map(|seed| {
            let inst = common::small(seed);
            let pg = PreprocessedGraph::build(&inst);
            let (lp, _) = solve_pcrpp_lp(&pg).expect("relaxation solves");
            (inst, Solved { seed, pg, lp })
        })
        .collect()
}

fn deltas(y: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = y[1..].iter().copied().filter(|&v| v > 0.0).collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

fn sandwich() -> Outcome {
    let mut worst: f64 = 1.0;
    for seed in 0..SUITE {
        let inst = common::small(seed);
        let alg = best_of_many(&inst, &SolverConfig::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let opt = exact_oracle(&inst, 12).map_err(|e| format!("seed {seed}: {e}"))?.value;
        let lp = alg.lower_bound.ok_or("no lower bound")?;
        ensure(lp <= opt + 1e-6 && opt <= alg.value + 1e-9 && alg.value <= 1.6 * lp + 1e-6, || {
            format!("seed {seed}: LP {lp} OPT {opt} ALG {}", alg.value)
        })?;
        if opt > 0.0 {
            worst = worst.max(alg.value / opt);
        }
    }
    Ok(format!("{SUITE} instances, worst ALG/OPT {worst:.4}"))
}

fn barrier() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for eps in [0.1, 0.01] {
        let inst = common::barrier(eps);
        let want = 1.0 + 3.0 * eps;
        let alg = best_of_many(&inst, &SolverConfig::default()).map_err(|e| e.to_string())?.value;
        let opt = exact_oracle(&inst, 12).map_err(|e| e.to_string())?.value;
        let red = pctsp_reduction(&inst, &DeskPctsp::default()).map_err(|e| e.to_string())?.value;
        ensure((alg - want).abs() < 1e-12 && (opt - want).abs() < 1e-12, || format!("eps {eps}: ALG {alg} OPT {opt}"))?;
        ensure((red - (2.0 + eps)).abs() < 1e-12, || format!("eps {eps}: RED {red}"))?;
        notes.push(format!("eps {eps}: RED/OPT {:.4}", red / opt));
        if eps == 0.01 {
            ensure(red / opt >= 1.94, || format!("ratio {} below 1.94", red / opt))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.2}s"))?;
    Ok(format!("{}, {secs:.3}s", notes.join(", ")))
}

fn check_distribution(pg: &PreprocessedGraph, x: &[f64], y: &[f64], d: &TreeDistribution) -> Result<(), String> {
    let n = pg.vertex_count();
    let (vm, em) = common::marginals(d, n);
    let mass: f64 = d.lambda.iter().sum();
    ensure((mass - 1.0).abs() <= 1e-6, || format!("mass {mass}"))?;
    for v in 0..n {
        ensure((vm[v] - y[v]).abs() <= 1e-6, || format!("vertex {v}: {} vs {}", vm[v], y[v]))?;
    }
    for &e in pg.positive_edges() {
        let (a, b) = pg.endpoints(e);
        let got = em.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0);
        ensure((got - x[e]).abs() <= 1e-6, || format!("edge {e}: {got} vs {}", x[e]))?;
    }
    for t in &d.trees {
        ensure(common::is_rooted_tree(t, 0) && common::coupled(t, pg), || format!("tree {:?}", t.edges))?;
    }
    let expected: f64 = d
        .trees
        .iter()
        .zip(&d.lambda)
        .map(|(t, l)| l * t.edges.iter().map(|&(a, b)| pg.length(pg.index(a, b))).sum::<f64>())
        .sum();
    let bound: f64 = (0..pg.edge_count()).map(|e| pg.length(e) * x[e]).sum();
    ensure(expected <= bound + 1e-6, || format!("E[w(T)] {expected} above {bound}"))
}

fn split(s: &Solved, delta: f64) -> Result<ThresholdSplit, String> {
    apply_threshold_split(&s.pg, &s.lp.x, &s.lp.y, delta, &SplitConfig::default()).map_err(|e| format!("seed {}: {e}", s.seed))
}

fn decomposition(suite: &[(Instance, Solved)]) -> Outcome {
    let mut checked = 0;
    for (_, s) in suite {
        let shared = SharedTrace::new(&s.pg, &s.lp.x, &s.lp.y, &SplitConfig::default()).map_err(|e| e.to_string())?;
        for delta in deltas(&s.lp.y) {
            let t = split(s, delta)?;
            let per = edge_profit_decomposition(&s.pg, &t.x, &t.y, &DecompConfig::default()).map_err(|e| e.to_string())?;
            let rep = shared.distribution(&s.pg, delta).map_err(|e| e.to_string())?;
            for d in [&per, &rep] {
                check_distribution(&s.pg, &t.x, &t.y, d).map_err(|e| format!("seed {} delta {delta}: {e}", s.seed))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} distributions"))
}

fn lemma4(suite: &[(Instance, Solved)]) -> Outcome {
    let mut checked = 0;
    for (_, s) in suite {
        let (pg, x, y) = (&s.pg, &s.lp.x, &s.lp.y);
        let mut ds = deltas(y);
        ds.push(1.5);
        for delta in ds {
            let t = split(s, delta)?;
            let fail = |what: String| format!("seed {} delta {delta}: {what}", s.seed);
            pcrpp::lp::check_feasibility(pg, &t.x, &t.y, 1e-6).map_err(fail)?;
            if pg.vertex_count() <= 16 {
                common::all_cuts_hold(pg, &t.x, &t.y, 1e-6).map_err(fail)?;
            }
            for v in 1..pg.vertex_count() {
                let want = if y[v] < delta { 0.0 } else { y[v] };
                ensure((t.y[v] - want).abs() <= 1e-6, || fail(format!("y at {v}")))?;
                if y[v] < delta {
                    let deg: f64 = (0..pg.vertex_count()).filter(|&u| u != v).map(|u| t.x[pg.index(u, v)]).sum();
                    ensure(deg <= 1e-6, || fail(format!("degree {deg} at {v}")))?;
                }
            }
            for &e in pg.positive_edges() {
                let want = if x[e] < delta { 0.0 } else { x[e] };
                ensure((t.x[e] - want).abs() <= 1e-6, || fail(format!("positive edge {e}")))?;
            }
            let len = |v: &[f64]| (0..pg.edge_count()).map(|e| pg.length(e) * v[e]).sum::<f64>();
            ensure(len(&t.x) <= len(x) + 1e-6, || fail("length grew".into()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} threshold splits"))
}

fn tjoin() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut feasible = 0;
    for trial in 0..200 {
        let n = rng.random_range(2..=6usize);
        let m = rng.random_range(1..=8usize);
        let edges: Vec<(usize, usize, f64)> = (0..m)
            .map(|_| {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                (a, b, rng.random_range(0..=10u32) as f64)
            })
            .collect();
        let mut q: BTreeSet<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if q.len() % 2 == 1 {
            let last = *q.iter().next_back().unwrap();
            q.remove(&last);
        }
        match (min_tjoin(n, &edges, &q), common::brute_tjoin(n, &edges, &q)) {
            (Ok(j), Some(b)) => {
                ensure(j.length == b, || format!("trial {trial}: {} vs {b}", j.length))?;
                feasible += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("trial {trial}: {got:?} vs {want:?}")),
        }
    }
    Ok(format!("200 graphs, {feasible} with a join"))
}

fn ratio() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pcrpp")).args(["verify-ratio", "--step", "1e-8"]).output().map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let kv: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once('=')).collect();
    let num = |k: &str| -> Result<f64, String> { kv.get(k).ok_or(format!("{k} missing"))?.parse().map_err(|_| format!("{k} unparsable")) };
    let (bound, argmax, g, invgap) = (num("certified_bound")?, num("argmax")?, num("g")?, num("invgap")?);
    ensure(bound < 1.598_722_06, || format!("certified bound {bound}"))?;
    ensure((argmax - 0.948_179_79).abs() <= 1e-4, || format!("argmax {argmax}"))?;
    ensure(g < 1.598_622_55 && invgap < 1.577_809_82, || format!("g {g} invgap {invgap}"))?;
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("certified {bound:.10} at {argmax:.8}, {secs:.1}s"))
}

fn golden() -> Outcome {
    let delta = (3.0 - 5f64.sqrt()) / 2.0;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let terms = alpha_terms(delta, 1.0);
    let err = terms.iter().map(|t| (t - phi).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-12, || format!("error {err:e}"))?;
    Ok(format!("max error {err:.1e}"))
}

fn shared_trace(suite: &[(Instance, Solved)]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, s) in &suite[..50] {
        let shared = SharedTrace::new(&s.pg, &s.lp.x, &s.lp.y, &SplitConfig::default()).map_err(|e| e.to_string())?;
        for delta in deltas(&s.lp.y) {
            let t = split(s, delta)?;
            let per = edge_profit_decomposition(&s.pg, &t.x, &t.y, &DecompConfig::default()).map_err(|e| e.to_string())?;
            let rep = shared.distribution(&s.pg, delta).map_err(|e| e.to_string())?;
            let n = s.pg.vertex_count();
            let ((pv, pe), (rv, re)) = (common::marginals(&per, n), common::marginals(&rep, n));
            for v in 0..n {
                worst = worst.max((pv[v] - rv[v]).abs());
            }
            for &e in s.pg.positive_edges() {
                let (a, b) = s.pg.endpoints(e);
                let k = (a.min(b), a.max(b));
                worst = worst.max((pe.get(&k).unwrap_or(&0.0) - re.get(&k).unwrap_or(&0.0)).abs());
            }
            ensure(worst <= 1e-9, || format!("seed {} delta {delta}: difference {worst:e}", s.seed))?;
        }
    }
    Ok(format!("50 instances, max difference {worst:.1e}"))
}

fn bench() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for seed in 0..30u64 {
        let inst = common::small(seed + 1000);
        let opt = exact_oracle(&inst, 12).map_err(|e| e.to_string())?.value;
        let inst = inst.clone().with_opt_max(Some(inst.total_profit() - opt));
        let path = dir.path().join(format!("{}{seed}.dat", ["alb", "grid"][seed as usize % 2]));
        std::fs::write(&path, inst.to_text()).map_err(|e| e.to_string())?;
        files.push(path);
    }
    let records = run_bench(&files, &BenchConfig::default());
    for r in &records {
        ensure(r.error.is_none(), || format!("{}: {:?}", r.name, r.error))?;
        ensure(r.alg_gap.is_none_or(|g| g >= -1e-6), || format!("{}: ALG gap {:?}", r.name, r.alg_gap))?;
        ensure(r.lp_gap.is_none_or(|g| g >= -1e-6), || format!("{}: LP gap {:?}", r.name, r.lp_gap))?;
    }
    let parsed = from_csv(&to_csv(&records).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let summary = summarize(&records);
    for s in &summary {
        let rows: Vec<&BenchRecord> = parsed
            .iter()
            .filter(|r| s.family == "ALL" || r.name.to_ascii_uppercase().starts_with(&s.family))
            .collect();
        let gaps: Vec<f64> = rows.iter().filter_map(|r| r.alg_gap).collect();
        let avg = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
        let max = gaps.iter().copied().reduce(f64::max);
        let lps: Vec<f64> = rows.iter().filter_map(|r| r.lp_gap).collect();
        let lp_avg = (!lps.is_empty()).then(|| lps.iter().sum::<f64>() / lps.len() as f64);
        ensure(s.instances == rows.len() && s.avg_alg_gap == avg && s.max_alg_gap == max && s.avg_lp_gap == lp_avg, || {
            format!("family {} disagrees with its rows", s.family)
        })?;
    }
    let all = summary.last().ok_or("empty summary")?;
    Ok(format!("30 instances, avg ALG gap {:.3}%, max {:.3}%", all.avg_alg_gap.unwrap_or(0.0), all.max_alg_gap.unwrap_or(0.0)))
}

fn main() -> ExitCode {
    let suite = suite();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("sandwich", Box::new(sandwich)),
        ("barrier regression", Box::new(barrier)),
        ("tree decomposition contract", Box::new(|| decomposition(&suite))),
        ("threshold split contract", Box::new(|| lemma4(&suite))),
        ("T-join oracle equivalence", Box::new(tjoin)),
        ("ratio certificate", Box::new(ratio)),
        ("golden ratio identity", Box::new(golden)),
        ("shared trace equivalence", Box::new(|| shared_trace(&suite))),
        ("benchmark gaps and summary", Box::new(bench)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| check())).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name:<30} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<30} {why}");
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
