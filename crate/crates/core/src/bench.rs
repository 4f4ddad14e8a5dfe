//! Benchmark records, gap conversion and CSV reporting.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{parse_instance, Instance};
use crate::solvers::{best_of_many, exact_oracle, pctsp_reduction, DeskPctsp, SolverConfig};

const TIE_TOL: f64 = 1e-9;
const OPT_FLOOR: f64 = 1e-12;

/// Minimization optimum from a published maximization optimum, counting
/// every edge of the file including those outside the root component.
pub fn convert_optimum(inst: &Instance, opt_max: f64) -> f64 {
    inst.total_profit() + inst.dropped_profit() - opt_max
}

/// Percentage gap `100 (value − opt) / opt`, undefined when `opt` is zero.
pub fn gap(value: f64, opt: f64) -> Option<f64> {
    (opt.abs() > OPT_FLOOR).then(|| 100.0 * (value - opt) / opt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Better {
    #[serde(rename = "ALG")]
    Alg,
    #[serde(rename = "RED")]
    Red,
    #[serde(rename = "tie")]
    Tie,
}

/// One row of the report. Values are on the whole input file, so the
/// profit of unreachable edges is included everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub opt: Option<f64>,
    pub alg: Option<f64>,
    pub red: Option<f64>,
    pub opt_lp: Option<f64>,
    pub alg_gap: Option<f64>,
    pub red_gap: Option<f64>,
    pub lp_gap: Option<f64>,
    pub time_lp: f64,
    pub time_split: f64,
    pub time_other: f64,
    pub time_red: f64,
    pub better: Option<Better>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub solver: SolverConfig,
    pub pctsp: DeskPctsp,
    pub oracle_cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { solver: SolverConfig::default(), pctsp: DeskPctsp { cap: 12, fallback: true }, oracle_cap: 12 }
    }
}

fn round6(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 { 0.0 } else { r }
}

impl BenchRecord {
    fn empty(name: String) -> Self {
        BenchRecord {
            name,
            vertices: 0,
            edges: 0,
            opt: None,
            alg: None,
            red: None,
            opt_lp: None,
            alg_gap: None,
            red_gap: None,
            lp_gap: None,
            time_lp: 0.0,
            time_split: 0.0,
            time_other: 0.0,
            time_red: 0.0,
            better: None,
            error: None,
        }
    }

    /// The record as printed, every real rounded to six decimals.
    pub fn rounded(&self) -> Self {
        let r = |v: Option<f64>| v.map(round6);
        let mut out = self.clone();
        out.opt = r(self.opt);
        out.alg = r(self.alg);
        out.red = r(self.red);
        out.opt_lp = r(self.opt_lp);
        out.alg_gap = r(self.alg_gap);
        out.red_gap = r(self.red_gap);
        out.lp_gap = r(self.lp_gap);
        out.time_lp = round6(self.time_lp);
        out.time_split = round6(self.time_split);
        out.time_other = round6(self.time_other);
        out.time_red = round6(self.time_red);
        out
    }
}

/// Solves one instance with both algorithms and fills in the gaps.
pub fn bench_instance(name: &str, inst: &Instance, cfg: &BenchConfig) -> BenchRecord {
    let mut rec = BenchRecord::empty(name.to_string());
    rec.vertices = inst.vertex_count();
    rec.edges = inst.edges().len() + inst.dropped_edges().len();
    let shift = inst.dropped_profit();
    let mut errors = Vec::new();
    match best_of_many(inst, &cfg.solver) {
        Ok(s) => {
            rec.alg = Some(s.value + shift);
            rec.opt_lp = s.lower_bound.map(|lb| lb + shift);
            rec.time_lp = s.stats.times.lp;
            rec.time_split = s.stats.times.split;
            rec.time_other = s.stats.times.other;
        }
        Err(e) => errors.push(format!("ALG: {e}")),
    }
    match pctsp_reduction(inst, &cfg.pctsp) {
        Ok(s) => {
            rec.red = Some(s.value + shift);
            rec.time_red = s.stats.times.other;
        }
        Err(e) => errors.push(format!("RED: {e}")),
    }
    rec.opt = match inst.opt_max() {
        Some(m) => Some(convert_optimum(inst, m)),
        None if inst.edges().len() <= cfg.oracle_cap => match exact_oracle(inst, cfg.oracle_cap) {
            Ok(s) => Some(s.value + shift),
            Err(e) => {
                errors.push(format!("OPT: {e}"));
                None
            }
        },
        None => None,
    };
    if let Some(opt) = rec.opt {
        rec.alg_gap = rec.alg.and_then(|v| gap(v, opt));
        rec.red_gap = rec.red.and_then(|v| gap(v, opt));
        rec.lp_gap = rec.opt_lp.and_then(|lp| gap(lp, opt)).map(|g| -g);
    }
    if let (Some(a), Some(r)) = (rec.alg, rec.red) {
        let tol = TIE_TOL * (1.0 + a.abs().max(r.abs()));
        rec.better = Some(if a < r - tol {
            Better::Alg
        } else if r < a - tol {
            Better::Red
        } else {
            Better::Tie
        });
    }
    if !errors.is_empty() {
        rec.error = Some(errors.join("; "));
    }
    rec
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Runs every file concurrently; records come back in input order.
pub fn run_bench(files: &[PathBuf], cfg: &BenchConfig) -> Vec<BenchRecord> {
    files
        .par_iter()
        .map(|path| {
            let name = instance_name(path);
            let parsed = std::fs::read_to_string(path)
                .map_err(Error::from)
                .and_then(|text| parse_instance(&text).map_err(Error::from));
            match parsed {
                Ok(inst) => bench_instance(&name, &inst, cfg),
                Err(e) => BenchRecord { error: Some(e.to_string()), ..BenchRecord::empty(name) },
            }
        })
        .collect()
}

pub const CSV_HEADER: [&str; 16] = [
    "name",
    "vertices",
    "edges",
    "opt",
    "alg",
    "red",
    "opt_lp",
    "alg_gap",
    "red_gap",
    "lp_gap",
    "time_lp",
    "time_split",
    "time_other",
    "time_red",
    "better",
    "error",
];

/// CSV with six decimals on every real column.
pub fn to_csv(records: &[BenchRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    let f = |v: Option<f64>| v.map(|x| format!("{:.6}", round6(x))).unwrap_or_default();
    for r in records {
        let better = match r.better {
            Some(Better::Alg) => "ALG",
            Some(Better::Red) => "RED",
            Some(Better::Tie) => "tie",
            None => "",
        };
        w.write_record([
            r.name.clone(),
            r.vertices.to_string(),
            r.edges.to_string(),
            f(r.opt),
            f(r.alg),
            f(r.red),
            f(r.opt_lp),
            f(r.alg_gap),
            f(r.red_gap),
            f(r.lp_gap),
            f(Some(r.time_lp)),
            f(Some(r.time_split)),
            f(Some(r.time_other)),
            f(Some(r.time_red)),
            better.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.deserialize().map(|r| r.map_err(|e| Error::Io(e.to_string()))).collect()
}

/// Leading letters of an instance name, upper-cased.
pub fn family(name: &str) -> String {
    let f: String = name.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    if f.is_empty() { "OTHER".into() } else { f.to_ascii_uppercase() }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: String,
    pub instances: usize,
    pub failures: usize,
    pub avg_alg_gap: Option<f64>,
    pub max_alg_gap: Option<f64>,
    pub avg_red_gap: Option<f64>,
    pub max_red_gap: Option<f64>,
    pub avg_lp_gap: Option<f64>,
    pub max_lp_gap: Option<f64>,
    pub optimal: usize,
    pub alg_better: usize,
    pub red_better: usize,
    pub ties: usize,
    pub avg_time_alg: f64,
    pub avg_time_lp: f64,
    pub avg_time_split: f64,
    pub avg_time_other: f64,
    pub avg_time_red: f64,
}

fn avg_max(values: impl Iterator<Item = f64>) -> (Option<f64>, Option<f64>) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (None, None);
    }
    let avg = v.iter().sum::<f64>() / v.len() as f64;
    (Some(avg), v.iter().copied().reduce(f64::max))
}

fn summarize_group(family: String, rows: &[&BenchRecord]) -> FamilySummary {
    let n = rows.len();
    let (avg_alg_gap, max_alg_gap) = avg_max(rows.iter().filter_map(|r| r.alg_gap));
    let (avg_red_gap, max_red_gap) = avg_max(rows.iter().filter_map(|r| r.red_gap));
    let (avg_lp_gap, max_lp_gap) = avg_max(rows.iter().filter_map(|r| r.lp_gap));
    let mean = |f: &dyn Fn(&BenchRecord) -> f64| if n == 0 { 0.0 } else { rows.iter().map(|r| f(r)).sum::<f64>() / n as f64 };
    let count = |b: Better| rows.iter().filter(|r| r.better == Some(b)).count();
    FamilySummary {
        family,
        instances: n,
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        avg_alg_gap,
        max_alg_gap,
        avg_red_gap,
        max_red_gap,
        avg_lp_gap,
        max_lp_gap,
        optimal: rows.iter().filter(|r| r.alg_gap.is_some_and(|g| g.abs() <= 1e-6)).count(),
        alg_better: count(Better::Alg),
        red_better: count(Better::Red),
        ties: count(Better::Tie),
        avg_time_alg: mean(&|r| r.time_lp + r.time_split + r.time_other),
        avg_time_lp: mean(&|r| r.time_lp),
        avg_time_split: mean(&|r| r.time_split),
        avg_time_other: mean(&|r| r.time_other),
        avg_time_red: mean(&|r| r.time_red),
    }
}

/// Per-family rows followed by an `ALL` row, computed from the rounded
/// records so the summary can be reproduced from the CSV alone.
pub fn summarize(records: &[BenchRecord]) -> Vec<FamilySummary> {
    let rounded: Vec<BenchRecord> = records.iter().map(BenchRecord::rounded).collect();
    let mut groups: BTreeMap<String, Vec<&BenchRecord>> = BTreeMap::new();
    for r in &rounded {
        groups.entry(family(&r.name)).or_default().push(r);
    }
    let mut out: Vec<FamilySummary> = groups.into_iter().map(|(f, rows)| summarize_group(f, &rows)).collect();
    let all: Vec<&BenchRecord> = rounded.iter().collect();
    out.push(summarize_group("ALL".into(), &all));
    out
}

pub fn summary_table(summary: &[FamilySummary]) -> String {
    let f = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    let mut s = format!(
        "{:<10} {:>4} {:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>4} {:>4} {:>4} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "family", "n", "fail", "avgALG%", "maxALG%", "avgRED%", "maxRED%", "avgLP%", "maxLP%", "ALG", "RED", "tie",
        "t_alg", "t_lp", "t_split", "t_other", "t_red"
    );
    for r in summary {
        s.push_str(&format!(
            "{:<10} {:>4} {:>4} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>4} {:>4} {:>4} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}\n",
            r.family,
            r.instances,
            r.failures,
            f(r.avg_alg_gap),
            f(r.max_alg_gap),
            f(r.avg_red_gap),
            f(r.max_red_gap),
            f(r.avg_lp_gap),
            f(r.max_lp_gap),
            r.alg_better,
            r.red_better,
            r.ties,
            r.avg_time_alg,
            r.avg_time_lp,
            r.avg_time_split,
            r.avg_time_other,
            r.avg_time_red
        ));
    }
    s
}
