use rayon::prelude::*;

use super::{DenseSimplex, LinearProgram, LpBackend, Row, Sense};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::preprocess::PreprocessedGraph;

const RETIRE_SLACK: f64 = 1e-6;
const RETIRE_AFTER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpConfig {
    pub feasibility_tol: f64,
    pub pricing_tol: f64,
    pub snap_tol: f64,
    pub max_rounds: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig { feasibility_tol: 1e-7, pricing_tol: 1e-7, snap_tol: 1e-6, max_rounds: 10_000 }
    }
}

/// A cut `x(δ(S)) ≥ 2 y_witness` with its slack when it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub set: Vec<usize>,
    pub witness: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutCertificate {
    pub cuts: Vec<Cut>,
}

/// Optimal point of the relaxation; `x` is indexed by Ĝ edge id and `y` by
/// Ĝ vertex, with `y[root] = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub rounds: usize,
    pub columns: usize,
    pub program: LinearProgram,
}

/// `Σ ŵ x + Σ_{Ê⁺} p̂ (1 - x)`.
pub fn lp_solution_objective(pg: &PreprocessedGraph, x: &[f64]) -> f64 {
    let mut value: f64 = (0..pg.edge_count()).filter(|&e| x[e] != 0.0).map(|e| pg.length(e) * x[e]).sum();
    for &e in pg.positive_edges() {
        value += pg.profit(e) * (1.0 - x[e]);
    }
    value + 0.0
}

pub fn solve_pcrpp_lp(pg: &PreprocessedGraph) -> Result<(LpSolution, CutCertificate)> {
    solve_pcrpp_lp_with(pg, &LpConfig::default(), &DenseSimplex::default())
}

struct Model<'a> {
    pg: &'a PreprocessedGraph,
    active: Vec<usize>,
    is_active: Vec<bool>,
    cuts: Vec<(Vec<bool>, usize)>,
    idle: Vec<usize>,
}

struct RowLayout {
    degree: Vec<usize>,
    root: usize,
    cut_start: usize,
}

impl Model<'_> {
    /// Drops cuts that have stayed slack for several consecutive rounds.
    fn retire_slack_cuts(&mut self, x: &[f64], y: &[f64]) {
        let pg = self.pg;
        let mut k = 0;
        while k < self.cuts.len() {
            let (side, w) = &self.cuts[k];
            let crossing: f64 = self
                .active
                .iter()
                .filter(|&&e| {
                    let (a, b) = pg.endpoints(e);
                    side[a] != side[b]
                })
                .map(|&e| x[e])
                .sum();
            if crossing - 2.0 * y[*w] > RETIRE_SLACK {
                self.idle[k] += 1;
            } else {
                self.idle[k] = 0;
            }
            if self.idle[k] >= RETIRE_AFTER {
                self.cuts.swap_remove(k);
                self.idle.swap_remove(k);
            } else {
                k += 1;
            }
        }
    }

    fn y_col(&self, v: usize) -> usize {
        self.active.len() + v - 1
    }

    fn build(&self) -> (LinearProgram, RowLayout) {
        let pg = self.pg;
        let n = pg.vertex_count();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut objective = Vec::with_capacity(self.active.len() + n - 1);
        let mut names = Vec::with_capacity(objective.capacity());
        for (j, &e) in self.active.iter().enumerate() {
            let (u, v) = pg.endpoints(e);
            incident[u].push(j);
            incident[v].push(j);
            objective.push(pg.length(e) - pg.profit(e));
            names.push(format!("x_{}_{}", u, v));
        }
        for v in 1..n {
            objective.push(0.0);
            names.push(format!("y_{v}"));
        }
        let mut rows = Vec::new();
        let mut degree = vec![usize::MAX; n];
        for v in 1..n {
            let mut coefs: Vec<(usize, f64)> = incident[v].iter().map(|&j| (j, 1.0)).collect();
            coefs.push((self.y_col(v), -2.0));
            degree[v] = rows.len();
            rows.push(Row::new(coefs, Sense::Eq, 0.0).named(format!("deg_{v}")));
        }
        let root = rows.len();
        rows.push(Row::new(incident[0].iter().map(|&j| (j, 1.0)).collect(), Sense::Le, 2.0).named("root"));
        for &e in pg.positive_edges() {
            let j = self.active.iter().position(|&a| a == e).expect("positive edges are always active");
            let (u, v) = pg.endpoints(e);
            for w in [u, v] {
                rows.push(
                    Row::new(vec![(self.y_col(w), 1.0), (j, -1.0)], Sense::Eq, 0.0).named(format!("couple_{w}_{e}")),
                );
            }
        }
        for v in 1..n {
            rows.push(Row::new(vec![(self.y_col(v), 1.0)], Sense::Le, 1.0).named(format!("ub_{v}")));
        }
        let cut_start = rows.len();
        for (k, (side, w)) in self.cuts.iter().enumerate() {
            let mut coefs: Vec<(usize, f64)> = self
                .active
                .iter()
                .enumerate()
                .filter(|&(_, &e)| {
                    let (a, b) = pg.endpoints(e);
                    side[a] != side[b]
                })
                .map(|(j, _)| (j, 1.0))
                .collect();
            coefs.push((self.y_col(*w), -2.0));
            rows.push(Row::new(coefs, Sense::Ge, 0.0).named(format!("cut_{k}")));
        }
        let mut lp = LinearProgram::new(objective, rows);
        lp.names = names;
        lp.constant = pg.total_profit();
        (lp, RowLayout { degree, root, cut_start })
    }
}

/// Cutting-plane and column-generation loop.
pub fn solve_pcrpp_lp_with(
    pg: &PreprocessedGraph,
    cfg: &LpConfig,
    backend: &dyn LpBackend,
) -> Result<(LpSolution, CutCertificate)> {
    let n = pg.vertex_count();
    let edges = pg.edge_count();
    let mut is_active = vec![false; edges];
    let mut active = Vec::new();
    let mut activate = |e: usize, active: &mut Vec<usize>| {
        if !is_active[e] {
            is_active[e] = true;
            active.push(e);
        }
    };
    for &e in pg.positive_edges() {
        activate(e, &mut active);
    }
    for v in 1..n {
        activate(pg.index(0, v), &mut active);
    }
    for &e in pg.tether_pairs() {
        activate(e, &mut active);
    }
    let mut model = Model { pg, active, is_active, cuts: Vec::new(), idle: Vec::new() };
    let mut certificate = CutCertificate::default();
    let price_limit = (2 * n).max(20);
    for round in 1..=cfg.max_rounds {
        let (lp, layout) = model.build();
        let res = backend.solve(&lp)?;
        let mut x = vec![0.0; edges];
        for (j, &e) in model.active.iter().enumerate() {
            x[e] = res.x[j].max(0.0);
        }
        let mut y = vec![1.0; n];
        for v in 1..n {
            y[v] = res.x[model.y_col(v)].max(0.0);
        }

        let mut priced: Vec<(f64, usize)> = (0..edges)
            .into_par_iter()
            .filter(|&e| !model.is_active[e])
            .filter_map(|e| {
                let (a, b) = pg.endpoints(e);
                let mut dual = res.duals[layout.degree[b]];
                dual += if a == 0 { res.duals[layout.root] } else { res.duals[layout.degree[a]] };
                for (k, (side, _)) in model.cuts.iter().enumerate() {
                    if side[a] != side[b] {
                        dual += res.duals[layout.cut_start + k];
                    }
                }
                let rc = pg.length(e) - dual;
                (rc < -cfg.pricing_tol).then_some((rc, e))
            })
            .collect();
        priced.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        priced.truncate(price_limit);

        let violated = separate_cuts(pg, &x, &y, cfg.feasibility_tol);
        if priced.is_empty() && violated.is_empty() {
            let (x, y) = snap(pg, x, y, cfg.snap_tol);
            let objective = lp_solution_objective(pg, &x);
            let columns = model.active.len();
            return Ok((LpSolution { x, y, objective, rounds: round, columns, program: lp }, certificate));
        }
        for (_, e) in priced {
            model.is_active[e] = true;
            model.active.push(e);
        }
        model.retire_slack_cuts(&x, &y);
        for cut in distinct_sets(violated) {
            let mut side = vec![false; n];
            cut.set.iter().for_each(|&v| side[v] = true);
            if !model.cuts.iter().any(|(s, w)| *w == cut.witness && *s == side) {
                model.cuts.push((side, cut.witness));
                model.idle.push(0);
                certificate.cuts.push(cut);
            }
        }
    }
    Err(Error::LpNonConvergence(cfg.max_rounds))
}

/// Keeps the most violated witness for each vertex set.
fn distinct_sets(mut cuts: Vec<Cut>) -> Vec<Cut> {
    cuts.sort_by(|a, b| a.set.cmp(&b.set).then(a.slack.total_cmp(&b.slack)).then(a.witness.cmp(&b.witness)));
    cuts.dedup_by(|later, first| later.set == first.set);
    cuts
}

fn snap(pg: &PreprocessedGraph, mut x: Vec<f64>, mut y: Vec<f64>, tol: f64) -> (Vec<f64>, Vec<f64>) {
    let snap_to = |v: &mut f64, targets: &[f64]| {
        for &t in targets {
            if (*v - t).abs() <= tol {
                *v = t;
            }
        }
    };
    x.iter_mut().for_each(|v| snap_to(v, &[0.0, 1.0, 2.0]));
    y.iter_mut().for_each(|v| snap_to(v, &[0.0, 1.0]));
    for &e in pg.positive_edges() {
        let (u, v) = pg.endpoints(e);
        y[u] = x[e];
        y[v] = x[e];
    }
    y[0] = 1.0;
    (x, y)
}

/// Support network of `x` over Ĝ.
pub(crate) fn support_network(pg: &PreprocessedGraph, x: &[f64]) -> FlowNetwork {
    FlowNetwork::from_edges(
        pg.vertex_count(),
        (0..pg.edge_count()).filter(|&e| x[e] > 0.0).map(|e| {
            let (u, v) = pg.endpoints(e);
            (u, v, x[e])
        }),
    )
}

/// Violated cut constraints found by a minimum `v`-root cut per vertex.
pub fn separate_cuts(pg: &PreprocessedGraph, x: &[f64], y: &[f64], tol: f64) -> Vec<Cut> {
    let n = pg.vertex_count();
    let net = support_network(pg, x);
    (1..n)
        .into_par_iter()
        .filter(|&v| y[v] > tol)
        .filter_map(|v| {
            let mut net = net.clone();
            let cut = net.min_cut(v, 0);
            let slack = cut.value - 2.0 * y[v];
            (slack < -tol).then(|| Cut { set: cut.members().into_iter().filter(|&u| u < n).collect(), witness: v, slack })
        })
        .collect()
}

/// Checks every constraint of the relaxation within `tol`.
pub fn check_feasibility(pg: &PreprocessedGraph, x: &[f64], y: &[f64], tol: f64) -> std::result::Result<(), String> {
    let n = pg.vertex_count();
    if (y[0] - 1.0).abs() > tol {
        return Err("root value differs from 1".into());
    }
    let mut degree = vec![0.0; n];
    for e in 0..pg.edge_count() {
        if x[e] < -tol {
            return Err(format!("negative x on edge {e}"));
        }
        let (u, v) = pg.endpoints(e);
        degree[u] += x[e];
        degree[v] += x[e];
    }
    for v in 1..n {
        if y[v] < -tol || y[v] > 1.0 + tol {
            return Err(format!("y out of bounds at {v}"));
        }
        if (degree[v] - 2.0 * y[v]).abs() > tol {
            return Err(format!("degree constraint violated at {v}: {} vs {}", degree[v], 2.0 * y[v]));
        }
    }
    if degree[0] > 2.0 + tol {
        return Err(format!("root degree {} exceeds 2", degree[0]));
    }
    for &e in pg.positive_edges() {
        let (u, v) = pg.endpoints(e);
        if (y[u] - x[e]).abs() > tol || (y[v] - x[e]).abs() > tol {
            return Err(format!("coupling violated on edge {e}"));
        }
    }
    if let Some(cut) = separate_cuts(pg, x, y, tol).first() {
        return Err(format!("cut violated at witness {} by {:.3e}", cut.witness, -cut.slack));
    }
    Ok(())
}
