//! Best-of-many, the PCTSP reduction baseline and the exhaustive oracle.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::candidates::{build_candidate, edge_profit_core, Candidate, Core, Provenance};
use crate::error::{Error, Result};
use crate::instance::{objective, Instance, Walk};
use crate::lp::{solve_pcrpp_lp_with, DenseSimplex, LpConfig};
use crate::multigraph::{euler_tour, Multigraph};
use crate::paths::{adjacency, shortest_paths, ShortestPaths};
use crate::preprocess::PreprocessedGraph;
use crate::splitoff::{apply_threshold_split, SplitConfig};
use crate::treedecomp::{edge_profit_decomposition, DecompConfig, SharedTrace, TreeDistribution};

const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub lp: f64,
    pub split: f64,
    pub other: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub thresholds: usize,
    pub trees: usize,
    /// `(T, γ)` pairs examined, before merging identical cores.
    pub pairs: usize,
    pub candidates: usize,
    pub best: Option<Provenance>,
    pub lp_rounds: usize,
    pub lp_columns: usize,
    /// False when a heuristic replaced an exact inner solver.
    pub exact: bool,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub walk: Walk,
    pub value: f64,
    pub lower_bound: Option<f64>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DecompositionMode {
    /// Split the lifted optimum once and replay per threshold.
    #[default]
    SharedTrace,
    /// Split and decompose from scratch for every threshold.
    PerThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lp: LpConfig,
    pub decomp: DecompConfig,
    pub mode: DecompositionMode,
    /// Fail when the result exceeds 1.6 times the LP bound.
    pub check_guarantee: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lp: LpConfig::default(),
            decomp: DecompConfig::default(),
            mode: DecompositionMode::default(),
            check_guarantee: true,
        }
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Trees for one threshold together with the split point on Ĝ.
struct Layer {
    delta: f64,
    dist: TreeDistribution,
    x: Vec<f64>,
}

fn layers(pg: &PreprocessedGraph, x: &[f64], y: &[f64], deltas: &[f64], cfg: &SolverConfig) -> Result<Vec<Layer>> {
    let split: &SplitConfig = &cfg.decomp.split;
    match cfg.mode {
        DecompositionMode::PerThreshold => deltas
            .iter()
            .map(|&delta| {
                let s = apply_threshold_split(pg, x, y, delta, split)?;
                let dist = edge_profit_decomposition(pg, &s.x, &s.y, &cfg.decomp)?;
                Ok(Layer { delta, dist, x: s.x })
            })
            .collect(),
        DecompositionMode::SharedTrace => {
            let shared = SharedTrace::new(pg, x, y, split)?;
            deltas
                .iter()
                .map(|&delta| {
                    let dist = shared.distribution(pg, delta)?;
                    let (state, _) = shared.state_below(delta);
                    let mut xs = vec![0.0; pg.edge_count()];
                    for &e in pg.positive_edges() {
                        let (u, v) = pg.endpoints(e);
                        xs[e] = state.get(u, v);
                    }
                    Ok(Layer { delta, dist, x: xs })
                })
                .collect()
        }
    }
}

/// Lowest value first, then fewer traversed edges, then earlier provenance.
fn pick_best(cands: Vec<Candidate>) -> Candidate {
    let mut it = cands.into_iter();
    let mut best = it.next().expect("the trivial candidate is always present");
    for c in it {
        let tol = TIE_TOL * (1.0 + best.value.abs());
        if c.value < best.value - tol
            || (c.value <= best.value + tol && c.walk.edge_count() < best.walk.edge_count())
        {
            best = c;
        }
    }
    best
}

/// The best-of-many algorithm: every core of every decomposition tree at
/// every threshold becomes a candidate walk; the best one is returned.
pub fn best_of_many(inst: &Instance, cfg: &SolverConfig) -> Result<Solution> {
    let start = Instant::now();
    let pg = PreprocessedGraph::build(inst);
    let (sol, _) = solve_pcrpp_lp_with(&pg, &cfg.lp, &DenseSimplex::default())?;
    let lp_time = secs(start);

    let split_start = Instant::now();
    let mut deltas: Vec<f64> = sol.y[1..].iter().copied().filter(|&v| v > 0.0).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let layers = layers(&pg, &sol.x, &sol.y, &deltas, cfg)?;
    let split_time = secs(split_start);

    let other_start = Instant::now();
    let mut cores: BTreeMap<Core, usize> = BTreeMap::new();
    let mut grid: Vec<(Core, Provenance)> = vec![(Core::trivial(), Provenance::Trivial)];
    cores.insert(Core::trivial(), 0);
    let mut pairs = 0;
    let mut trees = 0;
    for layer in &layers {
        for (i, tree) in layer.dist.trees.iter().enumerate() {
            trees += 1;
            let mut gammas: Vec<f64> = tree
                .edges
                .iter()
                .map(|&(u, v)| pg.index(u, v))
                .filter(|&e| pg.is_positive(e))
                .map(|e| layer.x[e])
                .filter(|&g| g > 0.0)
                .collect();
            gammas.sort_by(|a, b| b.total_cmp(a));
            gammas.dedup();
            for gamma in gammas {
                pairs += 1;
                let core = edge_profit_core(tree, &pg, &layer.x, gamma);
                if !cores.contains_key(&core) {
                    cores.insert(core.clone(), grid.len());
                    grid.push((core, Provenance::Tree { delta: layer.delta, tree: i, gamma }));
                }
            }
        }
    }
    let built: Vec<Candidate> =
        grid.par_iter().map(|(core, prov)| build_candidate(inst, &pg, core, *prov)).collect::<Result<_>>()?;
    let count = built.len();
    let best = pick_best(built);
    if cfg.check_guarantee && best.value > 1.6 * sol.objective + 1e-6 {
        return Err(Error::Guarantee { value: best.value, lower_bound: sol.objective });
    }
    let stats = SolveStats {
        thresholds: deltas.len(),
        trees,
        pairs,
        candidates: count,
        best: Some(best.provenance),
        lp_rounds: sol.rounds,
        lp_columns: sol.columns,
        exact: true,
        times: PhaseTimes { lp: lp_time, split: split_time, other: secs(other_start) },
    };
    Ok(Solution { walk: best.walk, value: best.value, lower_bound: Some(sol.objective), stats })
}

/// Visiting order over representatives `1..=k` of a metric PCTSP instance
/// whose node `0` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PctspTour {
    pub visits: Vec<usize>,
    pub exact: bool,
}

pub trait PctspSolver: Sync {
    fn solve(&self, dist: &[Vec<f64>], penalties: &[f64]) -> Result<PctspTour>;
}

/// Exact subset-and-tour dynamic program, with an optional nearest-neighbour
/// fallback beyond the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeskPctsp {
    pub cap: usize,
    pub fallback: bool,
}

impl Default for DeskPctsp {
    fn default() -> Self {
        DeskPctsp { cap: 12, fallback: false }
    }
}

impl PctspSolver for DeskPctsp {
    fn solve(&self, dist: &[Vec<f64>], penalties: &[f64]) -> Result<PctspTour> {
        match pctsp_solve_exact(dist, penalties, self.cap) {
            Err(Error::CapExceeded { .. }) if self.fallback => Ok(pctsp_nearest_neighbour(dist, penalties)),
            other => other.map(|visits| PctspTour { visits, exact: true }),
        }
    }
}

/// Minimizes tour length plus skipped penalties over all subsets with a
/// Held-Karp table. `penalties[i]` belongs to node `i + 1`.
pub fn pctsp_solve_exact(dist: &[Vec<f64>], penalties: &[f64], cap: usize) -> Result<Vec<usize>> {
    let k = penalties.len();
    if k > cap {
        return Err(Error::CapExceeded { what: "PCTSP representatives", size: k, cap });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let full = 1usize << k;
    let mut dp = vec![f64::INFINITY; full * k];
    let mut from = vec![usize::MAX; full * k];
    for j in 0..k {
        dp[(1 << j) * k + j] = dist[0][j + 1];
    }
    for mask in 1..full {
        for last in 0..k {
            let cur = dp[mask * k + last];
            if mask & (1 << last) == 0 || !cur.is_finite() {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m2 = mask | (1 << next);
                let cand = cur + dist[last + 1][next + 1];
                if cand < dp[m2 * k + next] {
                    dp[m2 * k + next] = cand;
                    from[m2 * k + next] = last;
                }
            }
        }
    }
    let total: f64 = penalties.iter().sum();
    let mut best = (total, 0usize, usize::MAX);
    for mask in 1..full {
        let skipped: f64 = (0..k).filter(|&j| mask & (1 << j) == 0).map(|j| penalties[j]).sum();
        for last in 0..k {
            let len = dp[mask * k + last];
            if len.is_finite() {
                let cost = len + dist[last + 1][0] + skipped;
                if cost < best.0 {
                    best = (cost, mask, last);
                }
            }
        }
    }
    let (_, mut mask, mut last) = best;
    let mut order = Vec::new();
    while mask != 0 {
        order.push(last + 1);
        let prev = from[mask * k + last];
        mask &= !(1 << last);
        last = prev;
    }
    order.reverse();
    Ok(order)
}

/// Greedy tour through every representative, then drops those whose
/// detour costs more than their penalty.
pub fn pctsp_nearest_neighbour(dist: &[Vec<f64>], penalties: &[f64]) -> PctspTour {
    let k = penalties.len();
    let mut left: Vec<usize> = (1..=k).collect();
    let mut tour = Vec::with_capacity(k);
    let mut cur = 0;
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by(|a, b| dist[cur][*a.1].total_cmp(&dist[cur][*b.1]).then(a.1.cmp(b.1)))
            .expect("nonempty");
        cur = left.remove(pos);
        tour.push(cur);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..tour.len() {
            let prev = if i == 0 { 0 } else { tour[i - 1] };
            let next = tour.get(i + 1).copied().unwrap_or(0);
            let v = tour[i];
            let saving = dist[prev][v] + dist[v][next] - dist[prev][next];
            if saving > penalties[v - 1] {
                tour.remove(i);
                changed = true;
                break;
            }
        }
    }
    PctspTour { visits: tour, exact: false }
}

/// The PCTSP reduction baseline: subdivide positive edges, solve PCTSP on
/// the midpoints and walk the chosen edges in tour order.
pub fn pctsp_reduction(inst: &Instance, pctsp: &dyn PctspSolver) -> Result<Solution> {
    let start = Instant::now();
    let n = inst.vertex_count();
    let root = inst.root();
    let positive: Vec<usize> = (0..inst.edges().len()).filter(|&i| inst.edge(i).profit > 0.0).collect();
    let mut sub = Vec::new();
    let mut mid = Vec::with_capacity(positive.len());
    for e in inst.edges() {
        if e.profit > 0.0 {
            let s = n + mid.len();
            mid.push(s);
            sub.push((e.u, s, e.length / 2.0));
            sub.push((s, e.v, e.length / 2.0));
        } else {
            sub.push((e.u, e.v, e.length));
        }
    }
    let sub_adj = adjacency(n + mid.len(), sub);
    let nodes: Vec<usize> = std::iter::once(root).chain(mid.iter().copied()).collect();
    let dist: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&s| {
            let sp = shortest_paths(&sub_adj, s);
            nodes.iter().map(|&t| sp.dist[t]).collect()
        })
        .collect();
    let penalties: Vec<f64> = positive.iter().map(|&i| inst.edge(i).profit).collect();
    let tour = pctsp.solve(&dist, &penalties)?;

    let adj = adjacency(n, inst.edges().iter().map(|e| (e.u, e.v, e.length)));
    let mut cache: BTreeMap<usize, ShortestPaths> = BTreeMap::new();
    let mut walk = vec![root];
    let mut cur = root;
    let mut go = |from: usize, to: usize, walk: &mut Vec<usize>| {
        let sp = cache.entry(from).or_insert_with(|| shortest_paths(&adj, from));
        walk.extend(sp.path_to(to).expect("connected").into_iter().skip(1));
    };
    for &r in &tour.visits {
        let e = inst.edge(positive[r - 1]);
        let sp = shortest_paths(&adj, cur);
        let (near, far) = if sp.dist[e.v] < sp.dist[e.u] { (e.v, e.u) } else { (e.u, e.v) };
        go(cur, near, &mut walk);
        walk.push(far);
        cur = far;
    }
    go(cur, root, &mut walk);
    let walk = Walk { vertices: walk };
    let value = objective(inst, &walk)?;
    let stats = SolveStats {
        candidates: 1,
        exact: tour.exact,
        times: PhaseTimes { other: secs(start), ..PhaseTimes::default() },
        ..SolveStats::default()
    };
    Ok(Solution { walk, value, lower_bound: None, stats })
}

/// Exhaustive search over `x ∈ {0,1,2}^E` with even degrees and a support
/// connected to the root.
pub fn exact_oracle(inst: &Instance, cap: usize) -> Result<Solution> {
    let start = Instant::now();
    let edges = inst.edges();
    let m = edges.len();
    if m > cap {
        return Err(Error::CapExceeded { what: "oracle edges", size: m, cap });
    }
    let n = inst.vertex_count();
    let root = inst.root();
    let mut x = vec![0u8; m];
    let mut best: Option<(f64, Vec<u8>)> = None;
    loop {
        let mut parity = vec![false; n];
        let mut value = 0.0;
        for (e, &k) in edges.iter().zip(&x) {
            if k == 0 {
                value += e.profit;
            } else {
                value += k as f64 * e.length;
                if k == 1 {
                    parity[e.u] ^= true;
                    parity[e.v] ^= true;
                }
            }
        }
        let better = best.as_ref().is_none_or(|(b, _)| value < *b);
        if better && parity.iter().all(|&p| !p) && support_reaches_root(inst, &x) {
            best = Some((value, x.clone()));
        }
        if !increment(&mut x) {
            break;
        }
    }
    let (_, xs) = best.expect("the empty support is feasible");
    let mut g = Multigraph::new();
    for (e, &k) in edges.iter().zip(&xs) {
        g.add(e.u, e.v, k as usize);
    }
    let walk = if g.is_empty() { Walk::trivial(root) } else { euler_tour(&g, root)? };
    let value = objective(inst, &walk)?;
    let stats = SolveStats {
        candidates: 1,
        exact: true,
        times: PhaseTimes { other: secs(start), ..PhaseTimes::default() },
        ..SolveStats::default()
    };
    Ok(Solution { walk, value, lower_bound: None, stats })
}

fn increment(x: &mut [u8]) -> bool {
    for d in x.iter_mut() {
        if *d < 2 {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

fn support_reaches_root(inst: &Instance, x: &[u8]) -> bool {
    let n = inst.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for (e, &k) in inst.edges().iter().zip(x) {
        if k > 0 {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            parent[a] = b;
        }
    }
    let r = find(&mut parent, inst.root());
    inst.edges().iter().zip(x).filter(|(_, &k)| k > 0).all(|(e, _)| find(&mut parent, e.u) == r)
}
