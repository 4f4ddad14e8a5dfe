//! Fractional splitting-off that preserves root cuts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{Cut, FlowNetwork};
use crate::lp::check_feasibility;
use crate::preprocess::PreprocessedGraph;

/// Symmetric dense edge vector on a complete graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    n: usize,
    vals: Vec<f64>,
}

impl EdgeVector {
    pub fn new(n: usize) -> Self {
        EdgeVector { n, vals: vec![0.0; n * n] }
    }

    /// Copies a Ĝ vector into a graph with `n ≥ |V̂|` vertices.
    pub fn from_hat(pg: &PreprocessedGraph, x: &[f64], n: usize) -> Self {
        let mut ev = EdgeVector::new(n);
        for (e, &v) in x.iter().enumerate() {
            if v != 0.0 {
                let (a, b) = pg.endpoints(e);
                ev.set(a, b, v);
            }
        }
        ev
    }

    pub fn to_hat(&self, pg: &PreprocessedGraph) -> Vec<f64> {
        (0..pg.edge_count())
            .map(|e| {
                let (a, b) = pg.endpoints(e);
                self.get(a, b)
            })
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.vals[u * self.n + v]
    }

    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        debug_assert_ne!(u, v);
        self.vals[u * self.n + v] = value;
        self.vals[v * self.n + u] = value;
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.vals[v * self.n..(v + 1) * self.n].iter().sum()
    }

    /// Neighbors with positive value, by descending value then id.
    pub fn neighbors(&self, v: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> =
            (0..self.n).filter(|&u| u != v && self.get(v, u) > 0.0).map(|u| (u, self.get(v, u))).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Support edges `(u, v, value)` with `u < v`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| (u + 1..self.n).map(move |v| (u, v, self.get(u, v)))).filter(|e| e.2 > 0.0)
    }

    pub fn network(&self) -> FlowNetwork {
        FlowNetwork::from_edges(self.n, self.support())
    }

    pub fn min_cut(&self, s: usize, t: usize) -> Cut {
        let mut cut = self.network().min_cut(s, t);
        cut.source_side.truncate(self.n);
        cut
    }

    pub fn clear_vertex(&mut self, v: usize) {
        for u in 0..self.n {
            if u != v {
                self.set(u, v, 0.0);
            }
        }
    }

    pub fn weight(&self, mut len: impl FnMut(usize, usize) -> f64) -> f64 {
        self.support().map(|(u, v, x)| len(u, v) * x).sum()
    }
}

/// Moves `amount` from `vu` and `vw` onto `uw`. Without `w` the amount is
/// removed from `vu` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitOp {
    pub v: usize,
    pub u: usize,
    pub w: Option<usize>,
    pub amount: f64,
}

/// Operations in application order; each vertex in `order` is cleared after
/// its operations, dropping residual mass below the tolerance.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplitTrace {
    pub ops: Vec<SplitOp>,
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Smallest amount counted as progress.
    pub min_amount: f64,
    /// Degree below which the vertex counts as split.
    pub residual_tol: f64,
    pub max_ops_per_vertex: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { min_amount: 1e-10, residual_tol: 1e-9, max_ops_per_vertex: 100_000 }
    }
}

fn sub_clamped(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-12 {
        0.0
    } else {
        d
    }
}

pub fn apply_op(x: &mut EdgeVector, op: &SplitOp) {
    let SplitOp { v, u, w, amount } = *op;
    x.set(v, u, sub_clamped(x.get(v, u), amount));
    if let Some(w) = w {
        x.set(v, w, sub_clamped(x.get(v, w), amount));
        x.set(u, w, x.get(u, w) + amount);
    }
}

/// Re-applies a recorded trace.
pub fn replay(x: &mut EdgeVector, trace: &SplitTrace) {
    let mut k = 0;
    for &v in &trace.order {
        while k < trace.ops.len() && trace.ops[k].v == v {
            apply_op(x, &trace.ops[k]);
            k += 1;
        }
        x.clear_vertex(v);
    }
}

/// `(t, min(2 y_t, current root cut))` for every `t ∉ {root, v}` with
/// positive `y`.
pub fn compute_demands(x: &EdgeVector, root: usize, y: &[f64], v: usize) -> Vec<(usize, f64)> {
    let net = x.network();
    (0..x.vertex_count())
        .filter(|&t| t != root && t != v && y[t] > 0.0)
        .map(|t| {
            let cut = net.clone().min_cut(t, root).value;
            (t, (2.0 * y[t]).min(cut))
        })
        .collect()
}

/// Largest amount that keeps every demanded root cut when splitting `vu`,
/// `vw`. A split lowers exactly the cuts that separate `v` from `{u, w}`,
/// each by twice the amount.
fn admissible(x: &EdgeVector, net: &FlowNetwork, root: usize, v: usize, u: usize, w: usize, demands: &[(usize, f64)], floor: f64) -> f64 {
    let mut eps = x.get(v, u).min(x.get(v, w));
    for &(t, d) in demands {
        if t != u && t != w {
            let m = net.multi_cut(&[t, v], &[root, u, w]).value;
            eps = eps.min((m - d) / 2.0);
        }
        if eps <= floor {
            return eps;
        }
        if root != u && root != w {
            let m = net.multi_cut(&[t, u, w], &[root, v]).value;
            eps = eps.min((m - d) / 2.0);
        }
        if eps <= floor {
            return eps;
        }
    }
    eps
}

/// Complete splitting at `v`. Demands above the current root cut are
/// clamped to it.
pub fn complete_split(
    x: &mut EdgeVector,
    root: usize,
    v: usize,
    demands: &[(usize, f64)],
    cfg: &SplitConfig,
) -> Result<Vec<SplitOp>> {
    assert_ne!(v, root, "the root is never split");
    let net = x.network();
    let demands: Vec<(usize, f64)> =
        demands.iter().map(|&(t, d)| (t, d.min(net.clone().min_cut(t, root).value))).collect();
    let mut ops = Vec::new();
    while x.degree(v) > cfg.residual_tol {
        if ops.len() >= cfg.max_ops_per_vertex {
            return Err(Error::SplitStuck { vertex: v, residual: x.degree(v) });
        }
        let nbrs = x.neighbors(v);
        let net = x.network();
        let mut chosen = None;
        'search: for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                let (u, w) = (nbrs[i].0, nbrs[j].0);
                let eps = admissible(x, &net, root, v, u, w, &demands, cfg.min_amount);
                if eps > cfg.min_amount {
                    let cap = x.get(v, u).min(x.get(v, w));
                    let amount = if eps >= cap - 1e-12 { cap } else { eps };
                    chosen = Some(SplitOp { v, u, w: Some(w), amount });
                    break 'search;
                }
            }
        }
        let op = match chosen {
            Some(op) => op,
            None if nbrs.len() == 1 && nbrs[0].0 == root => SplitOp { v, u: root, w: None, amount: nbrs[0].1 },
            None => return Err(Error::SplitStuck { vertex: v, residual: x.degree(v) }),
        };
        apply_op(x, &op);
        ops.push(op);
    }
    x.clear_vertex(v);
    Ok(ops)
}

/// Splits off every vertex in `order`, recomputing demands before each.
pub fn split_sequence(
    x: &mut EdgeVector,
    y: &mut [f64],
    root: usize,
    order: &[usize],
    cfg: &SplitConfig,
) -> Result<SplitTrace> {
    let mut trace = SplitTrace::default();
    for &v in order {
        let demands = compute_demands(x, root, y, v);
        let ops = complete_split(x, root, v, &demands, cfg)?;
        trace.ops.extend(ops);
        trace.order.push(v);
        y[v] = 0.0;
    }
    Ok(trace)
}

/// Vertices other than `exclude` sorted by `(y, id)`, keeping those accepted
/// by `keep`.
pub fn split_order(y: &[f64], exclude: &[usize], keep: impl Fn(f64) -> bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).filter(|v| !exclude.contains(v) && keep(y[*v])).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSplit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub trace: SplitTrace,
}

/// Splits off every vertex with `0 < y < delta`.
pub fn apply_threshold_split(
    pg: &PreprocessedGraph,
    x: &[f64],
    y: &[f64],
    delta: f64,
    cfg: &SplitConfig,
) -> Result<ThresholdSplit> {
    let root = pg.root();
    let order = split_order(y, &[root], |v| v > 0.0 && v < delta);
    let mut ev = EdgeVector::from_hat(pg, x, pg.vertex_count());
    let mut ty = y.to_vec();
    let trace = split_sequence(&mut ev, &mut ty, root, &order, cfg)?;
    Ok(ThresholdSplit { x: ev.to_hat(pg), y: ty, trace })
}

/// Checks the five postconditions of a threshold split.
pub fn check_threshold_split(
    pg: &PreprocessedGraph,
    x: &[f64],
    y: &[f64],
    delta: f64,
    split: &ThresholdSplit,
    tol: f64,
) -> std::result::Result<(), String> {
    check_feasibility(pg, &split.x, &split.y, tol).map_err(|e| format!("feasibility: {e}"))?;
    for v in 1..pg.vertex_count() {
        let expect = if y[v] < delta { 0.0 } else { y[v] };
        if (split.y[v] - expect).abs() > tol {
            return Err(format!("y dichotomy fails at {v}"));
        }
        if y[v] < delta {
            let deg: f64 = (0..pg.vertex_count()).filter(|&u| u != v).map(|u| split.x[pg.index(u, v)]).sum();
            if deg.abs() > tol {
                return Err(format!("split vertex {v} keeps degree {deg}"));
            }
        }
    }
    for &e in pg.positive_edges() {
        let expect = if x[e] < delta { 0.0 } else { x[e] };
        if (split.x[e] - expect).abs() > tol {
            return Err(format!("positive edge dichotomy fails at {e}"));
        }
    }
    let before: f64 = (0..pg.edge_count()).map(|e| pg.length(e) * x[e]).sum();
    let after: f64 = (0..pg.edge_count()).map(|e| pg.length(e) * split.x[e]).sum();
    if after > before + tol {
        return Err(format!("length grew from {before} to {after}"));
    }
    Ok(())
}
