//! Edge-profit tree decomposition.
//!
//! The auxiliary graph adds a root copy `r'` with index `|V̂|`. Complete
//! splittings at every other vertex reduce the lifted vector to `2χ^{e₀}`;
//! undoing the recorded operations in reverse grows a weighted tree list
//! whose marginals follow the vector minus `χ^{e₀}`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::ordered;
use crate::lp::{DenseSimplex, LinearProgram, LpBackend, Row, Sense};
use crate::preprocess::PreprocessedGraph;
use crate::splitoff::{replay, split_order, split_sequence, EdgeVector, SplitConfig, SplitOp, SplitTrace};

/// Mass below which a tree is discarded as round-off.
const MASS_FLOOR: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuxGraph {
    pub hat_vertices: usize,
}

impl AuxGraph {
    pub fn root(&self) -> usize {
        0
    }

    pub fn root_copy(&self) -> usize {
        self.hat_vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.hat_vertices + 1
    }

    /// Edge length in the auxiliary graph.
    pub fn length(&self, pg: &PreprocessedGraph, u: usize, v: usize) -> f64 {
        let rc = self.root_copy();
        match (u == rc, v == rc) {
            (true, true) => 0.0,
            (true, false) if v == 0 => 0.0,
            (false, true) if u == 0 => 0.0,
            (true, false) => pg.length(pg.index(0, v)),
            (false, true) => pg.length(pg.index(0, u)),
            (false, false) => pg.length(pg.index(u, v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RootedTree {
    /// Sorted pairs `(u, v)` with `u < v`.
    pub edges: Vec<(usize, usize)>,
}

impl RootedTree {
    pub fn new(mut edges: Vec<(usize, usize)>) -> Self {
        for e in &mut edges {
            *e = ordered(e.0, e.1);
        }
        edges.sort_unstable();
        edges.dedup();
        RootedTree { edges }
    }

    pub fn vertices(&self, root: usize) -> BTreeSet<usize> {
        let mut vs: BTreeSet<usize> = self.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vs.insert(root);
        vs
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&ordered(u, v)).is_ok()
    }

    /// Connected, acyclic and containing `root`.
    pub fn is_tree(&self, root: usize) -> bool {
        let vs = self.vertices(root);
        if self.edges.len() + 1 != vs.len() {
            return false;
        }
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(a, b) in &self.edges {
                let y = if a == x { b } else if b == x { a } else { continue };
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.len() == vs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeDistribution {
    pub root: usize,
    pub trees: Vec<RootedTree>,
    pub lambda: Vec<f64>,
}

impl TreeDistribution {
    pub fn edge_marginal(&self, u: usize, v: usize) -> f64 {
        self.trees.iter().zip(&self.lambda).filter(|(t, _)| t.contains_edge(u, v)).map(|(_, l)| l).sum()
    }

    pub fn vertex_marginals(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (t, &l) in self.trees.iter().zip(&self.lambda) {
            for v in t.vertices(self.root) {
                m[v] += l;
            }
        }
        m
    }

    pub fn edge_marginals(&self) -> BTreeMap<(usize, usize), f64> {
        let mut m = BTreeMap::new();
        for (t, &l) in self.trees.iter().zip(&self.lambda) {
            for &e in &t.edges {
                *m.entry(e).or_insert(0.0) += l;
            }
        }
        m
    }

    pub fn total_mass(&self) -> f64 {
        self.lambda.iter().sum()
    }

    fn from_map(root: usize, map: BTreeMap<RootedTree, f64>) -> Self {
        let (trees, lambda) = map.into_iter().filter(|&(_, l)| l > WEIGHT_FLOOR).unzip();
        let mut d = TreeDistribution { root, trees, lambda };
        let total = d.total_mass();
        d.lambda.iter_mut().for_each(|l| *l /= total);
        d
    }
}

/// Lifts a relaxation point on Ĝ to the auxiliary graph.
pub fn lift_to_aux(pg: &PreprocessedGraph, x: &[f64], y: &[f64]) -> (EdgeVector, Vec<f64>, AuxGraph) {
    let aux = AuxGraph { hat_vertices: pg.vertex_count() };
    let rc = aux.root_copy();
    let mut bar = EdgeVector::from_hat(pg, x, aux.vertex_count());
    let mut root_degree = 0.0;
    for v in 1..pg.vertex_count() {
        let val = bar.get(0, v);
        root_degree += val;
        bar.set(0, v, val / 2.0);
        bar.set(rc, v, val / 2.0);
    }
    bar.set(0, rc, 2.0 - root_degree / 2.0);
    let mut ybar = y.to_vec();
    ybar.push(1.0);
    (bar, ybar, aux)
}

/// Checks degree and root cut constraints of the auxiliary relaxation.
pub fn check_aux_feasibility(x: &EdgeVector, y: &[f64], aux: &AuxGraph, tol: f64) -> std::result::Result<(), String> {
    for v in 0..aux.vertex_count() {
        let want = if v == 0 { 2.0 } else { 2.0 * y[v] };
        if (x.degree(v) - want).abs() > tol {
            return Err(format!("degree of {v} is {} instead of {want}", x.degree(v)));
        }
    }
    let net = x.network();
    for t in 1..aux.vertex_count() {
        if y[t] > tol {
            let cut = net.clone().min_cut(t, 0).value;
            if cut < 2.0 * y[t] - tol {
                return Err(format!("root cut at {t} is {cut} below {}", 2.0 * y[t]));
            }
        }
    }
    Ok(())
}

struct WorkTree {
    edges: BTreeSet<(usize, usize)>,
    verts: BTreeSet<usize>,
    mass: f64,
}

impl WorkTree {
    fn split_off(&mut self, mass: f64) -> WorkTree {
        self.mass -= mass;
        WorkTree { edges: self.edges.clone(), verts: self.verts.clone(), mass }
    }

    fn add(&mut self, a: usize, b: usize) {
        self.edges.insert(ordered(a, b));
        self.verts.insert(a);
        self.verts.insert(b);
    }

    /// Neighbor of `from` on the tree path from `from` to `to`, ignoring
    /// the edge `skip`, or `None` if `to` is unreachable.
    fn first_step(&self, from: usize, to: usize, skip: (usize, usize)) -> Option<usize> {
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        parent.insert(to, to);
        let mut queue = VecDeque::from([to]);
        while let Some(x) = queue.pop_front() {
            if x == from {
                return Some(parent[&from]);
            }
            for &(a, b) in &self.edges {
                if (a, b) == skip {
                    continue;
                }
                let y = if a == x { b } else if b == x { a } else { continue };
                if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(y) {
                    slot.insert(x);
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// Takes `need` mass from trees accepted by `pick`, splitting the last one.
fn take_mass(trees: &mut Vec<WorkTree>, need: f64, pick: impl Fn(&WorkTree) -> bool) -> (Vec<WorkTree>, f64) {
    let mut rest = need;
    let mut taken = Vec::new();
    let mut kept = Vec::with_capacity(trees.len());
    for mut t in trees.drain(..) {
        if rest > MASS_FLOOR && pick(&t) {
            if t.mass <= rest {
                rest -= t.mass;
                taken.push(t);
            } else {
                taken.push(t.split_off(rest));
                rest = 0.0;
                kept.push(t);
            }
        } else {
            kept.push(t);
        }
    }
    *trees = kept;
    (taken, rest.max(0.0))
}

const MASS_SLACK: f64 = 1e-8;

fn undo_op(trees: &mut Vec<WorkTree>, op: &SplitOp) -> Result<()> {
    let SplitOp { v, u, w, amount } = *op;
    let w = w.ok_or_else(|| Error::Decomposition(format!("degenerate operation at vertex {v}")))?;
    let key = ordered(u, w);
    let (mut selected, missing) = take_mass(trees, amount, |t| t.edges.contains(&key));
    if missing > MASS_SLACK {
        return Err(Error::Decomposition(format!("edge {key:?} lacks mass {missing:.3e}")));
    }
    let mut leaf_need: BTreeMap<usize, f64> = BTreeMap::new();
    for t in &mut selected {
        t.edges.remove(&key);
        if !t.verts.contains(&v) {
            t.add(v, u);
            t.add(v, w);
            continue;
        }
        let (near, far) = match t.first_step(v, u, key) {
            Some(_) => (u, w),
            None => (w, u),
        };
        let z = t.first_step(v, near, key).ok_or_else(|| Error::Decomposition("tree lost connectivity".into()))?;
        t.add(v, far);
        if z != near {
            t.add(v, near);
            t.edges.remove(&ordered(v, z));
        }
        *leaf_need.entry(z).or_insert(0.0) += t.mass;
    }
    for (z, need) in leaf_need {
        let (mut hosts, missing) = take_mass(trees, need, |t| !t.verts.contains(&v) && t.verts.contains(&z));
        if missing > MASS_SLACK {
            return Err(Error::Decomposition(format!("no room to attach {v} at {z}: {missing:.3e}")));
        }
        for h in &mut hosts {
            h.add(v, z);
        }
        trees.extend(hosts);
    }
    trees.extend(selected);
    Ok(())
}

fn merge(trees: Vec<WorkTree>) -> Vec<WorkTree> {
    let mut map: BTreeMap<Vec<(usize, usize)>, (BTreeSet<usize>, f64)> = BTreeMap::new();
    for t in trees {
        let entry = map.entry(t.edges.into_iter().collect()).or_insert((t.verts, 0.0));
        entry.1 += t.mass;
    }
    map.into_iter()
        .filter(|(_, (_, m))| *m > MASS_FLOOR)
        .map(|(edges, (verts, mass))| WorkTree { edges: edges.into_iter().collect(), verts, mass })
        .collect()
}

/// Undoes the operations of the listed vertices, latest first, starting from
/// the single tree `{e₀}`.
pub fn undo_trace(trace: &SplitTrace, vertices: &BTreeSet<usize>, aux: &AuxGraph) -> Result<TreeDistribution> {
    let (r, rc) = (aux.root(), aux.root_copy());
    let mut trees = vec![WorkTree {
        edges: BTreeSet::from([(r, rc)]),
        verts: BTreeSet::from([r, rc]),
        mass: 1.0,
    }];
    let mut current = None;
    for op in trace.ops.iter().rev().filter(|op| vertices.contains(&op.v)) {
        if current.is_some_and(|c| c != op.v) {
            trees = merge(trees);
        }
        current = Some(op.v);
        undo_op(&mut trees, op)?;
    }
    let map = merge(trees).into_iter().map(|t| (RootedTree { edges: t.edges.into_iter().collect() }, t.mass)).collect();
    Ok(TreeDistribution::from_map(r, map))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompConfig {
    pub split: SplitConfig,
    pub marginal_tol: f64,
}

impl Default for DecompConfig {
    fn default() -> Self {
        DecompConfig { split: SplitConfig::default(), marginal_tol: 1e-6 }
    }
}

/// Splits every vertex except the two roots, in `(y, id)` order.
pub fn split_aux(x: &EdgeVector, y: &[f64], aux: &AuxGraph, cfg: &SplitConfig) -> Result<SplitTrace> {
    let (r, rc) = (aux.root(), aux.root_copy());
    let order = split_order(y, &[r, rc], |v| v > 0.0);
    let mut work = x.clone();
    let mut wy = y.to_vec();
    let trace = split_sequence(&mut work, &mut wy, r, &order, cfg)?;
    if (work.get(r, rc) - 2.0).abs() > 1e-6 {
        return Err(Error::Decomposition(format!("residual root edge {} instead of 2", work.get(r, rc))));
    }
    Ok(trace)
}

/// Verifies aux marginals against `(x, y)` with the `e₀` offset.
pub fn check_aux_marginals(
    dist: &TreeDistribution,
    x: &EdgeVector,
    y: &[f64],
    aux: &AuxGraph,
    tol: f64,
) -> std::result::Result<(), String> {
    let n = aux.vertex_count();
    let em = dist.edge_marginals();
    for u in 0..n {
        for v in u + 1..n {
            let want = if (u, v) == (aux.root(), aux.root_copy()) { x.get(u, v) - 1.0 } else { x.get(u, v) };
            let got = em.get(&(u, v)).copied().unwrap_or(0.0);
            if (got - want).abs() > tol {
                return Err(format!("edge ({u},{v}) marginal {got} vs {want}"));
            }
        }
    }
    let vm = dist.vertex_marginals(n);
    for v in 0..n {
        if (vm[v] - y[v]).abs() > tol {
            return Err(format!("vertex {v} marginal {} vs {}", vm[v], y[v]));
        }
    }
    if dist.trees.iter().any(|t| !t.is_tree(aux.root())) {
        return Err("a supported edge set is not a rooted tree".into());
    }
    Ok(())
}

/// Tree distribution on the auxiliary graph meeting the marginals of
/// `(x, y)`.
pub fn decompose(x: &EdgeVector, y: &[f64], aux: &AuxGraph, cfg: &DecompConfig) -> Result<(TreeDistribution, SplitTrace)> {
    let trace = split_aux(x, y, aux, &cfg.split)?;
    let all: BTreeSet<usize> = trace.order.iter().copied().collect();
    let dist = undo_trace(&trace, &all, aux)?;
    check_aux_marginals(&dist, x, y, aux, cfg.marginal_tol).map_err(Error::Decomposition)?;
    Ok((dist, trace))
}

/// Merges `r'` into `r`, dropping one root edge from the cycle this closes.
pub fn project_tree(tree: &RootedTree, aux: &AuxGraph, pg: &PreprocessedGraph) -> RootedTree {
    let rc = aux.root_copy();
    let has_e0 = tree.contains_edge(0, rc);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(tree.edges.len());
    for &(a, b) in &tree.edges {
        if (a, b) == (0, rc) {
            continue;
        }
        let (a, b) = (if a == rc { 0 } else { a }, if b == rc { 0 } else { b });
        edges.push(ordered(a, b));
    }
    if !has_e0 && tree.vertices(0).contains(&rc) {
        // Path r .. r' becomes a cycle; its root edges are the first and last hops.
        let first = path_first_hop(tree, 0, rc);
        let last = path_first_hop(tree, rc, 0);
        let candidates = [first, last];
        let drop = candidates
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let (ea, eb) = (pg.index(0, a), pg.index(0, b));
                pg.length(ea).total_cmp(&pg.length(eb)).then(eb.cmp(&ea))
            })
            .expect("two candidates");
        if let Some(pos) = edges.iter().position(|&e| e == (0, drop)) {
            edges.remove(pos);
        }
    }
    RootedTree::new(edges)
}

fn path_first_hop(tree: &RootedTree, from: usize, to: usize) -> usize {
    let work = WorkTree { edges: tree.edges.iter().copied().collect(), verts: BTreeSet::new(), mass: 0.0 };
    work.first_step(from, to, (usize::MAX, usize::MAX)).expect("tree path exists")
}

/// Projects an auxiliary distribution onto Ĝ and merges identical trees.
pub fn project_to_hat(dist: &TreeDistribution, aux: &AuxGraph, pg: &PreprocessedGraph) -> Result<TreeDistribution> {
    let mut map: BTreeMap<RootedTree, f64> = BTreeMap::new();
    for (t, &l) in dist.trees.iter().zip(&dist.lambda) {
        *map.entry(project_tree(t, aux, pg)).or_insert(0.0) += l;
    }
    let out = TreeDistribution::from_map(0, map);
    for t in &out.trees {
        if !t.is_tree(0) {
            return Err(Error::Decomposition("projection produced a non-tree".into()));
        }
        check_coupling(t, pg)?;
    }
    Ok(out)
}

/// `e ∈ T ⇔ u ∈ T ⇔ v ∈ T` for every positive edge `e = uv`.
pub fn check_coupling(tree: &RootedTree, pg: &PreprocessedGraph) -> Result<()> {
    let vs = tree.vertices(0);
    for &e in pg.positive_edges() {
        let (u, v) = pg.endpoints(e);
        let has = tree.contains_edge(u, v);
        if has != vs.contains(&u) || has != vs.contains(&v) {
            return Err(Error::Coupling(e));
        }
    }
    Ok(())
}

/// Checks the contract of a Ĝ distribution against `(x̃, ỹ)`.
pub fn check_hat_distribution(
    pg: &PreprocessedGraph,
    x: &[f64],
    y: &[f64],
    dist: &TreeDistribution,
    tol: f64,
) -> std::result::Result<(), String> {
    if (dist.total_mass() - 1.0).abs() > tol || dist.lambda.iter().any(|&l| l < 0.0) {
        return Err("weights are not a probability vector".into());
    }
    let vm = dist.vertex_marginals(pg.vertex_count());
    for v in 0..pg.vertex_count() {
        if (vm[v] - y[v]).abs() > tol {
            return Err(format!("vertex {v} marginal {} vs {}", vm[v], y[v]));
        }
    }
    for &e in pg.positive_edges() {
        let (u, v) = pg.endpoints(e);
        let got = dist.edge_marginal(u, v);
        if (got - x[e]).abs() > tol {
            return Err(format!("positive edge {e} marginal {got} vs {}", x[e]));
        }
    }
    for t in &dist.trees {
        check_coupling(t, pg).map_err(|e| e.to_string())?;
    }
    let expected: f64 = dist.trees.iter().zip(&dist.lambda).map(|(t, l)| l * tree_length(t, pg)).sum();
    let bound: f64 = (0..pg.edge_count()).map(|e| pg.length(e) * x[e]).sum();
    if expected > bound + tol {
        return Err(format!("expected tree length {expected} exceeds {bound}"));
    }
    Ok(())
}

pub fn tree_length(t: &RootedTree, pg: &PreprocessedGraph) -> f64 {
    t.edges.iter().map(|&(u, v)| pg.length(pg.index(u, v))).sum()
}

fn support_bound(trace_ops: usize, pg: &PreprocessedGraph) -> usize {
    trace_ops + pg.vertex_count() + 1
}

/// Re-solves the weights over the current support and keeps a basic
/// solution, which has at most one tree per independent marginal equation.
pub fn reduce_support(dist: &TreeDistribution, pg: &PreprocessedGraph) -> Result<TreeDistribution> {
    let n = pg.vertex_count();
    let mut rows: Vec<Row> = Vec::new();
    let vm = dist.vertex_marginals(n);
    for v in 1..n {
        let coefs = dist.trees.iter().enumerate().filter(|(_, t)| t.vertices(0).contains(&v)).map(|(j, _)| (j, 1.0)).collect();
        rows.push(Row::new(coefs, Sense::Eq, vm[v]));
    }
    for (&(u, v), &m) in &dist.edge_marginals() {
        let coefs = dist.trees.iter().enumerate().filter(|(_, t)| t.contains_edge(u, v)).map(|(j, _)| (j, 1.0)).collect();
        rows.push(Row::new(coefs, Sense::Eq, m));
    }
    rows.push(Row::new((0..dist.trees.len()).map(|j| (j, 1.0)).collect(), Sense::Eq, 1.0));
    let cost = dist.trees.iter().map(|t| tree_length(t, pg)).collect();
    let res = DenseSimplex::default().solve(&LinearProgram::new(cost, rows))?;
    let map = dist.trees.iter().cloned().zip(res.x).collect();
    Ok(TreeDistribution::from_map(0, map))
}

fn finish(dist: TreeDistribution, ops: usize, pg: &PreprocessedGraph) -> Result<TreeDistribution> {
    let bound = support_bound(ops, pg);
    if dist.trees.len() <= bound {
        return Ok(dist);
    }
    let reduced = reduce_support(&dist, pg)?;
    if reduced.trees.len() > bound {
        return Err(Error::CapExceeded { what: "tree support", size: reduced.trees.len(), cap: bound });
    }
    Ok(reduced)
}

/// Full decomposition of a feasible Ĝ point: lift, decompose, project.
pub fn edge_profit_decomposition(
    pg: &PreprocessedGraph,
    x: &[f64],
    y: &[f64],
    cfg: &DecompConfig,
) -> Result<TreeDistribution> {
    let (bar, ybar, aux) = lift_to_aux(pg, x, y);
    let (dist, trace) = decompose(&bar, &ybar, &aux, cfg)?;
    finish(project_to_hat(&dist, &aux, pg)?, trace.ops.len(), pg)
}

/// One split recording of the lifted optimum, reused for every threshold.
#[derive(Debug, Clone)]
pub struct SharedTrace {
    pub aux: AuxGraph,
    pub lifted: EdgeVector,
    pub lifted_y: Vec<f64>,
    pub trace: SplitTrace,
}

impl SharedTrace {
    pub fn new(pg: &PreprocessedGraph, x: &[f64], y: &[f64], cfg: &SplitConfig) -> Result<Self> {
        let (lifted, lifted_y, aux) = lift_to_aux(pg, x, y);
        let trace = split_aux(&lifted, &lifted_y, &aux, cfg)?;
        Ok(SharedTrace { aux, lifted, lifted_y, trace })
    }

    /// Auxiliary point after splitting the vertices below `delta`.
    pub fn state_below(&self, delta: f64) -> (EdgeVector, Vec<f64>) {
        let low: Vec<usize> = self.trace.order.iter().copied().filter(|&v| self.lifted_y[v] < delta).collect();
        let prefix = SplitTrace {
            ops: self.trace.ops.iter().copied().filter(|op| low.contains(&op.v)).collect(),
            order: low.clone(),
        };
        let mut x = self.lifted.clone();
        replay(&mut x, &prefix);
        let mut y = self.lifted_y.clone();
        low.iter().for_each(|&v| y[v] = 0.0);
        (x, y)
    }

    /// Auxiliary distribution for threshold `delta`.
    pub fn aux_distribution(&self, delta: f64) -> Result<TreeDistribution> {
        let high: BTreeSet<usize> = self.trace.order.iter().copied().filter(|&v| self.lifted_y[v] >= delta).collect();
        undo_trace(&self.trace, &high, &self.aux)
    }

    /// Ĝ distribution for threshold `delta`.
    pub fn distribution(&self, pg: &PreprocessedGraph, delta: f64) -> Result<TreeDistribution> {
        let dist = self.aux_distribution(delta)?;
        finish(project_to_hat(&dist, &self.aux, pg)?, self.trace.ops.len(), pg)
    }
}
