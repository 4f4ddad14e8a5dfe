#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use pcrpp::generate::{gen_random, GenParams};
use pcrpp::preprocess::PreprocessedGraph;
use pcrpp::treedecomp::{RootedTree, TreeDistribution};
use pcrpp::{Instance, Walk};

pub const BARRIER: &str = "3 3 1\n1 2 0.1 0\n2 3 1 1.3\n1 3 1 0\n";

/// The barrier instance with parameter `eps`.
pub fn barrier(eps: f64) -> Instance {
    let text = format!("3 3 1\n1 2 {eps} 0\n2 3 1 {}\n1 3 1 0\n", 1.0 + 3.0 * eps);
    pcrpp::parse_instance(&text).unwrap()
}

/// Small random instance: at most 6 vertices, 9 edges, integer data up to 10.
pub fn small(seed: u64) -> Instance {
    let n = 2 + (seed as usize % 5);
    let mmax = (n * (n - 1) / 2).min(9);
    let m = n - 1 + (seed as usize / 5) % (mmax + 2 - n);
    let density = 0.2 + 0.15 * (seed % 5) as f64;
    gen_random(seed, &GenParams { n, m, wmax: 10, pmax: 10, positive_density: density }).unwrap()
}

/// Walk length plus profit of every edge the walk misses.
pub fn walk_value(inst: &Instance, walk: &Walk) -> f64 {
    let mut seen = BTreeSet::new();
    let mut length = 0.0;
    for step in walk.vertices.windows(2) {
        let e = inst.edge_between(step[0], step[1]).expect("walk uses an edge of the graph");
        seen.insert(e);
        length += inst.edge(e).length;
    }
    let missed: f64 = inst.edges().iter().enumerate().filter(|(i, _)| !seen.contains(i)).map(|(_, e)| e.profit).sum();
    length + missed
}

/// Every cut `x(δ(S)) ≥ 2 y_v` for `v ∈ S ∌ root`, by subset enumeration.
pub fn all_cuts_hold(pg: &PreprocessedGraph, x: &[f64], y: &[f64], tol: f64) -> Result<(), String> {
    let n = pg.vertex_count();
    assert!(n <= 20, "subset enumeration is limited to small graphs");
    for mask in 1u32..(1 << (n - 1)) {
        let inside = |v: usize| v > 0 && mask >> (v - 1) & 1 == 1;
        let crossing: f64 = (0..pg.edge_count())
            .filter(|&e| {
                let (a, b) = pg.endpoints(e);
                inside(a) != inside(b)
            })
            .map(|e| x[e])
            .sum();
        let need = (1..n).filter(|&v| inside(v)).map(|v| 2.0 * y[v]).fold(0.0, f64::max);
        if crossing < need - tol {
            return Err(format!("cut {mask:#b}: {crossing} < {need}"));
        }
    }
    Ok(())
}

/// Optimum of the relaxation written with explicit flows: every vertex
/// ships `2 y_v` to the root within capacities `x`.
pub fn flow_lp_optimum(pg: &PreprocessedGraph) -> f64 {
    let n = pg.vertex_count();
    let m = pg.edge_count();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let x: Vec<_> = (0..m).map(|e| p.add_var(pg.length(e) - pg.profit(e), (0.0, f64::INFINITY))).collect();
    let y: Vec<_> = (0..n).map(|v| p.add_var(0.0, if v == 0 { (1.0, 1.0) } else { (0.0, 1.0) })).collect();
    let mut incident = vec![Vec::new(); n];
    for e in 0..m {
        let (a, b) = pg.endpoints(e);
        incident[a].push(e);
        incident[b].push(e);
    }
    for v in 1..n {
        let mut row: Vec<_> = incident[v].iter().map(|&e| (x[e], 1.0)).collect();
        row.push((y[v], -2.0));
        p.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let root: Vec<_> = incident[0].iter().map(|&e| (x[e], 1.0)).collect();
    p.add_constraint(root.as_slice(), ComparisonOp::Le, 2.0);
    for &e in pg.positive_edges() {
        let (a, b) = pg.endpoints(e);
        for w in [a, b] {
            p.add_constraint(&[(y[w], 1.0), (x[e], -1.0)], ComparisonOp::Eq, 0.0);
        }
    }
    for s in 1..n {
        let fwd: Vec<_> = (0..m).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let bwd: Vec<_> = (0..m).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
        for e in 0..m {
            p.add_constraint(&[(fwd[e], 1.0), (x[e], -1.0)], ComparisonOp::Le, 0.0);
            p.add_constraint(&[(bwd[e], 1.0), (x[e], -1.0)], ComparisonOp::Le, 0.0);
        }
        for v in 1..n {
            let mut row = Vec::new();
            for &e in &incident[v] {
                let (a, _) = pg.endpoints(e);
                let (out, inn) = if a == v { (fwd[e], bwd[e]) } else { (bwd[e], fwd[e]) };
                row.push((out, 1.0));
                row.push((inn, -1.0));
            }
            if v == s {
                row.push((y[s], -2.0));
            }
            p.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
        }
    }
    p.solve().expect("flow relaxation solves").objective() + pg.total_profit()
}

/// Vertex and edge marginals recomputed from the raw trees and weights.
pub fn marginals(dist: &TreeDistribution, n: usize) -> (Vec<f64>, BTreeMap<(usize, usize), f64>) {
    let mut vertex = vec![0.0; n];
    let mut edge = BTreeMap::new();
    for (tree, &l) in dist.trees.iter().zip(&dist.lambda) {
        let mut vs = BTreeSet::from([dist.root]);
        for &(a, b) in &tree.edges {
            vs.insert(a);
            vs.insert(b);
            *edge.entry((a.min(b), a.max(b))).or_insert(0.0) += l;
        }
        for v in vs {
            vertex[v] += l;
        }
    }
    (vertex, edge)
}

/// Acyclic, connected and containing `root`, checked with union-find.
pub fn is_rooted_tree(tree: &RootedTree, root: usize) -> bool {
    let mut vs: BTreeSet<usize> = BTreeSet::from([root]);
    for &(a, b) in &tree.edges {
        vs.insert(a);
        vs.insert(b);
    }
    if tree.edges.len() + 1 != vs.len() {
        return false;
    }
    let idx: BTreeMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vs.len()).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for &(a, b) in &tree.edges {
        let (ra, rb) = (find(&mut parent, idx[&a]), find(&mut parent, idx[&b]));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

/// `e ∈ T ⇔ u ∈ T ⇔ v ∈ T` for every positive edge `e = uv`.
pub fn coupled(tree: &RootedTree, pg: &PreprocessedGraph) -> bool {
    let mut vs = BTreeSet::from([pg.root()]);
    let mut es = BTreeSet::new();
    for &(a, b) in &tree.edges {
        vs.insert(a);
        vs.insert(b);
        es.insert((a.min(b), a.max(b)));
    }
    pg.positive_edges().iter().all(|&e| {
        let (a, b) = pg.endpoints(e);
        let has = es.contains(&(a.min(b), a.max(b)));
        has == vs.contains(&a) && has == vs.contains(&b)
    })
}

/// Cheapest edge subset whose odd vertices are exactly `q`.
pub fn brute_tjoin(n: usize, edges: &[(usize, usize, f64)], q: &BTreeSet<usize>) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << edges.len()) {
        let mut deg = vec![0u32; n];
        let mut len = 0.0;
        for (i, &(a, b, w)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[a] += 1;
                deg[b] += 1;
                len += w;
            }
        }
        let odd: BTreeSet<usize> = (0..n).filter(|&v| deg[v] % 2 == 1).collect();
        if &odd == q && best.is_none_or(|b| len < b) {
            best = Some(len);
        }
    }
    best
}

/// Minimum perfect matching cost by dynamic programming over subsets.
pub fn dp_matching(count: usize, dist: impl Fn(usize, usize) -> f64) -> f64 {
    let full = (1usize << count) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 0..full {
        if !best[mask].is_finite() {
            continue;
        }
        let i = (!mask).trailing_zeros() as usize;
        for j in i + 1..count {
            if mask >> j & 1 == 0 {
                let next = mask | 1 << i | 1 << j;
                best[next] = best[next].min(best[mask] + dist(i, j));
            }
        }
    }
    best[full]
}
