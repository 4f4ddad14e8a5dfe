//! Candidate walks built from a tree of the decomposition and a profit
//! threshold.

use std::collections::{BTreeMap, BTreeSet};

use rustworkx_core::max_weight_matching::max_weight_matching;
use rustworkx_core::petgraph::graph::UnGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{objective, ordered, Instance, Walk};
use crate::multigraph::{euler_tour, odd_vertices, Multigraph};
use crate::paths::{adjacency, shortest_paths};
use crate::preprocess::PreprocessedGraph;
use crate::treedecomp::{tree_length, RootedTree};

const MATCHING_SCALE: f64 = 1e9;

/// Subtree of a decomposition tree kept for a given threshold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Core {
    pub tree: RootedTree,
}

impl Core {
    pub fn trivial() -> Self {
        Core { tree: RootedTree::new(Vec::new()) }
    }

    pub fn is_trivial(&self) -> bool {
        self.tree.edges.is_empty()
    }

    pub fn hat_edges(&self, pg: &PreprocessedGraph) -> Vec<usize> {
        self.tree.edges.iter().map(|&(u, v)| pg.index(u, v)).collect()
    }

    pub fn hat_length(&self, pg: &PreprocessedGraph) -> f64 {
        tree_length(&self.tree, pg)
    }
}

/// Union of the root paths to every positive tree edge with `x ≥ γ`.
pub fn edge_profit_core(tree: &RootedTree, pg: &PreprocessedGraph, x: &[f64], gamma: f64) -> Core {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(u, v) in &tree.edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let root = pg.root();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut stack = vec![root];
    let mut seen = BTreeSet::from([root]);
    while let Some(u) = stack.pop() {
        for &w in adj.get(&u).into_iter().flatten() {
            if seen.insert(w) {
                parent.insert(w, u);
                stack.push(w);
            }
        }
    }
    let mut keep = BTreeSet::new();
    for &(u, v) in &tree.edges {
        let e = pg.index(u, v);
        if !pg.is_positive(e) || x[e] < gamma {
            continue;
        }
        for mut cur in [u, v] {
            while let Some(&p) = parent.get(&cur) {
                if !keep.insert(ordered(p, cur)) {
                    break;
                }
                cur = p;
            }
        }
    }
    Core { tree: RootedTree::new(keep.into_iter().collect()) }
}

/// Exact minimum-weight perfect matching of `0..count` under `dist`.
///
/// Distances are scaled to integers before matching; the returned cost is
/// recomputed in floating point.
pub fn min_perfect_matching(count: usize, dist: impl Fn(usize, usize) -> f64) -> Result<(Vec<(usize, usize)>, f64)> {
    if count % 2 == 1 {
        return Err(Error::OddCardinality(count));
    }
    if count == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut scaled = Vec::with_capacity(count * (count - 1) / 2);
    for i in 0..count {
        for j in i + 1..count {
            scaled.push((i as u32, j as u32, (dist(i, j) * MATCHING_SCALE).round() as i128));
        }
    }
    let top = scaled.iter().map(|s| s.2).max().unwrap_or(0) + 1;
    let graph = UnGraph::<(), i128>::from_edges(scaled.iter().map(|&(i, j, w)| (i, j, top - w)));
    let found = max_weight_matching(&graph, true, |e| Ok::<i128, std::convert::Infallible>(*e.weight()), false)
        .unwrap_or_else(|never| match never {});
    let mut pairs: Vec<(usize, usize)> = found.into_iter().map(|(a, b)| ordered(a, b)).collect();
    if pairs.len() * 2 != count {
        return Err(Error::Internal("matching is not perfect".into()));
    }
    pairs.sort_unstable();
    let cost = pairs.iter().map(|&(a, b)| dist(a, b)).sum();
    Ok((pairs, cost))
}

/// Edge set whose odd-degree vertices are exactly the terminals.
#[derive(Debug, Clone, PartialEq)]
pub struct TJoin {
    /// Sorted indices into the edge list passed to [`min_tjoin`].
    pub edges: Vec<usize>,
    pub length: f64,
}

/// Minimum `Q`-join: shortest-path metric, perfect matching of the
/// terminals within each component, expansion to paths, parallel copies
/// cancelled in pairs.
pub fn min_tjoin(n: usize, edges: &[(usize, usize, f64)], q: &BTreeSet<usize>) -> Result<TJoin> {
    if q.len() % 2 == 1 {
        return Err(Error::OddCardinality(q.len()));
    }
    let mut cheapest: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, &(u, v, len)) in edges.iter().enumerate() {
        let slot = cheapest.entry(ordered(u, v)).or_insert(i);
        if len < edges[*slot].2 {
            *slot = i;
        }
    }
    let adj = adjacency(n, edges.iter().copied());
    let terminals: Vec<usize> = q.iter().copied().collect();
    let trees: Vec<_> = terminals.iter().map(|&t| shortest_paths(&adj, t)).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..terminals.len() {
        match groups.iter_mut().find(|g| trees[g[0]].dist[terminals[i]].is_finite()) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    if let Some(odd) = groups.iter().find(|g| g.len() % 2 == 1) {
        let other = groups.iter().find(|g| g[0] != odd[0]).map_or(odd[0], |g| g[0]);
        return Err(Error::TJoinUnreachable(terminals[odd[0]], terminals[other]));
    }
    let mut pairs = Vec::new();
    for g in &groups {
        let (local, _) = min_perfect_matching(g.len(), |a, b| trees[g[a]].dist[terminals[g[b]]])?;
        pairs.extend(local.into_iter().map(|(a, b)| (g[a], g[b])));
    }
    let mut parity: BTreeMap<usize, bool> = BTreeMap::new();
    for (i, j) in pairs {
        let path = trees[i].path_to(terminals[j]).expect("reachable");
        for step in path.windows(2) {
            let e = cheapest[&ordered(step[0], step[1])];
            *parity.entry(e).or_insert(false) ^= true;
        }
    }
    let chosen: Vec<usize> = parity.into_iter().filter(|&(_, odd)| odd).map(|(e, _)| e).collect();
    let length = chosen.iter().map(|&e| edges[e].2).sum();
    Ok(TJoin { edges: chosen, length })
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub enum Provenance {
    Trivial,
    Tree { delta: f64, tree: usize, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub walk: Walk,
    pub value: f64,
    pub provenance: Provenance,
}

/// Restores the core, fixes parity with a minimum T-join over the original
/// graph and tours the result from the root.
pub fn build_candidate(inst: &Instance, pg: &PreprocessedGraph, core: &Core, provenance: Provenance) -> Result<Candidate> {
    let root = inst.root();
    let hat: Vec<(usize, usize)> = core.hat_edges(pg).into_iter().map(|e| (e, 1)).collect();
    let mut m = pg.restore(hat);
    if m.is_empty() {
        let walk = Walk::trivial(root);
        let value = objective(inst, &walk)?;
        return Ok(Candidate { walk, value, provenance });
    }
    let restored = pg.original_length(&m);
    let bound = core.hat_length(pg);
    if restored > bound + 1e-9 * (1.0 + bound) {
        return Err(Error::Internal(format!("restored core length {restored} exceeds {bound}")));
    }
    if !m.is_connected_with(root) {
        return Err(Error::Internal("restored core is not connected to the root".into()));
    }
    let triples: Vec<(usize, usize, f64)> = inst.edges().iter().map(|e| (e.u, e.v, e.length)).collect();
    let join = min_tjoin(inst.vertex_count(), &triples, &odd_vertices(&m))?;
    let mut extra = Multigraph::new();
    for &e in &join.edges {
        extra.add(triples[e].0, triples[e].1, 1);
    }
    m.extend(&extra);
    let walk = euler_tour(&m, root)?;
    let value = objective(inst, &walk)?;
    Ok(Candidate { walk, value, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    #[test]
    fn matching_on_a_line() {
        let pos = [0.0, 1.0, 10.0, 11.0];
        let (pairs, cost) = min_perfect_matching(4, |i, j| f64::abs(pos[i] - pos[j])).unwrap();
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(cost, 2.0);
        assert_eq!(min_perfect_matching(0, |_, _| 0.0).unwrap(), (vec![], 0.0));
        assert_eq!(min_perfect_matching(2, |_, _| 3.0).unwrap(), (vec![(0, 1)], 3.0));
        assert!(matches!(min_perfect_matching(3, |_, _| 1.0), Err(Error::OddCardinality(3))));
    }

    #[test]
    fn tjoin_examples() {
        let path = [(0, 1, 1.0), (1, 2, 1.0)];
        let j = min_tjoin(3, &path, &BTreeSet::from([0, 2])).unwrap();
        assert_eq!((j.edges, j.length), (vec![0, 1], 2.0));
        assert_eq!(min_tjoin(3, &path, &BTreeSet::new()).unwrap().length, 0.0);
        let cycle = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)];
        let j = min_tjoin(4, &cycle, &BTreeSet::from([0, 2])).unwrap();
        assert_eq!(j.length, 2.0);
        assert_eq!(j.edges.len(), 2);
        let split = [(0, 1, 1.0), (2, 3, 1.0)];
        assert!(matches!(min_tjoin(4, &split, &BTreeSet::from([0, 2])), Err(Error::TJoinUnreachable(0, 2))));
        assert_eq!(min_tjoin(4, &split, &BTreeSet::from([0, 1, 2, 3])).unwrap().length, 2.0);
    }

    #[test]
    fn single_edge_candidate() {
        let inst = parse_instance("2 1 1\n1 2 1 5\n").unwrap();
        let pg = PreprocessedGraph::build(&inst);
        let tree = RootedTree::new(vec![(0, 2), (1, 2)]);
        let x = vec![1.0; pg.edge_count()];
        let core = edge_profit_core(&tree, &pg, &x, 1.0);
        assert_eq!(core.tree, tree);
        let c = build_candidate(&inst, &pg, &core, Provenance::Trivial).unwrap();
        assert_eq!(c.walk.vertices, vec![0, 1, 0]);
        assert_eq!(c.value, 2.0);
        let none = build_candidate(&inst, &pg, &Core::trivial(), Provenance::Trivial).unwrap();
        assert_eq!((none.walk.vertices, none.value), (vec![0], 5.0));
    }

    #[test]
    fn barrier_whole_tree() {
        let inst = parse_instance("3 3 1\n1 2 0.1 0\n2 3 1 1.3\n1 3 1 0\n").unwrap();
        let pg = PreprocessedGraph::build(&inst);
        let (&e, _) = pg.positive_edges().split_first().unwrap();
        let (a, b) = pg.endpoints(e);
        let tree = RootedTree::new(vec![(0, a), (a, b)]);
        let mut x = vec![0.0; pg.edge_count()];
        x[e] = 1.0;
        let core = edge_profit_core(&tree, &pg, &x, 1.0);
        let c = build_candidate(&inst, &pg, &core, Provenance::Trivial).unwrap();
        assert!((c.value - 2.1).abs() < 1e-12);
    }
}
