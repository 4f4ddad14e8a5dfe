//! Vertex copying and shortest-path completion.
//!
//! Ĝ vertex `0` is always the root. Active original vertices follow in
//! increasing id, then the copies: first the root copies, then copies of
//! other vertices, each group in edge order.

use std::collections::BTreeMap;

use crate::instance::{Instance, EPS};
use crate::multigraph::Multigraph;
use crate::paths::{adjacency, shortest_paths};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original(usize),
    Tether,
}

/// Edge of the copied graph, in Ĝ vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopiedEdge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub profit: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone)]
pub struct CopiedGraph {
    pub vertex_count: usize,
    pub edges: Vec<CopiedEdge>,
    /// Ĝ vertex to original vertex.
    pub copy_map: Vec<usize>,
    /// Original vertex to its base Ĝ vertex.
    pub base_of: Vec<Option<usize>>,
}

/// Moves positive edges onto fresh copies so the root touches none of them
/// and every vertex touches at most one.
pub fn copy_vertices(inst: &Instance) -> CopiedGraph {
    let r = inst.root();
    let mut base_of = vec![None; inst.vertex_count()];
    let mut copy_map = vec![r];
    base_of[r] = Some(0);
    for v in inst.active_vertices() {
        if v != r {
            base_of[v] = Some(copy_map.len());
            copy_map.push(v);
        }
    }
    let mut positive_count = vec![0usize; inst.vertex_count()];
    for e in inst.edges().iter().filter(|e| e.profit > 0.0) {
        positive_count[e.u] += 1;
        positive_count[e.v] += 1;
    }
    let needs_copies = |v: usize| v == r || positive_count[v] > 1;
    let mut edges = Vec::new();
    let mut endpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut order: Vec<usize> = vec![r];
    order.extend(inst.active_vertices().into_iter().filter(|&v| v != r && needs_copies(v)));
    for &v in &order {
        let base = base_of[v].expect("active");
        for (id, e) in inst.edges().iter().enumerate() {
            if e.profit > 0.0 && (e.u == v || e.v == v) {
                let c = copy_map.len();
                copy_map.push(v);
                endpoint.insert((id, v), c);
                edges.push(CopiedEdge { u: base, v: c, length: 0.0, profit: 0.0, origin: Origin::Tether });
            }
        }
    }
    for (id, e) in inst.edges().iter().enumerate() {
        let at = |x: usize| endpoint.get(&(id, x)).copied().unwrap_or_else(|| base_of[x].expect("active"));
        edges.push(CopiedEdge {
            u: at(e.u),
            v: at(e.v),
            length: e.length,
            profit: e.profit,
            origin: Origin::Original(id),
        });
    }
    CopiedGraph { vertex_count: copy_map.len(), edges, copy_map, base_of }
}

/// The complete preprocessed graph Ĝ.
#[derive(Debug, Clone)]
pub struct PreprocessedGraph {
    n: usize,
    ends: Vec<(u32, u32)>,
    length: Vec<f64>,
    profit: Vec<f64>,
    /// Original edge id for each positive Ĝ edge.
    source: Vec<Option<usize>>,
    positive: Vec<usize>,
    partner: Vec<Option<(usize, usize)>>,
    pred: Vec<u32>,
    copied: CopiedGraph,
    tether_pairs: Vec<usize>,
    original_lengths: BTreeMap<(usize, usize), f64>,
}

const NO_PRED: u32 = u32::MAX;

/// Completes the copied graph with shortest-path zero-profit edges.
pub fn complete(copied: CopiedGraph, inst: &Instance) -> PreprocessedGraph {
    let n = copied.vertex_count;
    let pairs = n * n.saturating_sub(1) / 2;
    let adj = adjacency(n, copied.edges.iter().map(|e| (e.u, e.v, e.length)));
    let mut dist = vec![f64::INFINITY; n * n];
    let mut pred = vec![NO_PRED; n * n];
    for s in 0..n {
        let sp = shortest_paths(&adj, s);
        for t in 0..n {
            dist[s * n + t] = sp.dist[t];
            pred[s * n + t] = sp.pred[t].map_or(NO_PRED, |p| p as u32);
        }
    }
    let mut length = vec![0.0; pairs];
    let mut profit = vec![0.0; pairs];
    let mut source = vec![None; pairs];
    let mut ends = Vec::with_capacity(pairs);
    for i in 0..n {
        for j in i + 1..n {
            length[ends.len()] = dist[i * n + j];
            ends.push((i as u32, j as u32));
        }
    }
    let mut positive = Vec::new();
    let mut partner = vec![None; n];
    let mut tether_pairs = Vec::new();
    for e in &copied.edges {
        let idx = pair_index(n, e.u, e.v);
        match e.origin {
            Origin::Original(id) if e.profit > 0.0 => {
                length[idx] = e.length;
                profit[idx] = e.profit;
                source[idx] = Some(id);
                positive.push(idx);
                partner[e.u] = Some((idx, e.v));
                partner[e.v] = Some((idx, e.u));
            }
            Origin::Tether => tether_pairs.push(idx),
            _ => {}
        }
    }
    positive.sort_unstable();
    tether_pairs.sort_unstable();
    let original_lengths = inst.edges().iter().map(|e| (e.key(), e.length)).collect();
    PreprocessedGraph {
        n,
        ends,
        length,
        profit,
        source,
        positive,
        partner,
        pred,
        copied,
        tether_pairs,
        original_lengths,
    }
}

/// Index of the unordered pair `{i, j}` among `n` vertices.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i != j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl PreprocessedGraph {
    pub fn build(inst: &Instance) -> Self {
        complete(copy_vertices(inst), inst)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn edge_count(&self) -> usize {
        self.length.len()
    }

    pub fn index(&self, u: usize, v: usize) -> usize {
        pair_index(self.n, u, v)
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.ends[e];
        (u as usize, v as usize)
    }

    pub fn length(&self, e: usize) -> f64 {
        self.length[e]
    }

    pub fn profit(&self, e: usize) -> f64 {
        self.profit[e]
    }

    pub fn is_positive(&self, e: usize) -> bool {
        self.source[e].is_some()
    }

    /// Sorted ids of Ê⁺.
    pub fn positive_edges(&self) -> &[usize] {
        &self.positive
    }

    /// The positive edge at `v` and its other endpoint.
    pub fn positive_at(&self, v: usize) -> Option<(usize, usize)> {
        self.partner[v]
    }

    pub fn original_edge(&self, e: usize) -> Option<usize> {
        self.source[e]
    }

    /// Pairs joined by a tether in the copied graph.
    pub fn tether_pairs(&self) -> &[usize] {
        &self.tether_pairs
    }

    pub fn copied(&self) -> &CopiedGraph {
        &self.copied
    }

    pub fn copy_map(&self) -> &[usize] {
        &self.copied.copy_map
    }

    pub fn total_profit(&self) -> f64 {
        self.positive.iter().map(|&e| self.profit[e]).sum()
    }

    /// Copied-graph path realizing the length of a zero-profit edge.
    pub fn path(&self, e: usize) -> Vec<usize> {
        let (s, t) = self.endpoints(e);
        let mut path = vec![t];
        let mut cur = t;
        while cur != s {
            let p = self.pred[s * self.n + cur];
            assert_ne!(p, NO_PRED, "copied graph is connected");
            cur = p as usize;
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Maps a Ĝ edge multiset back to a multigraph on original vertices.
    pub fn restore(&self, f: impl IntoIterator<Item = (usize, usize)>) -> Multigraph {
        let map = &self.copied.copy_map;
        let mut m = Multigraph::new();
        for (e, count) in f {
            if self.source[e].is_some() {
                let (a, b) = self.endpoints(e);
                m.add(map[a], map[b], count);
                continue;
            }
            for step in self.path(e).windows(2) {
                m.add(map[step[0]], map[step[1]], count);
            }
        }
        m
    }

    /// Length of a restored multigraph under original edge lengths.
    pub fn original_length(&self, m: &Multigraph) -> f64 {
        m.weight(|u, v| self.original_lengths[&crate::instance::ordered(u, v)])
    }

    /// Checks the three structural properties of Ĝ.
    pub fn check_properties(&self) -> Result<(), String> {
        if self.partner[0].is_some() {
            return Err("root touches a positive edge".into());
        }
        let mut seen = vec![false; self.n];
        for &e in &self.positive {
            let (u, v) = self.endpoints(e);
            for x in [u, v] {
                if std::mem::replace(&mut seen[x], true) {
                    return Err(format!("vertex {x} touches two positive edges"));
                }
            }
        }
        for e in 0..self.edge_count() {
            if self.is_positive(e) {
                continue;
            }
            let p = self.path(e);
            let len: f64 = p.windows(2).map(|s| self.copied_length(s[0], s[1])).sum();
            if (len - self.length[e]).abs() > EPS {
                return Err(format!("edge {e} length differs from its path"));
            }
        }
        Ok(())
    }

    fn copied_length(&self, a: usize, b: usize) -> f64 {
        self.copied
            .edges
            .iter()
            .find(|e| (e.u == a && e.v == b) || (e.u == b && e.v == a))
            .map(|e| e.length)
            .expect("path step is an edge")
    }
}
