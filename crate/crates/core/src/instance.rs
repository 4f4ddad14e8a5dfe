//! Instance model, text format and the minimization objective.
//!
//! Vertex ids are 1-based in files and 0-based in memory: file id `k` is
//! vertex `k - 1`. All printing goes through [`Instance::display_id`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::multigraph::Multigraph;

/// Absolute tolerance used for value equality throughout the crate.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
    pub profit: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn key(&self) -> (usize, usize) {
        ordered(self.u, self.v)
    }
}

pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A validated PCRPP instance restricted to the component of the root.
///
/// Edges outside the root component are kept aside in `dropped` so the
/// constant they add to every objective value stays visible.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    vertex_count: usize,
    root: usize,
    edges: Vec<Edge>,
    dropped: Vec<Edge>,
    opt_max: Option<f64>,
    index: HashMap<(usize, usize), usize>,
}

impl Instance {
    /// Builds and validates an instance. Edges that cannot be reached from
    /// the root are moved to the dropped list.
    pub fn new(vertex_count: usize, root: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidInstance("vertex count must be positive".into()));
        }
        if root >= vertex_count {
            return Err(Error::InvalidInstance(format!("root {root} out of range")));
        }
        let mut seen = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::InvalidInstance(format!("edge {i} has vertex out of range")));
            }
            if e.u == e.v {
                return Err(Error::InvalidInstance(format!("edge {i} is a loop")));
            }
            if !(e.length >= 0.0) || !e.length.is_finite() {
                return Err(Error::InvalidInstance(format!("edge {i} has negative length")));
            }
            if !(e.profit >= 0.0) || !e.profit.is_finite() {
                return Err(Error::InvalidInstance(format!("edge {i} has negative profit")));
            }
            if seen.insert(e.key(), i).is_some() {
                return Err(Error::InvalidInstance(format!("edge {i} duplicates a pair")));
            }
        }
        let reach = reachable(vertex_count, root, &edges);
        let (kept, dropped): (Vec<Edge>, Vec<Edge>) =
            edges.into_iter().partition(|e| reach[e.u]);
        let index = kept.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
        Ok(Instance { vertex_count, root, edges: kept, dropped, opt_max: None, index })
    }

    pub fn with_opt_max(mut self, opt_max: Option<f64>) -> Self {
        self.opt_max = opt_max;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Edges of the root component.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges removed because they are unreachable from the root.
    pub fn dropped_edges(&self) -> &[Edge] {
        &self.dropped
    }

    /// Profit of unreachable edges; uncollectable by every walk.
    pub fn dropped_profit(&self) -> f64 {
        self.dropped.iter().map(|e| e.profit).sum()
    }

    pub fn opt_max(&self) -> Option<f64> {
        self.opt_max
    }

    /// Total profit of the retained edges.
    pub fn total_profit(&self) -> f64 {
        self.edges.iter().map(|e| e.profit).sum()
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&ordered(u, v)).copied()
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Vertices touched by a retained edge, plus the root.
    pub fn active_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.vertex_count];
        on[self.root] = true;
        for e in &self.edges {
            on[e.u] = true;
            on[e.v] = true;
        }
        (0..self.vertex_count).filter(|&v| on[v]).collect()
    }

    /// Adjacency list `(neighbor, edge id)` over retained edges.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        adj
    }

    pub fn display_id(v: usize) -> usize {
        v + 1
    }

    /// Serializes to the text format; `parse_instance` inverts it.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let m = self.edges.len() + self.dropped.len();
        let _ = writeln!(s, "{} {} {}", self.vertex_count, m, self.root + 1);
        if let Some(o) = self.opt_max {
            let _ = writeln!(s, "OPTMAX {o:?}");
        }
        for e in self.edges.iter().chain(&self.dropped) {
            let _ = writeln!(s, "{} {} {:?} {:?}", e.u + 1, e.v + 1, e.length, e.profit);
        }
        s
    }
}

fn reachable(n: usize, root: usize, edges: &[Edge]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Parses the whitespace-separated instance format.
///
/// ```text
/// # comment
/// n m r
/// OPTMAX 12.5        (optional, anywhere after the header)
/// u v w p            (m lines, 1-based vertex ids)
/// ```
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut opt_max = None;
    let mut edges = Vec::new();
    let mut keys: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields[0].eq_ignore_ascii_case("OPTMAX") {
            if fields.len() != 2 {
                return Err(ParseError::OptMax { line, msg: "expected one value".into() });
            }
            let v: f64 = fields[1]
                .parse()
                .map_err(|e| ParseError::OptMax { line, msg: format!("{e}") })?;
            if !v.is_finite() {
                return Err(ParseError::OptMax { line, msg: "not finite".into() });
            }
            opt_max = Some(v);
            continue;
        }
        let Some((n, _, _)) = header else {
            if fields.len() != 3 {
                return Err(ParseError::MalformedHeader {
                    line,
                    msg: format!("expected `n m r`, got {} fields", fields.len()),
                });
            }
            let mut nums = [0usize; 3];
            for (k, f) in fields.iter().enumerate() {
                nums[k] = f.parse().map_err(|_| ParseError::MalformedHeader {
                    line,
                    msg: format!("`{f}` is not a nonnegative integer"),
                })?;
            }
            let [n, m, r] = nums;
            if n == 0 {
                return Err(ParseError::MalformedHeader { line, msg: "no vertices".into() });
            }
            if r == 0 || r > n {
                return Err(ParseError::RootOutOfRange { root: r, n });
            }
            header = Some((n, m, r));
            continue;
        };
        if fields.len() != 4 {
            return Err(ParseError::MalformedEdge {
                line,
                msg: format!("expected `u v w p`, got {} fields", fields.len()),
            });
        }
        let parse_vertex = |f: &str| -> Result<usize, ParseError> {
            let v: usize = f.parse().map_err(|_| ParseError::MalformedEdge {
                line,
                msg: format!("`{f}` is not a vertex id"),
            })?;
            if v == 0 || v > n {
                return Err(ParseError::VertexOutOfRange { line, v, n });
            }
            Ok(v - 1)
        };
        let parse_real = |f: &str| -> Result<f64, ParseError> {
            let x: f64 = f.parse().map_err(|_| ParseError::MalformedEdge {
                line,
                msg: format!("`{f}` is not a number"),
            })?;
            if !x.is_finite() {
                return Err(ParseError::MalformedEdge { line, msg: format!("`{f}` not finite") });
            }
            Ok(x)
        };
        let u = parse_vertex(fields[0])?;
        let v = parse_vertex(fields[1])?;
        let length = parse_real(fields[2])?;
        let profit = parse_real(fields[3])?;
        if u == v {
            return Err(ParseError::LoopEdge { line, v: u + 1 });
        }
        if length < 0.0 {
            return Err(ParseError::NegativeLength { line, value: length });
        }
        if profit < 0.0 {
            return Err(ParseError::NegativeProfit { line, value: profit });
        }
        if keys.insert(ordered(u, v), line).is_some() {
            return Err(ParseError::DuplicateEdge { line, u: u + 1, v: v + 1 });
        }
        edges.push(Edge { u, v, length, profit });
    }
    let (n, m, r) = header.ok_or(ParseError::Empty)?;
    if edges.len() != m {
        return Err(ParseError::EdgeCount { expected: m, found: edges.len() });
    }
    let inst = Instance::new(n, r - 1, edges).map_err(|e| ParseError::MalformedHeader {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(inst.with_opt_max(opt_max))
}

/// A closed walk given by its vertex sequence. `[root]` is the empty walk.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    pub vertices: Vec<usize>,
}

impl Walk {
    pub fn trivial(root: usize) -> Self {
        Walk { vertices: vec![root] }
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Traversal count per retained edge id.
    pub fn traversals(&self, inst: &Instance) -> Result<BTreeMap<usize, usize>> {
        let vs = &self.vertices;
        if vs.first() != Some(&inst.root()) || vs.last() != Some(&inst.root()) {
            return Err(Error::InvalidWalk("walk must start and end at the root".into()));
        }
        let mut counts = BTreeMap::new();
        for pair in vs.windows(2) {
            let id = inst.edge_between(pair[0], pair[1]).ok_or_else(|| {
                Error::InvalidWalk(format!(
                    "no edge {}-{}",
                    Instance::display_id(pair[0]),
                    Instance::display_id(pair[1])
                ))
            })?;
            *counts.entry(id).or_insert(0) += 1;
        }
        Ok(counts)
    }

    pub fn to_multigraph(&self) -> Multigraph {
        let mut m = Multigraph::new();
        for pair in self.vertices.windows(2) {
            m.add(pair[0], pair[1], 1);
        }
        m
    }

    pub fn length(&self, inst: &Instance) -> Result<f64> {
        let t = self.traversals(inst)?;
        Ok(t.iter().map(|(&id, &k)| k as f64 * inst.edge(id).length).sum())
    }
}

/// Walk length plus the profit of every retained edge the walk never traverses.
pub fn objective(inst: &Instance, walk: &Walk) -> Result<f64> {
    let t = walk.traversals(inst)?;
    let mut value = 0.0;
    for (id, e) in inst.edges().iter().enumerate() {
        match t.get(&id) {
            Some(&k) => value += k as f64 * e.length,
            None => value += e.profit,
        }
    }
    Ok(value)
}
