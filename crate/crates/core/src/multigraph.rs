use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instance::{ordered, Walk};

/// Undirected multigraph keyed by ordered vertex pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Multigraph {
    edges: BTreeMap<(usize, usize), usize>,
}

impl Multigraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` parallel copies of `u`-`v`. Loops are ignored.
    pub fn add(&mut self, u: usize, v: usize, count: usize) {
        if u == v || count == 0 {
            return;
        }
        *self.edges.entry(ordered(u, v)).or_insert(0) += count;
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.edges.get(&ordered(u, v)).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().sum()
    }

    /// `((u, v), multiplicity)` with `u < v`, in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.edges.iter().map(|(&k, &c)| (k, c))
    }

    pub fn extend(&mut self, other: &Multigraph) {
        for ((u, v), c) in other.iter() {
            self.add(u, v, c);
        }
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.edges.keys().flat_map(|&(u, v)| [u, v]).collect()
    }

    pub fn degree(&self, x: usize) -> usize {
        self.edges
            .iter()
            .filter(|(&(u, v), _)| u == x || v == x)
            .map(|(_, &c)| c)
            .sum()
    }

    /// Total length under a per-pair length function.
    pub fn weight(&self, mut len: impl FnMut(usize, usize) -> f64) -> f64 {
        self.iter().map(|((u, v), c)| c as f64 * len(u, v)).sum()
    }

    pub fn is_connected_with(&self, root: usize) -> bool {
        let vs = self.vertices();
        if vs.is_empty() {
            return true;
        }
        if !vs.contains(&root) {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([root]);
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(w, _) in adj.get(&u).into_iter().flatten() {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == vs.len()
    }

    fn adjacency(&self) -> BTreeMap<usize, Vec<(usize, usize)>> {
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for ((u, v), c) in self.iter() {
            adj.entry(u).or_default().push((v, c));
            adj.entry(v).or_default().push((u, c));
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }
}

/// Vertices of odd degree.
pub fn odd_vertices(m: &Multigraph) -> BTreeSet<usize> {
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for ((u, v), c) in m.iter() {
        *deg.entry(u).or_insert(0) += c;
        *deg.entry(v).or_insert(0) += c;
    }
    deg.into_iter().filter(|&(_, d)| d % 2 == 1).map(|(v, _)| v).collect()
}

/// Hierholzer's algorithm; always leaves a vertex through its smallest-id
/// neighbor with remaining multiplicity.
pub fn euler_tour(m: &Multigraph, root: usize) -> Result<Walk> {
    if m.is_empty() {
        return Ok(Walk::trivial(root));
    }
    if let Some(&v) = odd_vertices(m).iter().next() {
        return Err(Error::OddDegree(v));
    }
    if !m.is_connected_with(root) {
        return Err(Error::Disconnected(root));
    }
    let mut remaining: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for ((u, v), c) in m.iter() {
        remaining.entry(u).or_default().insert(v, c);
        remaining.entry(v).or_default().insert(u, c);
    }
    let mut take = |u: usize| -> Option<usize> {
        let nbrs = remaining.get_mut(&u)?;
        let (&w, _) = nbrs.iter().next()?;
        for (a, b) in [(u, w), (w, u)] {
            let list = remaining.get_mut(&a).expect("adjacency is symmetric");
            let c = list.get_mut(&b).expect("adjacency is symmetric");
            *c -= 1;
            if *c == 0 {
                list.remove(&b);
            }
        }
        Some(w)
    };
    let mut stack = vec![root];
    let mut circuit = Vec::with_capacity(m.edge_count() + 1);
    while let Some(&u) = stack.last() {
        match take(u) {
            Some(w) => stack.push(w),
            None => circuit.push(stack.pop().expect("nonempty")),
        }
    }
    circuit.reverse();
    Ok(Walk { vertices: circuit })
}
