//! Dinic max-flow on undirected graphs with real capacities.

use std::collections::VecDeque;

const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
    flow: f64,
}

/// Reusable flow network. Each undirected edge becomes a pair of arcs that
/// both carry the edge capacity.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    arcs: Vec<Arc>,
    head: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

/// Value of a maximum flow and the source side of a minimum cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub value: f64,
    pub source_side: Vec<bool>,
}

impl Cut {
    pub fn members(&self) -> Vec<usize> {
        (0..self.source_side.len()).filter(|&v| self.source_side[v]).collect()
    }
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            arcs: Vec::new(),
            head: vec![Vec::new(); n],
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    /// Network over `n` vertices plus two spare slots used by
    /// [`FlowNetwork::multi_cut`].
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut net = FlowNetwork::new(n + 2);
        net.n = n + 2;
        for (u, v, c) in edges {
            if c > 0.0 && u != v {
                net.add_undirected(u, v, c);
            }
        }
        net
    }

    pub fn add_undirected(&mut self, u: usize, v: usize, cap: f64) {
        self.head[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap, flow: 0.0 });
        self.head[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap, flow: 0.0 });
    }

    fn add_directed(&mut self, u: usize, v: usize, cap: f64) {
        self.head[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap, flow: 0.0 });
        self.head[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: 0.0, flow: 0.0 });
    }

    fn reset(&mut self) {
        for a in &mut self.arcs {
            a.flow = 0.0;
        }
    }

    fn residual(&self, a: usize) -> f64 {
        self.arcs[a].cap - self.arcs[a].flow
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.arcs[a].to;
                if self.level[v] < 0 && self.residual(a) > RESIDUAL_EPS {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.head[u].len() {
            let a = self.head[u][self.next[u]];
            let v = self.arcs[a].to;
            let r = self.residual(a);
            if self.level[v] == self.level[u] + 1 && r > RESIDUAL_EPS {
                let got = self.dfs(v, t, pushed.min(r));
                if got > 0.0 {
                    self.arcs[a].flow += got;
                    self.arcs[a ^ 1].flow -= got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }

    /// Maximum `s`-`t` flow; previous flow state is discarded.
    pub fn min_cut(&mut self, s: usize, t: usize) -> Cut {
        assert_ne!(s, t, "source and sink must differ");
        self.reset();
        let mut value = 0.0;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                value += f;
            }
        }
        let source_side = (0..self.n).map(|v| self.level[v] >= 0).collect();
        Cut { value, source_side }
    }

    /// Minimum cut separating all `sources` from all `sinks`. Uses the two
    /// spare vertices reserved by [`FlowNetwork::from_edges`]; the returned
    /// side vector excludes them.
    pub fn multi_cut(&self, sources: &[usize], sinks: &[usize]) -> Cut {
        let mut net = self.clone();
        let s = net.n - 2;
        let t = net.n - 1;
        for &v in sources {
            net.add_directed(s, v, f64::INFINITY);
        }
        for &v in sinks {
            net.add_directed(v, t, f64::INFINITY);
        }
        let mut cut = net.min_cut(s, t);
        cut.source_side.truncate(self.n - 2);
        cut
    }
}

/// One-shot minimum `s`-`t` cut on `n` vertices.
pub fn max_flow_min_cut(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    s: usize,
    t: usize,
) -> Cut {
    let mut net = FlowNetwork::from_edges(n, edges);
    let mut cut = net.min_cut(s, t);
    cut.source_side.truncate(n);
    cut
}
