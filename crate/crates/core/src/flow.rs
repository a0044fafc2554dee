//! Integral maximum flow (Dinic), sized for the small networks built here.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    rev: usize,
    cap: u64,
    orig: u64,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
    handles: Vec<(usize, usize)>,
}

/// Index of an edge added with [`FlowNetwork::add_edge`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EdgeHandle(usize);

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], handles: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> EdgeHandle {
        let fwd = self.adj[from].len();
        let bwd = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Edge { to, rev: bwd, cap, orig: cap });
        self.adj[to].push(Edge { to: from, rev: fwd, cap: 0, orig: 0 });
        self.handles.push((from, fwd));
        EdgeHandle(self.handles.len() - 1)
    }

    /// Flow currently routed through an edge.
    pub fn flow(&self, e: EdgeHandle) -> u64 {
        let (u, i) = self.handles[e.0];
        let edge = &self.adj[u][i];
        edge.orig - edge.cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        if source == sink {
            return 0;
        }
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for e in &self.adj[u] {
                    if e.cap > 0 && level[e.to] == usize::MAX {
                        level[e.to] = level[u] + 1;
                        queue.push_back(e.to);
                    }
                }
            }
            if level[sink] == usize::MAX {
                return total;
            }
            let mut iter = vec![0usize; n];
            loop {
                let pushed = self.augment(source, sink, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, sink: usize, limit: u64, level: &[usize], iter: &mut [usize]) -> u64 {
        if u == sink {
            return limit;
        }
        while iter[u] < self.adj[u].len() {
            let Edge { to, rev, cap, .. } = self.adj[u][iter[u]];
            if cap > 0 && level[to] == level[u] + 1 {
                let pushed = self.augment(to, sink, limit.min(cap), level, iter);
                if pushed > 0 {
                    self.adj[u][iter[u]].cap -= pushed;
                    self.adj[to][rev].cap += pushed;
                    return pushed;
                }
            }
            iter[u] += 1;
        }
        0
    }
}
