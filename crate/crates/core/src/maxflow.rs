//! Edmonds–Karp maximum flow on real capacities.

use std::collections::VecDeque;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    rev: usize,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    adj: Vec<Vec<Edge>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub value: f64,
    /// `true` for nodes reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let (rf, rt) = (self.adj[to].len(), self.adj[from].len());
        self.adj[from].push(Edge { to, cap, rev: rf + usize::from(from == to) });
        self.adj[to].push(Edge {
            to: from,
            cap: 0.0,
            rev: rt,
        });
    }

    /// Runs BFS augmentation to completion and returns the minimum cut.
    pub fn min_cut(mut self, s: usize, t: usize) -> MinCut {
        let n = self.adj.len();
        let mut value = 0.0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (ei, e) in self.adj[u].iter().enumerate() {
                    if e.cap > EPS && !seen[e.to] {
                        seen[e.to] = true;
                        prev[e.to] = Some((u, ei));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[t] {
                return MinCut {
                    value,
                    source_side: seen,
                };
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while let Some((u, ei)) = prev[v] {
                bottleneck = bottleneck.min(self.adj[u][ei].cap);
                v = u;
            }
            let mut v = t;
            while let Some((u, ei)) = prev[v] {
                self.adj[u][ei].cap -= bottleneck;
                let rev = self.adj[u][ei].rev;
                self.adj[v][rev].cap += bottleneck;
                v = u;
            }
            value += bottleneck;
        }
    }
}
