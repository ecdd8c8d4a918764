//! Floating-point network flow: Dinic max-flow and successive-shortest-path
//! min-cost flow. Residual capacities below [`EPS`] count as saturated.

use std::collections::VecDeque;

pub(crate) const EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// A directed graph with paired residual edges.
#[derive(Clone, Debug)]
pub(crate) struct Network {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl Network {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], edges: Vec::new() }
    }

    /// Adds `from → to`; returns the edge id (its residual twin is `id ^ 1`).
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Route `amount` along a chain of forward edges before any search.
    pub fn preload(&mut self, path: &[usize], amount: f64) {
        for &e in path {
            self.edges[e].cap -= amount;
            self.edges[e ^ 1].cap += amount;
        }
    }

    /// Flow currently on a forward edge.
    pub fn flow(&self, id: usize) -> f64 {
        self.edges[id ^ 1].cap
    }

    fn levels(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1; self.adj.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                let Edge { to, cap, .. } = self.edges[e];
                if cap > EPS && level[to] < 0 {
                    level[to] = level[v] + 1;
                    q.push_back(to);
                }
            }
        }
        level
    }

    fn push(&mut self, v: usize, t: usize, limit: f64, level: &[i64], iter: &mut [usize]) -> f64 {
        if v == t {
            return limit;
        }
        while iter[v] < self.adj[v].len() {
            let e = self.adj[v][iter[v]];
            let Edge { to, cap, .. } = self.edges[e];
            if cap > EPS && level[to] == level[v] + 1 {
                let d = self.push(to, t, limit.min(cap), level, iter);
                if d > 0.0 {
                    self.edges[e].cap -= d;
                    self.edges[e ^ 1].cap += d;
                    return d;
                }
            }
            iter[v] += 1;
        }
        0.0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(s);
            if level[t] < 0 {
                return total;
            }
            let mut iter = vec![0; self.adj.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut iter);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
    }

    /// Nodes reachable from `s` through unsaturated residual edges.
    pub fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).iter().map(|&l| l >= 0).collect()
    }

    /// Send up to `amount` from `s` to `t` along successive shortest paths
    /// (Bellman–Ford, so negative residual costs are fine). Returns
    /// `(flow, cost)`.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, amount: f64) -> (f64, f64) {
        let n = self.adj.len();
        let (mut flow, mut cost) = (0.0, 0.0);
        while flow < amount - EPS {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev: Vec<Option<usize>> = vec![None; n];
            dist[s] = 0.0;
            for _ in 0..n {
                let mut changed = false;
                for v in 0..n {
                    if dist[v].is_infinite() {
                        continue;
                    }
                    for &e in &self.adj[v] {
                        let Edge { to, cap, cost: c } = self.edges[e];
                        if cap > EPS && dist[v] + c < dist[to] - 1e-13 {
                            dist[to] = dist[v] + c;
                            prev[to] = Some(e);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_infinite() {
                break;
            }
            let mut push = amount - flow;
            let mut v = t;
            while let Some(e) = prev[v] {
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while let Some(e) = prev[v] {
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
            cost += push * dist[t];
        }
        (flow, cost)
    }
}
