//! Dinic's algorithm on integer capacities with residual-graph queries.

use std::collections::VecDeque;

/// Flow network in arc-list form. Arcs are stored in pairs: arc `2i` and its
/// reverse `2i + 1`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    head: Vec<u32>,
    residual: Vec<i64>,
    tail_start: Vec<u32>,
    adj: Vec<u32>,
    pending: Vec<(u32, u32, i64, i64)>,
    built: bool,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            head: Vec::new(),
            residual: Vec::new(),
            tail_start: Vec::new(),
            adj: Vec::new(),
            pending: Vec::new(),
            built: false,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Adds `u -> v` with capacity `cap` and `v -> u` with capacity `rev_cap`.
    pub fn add_arc_pair(&mut self, u: usize, v: usize, cap: i64, rev_cap: i64) {
        debug_assert!(!self.built && cap >= 0 && rev_cap >= 0);
        self.pending.push((u as u32, v as u32, cap, rev_cap));
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) {
        self.add_arc_pair(u, v, cap, 0);
    }

    pub fn add_undirected(&mut self, u: usize, v: usize, cap: i64) {
        self.add_arc_pair(u, v, cap, cap);
    }

    fn build(&mut self) {
        if self.built {
            return;
        }
        let m = self.pending.len();
        self.head = Vec::with_capacity(2 * m);
        self.residual = Vec::with_capacity(2 * m);
        let mut deg = vec![0u32; self.n + 1];
        for &(u, v, c, r) in &self.pending {
            self.head.push(v);
            self.residual.push(c);
            self.head.push(u);
            self.residual.push(r);
            deg[u as usize + 1] += 1;
            deg[v as usize + 1] += 1;
        }
        for i in 0..self.n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        self.adj = vec![0; 2 * m];
        for (i, &(u, v, _, _)) in self.pending.iter().enumerate() {
            self.adj[fill[u as usize] as usize] = 2 * i as u32;
            fill[u as usize] += 1;
            self.adj[fill[v as usize] as usize] = 2 * i as u32 + 1;
            fill[v as usize] += 1;
        }
        self.tail_start = deg;
        self.pending = Vec::new();
        self.built = true;
    }

    #[inline]
    fn arcs(&self, u: usize) -> &[u32] {
        &self.adj[self.tail_start[u] as usize..self.tail_start[u + 1] as usize]
    }

    /// Maximum flow value from `s` to `t`; leaves the residual graph in place.
    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        self.build();
        let n = self.n;
        let mut level = vec![-1i32; n];
        let mut iter = vec![0u32; n];
        let mut total: i64 = 0;
        let mut queue = VecDeque::new();
        let mut stack: Vec<(usize, u32)> = Vec::new();
        loop {
            level.iter_mut().for_each(|l| *l = -1);
            level[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &a in self.arcs(u) {
                    let v = self.head[a as usize] as usize;
                    if self.residual[a as usize] > 0 && level[v] < 0 {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] < 0 {
                return total;
            }
            iter.copy_from_slice(&self.tail_start[..n]);
            // Iterative blocking-flow search with current-arc pointers.
            loop {
                stack.clear();
                let mut u = s;
                let found = loop {
                    if u == t {
                        break true;
                    }
                    let end = self.tail_start[u + 1];
                    let mut advanced = false;
                    while iter[u] < end {
                        let a = self.adj[iter[u] as usize];
                        let v = self.head[a as usize] as usize;
                        if self.residual[a as usize] > 0 && level[v] == level[u] + 1 {
                            stack.push((u, a));
                            u = v;
                            advanced = true;
                            break;
                        }
                        iter[u] += 1;
                    }
                    if !advanced {
                        // Dead end: retreat and retire the arc that led here.
                        level[u] = -1;
                        match stack.pop() {
                            None => break false,
                            Some((p, _)) => {
                                iter[p] += 1;
                                u = p;
                            }
                        }
                    }
                };
                if !found {
                    break;
                }
                let bottleneck = stack
                    .iter()
                    .map(|&(_, a)| self.residual[a as usize])
                    .min()
                    .unwrap_or(0);
                for &(_, a) in &stack {
                    self.residual[a as usize] -= bottleneck;
                    self.residual[(a ^ 1) as usize] += bottleneck;
                }
                total += bottleneck;
            }
        }
    }

    /// Nodes reachable from `s` through arcs with positive residual capacity.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &a in self.arcs(u) {
                let v = self.head[a as usize] as usize;
                if self.residual[a as usize] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes that can reach `t` through arcs with positive residual capacity.
    pub fn reaching(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![t];
        seen[t] = true;
        while let Some(v) = stack.pop() {
            // Arc u -> v is the reverse of the arc v -> u stored at `a ^ 1`.
            for &a in self.arcs(v) {
                let u = self.head[a as usize] as usize;
                if self.residual[(a ^ 1) as usize] > 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        let mut g = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 10),
            (0, 2, 10),
            (1, 3, 4),
            (1, 4, 8),
            (2, 4, 9),
            (3, 5, 10),
            (4, 3, 6),
            (4, 5, 10),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 19);
    }

    #[test]
    fn disconnected_gives_zero() {
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 10);
        g.add_edge(2, 3, 5);
        assert_eq!(g.max_flow(0, 3), 0);
        assert!(g.reachable_from(0)[1]);
        assert!(!g.reachable_from(0)[3]);
    }

    #[test]
    fn min_and_max_cuts_differ_on_ties() {
        // s -1- a -1- t: both {s} and {s, a} are minimum cuts.
        let mut g = FlowNetwork::new(3);
        g.add_undirected(0, 1, 1);
        g.add_undirected(1, 2, 1);
        assert_eq!(g.max_flow(0, 2), 1);
        let src = g.reachable_from(0);
        let snk = g.reaching(2);
        assert!(!src[1]);
        assert!(!snk[1]);
    }

    #[test]
    fn long_path_does_not_recurse() {
        let n = 200_000;
        let mut g = FlowNetwork::new(n);
        for i in 0..n - 1 {
            g.add_undirected(i, i + 1, 3);
        }
        assert_eq!(g.max_flow(0, n - 1), 3);
    }
}
