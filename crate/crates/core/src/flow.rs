//! Integer max-flow on small unit-capacity networks (Edmonds-Karp).

use std::collections::VecDeque;

pub(crate) const INF: u32 = u32::MAX / 2;

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
}

impl FlowNetwork {
    pub(crate) fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Arc `u -> v` plus its zero-capacity reverse.
    pub(crate) fn add_arc(&mut self, u: usize, v: usize, cap: u32) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Pushes flow from `s` to `t` until no augmenting path is left or the
    /// flow value reaches `limit`. Returns the flow value.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let n = self.adj.len();
        let mut flow = 0;
        let mut parent_arc = vec![usize::MAX; n];
        while flow < limit {
            parent_arc.fill(usize::MAX);
            let mut queue = VecDeque::from([s]);
            let mut found = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && v != s && parent_arc[v] == usize::MAX {
                        parent_arc[v] = e;
                        if v == t {
                            found = true;
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !found {
                break;
            }
            let mut bottleneck = u32::MAX;
            let mut v = t;
            while v != s {
                let e = parent_arc[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = parent_arc[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            flow += bottleneck;
        }
        flow
    }

    /// Nodes that can reach `t` in the residual network.
    pub(crate) fn residual_reaching(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            for &e in &self.adj[v] {
                let u = self.to[e];
                if self.cap[e ^ 1] > 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Nodes reachable from `s` in the residual network.
    pub(crate) fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Minimum set of vertices separating non-adjacent `s` and `t` in an
/// undirected graph given as local adjacency lists. Returns `None` when the
/// flow reaches `limit` before finishing, i.e. the cut is not smaller than
/// `limit`. Among minimum cuts, the one closest to `s` is returned, or the
/// one closest to `t` when `sink_side` is set.
pub(crate) fn local_vertex_cut(
    adj: &[Vec<usize>],
    s: usize,
    t: usize,
    limit: u32,
    sink_side: bool,
) -> Option<Vec<usize>> {
    let n = adj.len();
    let (inn, out) = (|v: usize| 2 * v, |v: usize| 2 * v + 1);
    let mut net = FlowNetwork::new(2 * n);
    for (v, neighbors) in adj.iter().enumerate() {
        net.add_arc(inn(v), out(v), 1);
        for &w in neighbors {
            net.add_arc(out(v), inn(w), INF);
        }
    }
    let flow = net.max_flow(out(s), inn(t), limit);
    if flow >= limit {
        return None;
    }
    let cut: Vec<usize> = if sink_side {
        let reach = net.residual_reaching(inn(t));
        (0..n)
            .filter(|&v| v != s && v != t && reach[out(v)] && !reach[inn(v)])
            .collect()
    } else {
        let reach = net.residual_reachable(out(s));
        (0..n)
            .filter(|&v| v != s && v != t && reach[inn(v)] && !reach[out(v)])
            .collect()
    };
    debug_assert_eq!(cut.len() as u32, flow);
    Some(cut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 3);
        net.add_arc(0, 2, 2);
        net.add_arc(1, 2, 1);
        net.add_arc(1, 3, 2);
        net.add_arc(2, 3, 3);
        assert_eq!(net.max_flow(0, 3, u32::MAX), 5);
    }

    #[test]
    fn limit_stops_early() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, 1);
        net.add_arc(0, 1, 1);
        assert_eq!(net.max_flow(0, 1, 1), 1);
    }

    #[test]
    fn cycle_cut() {
        // 4-cycle 0-1-2-3-0; separate 0 from 2.
        let adj = vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![2, 0]];
        assert_eq!(
            local_vertex_cut(&adj, 0, 2, u32::MAX, false),
            Some(vec![1, 3])
        );
        assert_eq!(local_vertex_cut(&adj, 0, 2, 2, false), None);
    }

    #[test]
    fn source_and_sink_side_cuts() {
        // Path 0-1-2-3: separating 0 from 3 can remove 1 or 2.
        let adj = vec![vec![1], vec![0, 2], vec![1, 3], vec![2]];
        assert_eq!(local_vertex_cut(&adj, 0, 3, u32::MAX, false), Some(vec![1]));
        assert_eq!(local_vertex_cut(&adj, 0, 3, u32::MAX, true), Some(vec![2]));
    }
}
