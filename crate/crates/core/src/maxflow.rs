//! Minimum s-t cut by blocking flows (Dinic) on real-valued capacities.
//!
//! Infinite capacities may be passed as `f64::INFINITY`; at solve time they are
//! replaced by one plus the sum of all finite capacities, which no minimum cut
//! crosses when a finite cut exists. The returned source side is the set of
//! nodes reachable from the source in the final residual network, the unique
//! inclusion-minimal source side among all minimum cuts.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Handle to a directed arc. Arcs are created in pairs; `ArcId(a ^ 1)` is the
/// paired reverse arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArcId(pub usize);

impl ArcId {
    pub fn reverse(self) -> Self {
        ArcId(self.0 ^ 1)
    }
}

/// Result of [`FlowNetwork::min_cut`].
#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    /// Capacity of arcs from the source side to the sink side.
    pub value: f64,
    /// Value of the maximum flow found.
    pub max_flow: f64,
    /// `true` for nodes on the source side.
    pub source_side: Vec<bool>,
}

/// Directed capacitated network with designated source and sink.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    cap: Vec<f64>,
    // Solver state, kept between solves to reuse allocations.
    residual: Vec<f64>,
    offsets: Vec<usize>,
    order: Vec<usize>,
    level: Vec<usize>,
    cursor: Vec<usize>,
    stack: Vec<usize>,
    queue: VecDeque<usize>,
}

const UNREACHED: usize = usize::MAX;

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Result<Self> {
        let mut net = Self::default();
        net.reset(nodes, source, sink)?;
        Ok(net)
    }

    /// Removes all arcs and resizes, keeping allocations.
    pub fn reset(&mut self, nodes: usize, source: usize, sink: usize) -> Result<()> {
        if source >= nodes || sink >= nodes {
            return Err(Error::Network(format!(
                "terminals ({source}, {sink}) outside 0..{nodes}"
            )));
        }
        if source == sink {
            return Err(Error::Network("source and sink coincide".into()));
        }
        self.nodes = nodes;
        self.source = source;
        self.sink = sink;
        self.tail.clear();
        self.head.clear();
        self.cap.clear();
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn num_arcs(&self) -> usize {
        self.tail.len()
    }

    /// Appends a node and returns its id.
    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn push_pair(&mut self, u: usize, v: usize, forward: f64, backward: f64) -> Result<ArcId> {
        if u >= self.nodes || v >= self.nodes {
            return Err(Error::Network(format!("arc ({u}, {v}) outside 0..{}", self.nodes)));
        }
        for c in [forward, backward] {
            if c.is_nan() || c < 0.0 {
                return Err(Error::Network(format!("invalid capacity {c}")));
            }
        }
        let id = ArcId(self.tail.len());
        self.tail.extend([u, v]);
        self.head.extend([v, u]);
        self.cap.extend([forward, backward]);
        Ok(id)
    }

    /// Arc `u -> v` with capacity `cap` (and a zero-capacity reverse arc).
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> Result<ArcId> {
        self.push_pair(u, v, cap, 0.0)
    }

    /// Arcs `u -> v` and `v -> u`, each with capacity `cap`.
    pub fn add_undirected(&mut self, u: usize, v: usize, cap: f64) -> Result<ArcId> {
        self.push_pair(u, v, cap, cap)
    }

    /// Capacity assigned to infinite arcs at solve time.
    pub fn infinity_sentinel(&self) -> f64 {
        self.cap.iter().filter(|c| c.is_finite()).sum::<f64>() + 1.0
    }

    /// Capacity of an arc with infinite capacities resolved to the sentinel.
    fn effective_caps(&self) -> Vec<f64> {
        let sentinel = self.infinity_sentinel();
        self.cap
            .iter()
            .map(|&c| if c.is_finite() { c } else { sentinel })
            .collect()
    }

    /// Net flow on `arc` after the last solve (negative when flow runs along the
    /// reverse arc).
    pub fn arc_flow(&self, arc: ArcId) -> f64 {
        let caps = self.effective_caps();
        caps[arc.0] - self.residual[arc.0]
    }

    pub fn arc_endpoints(&self, arc: ArcId) -> (usize, usize) {
        (self.tail[arc.0], self.head[arc.0])
    }

    pub fn arc_capacity(&self, arc: ArcId) -> f64 {
        self.cap[arc.0]
    }

    fn build_csr(&mut self) {
        let n = self.nodes;
        self.offsets.clear();
        self.offsets.resize(n + 1, 0);
        for &u in &self.tail {
            self.offsets[u + 1] += 1;
        }
        for v in 0..n {
            self.offsets[v + 1] += self.offsets[v];
        }
        self.order.clear();
        self.order.resize(self.tail.len(), 0);
        self.cursor.clear();
        self.cursor.extend_from_slice(&self.offsets[..n]);
        for (a, &u) in self.tail.iter().enumerate() {
            self.order[self.cursor[u]] = a;
            self.cursor[u] += 1;
        }
    }

    fn bfs_levels(&mut self, eps: f64) -> bool {
        self.level.clear();
        self.level.resize(self.nodes, UNREACHED);
        self.queue.clear();
        self.level[self.source] = 0;
        self.queue.push_back(self.source);
        while let Some(v) = self.queue.pop_front() {
            for &a in &self.order[self.offsets[v]..self.offsets[v + 1]] {
                let u = self.head[a];
                if self.residual[a] > eps && self.level[u] == UNREACHED {
                    self.level[u] = self.level[v] + 1;
                    self.queue.push_back(u);
                }
            }
        }
        self.level[self.sink] != UNREACHED
    }

    /// Sends a blocking flow in the current level graph.
    fn blocking_flow(&mut self, eps: f64) -> f64 {
        self.cursor.clear();
        self.cursor.extend_from_slice(&self.offsets[..self.nodes]);
        self.stack.clear();
        let mut total = 0.0;
        let mut v = self.source;
        loop {
            if v == self.sink {
                let bottleneck = self
                    .stack
                    .iter()
                    .map(|&a| self.residual[a])
                    .fold(f64::INFINITY, f64::min);
                for &a in &self.stack {
                    self.residual[a] -= bottleneck;
                    self.residual[a ^ 1] += bottleneck;
                }
                total += bottleneck;
                let k = self
                    .stack
                    .iter()
                    .position(|&a| self.residual[a] <= eps)
                    .unwrap_or(0);
                v = self.tail[self.stack[k]];
                self.stack.truncate(k);
                continue;
            }
            let mut advanced = false;
            while self.cursor[v] < self.offsets[v + 1] {
                let a = self.order[self.cursor[v]];
                let u = self.head[a];
                if self.residual[a] > eps
                    && self.level[u] != UNREACHED
                    && self.level[u] == self.level[v] + 1
                {
                    self.stack.push(a);
                    v = u;
                    advanced = true;
                    break;
                }
                self.cursor[v] += 1;
            }
            if !advanced {
                if v == self.source {
                    return total;
                }
                self.level[v] = UNREACHED;
                let a = self.stack.pop().expect("non-source node has an entering arc");
                v = self.tail[a];
                self.cursor[v] += 1;
            }
        }
    }

    /// Computes a maximum flow and the canonical minimum cut.
    pub fn min_cut(&mut self) -> Result<MinCut> {
        if self.source >= self.nodes || self.sink >= self.nodes || self.source == self.sink {
            return Err(Error::Network("source or sink missing".into()));
        }
        let caps = self.effective_caps();
        let scale = caps.iter().sum::<f64>().max(1.0);
        let eps = scale * 1e-15;
        self.residual.clear();
        self.residual.extend_from_slice(&caps);
        self.build_csr();

        let mut max_flow = 0.0;
        while self.bfs_levels(eps) {
            let pushed = self.blocking_flow(eps);
            if pushed <= 0.0 {
                break;
            }
            max_flow += pushed;
        }

        // Final reachability in the residual network.
        let mut source_side = vec![false; self.nodes];
        source_side[self.source] = true;
        self.queue.clear();
        self.queue.push_back(self.source);
        while let Some(v) = self.queue.pop_front() {
            for &a in &self.order[self.offsets[v]..self.offsets[v + 1]] {
                let u = self.head[a];
                if self.residual[a] > eps && !source_side[u] {
                    source_side[u] = true;
                    self.queue.push_back(u);
                }
            }
        }
        if source_side[self.sink] {
            return Err(Error::Numerical("sink reachable after max flow".into()));
        }
        let value = (0..self.tail.len())
            .filter(|&a| source_side[self.tail[a]] && !source_side[self.head[a]])
            .map(|a| caps[a])
            .sum();
        Ok(MinCut {
            value,
            max_flow,
            source_side,
        })
    }

    /// Checks capacity feasibility and conservation of the last solved flow,
    /// with relative tolerance `tol`.
    pub fn flow_is_feasible(&self, tol: f64) -> bool {
        let caps = self.effective_caps();
        let scale = caps.iter().copied().fold(1.0, f64::max);
        let slack = tol * scale;
        let mut excess = vec![0.0; self.nodes];
        for a in 0..self.tail.len() {
            let r = self.residual[a];
            if r < -slack || r > caps[a] + caps[a ^ 1] + slack {
                return false;
            }
            excess[self.tail[a]] += caps[a] - r;
        }
        excess
            .iter()
            .enumerate()
            .all(|(v, &x)| v == self.source || v == self.sink || x.abs() <= slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 5.0).unwrap();
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 5.0);
        assert_eq!(cut.source_side, vec![true, false]);
    }

    #[test]
    fn undirected_and_parallel_arcs() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_undirected(0, 1, 3.0).unwrap();
        assert_eq!(net.min_cut().unwrap().value, 3.0);

        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 1.0).unwrap();
        net.add_arc(0, 1, 2.0).unwrap();
        assert_eq!(net.min_cut().unwrap().value, 3.0);
    }

    #[test]
    fn diamond() {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4, 0, 3).unwrap();
        net.add_arc(0, 1, 3.0).unwrap();
        net.add_arc(0, 2, 2.0).unwrap();
        net.add_arc(1, 3, 2.0).unwrap();
        net.add_arc(2, 3, 3.0).unwrap();
        net.add_undirected(1, 2, 1.0).unwrap();
        let cut = net.min_cut().unwrap();
        assert!((cut.value - 5.0).abs() < 1e-12);
        assert!((cut.max_flow - 5.0).abs() < 1e-12);
        assert!(net.flow_is_feasible(1e-9));
    }

    #[test]
    fn zero_capacity_arc_is_not_cut_when_alternatives_exist() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 0.0).unwrap();
        net.add_arc(1, 2, 4.0).unwrap();
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 0.0);
        assert_eq!(cut.source_side, vec![true, false, false]);
    }

    #[test]
    fn infinite_arcs_use_sentinel() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, f64::INFINITY).unwrap();
        net.add_arc(1, 2, 2.5).unwrap();
        net.add_arc(0, 2, 1.0).unwrap();
        assert_eq!(net.infinity_sentinel(), 4.5);
        let cut = net.min_cut().unwrap();
        assert_eq!(cut.value, 3.5);
        assert_eq!(cut.source_side, vec![true, true, false]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FlowNetwork::new(2, 0, 0).is_err());
        assert!(FlowNetwork::new(2, 0, 2).is_err());
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        assert!(net.add_arc(0, 5, 1.0).is_err());
        assert!(net.add_arc(0, 1, -1.0).is_err());
        assert!(net.add_arc(0, 1, f64::NAN).is_err());
    }

    #[test]
    fn reset_reuses_network() {
        let mut net = FlowNetwork::new(2, 0, 1).unwrap();
        net.add_arc(0, 1, 5.0).unwrap();
        net.min_cut().unwrap();
        net.reset(3, 0, 2).unwrap();
        net.add_arc(0, 1, 1.0).unwrap();
        net.add_arc(1, 2, 1.0).unwrap();
        assert_eq!(net.min_cut().unwrap().value, 1.0);
    }

    #[test]
    fn tied_cuts_return_minimal_source_side() {
        // s -> a -> t with equal capacities: both {s} and {s, a} are minimum.
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 1.0).unwrap();
        net.add_arc(1, 2, 1.0).unwrap();
        assert_eq!(net.min_cut().unwrap().source_side, vec![true, false, false]);
    }
}
