//! Graphs, edge weightings, grid-valued signals, partitions and the three
//! denoising objectives (l0 edge count, weighted edge count, total variation).
//!
//! Edges are stored canonically as `(i, j)` with `i < j`, sorted
//! lexicographically. Every per-edge array in the crate is aligned with this
//! order, and every penalty sum runs over edges in this order so objective
//! values are bit-reproducible.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Immutable simple undirected graph with compressed adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    // (neighbor, edge index), grouped by vertex via `offsets`.
    adjacency: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on `n` vertices. Edge endpoints may be given in either
    /// order; self-loops and duplicate undirected edges are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut canon = Vec::new();
        for (index, (u, v)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { index, u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }

        let mut degree = vec![0usize; n];
        for &(i, j) in &canon {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![(0, 0); 2 * canon.len()];
        for (e, &(i, j)) in canon.iter().enumerate() {
            adjacency[fill[i]] = (j, e);
            fill[i] += 1;
            adjacency[fill[j]] = (i, e);
            fill[j] += 1;
        }
        Ok(Self {
            n,
            edges: canon,
            offsets,
            adjacency,
        })
    }

    /// Linear chain `0 - 1 - ... - (n-1)`.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Cycle on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Four-neighbour `rows x cols` lattice, vertices in row-major order.
    pub fn lattice(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::new(n, edges)
    }

    /// Chain on vertices `0..chain_len` whose last vertex is joined by a single
    /// edge to a clique on the following `clique_size` vertices.
    pub fn tadpole(chain_len: usize, clique_size: usize) -> Result<Self> {
        if chain_len == 0 || clique_size == 0 {
            return Err(Error::InvalidParameter("tadpole parts must be non-empty".into()));
        }
        let mut edges: Vec<_> = (1..chain_len).map(|i| (i - 1, i)).collect();
        edges.push((chain_len - 1, chain_len));
        for i in 0..clique_size {
            for j in i + 1..clique_size {
                edges.push((chain_len + i, chain_len + j));
            }
        }
        Self::new(chain_len + clique_size, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list, `i < j`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `v` together with the index of the connecting edge.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Index of edge `{u, v}` if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Component id per vertex, ids assigned in order of smallest vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for root in 0..self.n {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = next;
            stack.push(root);
            while let Some(v) = stack.pop() {
                for &(u, _) in self.neighbors(v) {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Errors with a pair of vertices from different components if the graph
    /// is disconnected.
    pub fn check_connected(&self) -> Result<()> {
        let comp = self.components();
        match comp.iter().position(|&c| c != 0) {
            None => Ok(()),
            Some(v) => Err(Error::Disconnected(0, v)),
        }
    }

    /// If the graph is a simple path, returns its vertices in path order
    /// starting from the smaller-id endpoint.
    pub fn path_order(&self) -> Option<Vec<usize>> {
        if self.n == 1 {
            return Some(vec![0]);
        }
        if self.edges.len() != self.n - 1 || (0..self.n).any(|v| self.degree(v) > 2) {
            return None;
        }
        let start = (0..self.n).find(|&v| self.degree(v) == 1)?;
        let mut order = Vec::with_capacity(self.n);
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            order.push(cur);
            let next = self.neighbors(cur).iter().map(|&(u, _)| u).find(|&u| u != prev);
            match next {
                Some(u) => {
                    prev = cur;
                    cur = u;
                }
                None => break,
            }
        }
        (order.len() == self.n).then_some(order)
    }

    pub fn is_chain(&self) -> bool {
        self.path_order().is_some()
    }
}

/// Nonnegative per-edge penalty multipliers aligned with [`Graph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeighting(Vec<f64>);

impl EdgeWeighting {
    pub fn new(weights: Vec<f64>, g: &Graph) -> Result<Self> {
        if weights.len() != g.num_edges() {
            return Err(Error::Dimension {
                expected: g.num_edges(),
                got: weights.len(),
            });
        }
        if let Some(e) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "edge weight {} at edge {e} must be finite and nonnegative",
                weights[e]
            )));
        }
        Ok(Self(weights))
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn unit(g: &Graph) -> Self {
        Self(vec![1.0; g.num_edges()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    /// Total weight, summed in edge order.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Uniform grid of admissible values `origin + k * spacing`, `lo <= k <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    origin: f64,
    spacing: f64,
    lo: i64,
    hi: i64,
}

impl Grid {
    pub fn new(origin: f64, spacing: f64, lo: i64, hi: i64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if lo > hi {
            return Err(Error::InvalidGrid(format!("empty index range [{lo}, {hi}]")));
        }
        Ok(Self {
            origin,
            spacing,
            lo,
            hi,
        })
    }

    /// Grid on multiples of `spacing` spanning the rounded minimum and maximum
    /// of `values`.
    pub fn covering(values: &[f64], spacing: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("no values to cover".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let probe = Self::new(0.0, spacing, 0, 0)?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(0.0, spacing, probe.round_index(min), probe.round_index(max))
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    pub fn value(&self, k: i64) -> f64 {
        self.origin + k as f64 * self.spacing
    }

    /// Index of the nearest grid point, ties rounded away from zero. The result
    /// is not clamped to `[lo, hi]`.
    pub fn round_index(&self, x: f64) -> i64 {
        ((x - self.origin) / self.spacing).round() as i64
    }

    pub fn indices(&self) -> impl DoubleEndedIterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// Grid-valued signal: one integer grid index per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    labels: Vec<i64>,
    grid: Grid,
}

impl LabeledSignal {
    pub fn new(labels: Vec<i64>, grid: Grid) -> Result<Self> {
        if let Some(&label) = labels.iter().find(|&&k| !grid.contains(k)) {
            return Err(Error::LabelOutOfRange {
                label,
                lo: grid.lo(),
                hi: grid.hi(),
            });
        }
        Ok(Self { labels, grid })
    }

    pub fn constant(n: usize, label: i64, grid: Grid) -> Result<Self> {
        Self::new(vec![label; n], grid)
    }

    /// Rounds each value to the nearest grid point.
    pub fn from_values(values: &[f64], grid: Grid) -> Result<Self> {
        Self::new(values.iter().map(|&x| grid.round_index(x)).collect(), grid)
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i64 {
        self.labels[i]
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.grid.value(self.labels[i])
    }

    pub fn values(&self) -> Vec<f64> {
        self.labels.iter().map(|&k| self.grid.value(k)).collect()
    }

    pub fn num_distinct(&self) -> usize {
        self.labels.iter().collect::<HashSet<_>>().len()
    }

    pub fn is_constant(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [i64] {
        &mut self.labels
    }
}

/// Multi-cut of the vertex set: disjoint non-empty blocks (not necessarily
/// connected) and the edges joining different blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block: Vec<usize>,
    k: usize,
    boundary: Vec<usize>,
}

impl Partition {
    /// Groups vertices by arbitrary keys; block ids are assigned in order of
    /// first appearance.
    pub fn from_keys<K: Eq + std::hash::Hash + Copy>(keys: &[K], g: &Graph) -> Result<Self> {
        if keys.len() != g.n() {
            return Err(Error::Dimension {
                expected: g.n(),
                got: keys.len(),
            });
        }
        let mut ids = std::collections::HashMap::new();
        let block: Vec<usize> = keys
            .iter()
            .map(|key| {
                let next = ids.len();
                *ids.entry(*key).or_insert(next)
            })
            .collect();
        let boundary = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| block[i] != block[j])
            .map(|(e, _)| e)
            .collect();
        Ok(Self {
            block,
            k: ids.len(),
            boundary,
        })
    }

    pub fn block(&self, v: usize) -> usize {
        self.block[v]
    }

    pub fn blocks(&self) -> &[usize] {
        &self.block
    }

    pub fn num_blocks(&self) -> usize {
        self.k
    }

    /// Indices of cut edges, ascending.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }
}

/// The partition induced by equal labels.
pub fn induced_partition(sig: &LabeledSignal, g: &Graph) -> Result<Partition> {
    Partition::from_keys(sig.labels(), g)
}

/// Total weight of the partition boundary, summed in edge order.
pub fn cut_weight(p: &Partition, w: &EdgeWeighting) -> f64 {
    p.boundary().iter().map(|&e| w.get(e)).sum()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// `0.5 * ||y - mu||^2`.
pub fn half_squared_residual(y: &[f64], mu: &[f64]) -> Result<f64> {
    check_len(y.len(), mu.len())?;
    Ok(0.5 * y.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// `0.5 * ||y - mu||^2 + lambda * #{edges with mu_i != mu_j}`.
pub fn objective_l0(y: &[f64], mu: &[f64], lambda: f64, g: &Graph) -> Result<f64> {
    check_len(g.n(), y.len())?;
    check_len(g.n(), mu.len())?;
    let cuts = g.edges().iter().filter(|&&(i, j)| mu[i] != mu[j]).count();
    Ok(half_squared_residual(y, mu)? + lambda * cuts as f64)
}

/// `0.5 * ||y - mu||^2 + lambda * sum of w over edges with mu_i != mu_j`.
pub fn objective_w(y: &[f64], mu: &[f64], lambda: f64, g: &Graph, w: &EdgeWeighting) -> Result<f64> {
    check_len(g.n(), y.len())?;
    check_len(g.n(), mu.len())?;
    check_len(g.num_edges(), w.len())?;
    let penalty: f64 = g
        .edges()
        .iter()
        .zip(w.as_slice())
        .filter(|(&(i, j), _)| mu[i] != mu[j])
        .map(|(_, &we)| we)
        .sum();
    Ok(half_squared_residual(y, mu)? + lambda * penalty)
}

/// `0.5 * ||y - mu||^2 + lambda * sum |mu_i - mu_j|`.
pub fn objective_tv(y: &[f64], mu: &[f64], lambda: f64, g: &Graph) -> Result<f64> {
    check_len(g.n(), y.len())?;
    check_len(g.n(), mu.len())?;
    let tv: f64 = g.edges().iter().map(|&(i, j)| (mu[i] - mu[j]).abs()).sum();
    Ok(half_squared_residual(y, mu)? + lambda * tv)
}

/// Weighted count of edges whose endpoint labels differ, in edge order.
pub fn labeled_penalty(sig: &LabeledSignal, g: &Graph, w: &EdgeWeighting) -> Result<f64> {
    check_len(g.n(), sig.len())?;
    check_len(g.num_edges(), w.len())?;
    let labels = sig.labels();
    Ok(g.edges()
        .iter()
        .zip(w.as_slice())
        .filter(|(&(i, j), _)| labels[i] != labels[j])
        .map(|(_, &we)| we)
        .sum())
}

/// Weighted objective of a grid-valued signal; value equality is decided on
/// integer labels.
pub fn labeled_objective(
    y: &[f64],
    sig: &LabeledSignal,
    lambda: f64,
    g: &Graph,
    w: &EdgeWeighting,
) -> Result<f64> {
    check_len(g.n(), y.len())?;
    let penalty = labeled_penalty(sig, g, w)?;
    let residual = 0.5
        * y.iter()
            .enumerate()
            .map(|(i, &yi)| {
                let d = yi - sig.value(i);
                d * d
            })
            .sum::<f64>();
    Ok(residual + lambda * penalty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_and_rejects_bad_edges() {
        let g = Graph::new(3, [(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1).len(), 2);
        assert_eq!(Graph::new(3, [(0, 1), (1, 0)]), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(Graph::new(3, [(1, 1)]), Err(Error::SelfLoop(1)));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(Error::VertexOutOfRange { .. })));
        assert_eq!(Graph::new(0, []), Err(Error::EmptyGraph));
    }

    #[test]
    fn adjacency_lists_each_edge_twice() {
        let g = Graph::lattice(3, 4).unwrap();
        let mut seen = vec![0; g.num_edges()];
        for v in 0..g.n() {
            for &(u, e) in g.neighbors(v) {
                let (a, b) = g.edges()[e];
                assert!((a, b) == (u.min(v), u.max(v)));
                seen[e] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 2));
    }

    #[test]
    fn connectivity_and_chains() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.check_connected(), Err(Error::Disconnected(0, 2)));
        assert!(Graph::chain(5).unwrap().is_chain());
        let shuffled = Graph::new(4, [(2, 0), (0, 3), (3, 1)]).unwrap();
        assert_eq!(shuffled.path_order(), Some(vec![1, 3, 0, 2]));
        assert!(!Graph::lattice(2, 2).unwrap().is_chain());
        assert!(!Graph::tadpole(3, 3).unwrap().is_chain());
        assert!(Graph::chain(1).unwrap().is_chain());
    }

    #[test]
    fn named_graph_sizes() {
        assert_eq!(Graph::complete(5).unwrap().num_edges(), 10);
        assert_eq!(Graph::lattice(7, 7).unwrap().num_edges(), 84);
        let t = Graph::tadpole(50, 50).unwrap();
        assert_eq!((t.n(), t.num_edges()), (100, 49 + 1 + 1225));
        assert!(t.is_connected());
    }

    #[test]
    fn objective_l0_examples() {
        let g = Graph::chain(4).unwrap();
        let y = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(objective_l0(&y, &y, 0.5, &g).unwrap(), 0.5);
        assert_eq!(objective_l0(&y, &[0.5; 4], 0.5, &g).unwrap(), 0.5);
        let g6 = Graph::chain(6).unwrap();
        let y6 = [1.0, 1.0, 5.0, 5.0, 1.0, 1.0];
        assert_eq!(objective_l0(&y6, &y6, 1.0, &g6).unwrap(), 2.0);
        assert!(matches!(objective_l0(&y, &[0.0; 3], 1.0, &g), Err(Error::Dimension { .. })));
    }

    #[test]
    fn objective_w_examples() {
        let g = Graph::chain(2).unwrap();
        let w = EdgeWeighting::new(vec![0.25], &g).unwrap();
        assert_eq!(objective_w(&[0.0, 1.0], &[0.0, 1.0], 2.0, &g, &w).unwrap(), 0.5);
        let g4 = Graph::chain(4).unwrap();
        let y = [0.0, 0.3, 1.0, 1.2];
        let mu = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(
            objective_w(&y, &mu, 0.7, &g4, &EdgeWeighting::unit(&g4)).unwrap(),
            objective_l0(&y, &mu, 0.7, &g4).unwrap()
        );
        assert!(EdgeWeighting::new(vec![-1.0], &g).is_err());
        assert!(EdgeWeighting::new(vec![1.0, 1.0], &g).is_err());
    }

    #[test]
    fn objective_tv_examples() {
        let g = Graph::chain(2).unwrap();
        assert_eq!(objective_tv(&[0.0, 2.0], &[0.5, 1.5], 0.5, &g).unwrap(), 0.75);
        let g3 = Graph::chain(3).unwrap();
        assert_eq!(objective_tv(&[1.0, 2.0, 3.0], &[2.0; 3], 5.0, &g3).unwrap(), 1.0);
    }

    #[test]
    fn induced_partition_examples() {
        let grid = Grid::new(0.0, 1.0, 0, 5).unwrap();
        let g = Graph::chain(5).unwrap();
        let constant = LabeledSignal::constant(5, 2, grid).unwrap();
        let p = induced_partition(&constant, &g).unwrap();
        assert_eq!((p.num_blocks(), p.boundary().len()), (1, 0));

        let distinct = LabeledSignal::new(vec![0, 1, 2, 3, 4], grid).unwrap();
        let p = induced_partition(&distinct, &g).unwrap();
        assert_eq!((p.num_blocks(), p.boundary()), (5, &[0usize, 1, 2, 3][..]));

        // (a, a, b, b, a): two label classes, three runs.
        let runs = LabeledSignal::new(vec![1, 1, 3, 3, 1], grid).unwrap();
        let p = induced_partition(&runs, &g).unwrap();
        assert_eq!(p.num_blocks(), 2);
        assert_eq!(p.boundary(), &[1, 3]);
        assert_eq!(p.block(4), p.block(0));
    }

    #[test]
    fn cut_weight_examples() {
        let g = Graph::chain(3).unwrap();
        let grid = Grid::new(0.0, 1.0, 0, 2).unwrap();
        let unit = EdgeWeighting::unit(&g);
        let p = induced_partition(&LabeledSignal::constant(3, 0, grid).unwrap(), &g).unwrap();
        assert_eq!(cut_weight(&p, &unit), 0.0);
        let p = induced_partition(&LabeledSignal::new(vec![0, 1, 2], grid).unwrap(), &g).unwrap();
        assert_eq!(cut_weight(&p, &unit), 2.0);
    }

    #[test]
    fn grid_rounding_and_labels() {
        let grid = Grid::covering(&[-0.005, 0.994, 0.2], 0.01).unwrap();
        assert_eq!((grid.lo(), grid.hi()), (-1, 99));
        assert_eq!(grid.round_index(0.125), 13);
        assert_eq!(Grid::new(0.0, 1.0, 0, 0).unwrap().round_index(-2.5), -3);
        assert!(Grid::new(0.0, 0.0, 0, 1).is_err());
        assert!(Grid::new(0.0, 1.0, 2, 1).is_err());
        let g = Grid::new(0.0, 1.0, 0, 3).unwrap();
        assert_eq!(
            LabeledSignal::new(vec![0, 4], g),
            Err(Error::LabelOutOfRange { label: 4, lo: 0, hi: 3 })
        );
    }

    #[test]
    fn labeled_objective_uses_integer_equality() {
        // Spacing that is not exactly representable; values still compare by label.
        let grid = Grid::new(0.1, 0.1, 0, 10).unwrap();
        let g = Graph::chain(3).unwrap();
        let sig = LabeledSignal::new(vec![3, 3, 4], grid).unwrap();
        let w = EdgeWeighting::unit(&g);
        let y = sig.values();
        assert_eq!(labeled_objective(&y, &sig, 2.0, &g, &w).unwrap(), 2.0);
    }
}
