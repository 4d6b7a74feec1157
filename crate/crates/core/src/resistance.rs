//! Effective-resistance edge weights and spanning-tree utilities.
//!
//! `r(i, j) = (e_i - e_j)^T L^+ (e_i - e_j)` for the unweighted Laplacian `L`.
//! Since `e_i - e_j` is orthogonal to the all-ones nullspace of a connected
//! graph's Laplacian, the quadratic form is evaluated by solving against the
//! nonsingular `L + 11^T / n` instead of forming `L^+`.
//!
//! The same quantity is the fraction of spanning trees containing the edge;
//! [`resistances_by_tree_enumeration`] computes it that way on small graphs.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeWeighting, Graph};

/// Spanning-tree count above which enumeration is refused.
pub const MAX_ENUMERATED_TREES: f64 = 1e6;

/// Dense Laplacian of a connected graph, factored for pseudo-inverse products.
pub struct LaplacianOps {
    laplacian: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
}

impl LaplacianOps {
    pub fn new(g: &Graph) -> Result<Self> {
        g.check_connected()?;
        let laplacian = laplacian(g);
        let n = g.n();
        let shifted = DMatrix::from_fn(n, n, |i, j| laplacian[(i, j)] + 1.0 / n as f64);
        let factor = Cholesky::new(shifted)
            .ok_or_else(|| Error::Numerical("deflated Laplacian is not positive definite".into()))?;
        Ok(Self { laplacian, factor })
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// `L^+ b` for `b` orthogonal to the all-ones vector.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    /// `(e_i - e_j)^T L^+ (e_i - e_j)`.
    pub fn resistance(&self, i: usize, j: usize) -> f64 {
        let n = self.laplacian.nrows();
        let mut b = DVector::zeros(n);
        b[i] = 1.0;
        b[j] = -1.0;
        let x = self.solve(&b);
        x[i] - x[j]
    }
}

/// Unweighted graph Laplacian `D - A`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
    }
    l
}

/// Effective resistance of every edge, aligned with [`Graph::edges`].
pub fn effective_resistances(g: &Graph) -> Result<EdgeWeighting> {
    let ops = LaplacianOps::new(g)?;
    let r: Vec<f64> = g
        .edges()
        .par_iter()
        .map(|&(i, j)| ops.resistance(i, j))
        .collect();
    EdgeWeighting::new(r, g)
}

/// Number of spanning trees by the matrix-tree theorem.
pub fn spanning_tree_count(g: &Graph) -> f64 {
    let n = g.n();
    if n == 1 {
        return 1.0;
    }
    let l = laplacian(g);
    let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
    reduced.determinant().round().max(0.0)
}

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
    history: Vec<(usize, usize, bool)>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let bumped = self.rank[a] == self.rank[b];
        self.parent[b] = a;
        if bumped {
            self.rank[a] += 1;
        }
        self.history.push((a, b, bumped));
        true
    }

    fn rollback(&mut self) {
        let (a, b, bumped) = self.history.pop().expect("rollback without union");
        self.parent[b] = b;
        if bumped {
            self.rank[a] -= 1;
        }
    }
}

struct TreeEnumerator<'a> {
    g: &'a Graph,
    chosen: Vec<usize>,
    dsu: Dsu,
    trees: u64,
    containing: Vec<u64>,
}

impl TreeEnumerator<'_> {
    /// Whether chosen edges plus edges `from..` still connect the graph.
    fn can_span(&self, from: usize) -> bool {
        let mut dsu = Dsu::new(self.g.n());
        let edges = self.g.edges();
        let mut components = self.g.n();
        for &e in self.chosen.iter().chain(&(from..edges.len()).collect::<Vec<_>>()) {
            if dsu.union(edges[e].0, edges[e].1) {
                components -= 1;
            }
        }
        components == 1
    }

    fn recurse(&mut self, e: usize) {
        let n = self.g.n();
        if self.chosen.len() == n - 1 {
            self.trees += 1;
            for &c in &self.chosen {
                self.containing[c] += 1;
            }
            return;
        }
        if e == self.g.num_edges() {
            return;
        }
        let (i, j) = self.g.edges()[e];
        // Contract: keep edge e in the tree.
        if self.dsu.union(i, j) {
            self.chosen.push(e);
            self.recurse(e + 1);
            self.chosen.pop();
            self.dsu.rollback();
        }
        // Delete: leave e out, if the rest can still span.
        if self.can_span(e + 1) {
            self.recurse(e + 1);
        }
    }
}

/// Fraction of spanning trees containing each edge, by exhaustive enumeration.
pub fn resistances_by_tree_enumeration(g: &Graph) -> Result<EdgeWeighting> {
    g.check_connected()?;
    let expected = spanning_tree_count(g);
    if expected > MAX_ENUMERATED_TREES {
        return Err(Error::TooLarge(format!(
            "{expected} spanning trees exceeds the enumeration limit {MAX_ENUMERATED_TREES}"
        )));
    }
    let mut walker = TreeEnumerator {
        g,
        chosen: Vec::with_capacity(g.n()),
        dsu: Dsu::new(g.n()),
        trees: 0,
        containing: vec![0; g.num_edges()],
    };
    walker.recurse(0);
    if walker.trees as f64 != expected {
        return Err(Error::Numerical(format!(
            "enumerated {} spanning trees but the matrix-tree theorem gives {expected}",
            walker.trees
        )));
    }
    let total = walker.trees as f64;
    EdgeWeighting::new(
        walker.containing.iter().map(|&c| c as f64 / total).collect(),
        g,
    )
}

/// Smallest `c > 0` with `c * w >= r` edgewise, and the rescaled weighting.
pub fn rescale_to_dominate(w: &EdgeWeighting, r: &EdgeWeighting) -> Result<(EdgeWeighting, f64)> {
    if w.len() != r.len() {
        return Err(Error::Dimension {
            expected: r.len(),
            got: w.len(),
        });
    }
    let mut c: f64 = 0.0;
    for (e, (&we, &re)) in w.as_slice().iter().zip(r.as_slice()).enumerate() {
        if re > 0.0 {
            if we == 0.0 {
                return Err(Error::NotScalable(e));
            }
            c = c.max(re / we);
        }
    }
    if c == 0.0 {
        return Err(Error::InvalidParameter("reference weighting is identically zero".into()));
    }
    let scaled = w.as_slice().iter().map(|&we| c * we).collect();
    Ok((EdgeWeighting::from_raw(scaled), c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn triangle_and_complete_graphs() {
        let r = effective_resistances(&Graph::complete(3).unwrap()).unwrap();
        assert!(close(r.as_slice(), &[2.0 / 3.0; 3], 1e-12));
        for n in 3..=8 {
            let r = effective_resistances(&Graph::complete(n).unwrap()).unwrap();
            assert!(r.as_slice().iter().all(|&x| (x - 2.0 / n as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn bridges_have_unit_resistance() {
        let g = Graph::tadpole(4, 5).unwrap();
        let r = effective_resistances(&g).unwrap();
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            if j < 5 {
                assert!((r.get(e) - 1.0).abs() < 1e-12, "edge ({i}, {j})");
            } else {
                assert!((r.get(e) - 0.4).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(effective_resistances(&g).unwrap_err(), Error::Disconnected(0, 2));
        assert!(resistances_by_tree_enumeration(&g).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let tree = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert!(close(resistances_by_tree_enumeration(&tree).unwrap().as_slice(), &[1.0; 4], 0.0));
        let c4 = Graph::cycle(4).unwrap();
        assert!(close(resistances_by_tree_enumeration(&c4).unwrap().as_slice(), &[0.75; 4], 0.0));
        let k4 = Graph::complete(4).unwrap();
        assert!(close(resistances_by_tree_enumeration(&k4).unwrap().as_slice(), &[0.5; 6], 0.0));
        assert_eq!(spanning_tree_count(&k4), 16.0);
    }

    #[test]
    fn enumeration_guard() {
        // K_10 has 10^8 spanning trees.
        let g = Graph::complete(10).unwrap();
        assert!(matches!(resistances_by_tree_enumeration(&g), Err(Error::TooLarge(_))));
    }

    #[test]
    fn single_vertex() {
        let g = Graph::new(1, []).unwrap();
        assert!(effective_resistances(&g).unwrap().is_empty());
        assert!(resistances_by_tree_enumeration(&g).unwrap().is_empty());
    }

    #[test]
    fn rescale_examples() {
        let k4 = Graph::complete(4).unwrap();
        let r = effective_resistances(&k4).unwrap();
        let (scaled, c) = rescale_to_dominate(&r, &r).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(scaled, r);

        let (scaled, c) = rescale_to_dominate(&EdgeWeighting::unit(&k4), &r).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert!(scaled.as_slice().iter().zip(r.as_slice()).all(|(s, x)| *s >= *x - 1e-15));

        let t = Graph::tadpole(3, 4).unwrap();
        let rt = effective_resistances(&t).unwrap();
        let (_, c) = rescale_to_dominate(&EdgeWeighting::unit(&t), &rt).unwrap();
        assert!((c - 1.0).abs() < 1e-12);

        let mut zeroed = vec![1.0; 6];
        zeroed[2] = 0.0;
        let w = EdgeWeighting::new(zeroed, &k4).unwrap();
        assert_eq!(rescale_to_dominate(&w, &r).unwrap_err(), Error::NotScalable(2));
    }
}
