//! Alpha-expansion on a value grid.
//!
//! [`best_expansion`] finds, for a fixed new value `c`, the subset of vertices
//! whose switch to `c` lowers the weighted objective the most. It does so with
//! one minimum s-t cut on an augmented network: each vertex gets a source arc
//! carrying the cost of taking value `c` and a sink arc carrying the cost of
//! keeping its current value (infinite if it already equals `c`). An edge whose
//! endpoints agree is a single arc of weight `lambda * w` (zero if the shared
//! value is `c`); an edge whose endpoints disagree becomes an auxiliary node
//! tied to both endpoints and to the sink. Vertices on the sink side of the
//! cut take value `c`.
//!
//! [`denoise`] starts from the rounded mean and sweeps `c` over the grid,
//! accepting an expansion when it lowers the objective by at least `tau`
//! (strictly, when `tau == 0`), until a full sweep changes nothing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    half_squared_residual, labeled_objective, labeled_penalty, EdgeWeighting, Graph, Grid,
    LabeledSignal,
};
use crate::maxflow::FlowNetwork;

/// Relative slack used when comparing objective values in certificates.
pub const CERTIFICATE_RTOL: f64 = 1e-9;

/// Relative slack of the local-minimality check.
pub const LOCAL_MIN_RTOL: f64 = 1e-10;

/// Largest vertex count accepted by exhaustive local-minimality checks.
pub const EXHAUSTIVE_MAX_VERTICES: usize = 16;

/// Order in which each sweep visits the grid values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
    /// A fresh permutation per sweep, drawn from the given seed.
    Shuffled(u64),
}

/// One instance of the weighted objective together with its value grid.
#[derive(Debug, Clone)]
pub struct ExpansionProblem<'a> {
    graph: &'a Graph,
    weights: &'a EdgeWeighting,
    y: &'a [f64],
    lambda: f64,
    grid: Grid,
    tau: f64,
    order: SweepOrder,
}

impl<'a> ExpansionProblem<'a> {
    /// Problem on the grid of multiples of `delta` spanning the rounded range
    /// of `y`, with `tau = 0` and ascending sweeps.
    pub fn new(
        graph: &'a Graph,
        weights: &'a EdgeWeighting,
        y: &'a [f64],
        lambda: f64,
        delta: f64,
    ) -> Result<Self> {
        if y.len() != graph.n() {
            return Err(Error::Dimension {
                expected: graph.n(),
                got: y.len(),
            });
        }
        if weights.len() != graph.num_edges() {
            return Err(Error::Dimension {
                expected: graph.num_edges(),
                got: weights.len(),
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        let grid = Grid::covering(y, delta)?;
        Ok(Self {
            graph,
            weights,
            y,
            lambda,
            grid,
            tau: 0.0,
            order: SweepOrder::Ascending,
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
        }
        self.tau = tau;
        Ok(self)
    }

    /// Replaces the grid; it must contain the rounded minimum and maximum of `y`.
    pub fn with_grid(mut self, grid: Grid) -> Result<Self> {
        let (min, max) = min_max(self.y);
        if !grid.contains(grid.round_index(min)) || !grid.contains(grid.round_index(max)) {
            return Err(Error::InvalidGrid(format!(
                "grid [{}, {}] does not cover the data range [{min}, {max}]",
                grid.value(grid.lo()),
                grid.value(grid.hi())
            )));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn weights(&self) -> &EdgeWeighting {
        self.weights
    }

    pub fn y(&self) -> &[f64] {
        self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> SweepOrder {
        self.order
    }

    /// Weighted objective of a grid-valued signal.
    pub fn objective(&self, sig: &LabeledSignal) -> Result<f64> {
        labeled_objective(self.y, sig, self.lambda, self.graph, self.weights)
    }

    fn check_signal(&self, sig: &LabeledSignal) -> Result<()> {
        if sig.len() != self.graph.n() {
            return Err(Error::Dimension {
                expected: self.graph.n(),
                got: sig.len(),
            });
        }
        if let Some(&label) = sig.labels().iter().find(|&&k| !self.grid.contains(k)) {
            return Err(Error::LabelOutOfRange {
                label,
                lo: self.grid.lo(),
                hi: self.grid.hi(),
            });
        }
        Ok(())
    }
}

fn min_max(y: &[f64]) -> (f64, f64) {
    y.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Reusable network buffers for repeated expansion moves.
#[derive(Debug, Default)]
pub struct ExpansionSolver {
    net: FlowNetwork,
}

impl ExpansionSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Best expansion of `state` with new grid index `c`.
    pub fn best_expansion(
        &mut self,
        state: &LabeledSignal,
        c: i64,
        prob: &ExpansionProblem<'_>,
    ) -> Result<LabeledSignal> {
        prob.check_signal(state)?;
        if !prob.grid.contains(c) {
            return Err(Error::LabelOutOfRange {
                label: c,
                lo: prob.grid.lo(),
                hi: prob.grid.hi(),
            });
        }
        let g = prob.graph;
        let n = g.n();
        let (s, t) = (n, n + 1);
        let labels = state.labels();
        let grid = state.grid();
        let c_value = prob.grid.value(c);
        let net = &mut self.net;
        net.reset(n + 2, s, t)?;

        for (i, &yi) in prob.y.iter().enumerate() {
            let to_c = 0.5 * (yi - c_value) * (yi - c_value);
            if to_c > 0.0 {
                net.add_arc(s, i, to_c)?;
            }
            let keep = if labels[i] == c {
                f64::INFINITY
            } else {
                let d = yi - grid.value(labels[i]);
                0.5 * d * d
            };
            if keep > 0.0 {
                net.add_arc(i, t, keep)?;
            }
        }
        for (e, &(i, j)) in g.edges().iter().enumerate() {
            let weight = prob.lambda * prob.weights.get(e);
            if weight == 0.0 {
                continue;
            }
            let (li, lj) = (labels[i], labels[j]);
            if li == lj {
                if li != c {
                    net.add_undirected(i, j, weight)?;
                }
            } else {
                let aux = net.add_node();
                if li != c {
                    net.add_undirected(i, aux, weight)?;
                }
                if lj != c {
                    net.add_undirected(j, aux, weight)?;
                }
                net.add_undirected(aux, t, weight)?;
            }
        }

        let cut = net.min_cut()?;
        let mut out = state.clone();
        for (i, label) in out.labels_mut().iter_mut().enumerate() {
            if !cut.source_side[i] {
                *label = c;
            }
        }
        Ok(out)
    }
}

/// Among all expansions of `state` to grid index `c`, returns one of lowest
/// weighted objective.
pub fn best_expansion(
    state: &LabeledSignal,
    c: i64,
    prob: &ExpansionProblem<'_>,
) -> Result<LabeledSignal> {
    ExpansionSolver::new().best_expansion(state, c, prob)
}

/// Output of [`denoise`].
#[derive(Debug, Clone)]
pub struct DenoiseReport {
    pub signal: LabeledSignal,
    pub objective: f64,
    /// Full sweeps over the grid, including the final sweep without changes.
    pub sweeps: usize,
    /// Objective after initialization and after every accepted expansion.
    pub trace: Vec<f64>,
}

impl DenoiseReport {
    pub fn accepted_moves(&self) -> usize {
        self.trace.len() - 1
    }
}

/// Computes a `(tau, delta Z)`-local-minimizer of the weighted objective.
pub fn denoise(prob: &ExpansionProblem<'_>) -> Result<DenoiseReport> {
    let grid = prob.grid;
    let n = prob.graph.n();
    let mean = prob.y.iter().sum::<f64>() / n as f64;
    let start = grid.round_index(mean).clamp(grid.lo(), grid.hi());
    let mut state = LabeledSignal::constant(n, start, grid)?;
    let mut objective = prob.objective(&state)?;
    let mut trace = vec![objective];
    let mut solver = ExpansionSolver::new();
    let mut values: Vec<i64> = grid.indices().collect();
    if prob.order == SweepOrder::Descending {
        values.reverse();
    }
    let mut rng = match prob.order {
        SweepOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if let Some(rng) = rng.as_mut() {
            values.shuffle(rng);
        }
        let mut changed = false;
        for &c in &values {
            let candidate = solver.best_expansion(&state, c, prob)?;
            let value = prob.objective(&candidate)?;
            let accept = if prob.tau > 0.0 {
                value <= objective - prob.tau
            } else {
                value < objective
            };
            if accept {
                debug_assert!(value < objective);
                state = candidate;
                objective = value;
                trace.push(objective);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(DenoiseReport {
        signal: state,
        objective,
        sweeps,
        trace,
    })
}

/// How [`verify_local_min`] searches for improving expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Every grid value and every vertex subset; limited to
    /// [`EXHAUSTIVE_MAX_VERTICES`] vertices.
    Exhaustive,
    /// One minimum-cut expansion per grid value.
    Cut,
}

/// Whether no expansion to a grid value lowers the objective of `sig` by more
/// than `tau`.
pub fn verify_local_min(
    sig: &LabeledSignal,
    prob: &ExpansionProblem<'_>,
    mode: VerifyMode,
) -> Result<bool> {
    prob.check_signal(sig)?;
    let base = prob.objective(sig)?;
    let threshold = base - prob.tau - LOCAL_MIN_RTOL * base.abs().max(1.0);
    match mode {
        VerifyMode::Cut => {
            let mut solver = ExpansionSolver::new();
            for c in prob.grid.indices() {
                let best = solver.best_expansion(sig, c, prob)?;
                if prob.objective(&best)? < threshold {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        VerifyMode::Exhaustive => {
            let n = prob.graph.n();
            if n > EXHAUSTIVE_MAX_VERTICES {
                return Err(Error::TooLarge(format!(
                    "exhaustive local-minimum check limited to {EXHAUSTIVE_MAX_VERTICES} vertices, got {n}"
                )));
            }
            let mut trial = sig.clone();
            for c in prob.grid.indices() {
                let movable: Vec<usize> = (0..n).filter(|&i| sig.label(i) != c).collect();
                for mask in 1u32..(1u32 << movable.len()) {
                    trial.labels_mut().copy_from_slice(sig.labels());
                    for (bit, &i) in movable.iter().enumerate() {
                        if mask & (1 << bit) != 0 {
                            trial.labels_mut()[i] = c;
                        }
                    }
                    if prob.objective(&trial)? < threshold {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Checks `F_w(sig) <= 1/2 ||Y - cand||^2 + 2 lambda ||D cand||_w + k tau`,
/// `k` the number of distinct values of `candidate`. Holds whenever `sig` is a
/// local minimizer.
pub fn factor2_certificate(
    sig: &LabeledSignal,
    candidate: &LabeledSignal,
    prob: &ExpansionProblem<'_>,
) -> Result<bool> {
    let lhs = prob.objective(sig)?;
    let residual = half_squared_residual(prob.y, &candidate.values())?;
    let penalty = labeled_penalty(candidate, prob.graph, prob.weights)?;
    let k = candidate.num_distinct() as f64;
    let rhs = residual + 2.0 * prob.lambda * penalty + k * prob.tau;
    Ok(lhs <= rhs + CERTIFICATE_RTOL * lhs.abs().max(rhs.abs()))
}
