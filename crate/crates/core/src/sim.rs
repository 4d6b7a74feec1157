//! Simulation and tuning harness: synthetic signals, SI epidemics, noise-level
//! estimation, data-driven choice of `lambda`, and replicated risk experiments
//! reported as standardized mean squared error
//! `st.MSE = ||mu_hat - mu0||^2 / (n sigma^2)`.
//!
//! Tuning follows the randomization scheme: draw `z ~ N(0, alpha sigma_hat^2)`,
//! fit on `Y* = Y + z`, score against `Y** = Y - z / alpha`, and average the
//! score over `B` draws. For a fixed method the mean score estimates the risk
//! plus the constant `n (sigma^2 + sigma_hat^2 / alpha)`.
//!
//! All randomness is drawn from ChaCha streams derived from the scenario seed,
//! one stream per (noise level, replicate), so results do not depend on the
//! number of worker threads.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::exact_l0_chain_pruned;
use crate::error::{Error, Result};
use crate::expansion::{denoise, ExpansionProblem};
use crate::graph::{EdgeWeighting, Graph};
use crate::io;
use crate::resistance::effective_resistances;
use crate::tv::{lambda_max, tv_chain, tv_relaxed};

pub const EPIDEMIC_HIGH: f64 = 1.005;
pub const EPIDEMIC_LOW: f64 = 0.005;
pub const DEFAULT_ALPHA: f64 = 0.04;
pub const GRID_POINTS: usize = 25;
/// `Phi^{-1}(3/4)`.
const NORMAL_QUARTILE: f64 = 0.674_489_750_196_081_7;
const MIN_SIGMA_EDGES: usize = 10;

/// Tuning replicates: 20 up to 10^4 vertices, 5 above.
pub fn default_b(n: usize) -> usize {
    if n <= 10_000 {
        20
    } else {
        5
    }
}

/// Discrete-time SI epidemic from a uniformly random source.
///
/// In each of `steps` synchronous rounds every vertex infected at the start of
/// the round infects each susceptible neighbour independently with
/// probability `p`. Returns `high` on infected and `low` on other vertices.
pub fn simulate_epidemic_with_levels(
    g: &Graph,
    steps: usize,
    p: f64,
    high: f64,
    low: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    g.check_connected()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("infection probability {p} outside [0, 1]")));
    }
    let n = g.n();
    let mut infected = vec![false; n];
    infected[rng.gen_range(0..n)] = true;
    let mut frontier = Vec::new();
    for _ in 0..steps {
        frontier.clear();
        for v in (0..n).filter(|&v| infected[v]) {
            for &(u, _) in g.neighbors(v) {
                if !infected[u] && rng.gen_bool(p) {
                    frontier.push(u);
                }
            }
        }
        for &u in &frontier {
            infected[u] = true;
        }
    }
    Ok(infected.iter().map(|&x| if x { high } else { low }).collect())
}

/// [`simulate_epidemic_with_levels`] with levels 1.005 / 0.005.
pub fn simulate_epidemic(g: &Graph, steps: usize, p: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_epidemic_with_levels(g, steps, p, EPIDEMIC_HIGH, EPIDEMIC_LOW, &mut rng)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Draws the true signal from `signal` and then `Y = mu0 + sigma * N(0, I)`,
/// both from one stream seeded by `seed`.
pub fn simulate_observation(
    g: &Graph,
    signal: &SignalSpec,
    sigma: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu0 = signal.generate(g, &mut rng)?;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let y = mu0.iter().map(|m| m + sigma * normal.sample(&mut rng)).collect();
    Ok((mu0, y))
}

/// Robust noise level from edge differences: `median |Y_i - Y_j|` over edges,
/// divided by `Phi^{-1}(3/4) sqrt(2)`. Differences across the few edges
/// where the signal jumps barely move the median.
pub fn estimate_sigma(y: &[f64], g: &Graph) -> Result<f64> {
    if y.len() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: y.len(),
        });
    }
    if g.num_edges() < MIN_SIGMA_EDGES {
        return Err(Error::InvalidParameter(format!(
            "noise estimation needs at least {MIN_SIGMA_EDGES} edges, graph has {}",
            g.num_edges()
        )));
    }
    let mut diffs: Vec<f64> = g.edges().iter().map(|&(i, j)| (y[i] - y[j]).abs()).collect();
    Ok(median(&mut diffs) / (NORMAL_QUARTILE * std::f64::consts::SQRT_2))
}

/// `||mu_hat - mu0||^2 / (n sigma^2)`.
pub fn st_mse(mu_hat: &[f64], mu0: &[f64], sigma: f64) -> Result<f64> {
    if mu_hat.len() != mu0.len() {
        return Err(Error::Dimension {
            expected: mu0.len(),
            got: mu_hat.len(),
        });
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let sse: f64 = mu_hat.iter().zip(mu0).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sse / (mu0.len() as f64 * sigma * sigma))
}

/// `points` values spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln() / (points - 1) as f64;
            (0..points)
                .map(|k| if k == points - 1 { hi } else { lo * (ratio * k as f64).exp() })
                .collect()
        }
    }
}

/// Estimators compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    /// Alpha-expansion on the unweighted objective.
    L0,
    /// Alpha-expansion with effective-resistance edge weights.
    W,
    /// Exact l0 segmentation of a chain.
    ExactChain,
    /// Exact total-variation fit of a chain.
    TvChain,
    /// `alpha * TV + (1 - alpha) * debiased TV` on a chain.
    TvRelaxed(f64),
    /// `mu_hat = Y`.
    Identity,
    /// `mu_hat = mu0`, the true signal.
    Oracle,
}

impl Method {
    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn requires_chain(&self) -> bool {
        matches!(self, Method::ExactChain | Method::TvChain | Method::TvRelaxed(_))
    }

    /// Whether the method has a `lambda` to tune.
    pub fn is_penalized(&self) -> bool {
        !matches!(self, Method::Identity | Method::Oracle)
    }

    /// Default tuning grid for data `y` on the context's graph.
    pub fn lambda_grid(&self, ctx: &FitContext<'_>, y: &[f64], sigma_hat: f64) -> Result<Vec<f64>> {
        Ok(match self {
            Method::Identity | Method::Oracle => vec![0.0],
            Method::L0 | Method::W | Method::ExactChain => {
                let edges = ctx.graph.num_edges().max(2) as f64;
                let mut scale = sigma_hat * sigma_hat * edges.ln();
                if scale.is_nan() || scale <= 0.0 {
                    scale = 1.0;
                }
                geometric_grid(1e-3 * scale, 10.0 * scale, GRID_POINTS)
            }
            Method::TvChain | Method::TvRelaxed(_) => {
                let order = ctx.path_order()?;
                let lmax = lambda_max(&permute(y, order));
                if lmax > 0.0 {
                    geometric_grid(1e-3 * lmax, lmax, GRID_POINTS)
                } else {
                    vec![0.0]
                }
            }
        })
    }

    /// Fits the method to `y` at penalty `lambda`.
    pub fn fit(&self, ctx: &FitContext<'_>, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
        if y.len() != ctx.graph.n() {
            return Err(Error::Dimension {
                expected: ctx.graph.n(),
                got: y.len(),
            });
        }
        match self {
            Method::Identity => Ok(y.to_vec()),
            Method::Oracle => ctx
                .mu0
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::InvalidParameter("oracle method needs the true signal".into())),
            Method::L0 | Method::W => {
                let weights = match self {
                    Method::W => ctx.resistance()?,
                    _ => &ctx.unit,
                };
                let prob = ExpansionProblem::new(ctx.graph, weights, y, lambda, ctx.delta)?
                    .with_tau(ctx.tau)?;
                Ok(denoise(&prob)?.signal.values())
            }
            Method::ExactChain => {
                let order = ctx.path_order()?;
                let seg = exact_l0_chain_pruned(&permute(y, order), lambda)?;
                Ok(unpermute(&seg.fitted(), order))
            }
            Method::TvChain => {
                let order = ctx.path_order()?;
                Ok(unpermute(&tv_chain(&permute(y, order), lambda)?.mu, order))
            }
            Method::TvRelaxed(alpha) => {
                let order = ctx.path_order()?;
                Ok(unpermute(&tv_relaxed(&permute(y, order), lambda, *alpha)?, order))
            }
        }
    }
}

fn permute(y: &[f64], order: &[usize]) -> Vec<f64> {
    order.iter().map(|&v| y[v]).collect()
}

fn unpermute(x: &[f64], order: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (k, &v) in order.iter().enumerate() {
        out[v] = x[k];
    }
    out
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::L0 => f.write_str("l0"),
            Method::W => f.write_str("w"),
            Method::ExactChain => f.write_str("exact-chain"),
            Method::TvChain => f.write_str("tv-chain"),
            Method::TvRelaxed(a) => write!(f, "tv-relaxed:{a}"),
            Method::Identity => f.write_str("identity"),
            Method::Oracle => f.write_str("oracle"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let method = match head {
            "l0" => Method::L0,
            "w" => Method::W,
            "exact-chain" => Method::ExactChain,
            "tv-chain" => Method::TvChain,
            "tv-relaxed" => {
                let alpha = match arg {
                    Some(a) => a
                        .parse()
                        .map_err(|_| Error::UnknownMethod(format!("{s} (bad alpha)")))?,
                    None => 0.5,
                };
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(Error::InvalidParameter(format!("relaxation {alpha} outside [0, 1]")));
                }
                return Ok(Method::TvRelaxed(alpha));
            }
            "identity" => Method::Identity,
            "oracle" => Method::Oracle,
            _ => return Err(Error::UnknownMethod(s.to_string())),
        };
        if arg.is_some() {
            return Err(Error::UnknownMethod(s.to_string()));
        }
        Ok(method)
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> Self {
        m.to_string()
    }
}

/// Everything a method needs beyond the data and `lambda`.
#[derive(Debug, Clone)]
pub struct FitContext<'a> {
    graph: &'a Graph,
    unit: EdgeWeighting,
    resistance: Option<&'a EdgeWeighting>,
    order: Option<Vec<usize>>,
    mu0: Option<&'a [f64]>,
    delta: f64,
    tau: f64,
}

impl<'a> FitContext<'a> {
    /// Context with grid spacing `delta` and `tau = 0`.
    pub fn new(graph: &'a Graph, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {delta}")));
        }
        Ok(Self {
            graph,
            unit: EdgeWeighting::unit(graph),
            resistance: None,
            order: graph.path_order(),
            mu0: None,
            delta,
            tau: 0.0,
        })
    }

    pub fn with_resistance(mut self, r: &'a EdgeWeighting) -> Self {
        self.resistance = Some(r);
        self
    }

    pub fn with_truth(mut self, mu0: &'a [f64]) -> Self {
        self.mu0 = Some(mu0);
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn resistance(&self) -> Result<&EdgeWeighting> {
        self.resistance
            .ok_or_else(|| Error::InvalidParameter("weighted method needs edge resistances".into()))
    }

    fn path_order(&self) -> Result<&[usize]> {
        self.order.as_deref().ok_or(Error::NotAChain)
    }
}

/// Grid spacing `sigma_hat / sqrt(n)`, or a thousandth of the data range when
/// the noise estimate vanishes.
pub fn default_delta(y: &[f64], sigma_hat: f64) -> f64 {
    if sigma_hat > 0.0 {
        return sigma_hat / (y.len() as f64).sqrt();
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi > lo {
        (hi - lo) * 1e-3
    } else {
        1.0
    }
}

/// Settings of the randomized tuning scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOptions {
    pub b: usize,
    pub alpha: f64,
    pub sigma_hat: f64,
    pub seed: u64,
}

/// Output of [`tune_lambda`].
#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub grid: Vec<f64>,
    /// Mean of `||mu_hat(Y*) - Y**||^2` over the `b` draws, per grid point.
    pub mean_err: Vec<f64>,
    /// Standard error of each mean.
    pub stderr: Vec<f64>,
    pub chosen_index: usize,
    pub b: usize,
    pub alpha: f64,
    pub sigma_hat: f64,
    pub seed: u64,
}

impl TuneResult {
    pub fn chosen_lambda(&self) -> f64 {
        self.grid[self.chosen_index]
    }

    /// `n (1 + 1/alpha) sigma_hat^2`, the constant the mean score exceeds the
    /// risk by when `sigma_hat` equals the true noise level.
    pub fn offset(&self, n: usize) -> f64 {
        n as f64 * self.sigma_hat * self.sigma_hat * (1.0 + 1.0 / self.alpha)
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Randomized tuning with an arbitrary fitting rule `fit(y, lambda)`.
pub fn tune_with<F>(y: &[f64], grid: &[f64], opts: &TuneOptions, fit: F) -> Result<TuneResult>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if opts.b == 0 {
        return Err(Error::InvalidParameter("B must be at least 1".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", opts.alpha)));
    }
    if !(opts.sigma_hat >= 0.0 && opts.sigma_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid sigma_hat {}", opts.sigma_hat)));
    }
    let sd = (opts.alpha * opts.sigma_hat * opts.sigma_hat).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<Vec<f64>> = (0..opts.b)
        .map(|_| y.iter().map(|_| sd * normal.sample(&mut rng)).collect())
        .collect();

    let tasks: Vec<(usize, usize)> = (0..opts.b)
        .flat_map(|b| (0..grid.len()).map(move |k| (b, k)))
        .collect();
    let scores: Vec<f64> = tasks
        .par_iter()
        .map(|&(b, k)| {
            let z = &draws[b];
            let y_star: Vec<f64> = y.iter().zip(z).map(|(a, zi)| a + zi).collect();
            let mu = fit(&y_star, grid[k])?;
            let err: f64 = mu
                .iter()
                .zip(y.iter().zip(z))
                .map(|(m, (a, zi))| {
                    let d = m - (a - zi / opts.alpha);
                    d * d
                })
                .sum();
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite score at lambda {}", grid[k])));
            }
            Ok(err)
        })
        .collect::<Result<_>>()?;

    let mut mean_err = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let column: Vec<f64> = (0..opts.b).map(|b| scores[b * grid.len() + k]).collect();
        let (m, s) = mean_and_stderr(&column);
        mean_err.push(m);
        stderr.push(s);
    }
    let chosen_index = argmin(&mean_err);
    Ok(TuneResult {
        grid: grid.to_vec(),
        mean_err,
        stderr,
        chosen_index,
        b: opts.b,
        alpha: opts.alpha,
        sigma_hat: opts.sigma_hat,
        seed: opts.seed,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = k;
        }
    }
    best
}

/// Randomized tuning of `method` over `grid`.
pub fn tune_lambda(
    y: &[f64],
    ctx: &FitContext<'_>,
    method: Method,
    grid: &[f64],
    opts: &TuneOptions,
) -> Result<TuneResult> {
    tune_with(y, grid, opts, |ys, lambda| method.fit(ctx, ys, lambda))
}

/// Graph description: `chain:N`, `cycle:N`, `lattice:RxC`, `complete:N`,
/// `tadpole:C+K` (chain of `C` joined to a `K`-clique) or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Chain(usize),
    Cycle(usize),
    Lattice(usize, usize),
    Complete(usize),
    Tadpole(usize, usize),
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Chain(n) => Graph::chain(*n),
            GraphSpec::Cycle(n) => Graph::cycle(*n),
            GraphSpec::Lattice(r, c) => Graph::lattice(*r, *c),
            GraphSpec::Complete(n) => Graph::complete(*n),
            GraphSpec::Tadpole(c, k) => Graph::tadpole(*c, *k),
            GraphSpec::File(path) => Ok(io::read_edge_list(path)?.graph),
        }
    }
}

fn spec_err(kind: &str, s: &str) -> Error {
    Error::InvalidParameter(format!("invalid {kind} spec {s:?}"))
}

fn parse_usize(s: &str, kind: &str, whole: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| spec_err(kind, whole))
}

fn parse_f64(s: &str, kind: &str, whole: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| spec_err(kind, whole))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(spec_err(kind, whole))
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').ok_or_else(|| spec_err("graph", s))?;
        let pair = |sep: char| -> Result<(usize, usize)> {
            let (a, b) = arg.split_once(sep).ok_or_else(|| spec_err("graph", s))?;
            Ok((parse_usize(a, "graph", s)?, parse_usize(b, "graph", s)?))
        };
        Ok(match kind {
            "chain" => GraphSpec::Chain(parse_usize(arg, "graph", s)?),
            "cycle" => GraphSpec::Cycle(parse_usize(arg, "graph", s)?),
            "complete" => GraphSpec::Complete(parse_usize(arg, "graph", s)?),
            "lattice" => {
                let (r, c) = pair('x')?;
                GraphSpec::Lattice(r, c)
            }
            "tadpole" => {
                let (c, k) = pair('+')?;
                GraphSpec::Tadpole(c, k)
            }
            "file" if !arg.is_empty() => GraphSpec::File(PathBuf::from(arg)),
            _ => return Err(spec_err("graph", s)),
        })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Chain(n) => write!(f, "chain:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Lattice(r, c) => write!(f, "lattice:{r}x{c}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Tadpole(c, k) => write!(f, "tadpole:{c}+{k}"),
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(g: GraphSpec) -> Self {
        g.to_string()
    }
}

/// True-signal description, laid out along vertex ids.
///
/// - `constant:V`
/// - `steps:K[:H]`: `K` equally spaced breaks alternating between 0 and `H`
///   (default 1)
/// - `piecewise:B1,B2,..:L0,L1,..`: level `L_k` from vertex `B_k` on
/// - `epidemic:T=..,p=..[,high=..,low=..]`: SI epidemic after `T` rounds
/// - `file:PATH`: a signal file
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SignalSpec {
    Constant(f64),
    Steps { breaks: usize, height: f64 },
    Piecewise { breakpoints: Vec<usize>, levels: Vec<f64> },
    Epidemic { steps: usize, p: f64, high: f64, low: f64 },
    File(PathBuf),
}

impl SignalSpec {
    /// Builds the signal on `g`; randomized kinds draw from `rng`.
    pub fn generate(&self, g: &Graph, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let n = g.n();
        match self {
            SignalSpec::Constant(v) => Ok(vec![*v; n]),
            SignalSpec::Steps { breaks, height } => {
                if breaks + 1 > n {
                    return Err(Error::InvalidParameter(format!(
                        "{breaks} breaks do not fit in {n} vertices"
                    )));
                }
                let segments = breaks + 1;
                Ok((0..n)
                    .map(|i| if (i * segments / n) % 2 == 1 { *height } else { 0.0 })
                    .collect())
            }
            SignalSpec::Piecewise {
                breakpoints,
                levels,
            } => {
                let valid = levels.len() == breakpoints.len() + 1
                    && breakpoints.windows(2).all(|w| w[0] < w[1])
                    && breakpoints.iter().all(|&b| b > 0 && b < n);
                if !valid {
                    return Err(Error::InvalidParameter(
                        "piecewise signal needs increasing breakpoints in 1..n and one more level"
                            .into(),
                    ));
                }
                let mut out = Vec::with_capacity(n);
                let mut seg = 0;
                for i in 0..n {
                    while seg < breakpoints.len() && i >= breakpoints[seg] {
                        seg += 1;
                    }
                    out.push(levels[seg]);
                }
                Ok(out)
            }
            SignalSpec::Epidemic { steps, p, high, low } => {
                simulate_epidemic_with_levels(g, *steps, *p, *high, *low, rng)
            }
            SignalSpec::File(path) => {
                let y = io::read_signal(path)?;
                if y.len() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        got: y.len(),
                    });
                }
                Ok(y)
            }
        }
    }
}

fn parse_list<T: FromStr>(s: &str, whole: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| spec_err("signal", whole)))
        .collect()
}

impl FromStr for SignalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        Ok(match kind {
            "constant" => SignalSpec::Constant(if arg.is_empty() {
                0.0
            } else {
                parse_f64(arg, "signal", s)?
            }),
            "steps" => {
                let (k, h) = arg.split_once(':').unwrap_or((arg, "1"));
                SignalSpec::Steps {
                    breaks: parse_usize(k, "signal", s)?,
                    height: parse_f64(h, "signal", s)?,
                }
            }
            "piecewise" => {
                let (b, l) = arg.split_once(':').ok_or_else(|| spec_err("signal", s))?;
                let breakpoints = if b.trim().is_empty() {
                    Vec::new()
                } else {
                    parse_list(b, s)?
                };
                let levels: Vec<f64> = parse_list(l, s)?;
                if levels.iter().any(|v| !v.is_finite()) {
                    return Err(spec_err("signal", s));
                }
                SignalSpec::Piecewise {
                    breakpoints,
                    levels,
                }
            }
            "epidemic" => {
                let (mut steps, mut p, mut high, mut low) = (None, 0.5, EPIDEMIC_HIGH, EPIDEMIC_LOW);
                for field in arg.split(',').filter(|f| !f.trim().is_empty()) {
                    let (key, value) = field.split_once('=').ok_or_else(|| spec_err("signal", s))?;
                    match key.trim() {
                        "T" => steps = Some(parse_usize(value, "signal", s)?),
                        "p" => p = parse_f64(value, "signal", s)?,
                        "high" => high = parse_f64(value, "signal", s)?,
                        "low" => low = parse_f64(value, "signal", s)?,
                        _ => return Err(spec_err("signal", s)),
                    }
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(spec_err("signal", s));
                }
                SignalSpec::Epidemic {
                    steps: steps.ok_or_else(|| spec_err("signal", s))?,
                    p,
                    high,
                    low,
                }
            }
            "file" if !arg.is_empty() => SignalSpec::File(PathBuf::from(arg)),
            _ => return Err(spec_err("signal", s)),
        })
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSpec::Constant(v) => write!(f, "constant:{v}"),
            SignalSpec::Steps { breaks, height } => write!(f, "steps:{breaks}:{height}"),
            SignalSpec::Piecewise {
                breakpoints,
                levels,
            } => write!(f, "piecewise:{}:{}", join(breakpoints), join(levels)),
            SignalSpec::Epidemic { steps, p, high, low } => {
                write!(f, "epidemic:T={steps},p={p},high={high},low={low}")
            }
            SignalSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl TryFrom<String> for SignalSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SignalSpec> for String {
    fn from(s: SignalSpec) -> Self {
        s.to_string()
    }
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn yes() -> bool {
    true
}

/// A replicated risk experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub graph: GraphSpec,
    pub signal: SignalSpec,
    /// Noise standard deviations to sweep.
    pub sigmas: Vec<f64>,
    pub methods: Vec<Method>,
    pub replicates: usize,
    pub seed: u64,
    /// Tuning draws per replicate; [`default_b`] when absent.
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Expansion grid spacing; [`default_delta`] per replicate when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tau: f64,
    /// Report the randomized-tuning column.
    #[serde(default = "yes")]
    pub tuned: bool,
    /// Report the best-over-grid column.
    #[serde(default = "yes")]
    pub best: bool,
}

impl Scenario {
    pub fn new(graph: GraphSpec, signal: SignalSpec, sigmas: Vec<f64>, methods: Vec<Method>) -> Self {
        Self {
            graph,
            signal,
            sigmas,
            methods,
            replicates: 100,
            seed: 0,
            b: None,
            alpha: DEFAULT_ALPHA,
            delta: None,
            tau: 0.0,
            tuned: true,
            best: true,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("scenario: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods given".into()));
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter("noise levels must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.b == Some(0) {
            return Err(Error::InvalidParameter("B must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::InvalidParameter("alpha must be > 0".into()));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter("delta must be > 0".into()));
            }
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be >= 0".into()));
        }
        if !self.tuned && !self.best {
            return Err(Error::InvalidParameter("no result column selected".into()));
        }
        Ok(())
    }
}

/// Whether a row reports randomized tuning or the best grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMode {
    Tuned,
    Best,
}

impl fmt::Display for LambdaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LambdaMode::Tuned => "tuned",
            LambdaMode::Best => "best",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub sigma: f64,
    pub lambda_mode: LambdaMode,
    pub mean_stmse: f64,
    pub stderr: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Rows of a finished experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub const COLUMNS: &'static str = "method,sigma,lambda_mode,mean_stmse,stderr,replicates,seed";

    pub fn get(&self, method: Method, sigma: f64, mode: LambdaMode) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.sigma == sigma && r.lambda_mode == mode)
    }

    /// CSV with each `header` line as a leading `#` comment.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header.iter().flat_map(|h| h.lines()) {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(Self::COLUMNS);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.method, r.sigma, r.lambda_mode, r.mean_stmse, r.stderr, r.replicates, r.seed
            ));
        }
        out
    }
}

/// Per-replicate outcome for one method.
struct ReplicateScores {
    tuned: Option<f64>,
    per_grid: Vec<f64>,
}

fn replicate_seed(seed: u64, sigma_index: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + ((sigma_index as u64) << 32) + replicate as u64);
    rng
}

/// Runs every method on every replicate at every noise level.
///
/// The true signal is drawn once from the scenario seed. For each noise level
/// and replicate, the noise, the tuning draws and the noise estimate
/// `sigma_hat` (from [`estimate_sigma`]) are derived from that replicate's
/// stream. The best-over-grid column is the minimum over grid positions of
/// the mean st.MSE across replicates.
pub fn run_experiment(scenario: &Scenario) -> Result<ResultTable> {
    scenario.validate()?;
    let g = scenario.graph.build()?;
    g.check_connected()?;
    if scenario.methods.iter().any(Method::requires_chain) && !g.is_chain() {
        return Err(Error::NotAChain);
    }
    let mut signal_rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mu0 = scenario.signal.generate(&g, &mut signal_rng)?;
    let resistance = if scenario.methods.contains(&Method::W) {
        Some(effective_resistances(&g)?)
    } else {
        None
    };
    let b = scenario.b.unwrap_or_else(|| default_b(g.n()));
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let mut rows = Vec::new();
    for (si, &sigma) in scenario.sigmas.iter().enumerate() {
        let per_replicate: Vec<Vec<ReplicateScores>> = (0..scenario.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_seed(scenario.seed, si, r);
                let y: Vec<f64> = mu0.iter().map(|m| m + sigma * normal.sample(&mut rng)).collect();
                let sigma_hat = estimate_sigma(&y, &g)?;
                let tune_seed: u64 = rng.gen();
                let delta = scenario.delta.unwrap_or_else(|| default_delta(&y, sigma_hat));
                let mut ctx = FitContext::new(&g, delta)?.with_truth(&mu0).with_tau(scenario.tau);
                if let Some(res) = resistance.as_ref() {
                    ctx = ctx.with_resistance(res);
                }
                scenario
                    .methods
                    .iter()
                    .map(|&method| {
                        let grid = method.lambda_grid(&ctx, &y, sigma_hat)?;
                        let per_grid = if scenario.best {
                            grid.par_iter()
                                .map(|&lambda| st_mse(&method.fit(&ctx, &y, lambda)?, &mu0, sigma))
                                .collect::<Result<Vec<_>>>()?
                        } else {
                            Vec::new()
                        };
                        let tuned = if scenario.tuned {
                            let opts = TuneOptions {
                                b,
                                alpha: scenario.alpha,
                                sigma_hat,
                                seed: tune_seed,
                            };
                            let result = tune_lambda(&y, &ctx, method, &grid, &opts)?;
                            let fit = method.fit(&ctx, &y, result.chosen_lambda())?;
                            Some(st_mse(&fit, &mu0, sigma)?)
                        } else {
                            None
                        };
                        Ok(ReplicateScores { tuned, per_grid })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        for (mi, &method) in scenario.methods.iter().enumerate() {
            if scenario.tuned {
                let values: Vec<f64> = per_replicate
                    .iter()
                    .map(|rep| rep[mi].tuned.expect("tuned column computed"))
                    .collect();
                let (mean, se) = mean_and_stderr(&values);
                rows.push(ResultRow {
                    method,
                    sigma,
                    lambda_mode: LambdaMode::Tuned,
                    mean_stmse: mean,
                    stderr: se,
                    replicates: scenario.replicates,
                    seed: scenario.seed,
                });
            }
            if scenario.best {
                let points = per_replicate[0][mi].per_grid.len();
                let columns: Vec<Vec<f64>> = (0..points)
                    .map(|k| per_replicate.iter().map(|rep| rep[mi].per_grid[k]).collect())
                    .collect();
                let means: Vec<f64> = columns.iter().map(|c| mean_and_stderr(c).0).collect();
                let k = argmin(&means);
                let (mean, se) = mean_and_stderr(&columns[k]);
                rows.push(ResultRow {
                    method,
                    sigma,
                    lambda_mode: LambdaMode::Best,
                    mean_stmse: mean,
                    stderr: se,
                    replicates: scenario.replicates,
                    seed: scenario.seed,
                });
            }
        }
    }
    Ok(ResultTable { rows })
}
