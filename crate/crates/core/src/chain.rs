//! Exact minimization of the l0 objective on a chain.
//!
//! On a chain, a signal with `k` constant runs pays `lambda * (k - 1)`, and
//! the best value on each run is the run mean, so the problem reduces to
//! optimal segmentation with a per-segment penalty. The O(n^2) dynamic
//! program runs right to left so that, among optimal segmentations, the one
//! with fewest segments and then leftmost breakpoints is recovered.

use crate::error::{Error, Result};

/// Largest input accepted by [`brute_force_chain`].
pub const BRUTE_FORCE_MAX_LEN: usize = 16;

/// Relative tolerance under which two costs count as tied.
const TIE_RTOL: f64 = 1e-12;

/// Piecewise-constant fit of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Start index of every segment but the first, ascending.
    pub breakpoints: Vec<usize>,
    /// Data mean on each segment.
    pub means: Vec<f64>,
    /// `1/2 * SSE + lambda * (segments - 1)`.
    pub cost: f64,
    len: usize,
}

impl Segmentation {
    pub fn num_segments(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(start, end)` half-open bounds of each segment.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut starts = vec![0];
        starts.extend(&self.breakpoints);
        let mut ends = self.breakpoints.clone();
        ends.push(self.len);
        starts.into_iter().zip(ends).collect()
    }

    /// Per-point fitted values.
    pub fn fitted(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        for ((start, end), &m) in self.segments().into_iter().zip(&self.means) {
            out.extend(std::iter::repeat(m).take(end - start));
        }
        out
    }
}

/// Compensated running sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// O(1) half-SSE of any segment from prefix sums of the centered data.
pub(crate) struct SegmentCosts {
    center: f64,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl SegmentCosts {
    pub(crate) fn new(y: &[f64]) -> Self {
        let center = y.iter().sum::<f64>() / y.len().max(1) as f64;
        let mut s1 = Vec::with_capacity(y.len() + 1);
        let mut s2 = Vec::with_capacity(y.len() + 1);
        let (mut a, mut b) = (Neumaier::default(), Neumaier::default());
        s1.push(0.0);
        s2.push(0.0);
        for &v in y {
            let d = v - center;
            a.add(d);
            b.add(d * d);
            s1.push(a.value());
            s2.push(b.value());
        }
        Self { center, s1, s2 }
    }

    /// Half sum of squared deviations from the mean on `start..end`.
    pub(crate) fn cost(&self, start: usize, end: usize) -> f64 {
        let m = (end - start) as f64;
        if end - start <= 1 {
            return 0.0;
        }
        let s1 = self.s1[end] - self.s1[start];
        let s2 = self.s2[end] - self.s2[start];
        0.5 * (s2 - s1 * s1 / m).max(0.0)
    }

    pub(crate) fn mean(&self, start: usize, end: usize) -> f64 {
        self.center + (self.s1[end] - self.s1[start]) / (end - start) as f64
    }
}

fn validate(y: &[f64], lambda: f64) -> Result<()> {
    if y.is_empty() {
        return Err(Error::InvalidParameter("empty input".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_RTOL * (1.0 + a.abs().max(b.abs()))
}

/// Global minimizer of `1/2 sum (y_i - mu_i)^2 + lambda * #{i : mu_i != mu_{i+1}}`.
pub fn exact_l0_chain(y: &[f64], lambda: f64) -> Result<Segmentation> {
    solve(y, lambda, false)
}

/// As [`exact_l0_chain`], discarding breakpoint candidates that can no longer
/// be optimal.
pub fn exact_l0_chain_pruned(y: &[f64], lambda: f64) -> Result<Segmentation> {
    solve(y, lambda, true)
}

fn solve(y: &[f64], lambda: f64, prune: bool) -> Result<Segmentation> {
    validate(y, lambda)?;
    let n = y.len();
    let costs = SegmentCosts::new(y);
    // best[i]: optimal cost of y[i..] with a leading lambda; best[n] = -lambda.
    let mut best = vec![0.0; n + 1];
    let mut segs = vec![0usize; n + 1];
    let mut next = vec![n; n + 1];
    best[n] = -lambda;
    let mut candidates: Vec<usize> = vec![n];

    for i in (0..n).rev() {
        if prune {
            candidates.push(i + 1);
        }
        let mut pick: Option<(f64, usize, usize)> = None;
        let mut consider = |j: usize| {
            let value = costs.cost(i, j) + lambda + best[j];
            let s = segs[j] + 1;
            let better = match pick {
                None => true,
                Some((v, ps, pj)) => {
                    if tied(value, v) {
                        s < ps || (s == ps && j < pj)
                    } else {
                        value < v
                    }
                }
            };
            if better {
                pick = Some((value, s, j));
            }
        };
        if prune {
            candidates.iter().for_each(|&j| consider(j));
        } else {
            (i + 1..=n).for_each(consider);
        }
        let (value, s, j) = pick.expect("at least one candidate");
        best[i] = value;
        segs[i] = s;
        next[i] = j;
        if prune {
            let margin = TIE_RTOL * (1.0 + value.abs());
            candidates.retain(|&j| costs.cost(i, j) + best[j] <= best[i] + margin);
        }
    }

    let mut breakpoints = Vec::new();
    let mut means = Vec::new();
    let mut i = 0;
    while i < n {
        let j = next[i];
        means.push(costs.mean(i, j));
        if j < n {
            breakpoints.push(j);
        }
        i = j;
    }
    Ok(Segmentation {
        breakpoints,
        means,
        cost: best[0],
        len: n,
    })
}

/// Exhaustive search over all `2^(n-1)` breakpoint sets. Ties go to fewer
/// segments, then lexicographically smaller breakpoints.
pub fn brute_force_chain(y: &[f64], lambda: f64) -> Result<Segmentation> {
    validate(y, lambda)?;
    let n = y.len();
    if n > BRUTE_FORCE_MAX_LEN {
        return Err(Error::TooLarge(format!(
            "brute force limited to {BRUTE_FORCE_MAX_LEN} points, got {n}"
        )));
    }
    let mut winner: Option<Segmentation> = None;
    for mask in 0u32..(1u32 << (n - 1)) {
        let breakpoints: Vec<usize> = (1..n).filter(|&b| mask & (1 << (b - 1)) != 0).collect();
        let mut bounds = vec![0];
        bounds.extend(&breakpoints);
        bounds.push(n);
        let mut cost = lambda * breakpoints.len() as f64;
        let mut means = Vec::new();
        for w in bounds.windows(2) {
            let seg = &y[w[0]..w[1]];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            cost += 0.5 * seg.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            means.push(mean);
        }
        let candidate = Segmentation {
            breakpoints,
            means,
            cost,
            len: n,
        };
        let better = match &winner {
            None => true,
            Some(w) => {
                if tied(candidate.cost, w.cost) {
                    (candidate.breakpoints.len(), &candidate.breakpoints)
                        < (w.breakpoints.len(), &w.breakpoints)
                } else {
                    candidate.cost < w.cost
                }
            }
        };
        if better {
            winner = Some(candidate);
        }
    }
    Ok(winner.expect("at least one segmentation"))
}
