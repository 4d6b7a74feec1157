//! Exact total-variation denoising on a chain (the 1-D fused lasso) and its
//! optimality certificate.
//!
//! The solver is the direct linear-time taut-string scheme of Condat: it
//! tracks the lower and upper admissible values of the current segment and
//! emits a segment as soon as one bound becomes infeasible.
//!
//! The certificate uses the subgradient condition `Y - mu in lambda D^T W`
//! with `D mu = (mu_2 - mu_1, ..., mu_n - mu_{n-1})`: given the runs of
//! `mu` and their jump signs, the fitted values are forced to be the run
//! means shifted by `lambda (s_a - s_{a-1}) / |S_a|`, and the dual vector
//! `w` is recovered from prefix sums of the residual.

use crate::error::{Error, Result};

/// Runs of a chain fit, their jump signs and level adjustments.
#[derive(Debug, Clone, PartialEq)]
pub struct TvSolution {
    pub mu: Vec<f64>,
    /// Half-open `(start, end)` bounds of the constant runs.
    pub intervals: Vec<(usize, usize)>,
    /// `sign(mu[S_{a+1}] - mu[S_a])` for consecutive runs.
    pub signs: Vec<i8>,
    /// `lambda (s_a - s_{a-1}) / |S_a|` per run, with `s_0 = s_k = 0`.
    pub adjustments: Vec<f64>,
    /// Adjacent runs merged by [`tv_chain`] because their levels differed
    /// only by rounding.
    pub merged_ties: usize,
}

impl TvSolution {
    /// Groups `mu` into maximal runs of exactly equal values.
    pub fn from_fit(mu: Vec<f64>, lambda: f64) -> Self {
        let mut intervals = Vec::new();
        let mut start = 0;
        for i in 1..=mu.len() {
            if i == mu.len() || mu[i] != mu[i - 1] {
                intervals.push((start, i));
                start = i;
            }
        }
        let signs: Vec<i8> = intervals
            .windows(2)
            .map(|w| if mu[w[1].0] > mu[w[0].0] { 1 } else { -1 })
            .collect();
        let adjustments = adjustments(&intervals, &signs, lambda);
        Self {
            mu,
            intervals,
            signs,
            adjustments,
            merged_ties: 0,
        }
    }

    pub fn num_intervals(&self) -> usize {
        self.intervals.len()
    }
}

fn adjustments(intervals: &[(usize, usize)], signs: &[i8], lambda: f64) -> Vec<f64> {
    let k = intervals.len();
    (0..k)
        .map(|a| {
            let right = if a + 1 < k { signs[a] as f64 } else { 0.0 };
            let left = if a > 0 { signs[a - 1] as f64 } else { 0.0 };
            let len = (intervals[a].1 - intervals[a].0) as f64;
            lambda * (right - left) / len
        })
        .collect()
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

/// Unique minimizer of `1/2 ||Y - mu||^2 + lambda sum |mu_{i+1} - mu_i|`.
pub fn tv_chain(y: &[f64], lambda: f64) -> Result<TvSolution> {
    validate(y, lambda)?;
    if lambda == 0.0 {
        return Ok(TvSolution::from_fit(y.to_vec(), lambda));
    }
    Ok(polish(TvSolution::from_fit(taut_string(y, lambda), lambda), y, lambda))
}

/// Resets every run to its exact level `mean + adjustment` and merges
/// neighbours whose levels agree up to rounding.
fn polish(mut sol: TvSolution, y: &[f64], lambda: f64) -> TvSolution {
    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut raw: Vec<f64> = sol.intervals.iter().map(|&(a, _)| sol.mu[a]).collect();
    let mut a = 0;
    while a + 1 < sol.intervals.len() {
        if (raw[a + 1] - raw[a]).abs() <= tol {
            let (_, end) = sol.intervals.remove(a + 1);
            sol.intervals[a].1 = end;
            sol.signs.remove(a);
            raw.remove(a + 1);
            sol.merged_ties += 1;
        } else {
            a += 1;
        }
    }
    sol.adjustments = adjustments(&sol.intervals, &sol.signs, lambda);
    loop {
        let levels: Vec<f64> = sol
            .intervals
            .iter()
            .zip(&sol.adjustments)
            .map(|(&(a, b), v)| y[a..b].iter().sum::<f64>() / (b - a) as f64 + v)
            .collect();
        let tie = levels.windows(2).position(|w| (w[1] - w[0]).abs() <= tol);
        match tie {
            Some(a) => {
                let (start, _) = sol.intervals[a];
                let (_, end) = sol.intervals.remove(a + 1);
                sol.intervals[a] = (start, end);
                sol.signs.remove(a);
                sol.adjustments = adjustments(&sol.intervals, &sol.signs, lambda);
                sol.merged_ties += 1;
            }
            None => {
                for (&(a, b), &level) in sol.intervals.iter().zip(&levels) {
                    sol.mu[a..b].fill(level);
                }
                // Jump signs follow the polished levels.
                for (s, w) in sol.signs.iter_mut().zip(levels.windows(2)) {
                    *s = if w[1] > w[0] { 1 } else { -1 };
                }
                sol.adjustments = adjustments(&sol.intervals, &sol.signs, lambda);
                return sol;
            }
        }
    }
}

fn fill(x: &mut [f64], from: &mut usize, through: usize, value: f64) {
    loop {
        x[*from] = value;
        *from += 1;
        if *from > through {
            break;
        }
    }
}

fn taut_string(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    let last = n - 1;
    let (mut k, mut k0, mut kminus, mut kplus) = (0usize, 0usize, 0usize, 0usize);
    let mut vmin = y[0] - lambda;
    let mut vmax = y[0] + lambda;
    let mut umin = lambda;
    let mut umax = -lambda;
    loop {
        while k == last {
            if umin < 0.0 {
                fill(&mut x, &mut k0, kminus, vmin);
                k = k0;
                kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                fill(&mut x, &mut k0, kplus, vmax);
                k = k0;
                kplus = k0;
                vmax = y[k];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                fill(&mut x, &mut k0, k, vmin);
                return x;
            }
        }
        umin += y[k + 1] - vmin;
        if umin < -lambda {
            fill(&mut x, &mut k0, kminus, vmin);
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = y[k];
            vmax = vmin + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        umax += y[k + 1] - vmax;
        if umax > lambda {
            fill(&mut x, &mut k0, kplus, vmax);
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = y[k];
            vmin = vmax - 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        k += 1;
        if umin >= lambda {
            kminus = k;
            vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
            umin = lambda;
        }
        if umax <= -lambda {
            kplus = k;
            vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
            umax = -lambda;
        }
    }
}

/// Detailed outcome of the optimality check.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Jumps strictly agree with the claimed signs.
    pub signs_hold: bool,
    /// `mu` equals the shifted run means.
    pub levels_hold: bool,
    /// The recovered dual vector lies in `[-1, 1]` with boundary entries equal
    /// to the signs, and the residual sums to zero.
    pub dual_holds: bool,
    /// Largest excess of `|w_j|` over 1 or of `|w_j - s_a|` at boundaries.
    pub max_dual_violation: f64,
    /// Boundaries whose jump is within rounding of zero: runs about to merge,
    /// where strict sign agreement is decided by rounding.
    pub knife_edges: usize,
}

impl KktReport {
    pub fn holds(&self) -> bool {
        self.signs_hold && self.levels_hold && self.dual_holds
    }
}

const KKT_RTOL: f64 = 1e-9;

/// Checks the subgradient optimality conditions for `sol` in full.
pub fn kkt_check(sol: &TvSolution, y: &[f64], lambda: f64) -> Result<KktReport> {
    validate(y, lambda)?;
    let n = y.len();
    if sol.mu.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: sol.mu.len(),
        });
    }
    let k = sol.intervals.len();
    let mut expected_start = 0;
    for &(a, b) in &sol.intervals {
        if a != expected_start || b <= a {
            return Err(Error::InvalidParameter(format!(
                "degenerate or non-consecutive interval ({a}, {b})"
            )));
        }
        expected_start = b;
    }
    if expected_start != n || sol.signs.len() + 1 != k || sol.signs.iter().any(|s| s.abs() != 1)
    {
        return Err(Error::InvalidParameter("intervals and signs do not describe a fit".into()));
    }

    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = KKT_RTOL * scale;

    if lambda == 0.0 {
        let levels_hold = sol.mu.iter().zip(y).all(|(m, v)| (m - v).abs() <= tol);
        return Ok(KktReport {
            signs_hold: true,
            levels_hold,
            dual_holds: true,
            max_dual_violation: 0.0,
            knife_edges: 0,
        });
    }

    let v = adjustments(&sol.intervals, &sol.signs, lambda);
    let means: Vec<f64> = sol
        .intervals
        .iter()
        .map(|&(a, b)| y[a..b].iter().sum::<f64>() / (b - a) as f64)
        .collect();
    let levels: Vec<f64> = means.iter().zip(&v).map(|(m, va)| m + va).collect();

    let mut knife_edges = 0;
    let signs_hold = levels.windows(2).zip(&sol.signs).all(|(w, &s)| {
        let jump = w[1] - w[0];
        if jump.abs() <= tol {
            knife_edges += 1;
        }
        (s == 1 && jump > 0.0) || (s == -1 && jump < 0.0)
    });
    let levels_hold = sol
        .intervals
        .iter()
        .zip(&levels)
        .all(|(&(a, b), &level)| sol.mu[a..b].iter().all(|m| (m - level).abs() <= tol));

    // lambda * D^T w = Q Y - v  =>  w_j = -(1/lambda) sum_{i <= j} r_i.
    let mut boundary_sign = vec![None; n.saturating_sub(1)];
    for (a, &s) in sol.signs.iter().enumerate() {
        boundary_sign[sol.intervals[a].1 - 1] = Some(s as f64);
    }
    let wtol = KKT_RTOL * (1.0 + n as f64 * scale / lambda);
    let mut prefix = 0.0;
    let mut max_violation: f64 = 0.0;
    for (j, &(a, b)) in sol.intervals.iter().enumerate() {
        for i in a..b {
            prefix += y[i] - means[j] - v[j];
            if i + 1 < n {
                let w = -prefix / lambda;
                let excess = match boundary_sign[i] {
                    Some(s) => (w - s).abs(),
                    None => w.abs() - 1.0,
                };
                max_violation = max_violation.max(excess);
            }
        }
    }
    let dual_holds = max_violation <= wtol && prefix.abs() <= tol * n as f64;
    Ok(KktReport {
        signs_hold,
        levels_hold,
        dual_holds,
        max_dual_violation: max_violation,
        knife_edges,
    })
}

/// Whether `sol` is the minimizer of the chain TV objective for `(y, lambda)`.
pub fn kkt_certificate(sol: &TvSolution, y: &[f64], lambda: f64) -> Result<bool> {
    Ok(kkt_check(sol, y, lambda)?.holds())
}

/// Smallest `lambda` at which the TV fit is constant:
/// `max_j |sum_{i <= j} (Y_i - mean(Y))|`.
pub fn lambda_max(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for &v in &y[..y.len().saturating_sub(1)] {
        acc += v - mean;
        best = best.max(acc.abs());
    }
    best
}

/// `alpha * tv + (1 - alpha) * debiased`, where the debiased fit replaces each
/// run of the TV fit with the data mean on that run.
pub fn tv_relaxed(y: &[f64], lambda: f64, alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let sol = tv_chain(y, lambda)?;
    let mut out = Vec::with_capacity(y.len());
    for &(a, b) in &sol.intervals {
        let mean = y[a..b].iter().sum::<f64>() / (b - a) as f64;
        out.extend(sol.mu[a..b].iter().map(|&m| alpha * m + (1.0 - alpha) * mean));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_identity() {
        let y = [0.3, -2.0, 5.0];
        let sol = tv_chain(&y, 0.0).unwrap();
        assert_eq!(sol.mu, y.to_vec());
        assert!(kkt_certificate(&sol, &y, 0.0).unwrap());
    }

    #[test]
    fn two_point_closed_form() {
        let sol = tv_chain(&[0.0, 2.0], 0.5).unwrap();
        assert_eq!(sol.mu, vec![0.5, 1.5]);
        assert_eq!(sol.signs, vec![1]);
        assert!(kkt_certificate(&sol, &[0.0, 2.0], 0.5).unwrap());
        let fused = tv_chain(&[0.0, 2.0], 1.0).unwrap();
        assert_eq!(fused.mu, vec![1.0, 1.0]);
    }

    #[test]
    fn above_lambda_max_is_constant_mean() {
        let y = [1.0, 4.0, -2.0, 3.0, 0.5];
        let lmax = lambda_max(&y);
        let sol = tv_chain(&y, lmax * 1.01).unwrap();
        let mean = y.iter().sum::<f64>() / 5.0;
        assert_eq!(sol.num_intervals(), 1);
        assert!((sol.mu[0] - mean).abs() < 1e-12);
        let below = tv_chain(&y, lmax * 0.99).unwrap();
        assert!(below.num_intervals() > 1);
    }

    #[test]
    fn single_point() {
        let sol = tv_chain(&[3.0], 10.0).unwrap();
        assert_eq!(sol.mu, vec![3.0]);
        assert!(kkt_certificate(&sol, &[3.0], 10.0).unwrap());
    }

    #[test]
    fn interpolation_fails_certificate() {
        let y = [0.0, 1.0, 0.0, 1.0, 0.0];
        let fake = TvSolution::from_fit(y.to_vec(), 0.3);
        assert!(!kkt_certificate(&fake, &y, 0.3).unwrap());
    }

    #[test]
    fn constant_mean_certified_above_lambda_max() {
        let y = [2.0, -1.0, 0.5, 3.0, 1.0, -0.5];
        let lambda = lambda_max(&y) + 0.1;
        let mean = y.iter().sum::<f64>() / 6.0;
        let sol = TvSolution::from_fit(vec![mean; 6], lambda);
        assert!(kkt_certificate(&sol, &y, lambda).unwrap());
        let lambda = lambda_max(&y) - 0.1;
        let sol = TvSolution::from_fit(vec![mean; 6], lambda);
        assert!(!kkt_certificate(&sol, &y, lambda).unwrap());
    }

    #[test]
    fn degenerate_interval_is_an_error() {
        let mut sol = tv_chain(&[0.0, 2.0], 0.5).unwrap();
        sol.intervals = vec![(0, 0), (0, 2)];
        assert!(kkt_check(&sol, &[0.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn relaxed_endpoints() {
        let y = [0.0, 2.0];
        assert_eq!(tv_relaxed(&y, 0.5, 1.0).unwrap(), vec![0.5, 1.5]);
        assert_eq!(tv_relaxed(&y, 0.5, 0.0).unwrap(), vec![0.0, 2.0]);
        assert!(tv_relaxed(&y, 0.5, 1.5).is_err());
        let y = [0.0, 0.2, 3.0, 3.1, 2.9];
        let debiased = tv_relaxed(&y, 0.4, 0.0).unwrap();
        assert!((debiased[0] - 0.1).abs() < 1e-12);
        assert!((debiased[4] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mean_is_preserved() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        for lambda in [0.01, 0.3, 2.0, 40.0] {
            let sol = tv_chain(&y, lambda).unwrap();
            let diff: f64 = sol.mu.iter().sum::<f64>() - y.iter().sum::<f64>();
            assert!(diff.abs() < 1e-9);
            assert!(kkt_certificate(&sol, &y, lambda).unwrap(), "lambda {lambda}");
        }
    }
}
