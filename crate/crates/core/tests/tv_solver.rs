use l0cut::tv::{kkt_check, lambda_max, tv_chain, TvSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tv_objective(y: &[f64], mu: &[f64], lambda: f64) -> f64 {
    let fit: f64 = y.iter().zip(mu).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
    fit + lambda * mu.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
}

#[test]
fn random_instances_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..20_000 {
        let n = rng.gen_range(1..=60);
        let y: Vec<f64> = match trial % 3 {
            0 => (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            1 => (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect(),
            _ => (0..n)
                .map(|i| if i < n / 2 { 0.0 } else { 1.0 } + rng.gen_range(-0.2..0.2))
                .collect(),
        };
        let lambda = lambda_max(&y).max(0.1) * rng.gen_range(0.0..1.3);
        let sol = tv_chain(&y, lambda).unwrap();
        let report = kkt_check(&sol, &y, lambda).unwrap();
        assert!(report.holds(), "trial {trial}: y={y:?} lambda={lambda} {report:?}");
    }
}

#[test]
fn perturbations_do_not_improve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let n = rng.gen_range(2..=25);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lambda = rng.gen_range(0.01..2.0);
        let sol = tv_chain(&y, lambda).unwrap();
        let best = tv_objective(&y, &sol.mu, lambda);
        for _ in 0..50 {
            let trial: Vec<f64> = sol.mu.iter().map(|m| m + rng.gen_range(-0.05..0.05)).collect();
            assert!(tv_objective(&y, &trial, lambda) >= best - 1e-12);
        }
    }
}

#[test]
fn wrong_fits_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rng.gen_range(3..=30);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lambda = rng.gen_range(0.05..1.0) * lambda_max(&y);
        let sol = tv_chain(&y, lambda).unwrap();
        let mut mu = sol.mu.clone();
        let i = rng.gen_range(0..n);
        mu[i] += 0.01;
        let bad = TvSolution::from_fit(mu, lambda);
        assert!(!kkt_check(&bad, &y, lambda).unwrap().holds());
    }
}

/// Projected gradient on the box-constrained dual `min_{|u| <= lambda} 1/2 ||Y - D^T u||^2`.
fn dual_projected_gradient(y: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
    let n = y.len();
    let primal = |u: &[f64]| {
        let mut mu = y.to_vec();
        for j in 0..n - 1 {
            mu[j] += u[j];
            mu[j + 1] -= u[j];
        }
        mu
    };
    let mut u = vec![0.0; n - 1];
    for _ in 0..iters {
        let mu = primal(&u);
        for j in 0..n - 1 {
            u[j] = (u[j] + 0.25 * (mu[j + 1] - mu[j])).clamp(-lambda, lambda);
        }
    }
    primal(&u)
}

#[test]
fn agrees_with_dual_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lambda = rng.gen_range(0.0..1.2) * lambda_max(&y);
        let sol = tv_chain(&y, lambda).unwrap();
        let reference = dual_projected_gradient(&y, lambda, 50_000);
        for (a, b) in sol.mu.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "y={y:?} lambda={lambda}: {:?} vs {reference:?}", sol.mu);
        }
    }
}
