//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p l0cut --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use l0cut::chain::{brute_force_chain, exact_l0_chain};
use l0cut::expansion::{
    best_expansion, denoise, factor2_certificate, verify_local_min, ExpansionProblem, VerifyMode,
};
use l0cut::graph::{objective_w, EdgeWeighting, Graph, Grid, LabeledSignal};
use l0cut::resistance::{effective_resistances, resistances_by_tree_enumeration};
use l0cut::sim::{
    estimate_sigma, run_experiment, tune_lambda, FitContext, GraphSpec, LambdaMode, Method,
    Scenario, TuneOptions, DEFAULT_ALPHA,
};
use l0cut::tv::{kkt_check, lambda_max, tv_chain};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_edges: usize) -> Graph {
    let n = rng.gen_range(2..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|k| {
            let u = order[rng.gen_range(0..k)];
            let v = order[k];
            (u.min(v), u.max(v))
        })
        .collect();
    let limit = max_edges.min(n * (n - 1) / 2);
    let target = rng.gen_range(n - 1..=limit);
    while edges.len() < target {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let e = (u.min(v), u.max(v));
        if u != v && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Graph::new(n, edges).unwrap()
}

/// A random instance on a three-value grid.
struct SmallInstance {
    g: Graph,
    w: EdgeWeighting,
    y: Vec<f64>,
    lambda: f64,
    grid: Grid,
}

impl SmallInstance {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let g = random_graph(rng, 12, 20);
        let delta = *[0.5, 1.0, 0.3].choose(rng).unwrap();
        let lo: i64 = rng.gen_range(-2..=0);
        let grid = Grid::new(0.0, delta, lo, lo + 2).unwrap();
        let y = (0..g.n())
            .map(|_| rng.gen_range(lo as f64 * delta..=(lo + 2) as f64 * delta))
            .collect();
        let w = if rng.gen_bool(0.5) {
            EdgeWeighting::unit(&g)
        } else {
            EdgeWeighting::new((0..g.num_edges()).map(|_| rng.gen_range(0.1..2.0)).collect(), &g)
                .unwrap()
        };
        let lambda = rng.gen_range(0.0..1.0) * delta * delta;
        Self {
            g,
            w,
            y,
            lambda,
            grid,
        }
    }

    fn problem(&self) -> ExpansionProblem<'_> {
        ExpansionProblem::new(&self.g, &self.w, &self.y, self.lambda, self.grid.spacing())
            .unwrap()
            .with_grid(self.grid)
            .unwrap()
    }

    fn objective(&self, sig: &LabeledSignal) -> f64 {
        objective_w(&self.y, &sig.values(), self.lambda, &self.g, &self.w).unwrap()
    }
}

fn small_instances() -> Vec<SmallInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..200).map(|_| SmallInstance::random(&mut rng)).collect()
}

fn criterion_1(instances: &[SmallInstance]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    let mut mismatches = 0;
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for inst in instances {
        let prob = inst.problem();
        let n = inst.g.n();
        let labels = (0..n).map(|_| rng.gen_range(inst.grid.lo()..=inst.grid.hi())).collect();
        let state = LabeledSignal::new(labels, inst.grid).unwrap();
        for c in inst.grid.indices() {
            let cut = best_expansion(&state, c, &prob).unwrap();
            let mut brute = f64::INFINITY;
            let mut trial = state.clone();
            for mask in 0u32..(1 << n) {
                let labels: Vec<i64> = (0..n)
                    .map(|i| if mask & (1 << i) != 0 { c } else { state.label(i) })
                    .collect();
                trial = LabeledSignal::new(labels, *trial.grid()).unwrap();
                brute = brute.min(inst.objective(&trial));
            }
            let gap = (inst.objective(&cut) - brute).abs();
            worst = worst.max(gap);
            checks += 1;
            if gap > 1e-10 {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!(
            "{} instances, {checks} expansions vs subset enumeration: {mismatches} mismatches, max |dF| = {worst:.2e}",
            instances.len()
        ),
    )
}

fn criterion_2(instances: &[SmallInstance], outputs: &[LabeledSignal]) -> Outcome {
    let failures = instances
        .iter()
        .zip(outputs)
        .filter(|(inst, sig)| !verify_local_min(sig, &inst.problem(), VerifyMode::Exhaustive).unwrap())
        .count();
    outcome(
        failures == 0,
        format!("{} denoise outputs checked exhaustively: {failures} not local minima", outputs.len()),
    )
}

fn criterion_3(instances: &[SmallInstance], outputs: &[LabeledSignal]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut chain_violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=200);
        let g = Graph::chain(n).unwrap();
        let w = EdgeWeighting::unit(&g);
        let sigma = rng.gen_range(0.1..1.0);
        let segments = rng.gen_range(1..=6.min(n));
        let levels: Vec<f64> = (0..segments).map(|_| 2.0 * normal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| levels[i * segments / n] + sigma * normal.sample(&mut rng))
            .collect();
        let lambda = rng.gen_range(0.2..4.0) * sigma * sigma;
        let delta = *[0.05, 0.1, 0.2].choose(&mut rng).unwrap();
        let prob = ExpansionProblem::new(&g, &w, &y, lambda, delta).unwrap();
        let out = denoise(&prob).unwrap().signal;
        let exact = exact_l0_chain(&y, lambda).unwrap().fitted();
        let candidate = LabeledSignal::from_values(&exact, *prob.grid()).unwrap();
        if !factor2_certificate(&out, &candidate, &prob).unwrap() {
            chain_violations += 1;
        }
    }
    let mut graph_violations = 0;
    for (inst, sig) in instances.iter().zip(outputs) {
        let prob = inst.problem();
        for _ in 0..100 {
            let k = rng.gen_range(1..=3);
            let values: Vec<i64> = (0..k).map(|_| rng.gen_range(inst.grid.lo()..=inst.grid.hi())).collect();
            let labels = (0..inst.g.n()).map(|_| *values.choose(&mut rng).unwrap()).collect();
            let candidate = LabeledSignal::new(labels, inst.grid).unwrap();
            if !factor2_certificate(sig, &candidate, &prob).unwrap() {
                graph_violations += 1;
            }
        }
    }
    outcome(
        chain_violations == 0 && graph_violations == 0,
        format!(
            "100 chains vs rounded exact solution: {chain_violations} violations; {} graphs x 100 candidates: {graph_violations} violations",
            instances.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut mismatches = 0;
    for trial in 0..500 {
        let n = rng.gen_range(1..=12);
        let y: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
        } else {
            (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect()
        };
        let lambda = rng.gen_range(0.0..3.0);
        let dp = exact_l0_chain(&y, lambda).unwrap();
        let brute = brute_force_chain(&y, lambda).unwrap();
        let same_cost = (dp.cost - brute.cost).abs() <= 1e-9 * (1.0 + brute.cost.abs());
        if dp.breakpoints != brute.breakpoints || !same_cost {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("500 instances, n <= 12: {mismatches} mismatches"))
}

fn resistance_corpus() -> Vec<(String, Graph)> {
    let mut corpus = Vec::new();
    for n in 2..=8 {
        corpus.push((format!("chain {n}"), Graph::chain(n).unwrap()));
        corpus.push((format!("complete {n}"), Graph::complete(n).unwrap()));
        if n >= 3 {
            corpus.push((format!("cycle {n}"), Graph::cycle(n).unwrap()));
        }
        let star = Graph::new(n, (1..n).map(|v| (0, v))).unwrap();
        corpus.push((format!("star {n}"), star));
    }
    for (r, c) in [(2, 2), (2, 3), (2, 4)] {
        corpus.push((format!("lattice {r}x{c}"), Graph::lattice(r, c).unwrap()));
    }
    for (c, k) in [(1, 3), (3, 3), (4, 4), (2, 5), (5, 3)] {
        corpus.push((format!("tadpole {c}+{k}"), Graph::tadpole(c, k).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for k in 0..60 {
        corpus.push((format!("random {k}"), random_graph(&mut rng, 8, 28)));
    }
    corpus
}

fn criterion_5() -> Outcome {
    let corpus = resistance_corpus();
    let mut worst_enum: f64 = 0.0;
    let mut worst_foster: f64 = 0.0;
    for (_, g) in &corpus {
        let r = effective_resistances(g).unwrap();
        let t = resistances_by_tree_enumeration(g).unwrap();
        for (a, b) in r.as_slice().iter().zip(t.as_slice()) {
            worst_enum = worst_enum.max((a - b).abs());
        }
        worst_foster = worst_foster.max((r.total() - (g.n() - 1) as f64).abs());
    }
    for g in [
        Graph::lattice(30, 30).unwrap(),
        Graph::lattice(10, 17).unwrap(),
        Graph::tadpole(50, 50).unwrap(),
        Graph::cycle(200).unwrap(),
    ] {
        let r = effective_resistances(&g).unwrap();
        worst_foster = worst_foster.max((r.total() - (g.n() - 1) as f64).abs());
    }
    let mut worst_complete: f64 = 0.0;
    for n in 3..=8 {
        let r = effective_resistances(&Graph::complete(n).unwrap()).unwrap();
        for &x in r.as_slice() {
            worst_complete = worst_complete.max((x - 2.0 / n as f64).abs());
        }
    }
    outcome(
        worst_enum <= 1e-9 && worst_foster <= 1e-8 && worst_complete <= 1e-9,
        format!(
            "(a) {} corpus graphs vs tree enumeration: max err {worst_enum:.2e}; (b) Foster incl. 30x30 lattice: max err {worst_foster:.2e}; (c) K3..K8 vs 2/n: max err {worst_complete:.2e}",
            corpus.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, g) in [("50-chain", Graph::chain(50).unwrap()), ("7x7 lattice", Graph::lattice(7, 7).unwrap())] {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
        let w = EdgeWeighting::unit(&g);
        let lambda = 4.0 * (g.num_edges() as f64).ln();
        let delta = 1.0 / (g.n() as f64).sqrt();
        let mut constant = 0;
        for _ in 0..200 {
            let y: Vec<f64> = (0..g.n()).map(|_| normal.sample(&mut rng)).collect();
            let prob = ExpansionProblem::new(&g, &w, &y, lambda, delta).unwrap();
            if denoise(&prob).unwrap().signal.is_constant() {
                constant += 1;
            }
        }
        pass &= constant * 100 >= 95 * 200;
        parts.push(format!("{name}: {constant}/200 constant"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let mut failures = 0;
    let mut merged = 0;
    let mut knife_edges = 0;
    let mut logged = Vec::new();
    for trial in 0..1000 {
        let n = rng.gen_range(1..=50);
        let y: Vec<f64> = match trial % 3 {
            0 => (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            1 => (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect(),
            _ => (0..n)
                .map(|i| (i * 3 / n) as f64 + rng.gen_range(-0.3..0.3))
                .collect(),
        };
        let lambda = lambda_max(&y).max(0.1) * rng.gen_range(0.0..1.2);
        let sol = tv_chain(&y, lambda).unwrap();
        let report = kkt_check(&sol, &y, lambda).unwrap();
        if sol.merged_ties > 0 || report.knife_edges > 0 {
            logged.push(format!(
                "trial {trial}: n={n} lambda={lambda:.6} merged ties={} knife edges={}",
                sol.merged_ties, report.knife_edges
            ));
        }
        merged += sol.merged_ties;
        knife_edges += report.knife_edges;
        if !report.holds() {
            failures += 1;
        }
    }
    for line in &logged {
        println!("    tie log: {line}");
    }
    outcome(
        failures == 0,
        format!(
            "1000 instances, n <= 50: {failures} certificate failures; {merged} merged ties over {} instances, {knife_edges} knife edges (logged above)",
            logged.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let scenario = Scenario {
        replicates: 100,
        seed: 0x5eed_0008,
        tuned: false,
        ..Scenario::new(
            GraphSpec::Chain(200),
            "steps:9:1".parse().unwrap(),
            vec![0.2, 1.0],
            vec![Method::L0, Method::TvChain],
        )
    };
    let table = run_experiment(&scenario).unwrap();
    let best = |m, s| table.get(m, s, LambdaMode::Best).unwrap();
    let (l0, tv) = (best(Method::L0, 0.2), best(Method::TvChain, 0.2));
    let (l0_hi, tv_hi) = (best(Method::L0, 1.0), best(Method::TvChain, 1.0));
    outcome(
        l0.mean_stmse < tv.mean_stmse,
        format!(
            "sigma=0.2: L0 {:.4} (se {:.4}) vs TV {:.4} (se {:.4}); sigma=1.0 (informational): L0 {:.4} vs TV {:.4}",
            l0.mean_stmse, l0.stderr, tv.mean_stmse, tv.stderr, l0_hi.mean_stmse, tv_hi.mean_stmse
        ),
    )
}

fn criterion_9() -> Outcome {
    let g = Graph::chain(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let sigma = 0.5;
    let mu0: Vec<f64> = (0..100).map(|i| if (i / 25) % 2 == 1 { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = mu0.iter().map(|m| m + sigma * normal.sample(&mut rng)).collect();
    let sigma_hat = estimate_sigma(&y, &g).unwrap();
    let ctx = FitContext::new(&g, 0.01).unwrap().with_truth(&mu0);
    let opts = TuneOptions {
        b: 200,
        alpha: DEFAULT_ALPHA,
        sigma_hat,
        seed: rng.gen(),
    };
    let result = tune_lambda(&y, &ctx, Method::Oracle, &[0.0], &opts).unwrap();
    let diff = result.mean_err[0] - result.offset(g.n());
    let se = result.stderr[0];
    outcome(
        diff.abs() <= 3.0 * se,
        format!(
            "mean score {:.3} - n sigma_hat^2 (1 + 1/alpha) {:.3} = {diff:.3}, 3 se = {:.3} (sigma_hat {sigma_hat:.4})",
            result.mean_err[0],
            result.offset(g.n()),
            3.0 * se
        ),
    )
}

fn criterion_10() -> Outcome {
    let scenario = Scenario {
        replicates: 50,
        seed: 0x5eed_000a,
        tuned: false,
        ..Scenario::new(
            GraphSpec::Tadpole(50, 50),
            "piecewise:17,34:0,1,0".parse().unwrap(),
            vec![0.3],
            vec![Method::W, Method::L0],
        )
    };
    let table = run_experiment(&scenario).unwrap();
    let w = table.get(Method::W, 0.3, LambdaMode::Best).unwrap();
    let l0 = table.get(Method::L0, 0.3, LambdaMode::Best).unwrap();
    outcome(
        w.mean_stmse <= l0.mean_stmse,
        format!(
            "tadpole 50+50, sigma=0.3, 50 replicates: W {:.4} (se {:.4}) vs L0 {:.4} (se {:.4})",
            w.mean_stmse, w.stderr, l0.mean_stmse, l0.stderr
        ),
    )
}

fn report(id: u32, name: &str, limit: Option<Duration>, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut result = run();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            result.pass = false;
            result.detail.push_str(&format!("; exceeded time limit {limit:?}"));
        }
    }
    println!(
        "[{}] {id:>2} {name}: {} ({:.1}s)",
        if result.pass { "PASS" } else { "FAIL" },
        result.detail,
        elapsed.as_secs_f64()
    );
    result.pass
}

fn main() -> ExitCode {
    let instances = small_instances();
    let mut ok = true;
    ok &= report(1, "inner-step optimality", Some(Duration::from_secs(60)), || criterion_1(&instances));
    let outputs: Vec<LabeledSignal> = instances
        .iter()
        .map(|inst| denoise(&inst.problem()).unwrap().signal)
        .collect();
    ok &= report(2, "local-minimizer property", None, || criterion_2(&instances, &outputs));
    ok &= report(3, "factor-2 certificate", None, || criterion_3(&instances, &outputs));
    ok &= report(4, "chain DP exactness", None, criterion_4);
    ok &= report(5, "effective resistance", None, criterion_5);
    ok &= report(6, "null constancy", None, criterion_6);
    ok &= report(7, "TV certificate", None, criterion_7);
    ok &= report(8, "risk trend L0 vs TV", Some(Duration::from_secs(600)), criterion_8);
    ok &= report(9, "tuning identity", None, criterion_9);
    ok &= report(10, "weighted vs unweighted", None, criterion_10);
    if ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
