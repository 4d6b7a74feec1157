//! `l0cut`: denoise, weigh, tune, simulate and benchmark from the shell.
//!
//! Exit codes: 0 on success, 1 when a computation fails, 2 for usage and
//! validation errors (bad flags, unparsable files, incompatible inputs).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l0cut::expansion::{denoise, ExpansionProblem};
use l0cut::graph::{induced_partition, objective_l0, objective_tv, EdgeWeighting, Graph};
use l0cut::io::{self, format_edge_list, format_signal};
use l0cut::resistance::effective_resistances;
use l0cut::sim::{
    default_b, default_delta, estimate_sigma, geometric_grid, run_experiment, simulate_observation,
    tune_lambda, FitContext, GraphSpec, Method, Scenario, SignalSpec, TuneOptions, DEFAULT_ALPHA,
};
use l0cut::{exact_l0_chain, tv_chain, Error};

#[derive(Parser)]
#[command(name = "l0cut", version, about = "Piecewise-constant denoising of graph signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a signal on a graph.
    Denoise(DenoiseArgs),
    /// Write effective-resistance edge weights.
    Weights(WeightsArgs),
    /// Choose lambda by randomized cross-validation.
    Tune(TuneArgs),
    /// Simulate a true signal and a noisy observation of it.
    Simulate(SimulateArgs),
    /// Run a replicated risk experiment described by a TOML scenario.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DenoiseArgs {
    /// Edge-list file, or a generated graph such as chain:100.
    #[arg(long)]
    graph: String,
    /// Signal file.
    #[arg(long)]
    signal: PathBuf,
    /// l0, w, exact-chain or tv-chain.
    #[arg(long, default_value = "l0")]
    method: String,
    #[arg(long)]
    lambda: f64,
    /// Grid spacing; defaults to sigma_hat / sqrt(n).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// unit, resistance, or a weighted edge-list file. Defaults to unit for
    /// l0 and resistance for w.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    graph: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    graph: String,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    method: String,
    /// auto, a comma-separated list, or geom:LO:HI:POINTS.
    #[arg(long, default_value = "auto")]
    grid: String,
    /// Randomization draws; defaults to 20 (5 above 10^4 vertices).
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Drawn at random and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// True-signal file, required by the oracle method.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// chain:N, cycle:N, lattice:RxC, complete:N, tadpole:C+K or file:PATH.
    #[arg(long)]
    graph: String,
    /// constant:V, steps:K[:H], piecewise:B..:L.., epidemic:T=..,p=.. or file:PATH.
    #[arg(long)]
    signal: String,
    #[arg(long)]
    sigma: f64,
    /// Drawn at random and printed when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Destination of the true signal.
    #[arg(long)]
    truth_out: PathBuf,
    /// Destination of the noisy observation.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    scenario: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "L0CUT_THREADS")]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Network(_) | Error::Numerical(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// A generated graph spec (`chain:10`) or an edge-list file.
fn load_graph(arg: &str) -> CliResult<(Graph, Option<EdgeWeighting>)> {
    if let Ok(spec) = arg.parse::<GraphSpec>() {
        if !matches!(spec, GraphSpec::File(_)) {
            return Ok((spec.build()?, None));
        }
    }
    let path = arg.strip_prefix("file:").unwrap_or(arg);
    let list = io::read_edge_list(Path::new(path))?;
    Ok((list.graph, list.weights))
}

fn load_signal(path: &Path, g: &Graph) -> CliResult<Vec<f64>> {
    let y = io::read_signal(path)?;
    if y.len() != g.n() {
        return Err(usage(format!(
            "{}: {} values for a graph with {} vertices",
            path.display(),
            y.len(),
            g.n()
        )));
    }
    Ok(y)
}

fn parse_method(s: &str) -> CliResult<Method> {
    Ok(s.parse::<Method>()?)
}

fn resolve_delta(delta: Option<f64>, y: &[f64], g: &Graph) -> CliResult<f64> {
    match delta {
        Some(d) if d > 0.0 && d.is_finite() => Ok(d),
        Some(d) => Err(usage(format!("--delta must be > 0, got {d}"))),
        None => {
            let sigma_hat = estimate_sigma(y, g).unwrap_or(0.0);
            Ok(default_delta(y, sigma_hat))
        }
    }
}

fn resolve_weights(choice: &str, g: &Graph) -> CliResult<EdgeWeighting> {
    match choice {
        "unit" => Ok(EdgeWeighting::unit(g)),
        "resistance" => Ok(effective_resistances(g)?),
        path => {
            let list = io::read_edge_list(Path::new(path))?;
            if list.graph != *g {
                return Err(usage(format!("{path}: edges differ from the graph")));
            }
            list.weights
                .ok_or_else(|| usage(format!("{path}: edge list carries no weights")))
        }
    }
}

fn write_out(path: &Path, text: &str) -> CliResult {
    Ok(io::write_text(path, text)?)
}

fn cmd_denoise(args: DenoiseArgs) -> CliResult {
    let (g, _) = load_graph(&args.graph)?;
    let y = load_signal(&args.signal, &g)?;
    let method = parse_method(&args.method)?;
    if !(args.lambda >= 0.0 && args.lambda.is_finite()) {
        return Err(usage(format!("--lambda must be >= 0, got {}", args.lambda)));
    }
    let mut header = vec![
        format!("l0cut denoise --method {method} --lambda {}", args.lambda),
        format!("graph: {}", args.graph),
        format!("signal: {}", args.signal.display()),
    ];
    let mut summary = String::new();
    let fitted = match method {
        Method::L0 | Method::W => {
            let default = if method == Method::W { "resistance" } else { "unit" };
            let choice = args.weights.as_deref().unwrap_or(default);
            let w = resolve_weights(choice, &g)?;
            let delta = resolve_delta(args.delta, &y, &g)?;
            let prob = ExpansionProblem::new(&g, &w, &y, args.lambda, delta)?.with_tau(args.tau)?;
            let report = denoise(&prob)?;
            let partition = induced_partition(&report.signal, &g)?;
            let cut_weight: f64 = partition.boundary().iter().map(|&e| w.get(e)).sum();
            header.push(format!("weights: {choice}, delta: {delta}, tau: {}", args.tau));
            let _ = writeln!(summary, "objective: {}", report.objective);
            let _ = writeln!(summary, "cut edges: {}", partition.boundary().len());
            let _ = writeln!(summary, "cut weight: {cut_weight}");
            let _ = writeln!(
                summary,
                "iterations: {} sweeps, {} accepted expansions",
                report.sweeps,
                report.accepted_moves()
            );
            report.signal.values()
        }
        Method::ExactChain | Method::TvChain => {
            if args.weights.as_deref().is_some_and(|w| w != "unit") {
                return Err(usage(format!("{method} does not take edge weights")));
            }
            let order = g.path_order().ok_or(Error::NotAChain)?;
            let ordered: Vec<f64> = order.iter().map(|&v| y[v]).collect();
            let along = if method == Method::ExactChain {
                exact_l0_chain(&ordered, args.lambda)?.fitted()
            } else {
                tv_chain(&ordered, args.lambda)?.mu
            };
            let mut fitted = vec![0.0; g.n()];
            for (k, &v) in order.iter().enumerate() {
                fitted[v] = along[k];
            }
            let objective = if method == Method::ExactChain {
                objective_l0(&y, &fitted, args.lambda, &g)?
            } else {
                objective_tv(&y, &fitted, args.lambda, &g)?
            };
            let cuts = g.edges().iter().filter(|&&(i, j)| fitted[i] != fitted[j]).count();
            let _ = writeln!(summary, "objective: {objective}");
            let _ = writeln!(summary, "cut edges: {cuts}");
            let _ = writeln!(summary, "cut weight: {cuts}");
            let _ = writeln!(summary, "iterations: 1");
            fitted
        }
        other => return Err(usage(format!("method {other} cannot be used with denoise"))),
    };
    write_out(&args.out, &format_signal(&fitted, &header))?;
    print!("{summary}");
    Ok(())
}

fn cmd_weights(args: WeightsArgs) -> CliResult {
    let (g, _) = load_graph(&args.graph)?;
    let r = effective_resistances(&g)?;
    let header = vec![
        format!("effective resistances for {}", args.graph),
        format!("sum of weights: {} (n - 1 = {})", r.total(), g.n() - 1),
    ];
    write_out(&args.out, &format_edge_list(&g, Some(&r), &header))?;
    println!("sum of weights: {} (n - 1 = {})", r.total(), g.n() - 1);
    Ok(())
}

fn parse_grid(spec: &str) -> CliResult<Option<Vec<f64>>> {
    if spec == "auto" {
        return Ok(None);
    }
    let bad = || usage(format!("invalid --grid {spec:?}"));
    let grid: Vec<f64> = if let Some(rest) = spec.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let points: usize = parts[2].parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && points > 0) {
            return Err(bad());
        }
        geometric_grid(lo, hi, points)
    } else {
        spec.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(bad());
    }
    Ok(Some(grid))
}

fn cmd_tune(args: TuneArgs) -> CliResult {
    let (g, _) = load_graph(&args.graph)?;
    let y = load_signal(&args.signal, &g)?;
    let method = parse_method(&args.method)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let sigma_hat = estimate_sigma(&y, &g)?;
    let delta = resolve_delta(args.delta, &y, &g)?;
    let truth = match &args.truth {
        Some(path) => Some(load_signal(path, &g)?),
        None => None,
    };
    if method == Method::Oracle && truth.is_none() {
        return Err(usage("the oracle method needs --truth"));
    }
    let resistance = if method == Method::W {
        Some(effective_resistances(&g)?)
    } else {
        None
    };
    let mut ctx = FitContext::new(&g, delta)?;
    if let Some(r) = resistance.as_ref() {
        ctx = ctx.with_resistance(r);
    }
    if let Some(t) = truth.as_deref() {
        ctx = ctx.with_truth(t);
    }
    let grid = match parse_grid(&args.grid)? {
        Some(grid) => grid,
        None => method.lambda_grid(&ctx, &y, sigma_hat)?,
    };
    let opts = TuneOptions {
        b: args.b.unwrap_or_else(|| default_b(g.n())),
        alpha: args.alpha,
        sigma_hat,
        seed,
    };
    let result = tune_lambda(&y, &ctx, method, &grid, &opts)?;

    let mut out = String::new();
    let _ = writeln!(out, "# l0cut tune --method {method} --grid {}", args.grid);
    let _ = writeln!(out, "# graph: {}", args.graph);
    let _ = writeln!(out, "# signal: {}", args.signal.display());
    let _ = writeln!(out, "# seed: {seed}");
    let _ = writeln!(out, "# B: {}, alpha: {}, sigma_hat: {}, delta: {delta}", result.b, result.alpha, sigma_hat);
    let _ = writeln!(out, "# chosen lambda: {}", result.chosen_lambda());
    let _ = writeln!(out, "# offset n sigma_hat^2 (1 + 1/alpha): {}", result.offset(g.n()));
    out.push_str("lambda,mean_err,stderr,chosen\n");
    for k in 0..result.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            result.grid[k],
            result.mean_err[k],
            result.stderr[k],
            u8::from(k == result.chosen_index)
        );
    }
    match &args.out {
        Some(path) => {
            write_out(path, &out)?;
            println!("seed: {seed}");
            println!("chosen lambda: {}", result.chosen_lambda());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let spec: GraphSpec = args.graph.parse()?;
    let g = spec.build()?;
    let signal: SignalSpec = args.signal.parse()?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let (mu0, y) = simulate_observation(&g, &signal, args.sigma, seed)?;
    let header = vec![
        format!("l0cut simulate --graph {spec} --signal {signal} --sigma {}", args.sigma),
        format!("seed: {seed}"),
    ];
    let mut truth_header = header.clone();
    truth_header.push("true signal".into());
    let mut obs_header = header;
    obs_header.push("observation".into());
    write_out(&args.truth_out, &format_signal(&mu0, &truth_header))?;
    write_out(&args.out, &format_signal(&y, &obs_header))?;
    println!("seed: {seed}");
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| usage(format!("{}: {e}", args.scenario.display())))?;
    let scenario = Scenario::from_toml(&text)?;
    let table = run_experiment(&scenario)?;
    let header: Vec<String> = std::iter::once(format!("l0cut bench {}", args.scenario.display()))
        .chain(scenario.to_toml().lines().map(str::to_string))
        .collect();
    let csv = table.to_csv(&header);
    match &args.out {
        Some(path) => write_out(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Denoise(a) => cmd_denoise(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
