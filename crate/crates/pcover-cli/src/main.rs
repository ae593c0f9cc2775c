//! Command-line interface: instance generation, the rounding solver, the
//! facility-location and ball-covering pipelines, exact optima, cover
//! verification, and benchmark sweeps. Subcommands read JSON from `--input`
//! (or stdin) and write JSON to `--output` (or stdout), so they compose in
//! pipes. All randomness is controlled by `--seed`.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcover::error::Error as CoreError;
use pcover::fl::{solve_fl, FLInstance};
use pcover::generators::{
    gap_instance, random_instance, setcover_to_intervals, RandomParams,
};
use pcover::mcc::{solve_mcc, MCCInstance};
use pcover::model::{Cover, Instance};
use pcover::oracle::{exact_opt, exact_opt_guarded};
use pcover::partition::build_natural_lp;
use pcover::rounding::{estimate_iteration_success, solve, RounderKind, RoundingConfig};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Instances at or below this set count get an automatic exact comparison.
const AUTO_EXACT_SETS: usize = 20;

#[derive(Parser)]
#[command(
    name = "pcover",
    about = "Partition set cover solver: strengthened covering LP with randomized rounding",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit an instance from one of the built-in families
    Generate {
        #[command(subcommand)]
        family: GenerateCommand,
    },
    /// Run the rounding pipeline on a partition set cover instance
    Solve(SolveArgs),
    /// Run the facility location pipeline
    SolveFl(SolveArgs),
    /// Run the ball covering pipeline
    SolveMcc(SolveArgs),
    /// Compute the exact optimum by branch-and-bound (small instances)
    Exact {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        table: bool,
    },
    /// Check a cover against an instance and report per-color deficits
    Verify {
        #[command(flatten)]
        io: IoArgs,
        /// Cover JSON: {"chosen": [set indices]}
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        table: bool,
    },
    /// Solve a seeded suite and report per-instance ratios
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Block-partition family with LP/integral gap sqrt(n)
    Gap {
        #[arg(long)]
        n: usize,
        /// Output file; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Seeded random instance
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        wmin: f64,
        #[arg(long, default_value_t = 10.0)]
        wmax: f64,
        /// Output file; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Embed a plain set cover instance into disjoint unit intervals
    Intervals {
        /// Set cover instance to embed (one color spanning all elements)
        #[arg(long)]
        from: PathBuf,
        /// Output file; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Input file; stdin when omitted
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RounderArg {
    Greedy,
    Frequency,
}

impl From<RounderArg> for RounderKind {
    fn from(r: RounderArg) -> Self {
        match r {
            RounderArg::Greedy => RounderKind::Greedy,
            RounderArg::Frequency => RounderKind::Frequency,
        }
    }
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6.0)]
    alpha: f64,
    /// Iteration constant: each restart draws ceil(c * ln(r+1)) rounds
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, value_enum, default_value_t = RounderArg::Greedy)]
    rounder: RounderArg,
    /// Monte Carlo trials for the per-color success estimates in the report
    /// (0 disables the estimates)
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Render the report as aligned text instead of JSON
    #[arg(long)]
    table: bool,
    /// Write the rounding trace JSON to this path
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write each added knapsack-cover row to stderr as a JSON line
    #[arg(long)]
    dump_cuts: bool,
    /// Print the covering LP to stderr before solving
    #[arg(long)]
    dump_lp: bool,
}

impl SolveArgs {
    fn config(&self) -> RoundingConfig {
        RoundingConfig {
            alpha: self.alpha,
            c: self.c,
            max_restarts: 20,
            seed: self.seed,
            rounder: self.rounder.into(),
        }
    }
}

#[derive(Args, Clone)]
struct BenchArgs {
    /// Suite to run (only `random` is defined)
    #[arg(long, default_value = "random")]
    suite: String,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    r: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 6.0)]
    alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, value_enum, default_value_t = RounderArg::Greedy)]
    rounder: RounderArg,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    table: bool,
}

enum CliError {
    /// Malformed input, violated invariants, or an infeasible verification.
    User(String),
    /// Solver failures and broken internal contracts.
    Internal(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) | CoreError::Infeasible(_) => CliError::User(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(format!("io error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_input(io: &IoArgs) -> CliResult<String> {
    match &io.input {
        Some(path) => Ok(std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?),
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
    }
}

fn write_output(io: &IoArgs, text: &str) -> CliResult<()> {
    match &io.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn digest_of(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Serialize)]
struct AlgorithmParams {
    seed: u64,
    alpha: f64,
    c: f64,
    rounder: RounderKind,
}

#[derive(Serialize)]
struct ColorEstimate {
    color: usize,
    residual: usize,
    success_rate: f64,
}

#[derive(Serialize)]
struct RunReport {
    instance_digest: String,
    algorithm: AlgorithmParams,
    cover: Vec<usize>,
    weight: f64,
    feasible: bool,
    delta: f64,
    lp_weight: f64,
    separated_cuts: usize,
    restarts_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iteration_success: Option<Vec<ColorEstimate>>,
    wall_ms: u128,
    seed: u64,
}

fn render_table(pairs: &[(String, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_generate(family: GenerateCommand) -> CliResult<()> {
    let sink = |output: Option<PathBuf>| IoArgs {
        input: None,
        output,
    };
    match family {
        GenerateCommand::Gap { n, output } => {
            let inst = gap_instance(n)?;
            write_output(&sink(output), &inst.to_json(None))
        }
        GenerateCommand::Random {
            n,
            m,
            r,
            density,
            seed,
            wmin,
            wmax,
            output,
        } => {
            let mut params = RandomParams::new(n, m, r, density, seed);
            params.weight_range = (wmin, wmax);
            let inst = random_instance(&params)?;
            write_output(&sink(output), &inst.to_json(None))
        }
        GenerateCommand::Intervals { from, output } => {
            let text = std::fs::read_to_string(&from)
                .map_err(|e| CliError::User(format!("cannot read {}: {e}", from.display())))?;
            let (sc, _) = Instance::from_json(&text)?;
            let geo = setcover_to_intervals(&sc)?;
            write_output(&sink(output), &geo.instance.to_json(Some(geo.geometry)))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let text = read_input(&args.io)?;
    let (instance, _) = Instance::from_json(&text)?;
    if args.dump_lp {
        eprint!("{}", build_natural_lp(&instance));
    }
    log::info!(
        "solving: {} elements, {} sets, {} colors",
        instance.num_elements(),
        instance.num_sets(),
        instance.num_colors()
    );

    let config = args.config();
    let out = solve(&instance, &config)?;
    if args.dump_cuts {
        let mut stderr = std::io::stderr().lock();
        for cut in &out.strengthened.cuts {
            let line = serde_json::json!({
                "color": cut.color,
                "base_size": cut.base_size,
                "rhs": cut.rhs,
            });
            writeln!(stderr, "{line}")?;
        }
    }
    let report = instance.verify_cover(&out.cover)?;
    log::info!(
        "cover weight {} after {} separated cuts (delta {})",
        report.total_weight,
        out.trace.separated_cuts,
        out.trace.delta
    );

    let exact_weight = if instance.num_sets() <= AUTO_EXACT_SETS {
        Some(exact_opt(&instance)?.weight)
    } else {
        None
    };

    let iteration_success = if args.trials > 0 {
        let state = instance.residual(&out.strengthened.base)?;
        let estimates: Vec<ColorEstimate> = state
            .active_colors()
            .map(|t| {
                estimate_iteration_success(
                    &instance,
                    &out.strengthened.frac.x,
                    &out.strengthened.base,
                    t,
                    args.trials,
                    config.seed,
                )
                .map(|success_rate| ColorEstimate {
                    color: t,
                    residual: state.residual_per_color[t],
                    success_rate,
                })
            })
            .collect::<Result<_, _>>()?;
        if estimates.is_empty() {
            None
        } else {
            Some(estimates)
        }
    } else {
        None
    };

    if let Some(path) = &args.trace {
        std::fs::write(path, serde_json::to_string_pretty(&out.trace).unwrap())
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
    }

    let run = RunReport {
        instance_digest: digest_of(&instance.to_json(None)),
        algorithm: AlgorithmParams {
            seed: args.seed,
            alpha: args.alpha,
            c: args.c,
            rounder: config.rounder,
        },
        cover: out.cover.chosen.clone(),
        weight: report.total_weight,
        feasible: report.feasible,
        delta: out.trace.delta,
        lp_weight: out.trace.lp_weight,
        separated_cuts: out.trace.separated_cuts,
        restarts_used: out.trace.restarts.len(),
        exact_weight,
        ratio: exact_weight.map(|w| report.total_weight / w.max(f64::MIN_POSITIVE)),
        iteration_success,
        wall_ms: start.elapsed().as_millis(),
        seed: args.seed,
    };
    let text = if args.table {
        let mut pairs = vec![
            ("weight".to_string(), format!("{}", run.weight)),
            ("feasible".to_string(), format!("{}", run.feasible)),
            ("delta".to_string(), format!("{}", run.delta)),
            ("lp_weight".to_string(), format!("{}", run.lp_weight)),
            ("separated_cuts".to_string(), format!("{}", run.separated_cuts)),
            ("cover".to_string(), format!("{:?}", run.cover)),
        ];
        if let (Some(e), Some(r)) = (run.exact_weight, run.ratio) {
            pairs.push(("exact_weight".to_string(), format!("{e}")));
            pairs.push(("ratio".to_string(), format!("{r:.4}")));
        }
        render_table(&pairs)
    } else {
        serde_json::to_string_pretty(&run).unwrap()
    };
    write_output(&args.io, &text)
}

#[derive(Serialize)]
struct FlReport {
    instance_digest: String,
    algorithm: AlgorithmParams,
    open: Vec<usize>,
    served: Vec<(usize, usize)>,
    cost: f64,
    delta: f64,
    lp_cost: f64,
    cuts: usize,
    heavy_clients: usize,
    wall_ms: u128,
    seed: u64,
}

fn cmd_solve_fl(args: SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let text = read_input(&args.io)?;
    let (fl, _) = FLInstance::from_json(&text)?;
    let config = args.config();
    let out = solve_fl(&fl, &config)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, serde_json::to_string_pretty(&out.stats).unwrap())
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
    }
    let run = FlReport {
        instance_digest: digest_of(&fl.to_json(None)),
        algorithm: AlgorithmParams {
            seed: args.seed,
            alpha: args.alpha,
            c: args.c,
            rounder: config.rounder,
        },
        open: out.solution.open.clone(),
        served: out.solution.served.clone(),
        cost: out.solution.cost,
        delta: out.stats.delta,
        lp_cost: out.stats.lp_cost,
        cuts: out.stats.cuts,
        heavy_clients: out.stats.heavy_clients,
        wall_ms: start.elapsed().as_millis(),
        seed: args.seed,
    };
    let text = if args.table {
        render_table(&[
            ("cost".to_string(), format!("{}", run.cost)),
            ("open".to_string(), format!("{:?}", run.open)),
            ("served".to_string(), format!("{}", run.served.len())),
            ("delta".to_string(), format!("{}", run.delta)),
            ("cuts".to_string(), format!("{}", run.cuts)),
        ])
    } else {
        serde_json::to_string_pretty(&run).unwrap()
    };
    write_output(&args.io, &text)
}

#[derive(Serialize)]
struct MccReport {
    instance_digest: String,
    algorithm: AlgorithmParams,
    balls: Vec<(usize, f64)>,
    cost: f64,
    wall_ms: u128,
    seed: u64,
}

fn cmd_solve_mcc(args: SolveArgs) -> CliResult<()> {
    let start = Instant::now();
    let text = read_input(&args.io)?;
    let mcc = MCCInstance::from_json(&text)?;
    let config = args.config();
    let out = solve_mcc(&mcc, &config)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, serde_json::to_string_pretty(&out.trace).unwrap())
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?;
    }
    let run = MccReport {
        instance_digest: digest_of(&mcc.fl.to_json(Some(mcc.gamma))),
        algorithm: AlgorithmParams {
            seed: args.seed,
            alpha: args.alpha,
            c: args.c,
            rounder: config.rounder,
        },
        balls: out.balls.iter().map(|b| (b.facility, b.radius)).collect(),
        cost: out.cost,
        wall_ms: start.elapsed().as_millis(),
        seed: args.seed,
    };
    let text = if args.table {
        render_table(&[
            ("cost".to_string(), format!("{}", run.cost)),
            ("balls".to_string(), format!("{:?}", run.balls)),
        ])
    } else {
        serde_json::to_string_pretty(&run).unwrap()
    };
    write_output(&args.io, &text)
}

#[derive(Serialize)]
struct ExactReport {
    weight: f64,
    cover: Vec<usize>,
    nodes: u64,
    wall_ms: u128,
}

fn cmd_exact(io: IoArgs, table: bool) -> CliResult<()> {
    let start = Instant::now();
    let text = read_input(&io)?;
    let (instance, _) = Instance::from_json(&text)?;
    let res = exact_opt(&instance)?;
    let run = ExactReport {
        weight: res.weight,
        cover: res.cover.chosen,
        nodes: res.nodes,
        wall_ms: start.elapsed().as_millis(),
    };
    let text = if table {
        render_table(&[
            ("weight".to_string(), format!("{}", run.weight)),
            ("cover".to_string(), format!("{:?}", run.cover)),
            ("nodes".to_string(), format!("{}", run.nodes)),
        ])
    } else {
        serde_json::to_string_pretty(&run).unwrap()
    };
    write_output(&io, &text)
}

#[derive(Serialize)]
struct VerifyReport {
    feasible: bool,
    weight: f64,
    covered: Vec<usize>,
    requirements: Vec<usize>,
    deficits: Vec<usize>,
}

fn cmd_verify(io: IoArgs, cover_path: PathBuf, table: bool) -> CliResult<()> {
    let text = read_input(&io)?;
    let (instance, _) = Instance::from_json(&text)?;
    let cover_text = std::fs::read_to_string(&cover_path)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", cover_path.display())))?;
    let cover: Cover = serde_json::from_str(&cover_text)
        .map_err(|e| CliError::User(format!("cover JSON: {e}")))?;
    let cover = Cover::new(cover.chosen);
    let report = instance.verify_cover(&cover)?;
    let run = VerifyReport {
        feasible: report.feasible,
        weight: report.total_weight,
        covered: report.covered.clone(),
        requirements: instance.colors().iter().map(|c| c.requirement).collect(),
        deficits: report.deficits(&instance),
    };
    let text = if table {
        render_table(&[
            ("feasible".to_string(), format!("{}", run.feasible)),
            ("weight".to_string(), format!("{}", run.weight)),
            ("covered".to_string(), format!("{:?}", run.covered)),
            ("requirements".to_string(), format!("{:?}", run.requirements)),
            ("deficits".to_string(), format!("{:?}", run.deficits)),
        ])
    } else {
        serde_json::to_string_pretty(&run).unwrap()
    };
    write_output(&io, &text)?;
    if !run.feasible {
        return Err(CliError::User(format!(
            "cover is infeasible; per-color deficits {:?}",
            run.deficits
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    index: usize,
    n: usize,
    m: usize,
    r: usize,
    weight: f64,
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct BenchReport {
    suite: String,
    count: usize,
    seed: u64,
    rows: Vec<BenchRow>,
    mean_ratio: Option<f64>,
    max_ratio: Option<f64>,
    all_feasible: bool,
    wall_ms: u128,
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    if args.suite != "random" {
        return Err(CliError::User(format!(
            "unknown suite `{}` (expected: random)",
            args.suite
        )));
    }
    let start = Instant::now();
    let rows: Vec<CliResult<BenchRow>> = (0..args.count)
        .into_par_iter()
        .map(|index| {
            let seed = args.seed.wrapping_add(index as u64);
            let params = RandomParams::new(args.n, args.m, args.r, args.density, seed);
            let instance = random_instance(&params)?;
            let config = RoundingConfig {
                alpha: args.alpha,
                c: args.c,
                max_restarts: 20,
                seed,
                rounder: args.rounder.into(),
            };
            let out = solve(&instance, &config)?;
            let report = instance.verify_cover(&out.cover)?;
            if !report.feasible {
                return Err(CliError::Internal(format!(
                    "instance {index}: solver returned an infeasible cover"
                )));
            }
            let exact_weight = if instance.num_sets() <= AUTO_EXACT_SETS {
                Some(exact_opt_guarded(&instance, AUTO_EXACT_SETS)?.weight)
            } else {
                None
            };
            Ok(BenchRow {
                index,
                n: instance.num_elements(),
                m: instance.num_sets(),
                r: instance.num_colors(),
                weight: report.total_weight,
                feasible: report.feasible,
                exact_weight,
                ratio: exact_weight.map(|w| report.total_weight / w.max(f64::MIN_POSITIVE)),
            })
        })
        .collect();
    let rows: Vec<BenchRow> = rows.into_iter().collect::<CliResult<_>>()?;

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let mean_ratio = if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
    };
    let max_ratio = ratios.iter().copied().fold(None, |acc: Option<f64>, r| {
        Some(acc.map_or(r, |a| a.max(r)))
    });
    let all_feasible = rows.iter().all(|r| r.feasible);
    let report = BenchReport {
        suite: args.suite.clone(),
        count: args.count,
        seed: args.seed,
        rows,
        mean_ratio,
        max_ratio,
        all_feasible,
        wall_ms: start.elapsed().as_millis(),
    };

    let io = IoArgs {
        input: None,
        output: args.output.clone(),
    };
    let text = if args.table {
        let mut lines = vec![format!(
            "{:>5} {:>4} {:>4} {:>3} {:>12} {:>12} {:>8}",
            "idx", "n", "m", "r", "weight", "exact", "ratio"
        )];
        for row in &report.rows {
            lines.push(format!(
                "{:>5} {:>4} {:>4} {:>3} {:>12.4} {:>12} {:>8}",
                row.index,
                row.n,
                row.m,
                row.r,
                row.weight,
                row.exact_weight
                    .map_or("-".to_string(), |w| format!("{w:.4}")),
                row.ratio.map_or("-".to_string(), |r| format!("{r:.3}")),
            ));
        }
        lines.push(format!(
            "summary: count {}, mean ratio {}, max ratio {}, all feasible {}",
            report.count,
            report
                .mean_ratio
                .map_or("-".to_string(), |r| format!("{r:.4}")),
            report
                .max_ratio
                .map_or("-".to_string(), |r| format!("{r:.4}")),
            report.all_feasible
        ));
        lines.join("\n")
    } else {
        serde_json::to_string_pretty(&report).unwrap()
    };
    write_output(&io, &text)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { family } => cmd_generate(family),
        Command::Solve(args) => cmd_solve(args),
        Command::SolveFl(args) => cmd_solve_fl(args),
        Command::SolveMcc(args) => cmd_solve_mcc(args),
        Command::Exact { io, table } => cmd_exact(io, table),
        Command::Verify { io, cover, table } => cmd_verify(io, cover, table),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PCOVER_LOG", "off")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
