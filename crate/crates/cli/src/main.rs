use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seatopt::chart::render_chart;
use seatopt::qubo::{AnnealingSampler, ExhaustiveSampler, QuboSampler, DEFAULT_SWEEPS};
use seatopt::report::{
    run_benchmark_with, run_solver_with, BenchmarkReport, BenchmarkRow, CellResult, SolverKind,
    SolverSpec,
};
use seatopt::{builtin_problem, compile_cfn, parse_problem, Builtin, SeatingProblem};

/// Optimise seating plans with exact, Monte Carlo and QUBO-sampling solvers.
#[derive(Debug, Parser)]
#[command(
    name = "optimize-seating",
    version,
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every solver on every problem and print a score table.
    Benchmark(BenchArgs),
    /// List the built-in problems.
    Builtins,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SamplerChoice {
    /// Per-shot simulated annealing.
    Classical,
    /// Exact ground states by enumeration (24 bits at most).
    Exhaustive,
}

impl SamplerChoice {
    fn build(self, sweeps: usize) -> Box<dyn QuboSampler> {
        match self {
            SamplerChoice::Classical => Box::new(AnnealingSampler::with_sweeps(sweeps)),
            SamplerChoice::Exhaustive => Box::new(ExhaustiveSampler::default()),
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Problem file, or `builtin:NAME` (prob1, prob2, prob3, prob4, prob5s, prob5).
    #[arg(long)]
    problem: Option<String>,

    /// brute, mc, hf, qubo-oh, qubo-dw or qubo-ab.
    #[arg(long, default_value = "mc")]
    solver: SolverKind,

    /// Monte Carlo steps per trajectory.
    #[arg(long, default_value_t = 1_000)]
    steps: u64,

    /// Sampler shots for QUBO solvers.
    #[arg(long, default_value_t = 1_000)]
    shots: u64,

    /// Independent runs, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    replicates: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Fraction of Monte Carlo proposals that swap two guests.
    #[arg(long)]
    swap_frac: Option<f64>,

    /// Hill-flattening ceiling above the best score seen.
    #[arg(long)]
    hf_ceiling: Option<f64>,

    /// Hill-flattening slope above the ceiling, in (0, 1].
    #[arg(long)]
    hf_kappa: Option<f64>,

    /// One-hot / domain-wall constraint strength.
    #[arg(long)]
    lambda_enc: Option<f64>,

    /// QUBO sampler backend.
    #[arg(long, value_enum, default_value = "classical")]
    sampler: SamplerChoice,

    /// Sweeps per shot for the classical sampler.
    #[arg(long, default_value_t = DEFAULT_SWEEPS)]
    sweeps: usize,

    /// Write a one-row TSV report.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Write an SVG chart of the best seating.
    #[arg(long)]
    chart: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated problems (files or `builtin:NAME`); all built-ins by default.
    #[arg(long, value_delimiter = ',')]
    problems: Vec<String>,

    /// Comma-separated solver specs such as `mc:30k` or `qubo-ab:1000`.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "brute,mc:1k,mc:30k,hf:1k,hf:30k,qubo-oh:1k,qubo-dw:1k,qubo-ab:1k"
    )]
    solvers: Vec<SolverSpec>,

    #[arg(long, default_value_t = 1)]
    replicates: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value = "classical")]
    sampler: SamplerChoice,

    #[arg(long, default_value_t = DEFAULT_SWEEPS)]
    sweeps: usize,

    /// Write the TSV report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn load_problem(source: &str) -> Result<(String, SeatingProblem)> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let which: Builtin = name.parse().map_err(anyhow::Error::msg)?;
        return Ok((which.name().to_string(), builtin_problem(which)));
    }
    let path = Path::new(source);
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let problem = parse_problem(&text).with_context(|| format!("parsing {}", path.display()))?;
    let name = path
        .file_stem()
        .map_or_else(|| source.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, problem))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn solve(args: &SolveArgs) -> Result<()> {
    let Some(source) = &args.problem else {
        bail!("--problem is required (a file path or builtin:NAME)");
    };
    let (name, problem) = load_problem(source)?;
    let (cfn, map) = compile_cfn(&problem).with_context(|| format!("compiling {name}"))?;
    let spec = SolverSpec {
        kind: args.solver,
        steps: args.steps,
        shots: args.shots,
        replicates: args.replicates,
        sweeps: args.sweeps,
        swap_fraction: args.swap_frac,
        hf_ceiling: args.hf_ceiling,
        hf_kappa: args.hf_kappa,
        constraint_strength: args.lambda_enc,
    };
    let sampler = args.sampler.build(args.sweeps);

    let start = Instant::now();
    let run = run_solver_with(&cfn, &spec, args.seed, sampler.as_ref())?;
    let wall_time_s = start.elapsed().as_secs_f64();

    println!(
        "problem  {name} ({} guests, {} seats)",
        problem.guest_count(),
        problem.seat_count()
    );
    println!("solver   {}", spec.label());
    if matches!(spec.kind, SolverKind::Qubo(_)) {
        println!("sampler  {}", sampler.name());
    }
    if let Some(v) = run.valid_fraction {
        println!("valid    {v:.4}");
    }
    let seating = match &run.best {
        Some(best) => {
            println!("score    {}", best.score);
            println!("overlaps {}", best.overlap_count);
            let seating = map.full_seating(&best.assignment);
            for (guest, &seat) in problem.guests().iter().zip(&seating) {
                let s = &problem.seats()[seat];
                println!(
                    "  {:<16} {}:{}",
                    guest.id,
                    problem.tables()[s.table].id(),
                    s.index_in_table
                );
            }
            Some(seating)
        }
        None => {
            println!("result   no valid solution");
            None
        }
    };
    println!("time     {wall_time_s:.3}s");

    if let Some(path) = &args.report {
        let result = match run.best {
            Some(best) => CellResult::Solved {
                score: best.score,
                overlap_count: best.overlap_count,
                assignment: best.assignment,
            },
            None => CellResult::NoValidSolution,
        };
        let report = BenchmarkReport {
            rows: vec![BenchmarkRow {
                solver: spec.label(),
                problem: name,
                result,
                wall_time_s,
                valid_fraction: run.valid_fraction,
            }],
            ..BenchmarkReport::default()
        };
        write(path, &report.to_tsv())?;
    }
    if let Some(path) = &args.chart {
        write(path, &render_chart(&problem, seating.as_deref()))?;
    }
    Ok(())
}

fn benchmark(args: &BenchArgs) -> Result<()> {
    let sources: Vec<String> = if args.problems.is_empty() {
        Builtin::ALL
            .iter()
            .map(|b| format!("builtin:{b}"))
            .collect()
    } else {
        args.problems.clone()
    };
    let problems = sources
        .iter()
        .map(|s| load_problem(s))
        .collect::<Result<Vec<_>>>()?;
    let solvers: Vec<SolverSpec> = args
        .solvers
        .iter()
        .map(|s| SolverSpec {
            replicates: args.replicates,
            sweeps: args.sweeps,
            ..*s
        })
        .collect();
    let sampler = args.sampler.build(args.sweeps);
    let report = run_benchmark_with(&problems, &solvers, args.seed, Some(sampler.as_ref()))?;

    let compiled = problems
        .iter()
        .map(|(n, p)| Ok((n.clone(), compile_cfn(p)?.0)))
        .collect::<Result<Vec<_>>>()?;
    report.verify(&compiled).map_err(anyhow::Error::msg)?;

    print!("{report}");
    if let Some(path) = &args.report {
        write(path, &report.to_tsv())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Some(Command::Benchmark(args)) => benchmark(args),
        Some(Command::Builtins) => {
            for b in Builtin::ALL {
                let p = builtin_problem(b);
                println!(
                    "{b}\t{} guests\t{} seats\t{} tables",
                    p.guest_count(),
                    p.seat_count(),
                    p.tables().len()
                );
            }
            Ok(())
        }
        None => solve(&cli.solve),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
