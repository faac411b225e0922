use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stackplan::bench::{emit_report, run_batch, BatchConfig, ReportFormat};
use stackplan::planner::{PlanOutcome, Planner, PlannerConfig};
use stackplan::scenario::{
    export_trace, generate_problem_with, parse_problem, serialize_problem, solution_from_trace, Family,
    GeneratorOptions, SolutionTrace,
};

#[derive(Parser)]
#[command(
    name = "stackplan",
    version,
    about = "Physics-validated object reconfiguration planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Reverse,
    Transform,
    Rotate,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Reverse => Family::Reverse,
            FamilyArg::Transform => Family::Transform,
            FamilyArg::Rotate => Family::Rotate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file.
    Plan {
        problem: PathBuf,
        /// Override the problem's time limit (seconds).
        #[arg(long)]
        time_limit: Option<f64>,
        /// Override the problem's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        no_simplify: bool,
        /// Write a JSON trace of the solution here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Frame period of the trace (seconds).
        #[arg(long, default_value_t = 0.05)]
        period: f64,
    },
    /// Run a batch of generated trials and print summary statistics.
    Bench {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        cubes: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long)]
        ablate_motion_checks: bool,
        #[arg(long)]
        no_simplify: bool,
        /// Add a wall next to the structures.
        #[arg(long)]
        wall: bool,
        #[arg(long, default_value_t = 0.06)]
        edge: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Run trials concurrently (timings become incomparable).
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_enum, default_value_t = FormatArg::Table)]
        format: FormatArg,
        /// Also write per-trial metrics as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-validate a solution trace.
    Validate { trace: PathBuf },
    /// Write a generated problem file.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        cubes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.06)]
        edge: f64,
        #[arg(long)]
        wall: bool,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn plan(
    path: PathBuf,
    time_limit: Option<f64>,
    seed: Option<u64>,
    workers: usize,
    no_simplify: bool,
    trace: Option<PathBuf>,
    period: f64,
) -> CliResult {
    let (scene, mut problem) = parse_problem(&fs::read_to_string(&path)?)?;
    if let Some(t) = time_limit {
        problem.time_limit = t;
    }
    if let Some(s) = seed {
        problem.seed = s;
    }
    problem.validate(&scene)?;
    let cfg = PlannerConfig {
        workers,
        ..PlannerConfig::for_problem(&problem)
    };
    let planner = Planner::new(&scene, &cfg)?;
    let start = std::time::Instant::now();
    let sol = match planner.plan(&problem)? {
        PlanOutcome::Timeout(stats) => {
            println!(
                "timeout after {:.2} s ({} nodes)",
                start.elapsed().as_secs_f64(),
                stats.nodes()
            );
            return Ok(ExitCode::SUCCESS);
        }
        PlanOutcome::Solved(sol) => sol,
    };
    println!(
        "solved in {:.2} s: {} moves, {} nodes",
        start.elapsed().as_secs_f64(),
        sol.len(),
        sol.stats.nodes()
    );
    let sol = if no_simplify {
        sol
    } else {
        let (simple, _) = planner.simplify(&sol, problem.seed);
        println!("simplified to {} moves", simple.len());
        simple
    };
    for (k, s) in sol.steps.iter().enumerate() {
        let p = s.arrangement.get(s.object).expect("moved object present").to_array();
        let name = scene.object_name(s.object).unwrap_or("?");
        println!("{k:3}  {name} -> ({:.4}, {:.4}, {:.4})", p[0], p[1], p[2]);
    }
    if let Some(reason) = planner.validation_error(&problem, &sol) {
        eprintln!("solution failed validation: {reason}");
        return Ok(ExitCode::FAILURE);
    }
    if let Some(out) = trace {
        let t = export_trace(&scene, &problem, &sol, period)?;
        fs::write(&out, serde_json::to_string_pretty(&t)?)?;
        println!("trace written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(path: PathBuf) -> CliResult {
    let trace: SolutionTrace = serde_json::from_str(&fs::read_to_string(&path)?)?;
    let (scene, problem, sol) = solution_from_trace(&trace)?;
    let planner = Planner::new(&scene, &PlannerConfig::for_problem(&problem))?;
    match planner.validation_error(&problem, &sol) {
        None => {
            println!("valid: {} moves", sol.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(reason) => {
            println!("invalid: {reason}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Plan {
            problem,
            time_limit,
            seed,
            workers,
            no_simplify,
            trace,
            period,
        } => plan(problem, time_limit, seed, workers, no_simplify, trace, period),
        Command::Bench {
            family,
            cubes,
            trials,
            seed,
            time_limit,
            ablate_motion_checks,
            no_simplify,
            wall,
            edge,
            workers,
            parallel,
            format,
            json,
        } => {
            let cfg = BatchConfig {
                family: family.into(),
                cubes,
                trials,
                time_limit,
                master_seed: seed,
                ablate_motion_checks,
                simplify: !no_simplify,
                generator: GeneratorOptions {
                    edge,
                    blocking_wall: wall,
                },
                workers,
                parallel_trials: parallel,
            };
            let report = run_batch(&cfg)?;
            let format = match format {
                FormatArg::Table => ReportFormat::Table,
                FormatArg::Csv => ReportFormat::Csv,
            };
            print!("{}", emit_report(&report, format));
            if let Some(out) = json {
                fs::write(out, serde_json::to_string_pretty(&report)?)?;
            }
            for m in &report.metrics {
                if let Some(e) = &m.error {
                    eprintln!("trial seed {}: {e}", m.seed);
                }
                if m.valid == Some(false) {
                    eprintln!("trial seed {}: solution failed validation", m.seed);
                }
            }
            let broken = report.errors > 0 || report.metrics.iter().any(|m| m.valid == Some(false));
            Ok(if broken { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Validate { trace } => validate(trace),
        Command::Generate {
            family,
            cubes,
            seed,
            edge,
            wall,
            output,
        } => {
            let opts = GeneratorOptions {
                edge,
                blocking_wall: wall,
            };
            let (scene, problem) = generate_problem_with(family.into(), cubes, seed, &opts)?;
            let text = serialize_problem(&scene, &problem);
            match output {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
