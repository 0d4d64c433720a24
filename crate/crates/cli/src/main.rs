use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use treeiso::exec::Execution;
use treeiso::instances::{generate, InstanceSpec, LossKind, Shape, Weights};
use treeiso::io::{LoadedInstance, ProblemFile, SolutionReport};
use treeiso::oracle::{enumerate, MAX_ORACLE_EDGES};
use treeiso::{solve_with, Error, SolverOptions};

/// Agreement required between solver and oracle under `--oracle-check`.
const ORACLE_AGREEMENT: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "treeiso", version, about = "Isotonic regression on directed trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the primal-dual pair.
    Solve {
        path: PathBuf,
        /// Gate on the final KKT residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, conflicts_with = "table")]
        json: bool,
        #[arg(long)]
        table: bool,
        /// Cross-check against brute-force enumeration (at most 12 edges).
        #[arg(long)]
        oracle_check: bool,
    },
    /// Solve a small problem by brute-force sign-pattern enumeration.
    Oracle {
        path: PathBuf,
        #[arg(long, conflicts_with = "table")]
        json: bool,
        #[arg(long)]
        table: bool,
    },
    /// Time the solver on generated instances; prints CSV.
    Bench {
        #[arg(long, value_enum, default_value_t = ShapeArg::Random)]
        shape: ShapeArg,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LossArg::Quadratic)]
        loss: LossArg,
        /// Number of instances, seeded `seed, seed + 1, ...`.
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, value_enum, default_value_t = WeightsArg::Mixed)]
        weights: WeightsArg,
        /// Sort the generated targets along the node order.
        #[arg(long)]
        monotone_y: bool,
        /// Solve the instances one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Chain,
    Star,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Quadratic,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Mixed,
    Isotonic,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Solver(String),
    Disagreement(String),
    TooLarge(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Disagreement(_) => 4,
            Failure::TooLarge(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Solver(m) | Failure::Disagreement(m) | Failure::TooLarge(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::MalformedInstance(_) | Error::InvalidLoss(_) => Failure::Input(e.to_string()),
            Error::OracleTooLarge { .. } => Failure::TooLarge(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<LoadedInstance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file = ProblemFile::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    file.resolve().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(report: &SolutionReport, table: bool) {
    if table {
        print!("{}", report.to_table());
    } else {
        println!("{}", report.to_json());
    }
}

fn cmd_solve(path: &Path, tol: f64, table: bool, oracle_check: bool) -> Result<(), Failure> {
    let inst = load(path)?;
    let problem = inst.problem()?;
    let options = SolverOptions {
        kkt_tolerance: tol,
        ..SolverOptions::default()
    };
    let sol = solve_with(&problem, &options)?;
    let (x, z) = problem.to_input_order(&sol.x, &sol.z);

    if oracle_check {
        if problem.edge_count() > MAX_ORACLE_EDGES {
            eprintln!(
                "oracle check skipped: {} edges exceed the cap of {MAX_ORACLE_EDGES}",
                problem.edge_count()
            );
        } else {
            let orc = enumerate(&problem)?;
            let gap = sol.x.iter().zip(&orc.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if gap > ORACLE_AGREEMENT {
                return Err(Failure::Disagreement(format!(
                    "solver and oracle differ by {gap:e} (allowed {ORACLE_AGREEMENT:e})"
                )));
            }
        }
    }
    emit(&SolutionReport::new(&inst, &x, &z).with_stats(&sol.stats), table);
    Ok(())
}

fn cmd_oracle(path: &Path, table: bool) -> Result<(), Failure> {
    let inst = load(path)?;
    let problem = inst.problem()?;
    let orc = enumerate(&problem)?;
    let (x, z) = problem.to_input_order(&orc.x, &orc.z);
    // Report the pattern per input edge, in input orientation.
    let arb = problem.arborescence();
    let mut pattern = vec![' '; z.len()];
    for (e, s) in orc.pattern.signs().iter().enumerate() {
        let s = if arb.is_flipped(e) { s.reversed() } else { *s };
        pattern[arb.source_edge(e)] = s.symbol().chars().next().expect("one-char symbol");
    }
    emit(
        &SolutionReport::new(&inst, &x, &z).with_pattern(pattern.into_iter().collect()),
        table,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    shape: ShapeArg,
    n: usize,
    seed: u64,
    loss: LossArg,
    reps: u64,
    weights: WeightsArg,
    monotone_y: bool,
    sequential: bool,
) -> Result<(), Failure> {
    let (shape, name) = match shape {
        ShapeArg::Chain => (Shape::Chain, "chain"),
        ShapeArg::Star => (Shape::Star, "star"),
        ShapeArg::Random => (Shape::Random, "random"),
    };
    let loss = match loss {
        LossArg::Quadratic => LossKind::Quadratic,
        LossArg::Mixed => LossKind::Mixed,
    };
    let weights = match weights {
        WeightsArg::Mixed => Weights::Mixed,
        WeightsArg::Isotonic => Weights::Isotonic,
    };
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let seeds: Vec<u64> = (0..reps).map(|r| seed + r).collect();
    let rows = exec.map(&seeds, |&s| {
        let spec = InstanceSpec::new(shape, n, s)
            .loss(loss)
            .weights(weights)
            .monotone_y(monotone_y);
        let problem = generate(&spec).problem()?;
        let start = Instant::now();
        let sol = solve_with(&problem, &SolverOptions::default())?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        Ok::<_, Error>(format!(
            "{n},{name},{ms:.3},{},{:e}",
            sol.stats.inner_iterations(),
            sol.stats.kkt_residual
        ))
    });
    println!("n,shape,wall_time_ms,inner_iters_total,kkt_residual");
    for row in rows {
        println!("{}", row?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            path,
            tol,
            table,
            oracle_check,
            ..
        } => cmd_solve(&path, tol, table, oracle_check),
        Command::Oracle { path, table, .. } => cmd_oracle(&path, table),
        Command::Bench {
            shape,
            n,
            seed,
            loss,
            reps,
            weights,
            monotone_y,
            sequential,
        } => cmd_bench(shape, n as usize, seed, loss, reps, weights, monotone_y, sequential),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
