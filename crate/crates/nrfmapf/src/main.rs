use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use nrfmapf::bench::{self, Suite};
use nrfmapf::movingai;
use nrfmapf::{dimacs, Backend, Error, RunConfig, SOLVER_CMD_ENV};
use nrfmapf_core::{CdclSolver, Deadline, ModelKind, ReportOutcome, SatBackend};

const EXIT_SOLVED: u8 = 0;
const EXIT_UNSOLVABLE: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "nrfmapf", version, about = "Sum-of-costs optimal MAPF via SAT")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Complete,
    Lazy,
    Nrf,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Complete => ModelKind::Complete,
            Model::Lazy => ModelKind::ConflictLazy,
            Model::Nrf => ModelKind::NonRefined,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Embedded,
    External,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// Wall-clock limit in seconds
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, default_value_t = nrfmapf_core::cdcl::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "embedded")]
    backend: BackendArg,
    /// External solver executable
    #[arg(long, env = SOLVER_CMD_ENV)]
    solver_cmd: Option<PathBuf>,
    /// Extra argument for the external solver, placed before the CNF path
    #[arg(long = "solver-arg", allow_hyphen_values = true)]
    solver_args: Vec<String>,
    /// Per SAT call limit in seconds
    #[arg(long)]
    call_budget: Option<f64>,
    /// Give up above this sum-of-costs
    #[arg(long)]
    max_soc: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance to optimality and print the solution
    Solve {
        map: PathBuf,
        scen: PathBuf,
        #[arg(long)]
        agents: usize,
        #[arg(long, value_enum, default_value = "nrf")]
        model: Model,
        /// Write the solution here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a benchmark suite and write one CSV row per run
    Bench {
        map: PathBuf,
        #[arg(required = true)]
        scen: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        agents_from: usize,
        #[arg(long)]
        agents_to: usize,
        /// Comma separated: complete,lazy,nrf
        #[arg(long, value_enum, value_delimiter = ',', default_value = "lazy,nrf")]
        models: Vec<Model>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Turn bench CSV into cactus-plot data (rank,runtime)
    Cactus {
        csv: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded random scenario for a map
    GenScen {
        map: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a DIMACS CNF file with the embedded solver (exit 10 SAT, 20 UNSAT)
    #[command(hide = true)]
    Dimacs {
        cnf: PathBuf,
        #[arg(long, default_value_t = nrfmapf_core::cdcl::DEFAULT_SEED)]
        seed: u64,
    },
}

fn secs(s: Option<f64>) -> Result<Option<Duration>, Error> {
    s.map(|v| Duration::try_from_secs_f64(v).map_err(|e| Error::Config(format!("bad duration {v}: {e}"))))
        .transpose()
}

fn run_config(a: SolverArgs) -> Result<RunConfig, Error> {
    let backend = match a.backend {
        BackendArg::Embedded => Backend::Embedded,
        BackendArg::External => {
            let command = a.solver_cmd.ok_or_else(|| {
                Error::Config(format!("external backend needs --solver-cmd or {SOLVER_CMD_ENV}"))
            })?;
            Backend::External { command, args: a.solver_args }
        }
    };
    Ok(RunConfig {
        backend,
        seed: a.seed,
        timeout: secs(a.timeout)?,
        per_call_budget: secs(a.call_budget)?,
        max_soc: a.max_soc,
    })
}

fn write_out(path: &PathBuf, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.clone(), source: e })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Cmd::Solve { map, scen, agents, model, out, solver } => {
            let config = run_config(solver)?;
            let grid = movingai::load_map(&map)?;
            let entries = movingai::load_scen(&scen)?;
            let inst = movingai::build_instance(&grid, &entries, agents)?;
            let report = nrfmapf::solve(&inst, model.into(), &config)?;
            eprintln!(
                "model={} soc={} refinements={} sat_calls={} initial_clauses={} total_clauses={} time={:.3}s",
                report.kind,
                report.soc,
                report.refinements,
                report.sat_calls,
                report.initial_clauses,
                report.total_clauses,
                report.elapsed.as_secs_f64()
            );
            match &report.outcome {
                ReportOutcome::Solved(paths) => {
                    let text = movingai::render_solution(&grid, paths);
                    match out {
                        Some(p) => write_out(&p, &text)?,
                        None => print!("{text}"),
                    }
                    Ok(EXIT_SOLVED)
                }
                ReportOutcome::SocLimit => {
                    eprintln!("no solution with sum-of-costs up to {}", report.soc);
                    Ok(EXIT_UNSOLVABLE)
                }
                ReportOutcome::Timeout => {
                    eprintln!("timeout");
                    Ok(EXIT_TIMEOUT)
                }
            }
        }
        Cmd::Bench { map, scen, agents_from, agents_to, models, out, jobs, solver } => {
            if agents_from > agents_to {
                return Err(Error::Config(format!("empty agent range {agents_from}..={agents_to}")));
            }
            let suite = Suite {
                map,
                scenarios: scen,
                agents: agents_from..=agents_to,
                kinds: models.into_iter().map(ModelKind::from).collect(),
                config: run_config(solver)?,
                jobs,
            };
            let records = bench::run_suite(&suite, Some(&out))?;
            for ((kind, agents), a) in bench::aggregate(&records) {
                eprintln!(
                    "{kind:>8} agents={agents:<3} solved={}/{} initial_clauses={} total_clauses={} refinements={}",
                    a.solved, a.runs, a.initial_clauses, a.total_clauses, a.refinements
                );
            }
            Ok(EXIT_SOLVED)
        }
        Cmd::Cactus { csv, model, out } => {
            let records = bench::read_records(&csv)?;
            let rows = bench::emit_cactus(&records, model.into());
            let file = std::fs::File::create(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            bench::write_cactus(file, &rows)?;
            Ok(EXIT_SOLVED)
        }
        Cmd::GenScen { map, count, seed, out } => {
            let grid = movingai::load_map(&map)?;
            let name = map.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let entries = movingai::random_scenario(&grid, &name, count, seed)?;
            write_out(&out, &movingai::render_scen(&entries))?;
            Ok(EXIT_SOLVED)
        }
        Cmd::Dimacs { cnf, seed } => {
            let text = std::fs::read_to_string(&cnf).map_err(|e| Error::Io { path: cnf.clone(), source: e })?;
            let (num_vars, clauses) = dimacs::parse_cnf(&text)?;
            let mut solver = CdclSolver::new(seed);
            solver.reserve_vars(num_vars);
            solver.add_clauses(&clauses);
            let outcome = solver.solve(&Deadline::unlimited());
            let model = outcome.model.as_deref().map(|m| &m[..num_vars]);
            print!("{}", dimacs::render_solver_output(outcome.status, model));
            Ok(match outcome.status {
                nrfmapf_core::SolveStatus::Sat => 10,
                nrfmapf_core::SolveStatus::Unsat => 20,
                _ => 0,
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_SOLVED });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { 4 })
        }
    }
}
