use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fredholm_cli::experiment::{prepare, problem_options};
use fredholm_cli::output::{write_csv, write_json};
use fredholm_cli::{
    run_bench, run_blur2d, run_bound_figure, solve_cell, Blur2dConfig, CliError, ExperimentConfig, Method, Rule,
};
use fredholm_core::oracle::discretize_problem;
use fredholm_core::problems::{make_problem_with, Problem, ALL};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fredholm", version, about = "Continuous regularization of first-kind integral equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command that builds problems.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Single noise seed (replaces the configured seed list).
    #[arg(long)]
    seed: Option<u64>,
    /// Relative singular value cutoff of the expansion.
    #[arg(long)]
    tol: Option<f64>,
    /// Discrepancy safety factor.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    aca_tol: Option<f64>,
    #[arg(long)]
    max_rank: Option<usize>,
    #[arg(long, value_enum)]
    rule: Option<Rule>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(t) = self.tol {
            cfg.cutoff_eps = t;
        }
        if let Some(e) = self.eta {
            cfg.eta = e;
        }
        if let Some(t) = self.aca_tol {
            cfg.aca_tol = t;
        }
        if let Some(r) = self.max_rank {
            cfg.max_rank = r;
        }
        if let Some(r) = self.rule {
            cfg.rule = r;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one noisy instance and print a JSON report.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum, default_value = "tsve")]
        method: Method,
        #[arg(long, default_value_t = 1e-2)]
        alpha: f64,
        #[command(flatten)]
        o: Overrides,
    },
    /// Run the experiment grid; writes results.csv and summary.json.
    Bench {
        /// JSON file with ExperimentConfig fields; defaults to the table grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Write singular values (CSV) and singular functions (JSON).
    Sve {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// Compare singular values with the Gauss-Legendre collocation matrix.
    Oracle {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 400)]
        n: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Error of the truncated expansion against its a priori bound.
    Bound {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-2)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Separable 2D deblurring with both methods.
    Blur2d {
        #[arg(long, default_value_t = 1e-2)]
        alpha: f64,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// List or dump the named problems.
    Problems {
        #[command(subcommand)]
        cmd: ProblemsCmd,
    },
}

#[derive(Subcommand)]
enum ProblemsCmd {
    List,
    /// Print a problem definition as JSON.
    Dump {
        name: String,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn single_problem_config(problem: &str, o: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig {
        problems: vec![problem.to_string()],
        seeds: vec![1],
        ..ExperimentConfig::default()
    };
    o.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct SolveReport {
    problem: String,
    method: Method,
    alpha: f64,
    seed: u64,
    eta: f64,
    param: f64,
    residual: f64,
    delta: f64,
    re: f64,
    bound_lhs: Option<f64>,
    bound_rhs: Option<f64>,
    attainable: bool,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    setup_ms: f64,
    solve_ms: f64,
}

#[derive(Serialize)]
struct OracleRow {
    index: usize,
    sigma: f64,
    sigma_discrete: f64,
    rel_diff: f64,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve { problem, method, alpha, o } => {
            let cfg = single_problem_config(&problem, &o)?;
            let opts = problem_options(cfg.aca_tol, cfg.max_rank);
            let prep = prepare(&problem, &opts, cfg.cutoff_eps, method.is_discrete().then_some(cfg.discrete_n))?;
            let t0 = Instant::now();
            let c = solve_cell(&prep, method, cfg.rule, alpha, cfg.seeds[0], cfg.eta)?;
            let report = SolveReport {
                problem,
                method,
                alpha,
                seed: cfg.seeds[0],
                eta: cfg.eta,
                param: c.param.as_f64(),
                residual: c.residual,
                delta: c.delta,
                re: c.re,
                bound_lhs: c.bound_lhs,
                bound_rhs: c.bound_rhs,
                attainable: c.attainable,
                timings: Timings {
                    setup_ms: prep.setup_ms,
                    solve_ms: t0.elapsed().as_secs_f64() * 1e3,
                },
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
        Command::Bench { config, out, o } => {
            let mut cfg = load_config(config.as_ref())?;
            o.apply(&mut cfg);
            if let Some(d) = out {
                cfg.output_dir = d;
            }
            let res = run_bench(&cfg)?;
            for c in &res.summary {
                println!(
                    "{:<8} {:<18} alpha={:<7e} median RE={:.4e} errors={}",
                    c.problem,
                    c.method.as_str(),
                    c.alpha,
                    c.median_re.unwrap_or(f64::NAN),
                    c.errors
                );
            }
            let errors = res.error_count();
            eprintln!("{} rows, {errors} errored; wrote {}", res.rows.len(), cfg.output_dir.display());
            Ok(errors == 0)
        }
        Command::Sve { problem, out, o } => {
            let cfg = single_problem_config(&problem, &o)?;
            let prep = prepare(&problem, &problem_options(cfg.aca_tol, cfg.max_rank), cfg.cutoff_eps, None)?;
            std::fs::create_dir_all(&out)?;
            #[derive(Serialize)]
            struct Sigma {
                index: usize,
                sigma: f64,
            }
            let rows: Vec<Sigma> = prep
                .sve
                .sigmas
                .iter()
                .enumerate()
                .map(|(i, &sigma)| Sigma { index: i + 1, sigma })
                .collect();
            write_csv(&out.join(format!("{problem}_sigmas.csv")), &rows)?;
            write_json(&out.join(format!("{problem}_sve.json")), &prep.sve)?;
            eprintln!("{} singular triples written to {}", prep.sve.len(), out.display());
            Ok(true)
        }
        Command::Oracle { problem, n, out, o } => {
            let cfg = single_problem_config(&problem, &o)?;
            let prep = prepare(&problem, &problem_options(cfg.aca_tol, cfg.max_rank), cfg.cutoff_eps, None)?;
            let op = discretize_problem(&prep.problem, n)?;
            let rows: Vec<OracleRow> = prep
                .sve
                .sigmas
                .iter()
                .zip(op.singular_values())
                .enumerate()
                .map(|(i, (&a, &b))| OracleRow {
                    index: i + 1,
                    sigma: a,
                    sigma_discrete: b,
                    rel_diff: (a - b).abs() / a,
                })
                .collect();
            match out {
                Some(p) => write_csv(&p, &rows)?,
                None => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
            }
            Ok(true)
        }
        Command::Bound { config, alpha, out, o } => {
            let mut cfg = load_config(config.as_ref())?;
            o.apply(&mut cfg);
            if let Some(d) = out {
                cfg.output_dir = d;
            }
            let res = run_bound_figure(&cfg, alpha)?;
            let mut ok = true;
            for r in &res.rows {
                println!(
                    "{:<8} lhs={:.4e} rhs={:.4e} violations={}/{}",
                    r.problem, r.lhs, r.rhs, r.violations, r.runs
                );
                ok &= r.violations == 0;
            }
            if !ok {
                eprintln!("bound violated in some runs (see bound_runs.csv)");
            }
            Ok(ok)
        }
        Command::Blur2d { alpha, grid, out, o } => {
            let mut cfg = Blur2dConfig {
                alpha,
                grid,
                output_dir: out,
                ..Blur2dConfig::default()
            };
            if let Some(s) = o.seed {
                cfg.seed = s;
            }
            if let Some(t) = o.tol {
                cfg.cutoff_eps = t;
            }
            if let Some(e) = o.eta {
                cfg.eta = e;
            }
            if let Some(t) = o.aca_tol {
                cfg.aca_tol = t;
            }
            if let Some(r) = o.max_rank {
                cfg.max_rank = r;
            }
            let res = run_blur2d(&cfg)?;
            for r in &res.rows {
                println!(
                    "{:<9} param={} residual={:.4e} eta*delta={:.4e} RE={:.4e} time={:.1} ms",
                    r.method.as_str(),
                    r.param.unwrap_or(f64::NAN),
                    r.residual.unwrap_or(f64::NAN),
                    cfg.eta * r.delta.unwrap_or(f64::NAN),
                    r.re.unwrap_or(f64::NAN),
                    r.wall_time_ms
                );
            }
            eprintln!("setup {:.1} ms; grids written to {}", res.setup_ms, cfg.output_dir.display());
            Ok(true)
        }
        Command::Problems { cmd } => {
            match cmd {
                ProblemsCmd::List => {
                    let mut out = std::io::stdout().lock();
                    for n in ALL {
                        writeln!(out, "{n}")?;
                    }
                }
                ProblemsCmd::Dump { name } => {
                    let json = match make_problem_with(&name, &problem_options(1e-13, 400))? {
                        Problem::OneD(p) => serde_json::to_string_pretty(&p.dump())?,
                        Problem::Blur2d(b) => serde_json::to_string_pretty(&[b.factor1.dump(), b.factor2.dump()])?,
                    };
                    println!("{json}");
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
