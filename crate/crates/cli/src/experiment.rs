use std::path::Path;
use std::time::Instant;

use fredholm_core::bivariate::AcaOptions;
use fredholm_core::oracle::{discretize_problem, DiscreteOperator};
use fredholm_core::problems::{contaminate, make_1d, NoiseSpec, ProblemOptions, TestProblem};
use fredholm_core::regularize::{
    discrepancy_lambda, discrepancy_truncation, exact_betas, project_rhs, relative_error, sigma_truncation,
    tikhonov_solve, tsve_error_bound, tsve_solve, RegParam, RhsProjection,
};
use fredholm_core::sve::{sve_from_lowrank, SveExpansion};
use fredholm_core::FuncApprox;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, Rule};
use crate::error::{CliError, Result};
use crate::output::{median, write_csv, write_json};

/// A problem with its expansion and the error-free data already projected.
pub struct Prepared {
    pub problem: TestProblem,
    pub sve: SveExpansion,
    pub exact: RhsProjection,
    pub exact_betas: Vec<f64>,
    pub x_norm: f64,
    pub discrete: Option<DiscreteOperator>,
    pub setup_ms: f64,
}

pub fn problem_options(aca_tol: f64, max_rank: usize) -> ProblemOptions {
    ProblemOptions {
        aca: AcaOptions {
            tol: aca_tol,
            max_rank,
            ..AcaOptions::default()
        },
        ..ProblemOptions::default()
    }
}

/// Builds the problem, its expansion and, when `discrete_n` is given, the
/// collocation operator.
pub fn prepare(name: &str, opts: &ProblemOptions, cutoff_eps: f64, discrete_n: Option<usize>) -> Result<Prepared> {
    let t0 = Instant::now();
    let problem = make_1d(name, opts)?;
    let sve = sve_from_lowrank(&problem.lowrank, cutoff_eps)?;
    let exact = project_rhs(&sve, &problem.g_exact)?;
    let exact_betas = exact_betas(&sve, &exact);
    let x_norm = problem.x_exact.norm();
    let discrete = discrete_n.map(|n| discretize_problem(&problem, n)).transpose()?;
    Ok(Prepared {
        problem,
        sve,
        exact,
        exact_betas,
        x_norm,
        discrete,
        setup_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub param: RegParam,
    pub re: f64,
    pub residual: f64,
    pub delta: f64,
    /// `||x - x_ell||` and its a priori bound; truncated continuous runs only.
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub attainable: bool,
}

/// One noisy solve.  With `alpha == 0` the data are exact and the
/// unregularized solution (full rank, `lambda = 0`) is returned.
pub fn solve_cell(prep: &Prepared, method: Method, rule: Rule, alpha: f64, seed: u64, eta: f64) -> Result<CellOutcome> {
    let spec = NoiseSpec::new(alpha, seed);
    let (gd, delta) = contaminate(&prep.problem.g_exact, &spec)?;
    if method.is_discrete() {
        return solve_discrete(prep, method, rule, &gd, eta, alpha == 0.0);
    }
    let s = &prep.sve;
    let proj = project_rhs(s, &gd)?;
    match method {
        Method::Tsve => {
            let (ell, attainable) = if delta == 0.0 {
                (s.len(), true)
            } else {
                let t = match rule {
                    Rule::Discrepancy => discrepancy_truncation(s, &proj, delta, eta)?,
                    Rule::Sigma => sigma_truncation(s, delta, eta)?,
                };
                (t.ell, t.attainable)
            };
            let sol = tsve_solve(s, &proj, ell)?;
            let re = relative_error(&sol, &prep.problem.x_exact)?;
            Ok(CellOutcome {
                param: sol.param,
                re,
                residual: sol.residual_norm,
                delta,
                bound_lhs: Some(re * prep.x_norm),
                bound_rhs: Some(tsve_error_bound(s, &prep.exact_betas, ell, delta)?),
                attainable,
            })
        }
        Method::Tikhonov => {
            if rule == Rule::Sigma {
                return Err(CliError::Config("the sigma rule applies to truncated methods only".into()));
            }
            let (lambda, attainable) = if delta == 0.0 {
                (0.0, true)
            } else {
                let c = discrepancy_lambda(s, &proj, delta, eta)?;
                (c.lambda, c.attainable)
            };
            let sol = tikhonov_solve(s, &proj, lambda)?;
            Ok(CellOutcome {
                param: sol.param,
                re: relative_error(&sol, &prep.problem.x_exact)?,
                residual: sol.residual_norm,
                delta,
                bound_lhs: None,
                bound_rhs: None,
                attainable,
            })
        }
        Method::DiscreteTsvd | Method::DiscreteTikhonov => unreachable!(),
    }
}

fn sample(f: &FuncApprox, t: f64) -> f64 {
    f.evaluate(t).unwrap_or(f64::NAN)
}

fn solve_discrete(
    prep: &Prepared,
    method: Method,
    rule: Rule,
    gd: &FuncApprox,
    eta: f64,
    exact_data: bool,
) -> Result<CellOutcome> {
    let op = prep
        .discrete
        .as_ref()
        .ok_or_else(|| CliError::Config("discrete operator was not prepared".into()))?;
    if rule == Rule::Sigma {
        return Err(CliError::Config("the sigma rule is only implemented for tsve".into()));
    }
    let g = &prep.problem.g_exact;
    let b = op.weigh_s(|s| sample(g, s));
    let bd = op.weigh_s(|s| sample(gd, s));
    let delta = (&bd - &b).norm();
    let sol = match (method, exact_data) {
        (Method::DiscreteTsvd, true) => op.tsvd(&bd, op.n())?,
        (Method::DiscreteTsvd, false) => op.tsvd_discrepancy(&bd, delta, eta)?,
        (_, true) => op.tikhonov(&bd, 0.0)?,
        (_, false) => op.tikhonov_discrepancy(&bd, delta, eta)?,
    };
    let x = &prep.problem.x_exact;
    let re = sol.relative_error(op, |t| x.evaluate(t).unwrap_or(f64::NAN))?;
    Ok(CellOutcome {
        param: sol.param,
        re,
        residual: sol.residual,
        delta,
        bound_lhs: None,
        bound_rhs: None,
        attainable: sol.attainable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub method: Method,
    pub alpha: f64,
    pub seed: u64,
    /// Truncation index or `lambda`.
    pub param: Option<f64>,
    pub re: Option<f64>,
    pub residual: Option<f64>,
    pub delta: Option<f64>,
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub attainable: Option<bool>,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

impl ResultRow {
    fn new(problem: &str, method: Method, alpha: f64, seed: u64, out: std::result::Result<CellOutcome, String>, ms: f64) -> Self {
        let mut row = Self {
            problem: problem.to_string(),
            method,
            alpha,
            seed,
            param: None,
            re: None,
            residual: None,
            delta: None,
            bound_lhs: None,
            bound_rhs: None,
            attainable: None,
            wall_time_ms: ms,
            error: None,
        };
        match out {
            Ok(c) => {
                row.param = Some(c.param.as_f64());
                row.re = Some(c.re);
                row.residual = Some(c.residual);
                row.delta = Some(c.delta);
                row.bound_lhs = c.bound_lhs;
                row.bound_rhs = c.bound_rhs;
                row.attainable = Some(c.attainable);
            }
            Err(e) => row.error = Some(e),
        }
        row
    }
}

/// Prepares every configured problem in parallel; failures are kept per
/// problem so the remaining grid still runs.
pub fn prepare_all(cfg: &ExperimentConfig) -> Vec<std::result::Result<Prepared, String>> {
    let opts = problem_options(cfg.aca_tol, cfg.max_rank);
    let discrete_n = cfg.methods.iter().any(|m| m.is_discrete()).then_some(cfg.discrete_n);
    cfg.problems
        .par_iter()
        .map(|p| prepare(p, &opts, cfg.cutoff_eps, discrete_n).map_err(|e| e.to_string()))
        .collect()
}

/// All rows of the grid, ordered by problem, method, noise level and seed.
pub fn bench_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let prepared = prepare_all(cfg);
    let mut cells = Vec::with_capacity(cfg.cardinality());
    for (pi, name) in cfg.problems.iter().enumerate() {
        for &m in &cfg.methods {
            for &a in &cfg.alphas {
                for &s in &cfg.seeds {
                    cells.push((pi, name.as_str(), m, a, s));
                }
            }
        }
    }
    Ok(cells
        .par_iter()
        .map(|&(pi, name, m, a, s)| {
            let t0 = Instant::now();
            let out = match &prepared[pi] {
                Ok(prep) => solve_cell(prep, m, cfg.rule, a, s, cfg.eta).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            ResultRow::new(name, m, a, s, out, t0.elapsed().as_secs_f64() * 1e3)
        })
        .collect())
}

/// Per-cell medians over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub problem: String,
    pub method: Method,
    pub alpha: f64,
    pub runs: usize,
    pub errors: usize,
    pub median_re: Option<f64>,
    pub median_param: Option<f64>,
    pub median_residual: Option<f64>,
    pub median_wall_time_ms: Option<f64>,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryCell> {
    let mut out: Vec<SummaryCell> = Vec::new();
    let mut groups: Vec<Vec<&ResultRow>> = Vec::new();
    for r in rows {
        let found = out
            .iter()
            .position(|c| c.problem == r.problem && c.method == r.method && c.alpha == r.alpha);
        let i = found.unwrap_or_else(|| {
            out.push(SummaryCell {
                problem: r.problem.clone(),
                method: r.method,
                alpha: r.alpha,
                runs: 0,
                errors: 0,
                median_re: None,
                median_param: None,
                median_residual: None,
                median_wall_time_ms: None,
            });
            groups.push(Vec::new());
            out.len() - 1
        });
        groups[i].push(r);
    }
    for (cell, g) in out.iter_mut().zip(&groups) {
        cell.runs = g.len();
        cell.errors = g.iter().filter(|r| r.error.is_some()).count();
        let col = |f: fn(&ResultRow) -> Option<f64>| median(&g.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
        cell.median_re = col(|r| r.re);
        cell.median_param = col(|r| r.param);
        cell.median_residual = col(|r| r.residual);
        cell.median_wall_time_ms = col(|r| r.error.is_none().then_some(r.wall_time_ms));
    }
    out
}

pub struct BenchOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryCell>,
}

impl BenchOutput {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Runs the grid and writes `results.csv` and `summary.json` to the output
/// directory.
pub fn run_bench(cfg: &ExperimentConfig) -> Result<BenchOutput> {
    let rows = bench_rows(cfg)?;
    let summary = summarize(&rows);
    write_bench(&cfg.output_dir, &rows, &summary)?;
    Ok(BenchOutput { rows, summary })
}

pub fn write_bench(dir: &Path, rows: &[ResultRow], summary: &[SummaryCell]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(&dir.join("results.csv"), rows)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRun {
    pub problem: String,
    pub seed: u64,
    pub ell: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub problem: String,
    pub lhs: f64,
    pub rhs: f64,
    pub runs: usize,
    /// Runs with `lhs > rhs`.
    pub violations: usize,
}

pub struct BoundOutput {
    pub runs: Vec<BoundRun>,
    pub rows: Vec<BoundRow>,
}

/// Truncated-expansion error `||x - x_ell||` against its bound, at noise
/// level `alpha` for every configured problem and seed.
pub fn bound_figure(cfg: &ExperimentConfig, alpha: f64) -> Result<BoundOutput> {
    cfg.validate()?;
    let opts = problem_options(cfg.aca_tol, cfg.max_rank);
    let per_problem: Vec<Vec<BoundRun>> = cfg
        .problems
        .par_iter()
        .map(|name| -> Result<Vec<BoundRun>> {
            let prep = prepare(name, &opts, cfg.cutoff_eps, None)?;
            cfg.seeds
                .par_iter()
                .map(|&seed| {
                    let c = solve_cell(&prep, Method::Tsve, cfg.rule, alpha, seed, cfg.eta)?;
                    Ok(BoundRun {
                        problem: name.clone(),
                        seed,
                        ell: c.param.as_f64() as usize,
                        lhs: c.bound_lhs.unwrap_or(f64::NAN),
                        rhs: c.bound_rhs.unwrap_or(f64::NAN),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows = per_problem
        .iter()
        .zip(&cfg.problems)
        .map(|(runs, name)| BoundRow {
            problem: name.clone(),
            lhs: median(&runs.iter().map(|r| r.lhs).collect::<Vec<_>>()).unwrap_or(f64::NAN),
            rhs: median(&runs.iter().map(|r| r.rhs).collect::<Vec<_>>()).unwrap_or(f64::NAN),
            runs: runs.len(),
            violations: runs.iter().filter(|r| !(r.lhs <= r.rhs)).count(),
        })
        .collect();
    Ok(BoundOutput {
        runs: per_problem.into_iter().flatten().collect(),
        rows,
    })
}

/// [`bound_figure`] plus `bound.csv` (medians) and `bound_runs.csv`.
pub fn run_bound_figure(cfg: &ExperimentConfig, alpha: f64) -> Result<BoundOutput> {
    let out = bound_figure(cfg, alpha)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_csv(&cfg.output_dir.join("bound.csv"), &out.rows)?;
    write_csv(&cfg.output_dir.join("bound_runs.csv"), &out.runs)?;
    Ok(out)
}
