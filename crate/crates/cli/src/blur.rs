use std::path::PathBuf;
use std::time::Instant;

use fredholm_core::problems::{blur2d, contaminate_2d, NoiseSpec, DEFAULT_NOISE_RANK};
use fredholm_core::regularize::{
    project_rhs_2d, relative_error_2d, solve_2d_tikhonov, solve_2d_tsve, Solution2D,
};
use fredholm_core::sve::{sve_from_lowrank, DEFAULT_CUTOFF};
use fredholm_core::Interval;
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{CliError, Result};
use crate::experiment::{problem_options, ResultRow};
use crate::output::{write_csv, write_grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blur2dConfig {
    pub alpha: f64,
    pub eta: f64,
    pub seed: u64,
    /// Samples per axis of the output grids.
    pub grid: usize,
    pub noise_rank: usize,
    pub cutoff_eps: f64,
    pub aca_tol: f64,
    pub max_rank: usize,
    pub output_dir: PathBuf,
}

impl Default for Blur2dConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-2,
            eta: 10.0,
            seed: 1,
            grid: 256,
            noise_rank: DEFAULT_NOISE_RANK,
            cutoff_eps: DEFAULT_CUTOFF,
            aca_tol: 1e-13,
            max_rank: 400,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub struct Blur2dOutput {
    /// One row per method; `param` is the number of retained products for
    /// the truncated expansion.
    pub rows: Vec<ResultRow>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// `grid[i][j]` is the value at `(t1[i], t2[j])`.
    pub exact: Vec<Vec<f64>>,
    pub noisy: Vec<Vec<f64>>,
    pub tsve: Vec<Vec<f64>>,
    pub tikhonov: Vec<Vec<f64>>,
    pub setup_ms: f64,
}

/// Cell centres of a uniform `n`-cell partition.
fn cell_centres(d: Interval, n: usize) -> Vec<f64> {
    let h = d.length() / n as f64;
    (0..n).map(|i| d.lo() + (i as f64 + 0.5) * h).collect()
}

fn row_of(method: Method, cfg: &Blur2dConfig, sol: &Solution2D<'_>, re: f64, delta: f64, ms: f64) -> ResultRow {
    ResultRow {
        problem: "blur2d".into(),
        method,
        alpha: cfg.alpha,
        seed: cfg.seed,
        param: Some(sol.param.as_f64()),
        re: Some(re),
        residual: Some(sol.residual_norm),
        delta: Some(delta),
        bound_lhs: None,
        bound_rhs: None,
        attainable: Some(sol.attainable),
        wall_time_ms: ms,
        error: None,
    }
}

/// Deblurs the separable two-box image with both methods.
pub fn blur2d_run(cfg: &Blur2dConfig) -> Result<Blur2dOutput> {
    if cfg.grid == 0 || cfg.noise_rank == 0 {
        return Err(CliError::Config("grid and noise rank must be positive".into()));
    }
    let t0 = Instant::now();
    let p = blur2d(&problem_options(cfg.aca_tol, cfg.max_rank))?;
    let (f1, f2) = (&p.factor1, &p.factor2);
    let s1 = sve_from_lowrank(&f1.lowrank, cfg.cutoff_eps)?;
    let s2 = sve_from_lowrank(&f2.lowrank, cfg.cutoff_eps)?;
    let g = p.g_exact();
    let (gd, delta) = contaminate_2d(&g, &NoiseSpec::new(cfg.alpha, cfg.seed), cfg.noise_rank)?;
    let proj = project_rhs_2d(&s1, &s2, &gd)?;
    let setup_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let tsve = solve_2d_tsve(&s1, &s2, &proj, delta, cfg.eta)?;
    let re_tsve = relative_error_2d(&tsve, &f1.x_exact, &f2.x_exact)?;
    let ms_tsve = t.elapsed().as_secs_f64() * 1e3;
    let t = Instant::now();
    let tik = solve_2d_tikhonov(&s1, &s2, &proj, delta, cfg.eta)?;
    let re_tik = relative_error_2d(&tik, &f1.x_exact, &f2.x_exact)?;
    let ms_tik = t.elapsed().as_secs_f64() * 1e3;

    let t1 = cell_centres(f1.domain_t, cfg.grid);
    let t2 = cell_centres(f2.domain_t, cfg.grid);
    let exact = t1
        .iter()
        .map(|&a| t2.iter().map(|&b| p.x_exact(a, b)).collect::<fredholm_core::Result<Vec<f64>>>())
        .collect::<fredholm_core::Result<Vec<_>>>()?;
    Ok(Blur2dOutput {
        rows: vec![
            row_of(Method::Tsve, cfg, &tsve, re_tsve, delta, ms_tsve),
            row_of(Method::Tikhonov, cfg, &tik, re_tik, delta, ms_tik),
        ],
        noisy: gd.sample_grid(&t1, &t2),
        tsve: tsve.sample_grid(&t1, &t2),
        tikhonov: tik.sample_grid(&t1, &t2),
        exact,
        t1,
        t2,
        setup_ms,
    })
}

/// [`blur2d_run`] plus the four grids and the two result rows as CSV.
pub fn run_blur2d(cfg: &Blur2dConfig) -> Result<Blur2dOutput> {
    let out = blur2d_run(cfg)?;
    let d = &cfg.output_dir;
    std::fs::create_dir_all(d)?;
    write_grid(&d.join("blur2d_exact.csv"), &out.exact)?;
    write_grid(&d.join("blur2d_noisy.csv"), &out.noisy)?;
    write_grid(&d.join("blur2d_tsve.csv"), &out.tsve)?;
    write_grid(&d.join("blur2d_tikhonov.csv"), &out.tikhonov)?;
    write_grid(&d.join("blur2d_axes.csv"), &[out.t1.clone(), out.t2.clone()])?;
    write_csv(&d.join("blur2d_results.csv"), &out.rows)?;
    Ok(out)
}
