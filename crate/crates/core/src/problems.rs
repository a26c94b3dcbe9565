//! Named first-kind test problems and the band-limited noise model.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bivariate::{aca, AcaOptions, LowRankKernel, PivotTrace};
use crate::error::{Error, Result};
use crate::funapprox::{FuncApprox, Interval, PiecewiseFunc};

pub type Kernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The 1D problems, in table order.
pub const ONE_D: [&str; 5] = ["baart", "foxgood", "gravity", "shaw", "wing"];
pub const ALL: [&str; 6] = ["baart", "foxgood", "gravity", "shaw", "wing", "blur2d"];

/// Tolerance on `||A x - g|| / ||g||` at construction.
pub const CONSISTENCY_TOL: f64 = 1e-8;

pub const BLUR_SIGMA: f64 = 0.2;
pub const GRAVITY_DEPTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    pub aca: AcaOptions,
    /// Chop tolerance for the exact solution and right-hand side.
    pub tol: f64,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self {
            aca: AcaOptions::default(),
            tol: 1e-14,
        }
    }
}

/// `int_{domain_t} kernel(s, t) x(t) dt = g(s)` for `s` in `domain_s`.
#[derive(Clone)]
pub struct TestProblem {
    pub name: String,
    pub kernel: Kernel,
    /// Data domain.
    pub domain_s: Interval,
    /// Solution domain.
    pub domain_t: Interval,
    pub x_exact: PiecewiseFunc,
    pub g_exact: FuncApprox,
    pub lowrank: LowRankKernel,
    pub trace: PivotTrace,
}

impl fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestProblem")
            .field("name", &self.name)
            .field("domain_s", &self.domain_s)
            .field("domain_t", &self.domain_t)
            .field("rank", &self.lowrank.rank())
            .finish()
    }
}

impl TestProblem {
    /// Builds the skeleton kernel and checks `A x_exact` against `g_exact`.
    pub fn build(
        name: &str,
        kernel: Kernel,
        domain_s: Interval,
        domain_t: Interval,
        x_exact: PiecewiseFunc,
        g_exact: FuncApprox,
        aca_opts: &AcaOptions,
    ) -> Result<Self> {
        let k = kernel.clone();
        let (lowrank, trace) = aca(&move |s, t| k(s, t), domain_s, domain_t, aca_opts)?;
        let p = Self {
            name: name.to_string(),
            kernel,
            domain_s,
            domain_t,
            x_exact,
            g_exact,
            lowrank,
            trace,
        };
        let rel = p.consistency_error()?;
        if !(rel <= CONSISTENCY_TOL) {
            return Err(Error::Inconsistent {
                name: name.to_string(),
                rel_err: rel,
            });
        }
        Ok(p)
    }

    /// `||A x_exact - g_exact|| / ||g_exact||` with `A` the skeleton kernel.
    pub fn consistency_error(&self) -> Result<f64> {
        let ax = self.lowrank.apply_piecewise(&self.x_exact)?;
        Ok(ax.sub(&self.g_exact)?.norm() / self.g_exact.norm())
    }

    pub fn eval_kernel(&self, s: f64, t: f64) -> f64 {
        (self.kernel)(s, t)
    }

    pub fn dump(&self) -> ProblemDump {
        let ss = self.domain_s.cheb_points(9);
        let ts = self.domain_t.cheb_points(9);
        ProblemDump {
            name: self.name.clone(),
            domain_s: self.domain_s,
            domain_t: self.domain_t,
            x_exact: self.x_exact.clone(),
            g_exact: self.g_exact.clone(),
            kernel_rank: self.lowrank.rank(),
            kernel_probe: ss
                .iter()
                .map(|&s| ts.iter().map(|&t| self.eval_kernel(s, t)).collect())
                .collect(),
            probe_s: ss,
            probe_t: ts,
        }
    }
}

/// Language-neutral snapshot of a problem for cross-checking elsewhere.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemDump {
    pub name: String,
    pub domain_s: Interval,
    pub domain_t: Interval,
    pub x_exact: PiecewiseFunc,
    pub g_exact: FuncApprox,
    pub kernel_rank: usize,
    pub probe_s: Vec<f64>,
    pub probe_t: Vec<f64>,
    pub kernel_probe: Vec<Vec<f64>>,
}

/// Separable 2D blur: the kernel is `k1(s1, t1) * k2(s2, t2)` and the exact
/// solution is `x1(t1) * x2(t2)`, so each factor is itself a 1D problem.
#[derive(Debug, Clone)]
pub struct Blur2d {
    pub factor1: TestProblem,
    pub factor2: TestProblem,
}

impl Blur2d {
    /// `g(s1, s2) = g1(s1) g2(s2)` as a rank-1 skeleton.
    pub fn g_exact(&self) -> LowRankKernel {
        LowRankKernel::outer(self.factor1.g_exact.clone(), self.factor2.g_exact.clone(), 1.0)
    }

    pub fn x_exact(&self, t1: f64, t2: f64) -> Result<f64> {
        Ok(self.factor1.x_exact.evaluate(t1)? * self.factor2.x_exact.evaluate(t2)?)
    }
}

#[derive(Debug, Clone)]
pub enum Problem {
    OneD(Box<TestProblem>),
    Blur2d(Box<Blur2d>),
}

pub fn make_problem(name: &str) -> Result<Problem> {
    make_problem_with(name, &ProblemOptions::default())
}

pub fn make_problem_with(name: &str, opts: &ProblemOptions) -> Result<Problem> {
    match name {
        "blur2d" => Ok(Problem::Blur2d(Box::new(blur2d(opts)?))),
        _ => Ok(Problem::OneD(Box::new(make_1d(name, opts)?))),
    }
}

/// One of the five 1D problems.
pub fn make_1d(name: &str, opts: &ProblemOptions) -> Result<TestProblem> {
    match name {
        "baart" => baart(opts),
        "foxgood" => foxgood(opts),
        "gravity" => gravity(opts),
        "shaw" => shaw(opts),
        "wing" => wing(opts),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn interval(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).expect("static interval")
}

/// `(int kernel(s, t) x(t) dt)(s)` resolved pointwise by adaptive
/// quadrature, for problems without a closed-form right-hand side.
fn rhs_by_quadrature(kernel: &Kernel, ds: Interval, x: &PiecewiseFunc, tol: f64) -> Result<FuncApprox> {
    let integrand_tol = tol.min(1e-14);
    let failure = std::cell::RefCell::new(None);
    let g = FuncApprox::approximate(
        |s| {
            let mut acc = 0.0;
            for piece in x.pieces() {
                let f = FuncApprox::approximate(|t| kernel(s, t) * piece.eval_unchecked(t), piece.domain(), integrand_tol);
                match f {
                    Ok(f) => acc += f.integrate(),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        return f64::NAN;
                    }
                }
            }
            acc
        },
        ds,
        tol,
    );
    match (g, failure.into_inner()) {
        (_, Some(e)) => Err(e),
        (g, None) => g,
    }
}

pub fn baart(opts: &ProblemOptions) -> Result<TestProblem> {
    let ds = interval(0.0, std::f64::consts::FRAC_PI_2);
    let dt = interval(0.0, std::f64::consts::PI);
    let kernel: Kernel = Arc::new(|s: f64, t: f64| (s * t.cos()).exp());
    let x = PiecewiseFunc::single(FuncApprox::approximate(f64::sin, dt, opts.tol)?);
    let g = FuncApprox::approximate(|s: f64| if s == 0.0 { 2.0 } else { 2.0 * s.sinh() / s }, ds, opts.tol)?;
    TestProblem::build("baart", kernel, ds, dt, x, g, &opts.aca)
}

pub fn foxgood(opts: &ProblemOptions) -> Result<TestProblem> {
    let d = interval(0.0, 1.0);
    let kernel: Kernel = Arc::new(|s: f64, t: f64| s.hypot(t));
    let x = PiecewiseFunc::single(FuncApprox::approximate(|t| t, d, opts.tol)?);
    let g = FuncApprox::approximate(|s: f64| ((1.0 + s * s).powf(1.5) - s.powi(3)) / 3.0, d, opts.tol)?;
    TestProblem::build("foxgood", kernel, d, d, x, g, &opts.aca)
}

pub fn gravity(opts: &ProblemOptions) -> Result<TestProblem> {
    let d = interval(0.0, 1.0);
    let depth = GRAVITY_DEPTH;
    let kernel: Kernel = Arc::new(move |s: f64, t: f64| depth * (depth * depth + (s - t).powi(2)).powf(-1.5));
    let pi = std::f64::consts::PI;
    let x = PiecewiseFunc::single(FuncApprox::approximate(
        |t: f64| (pi * t).sin() + 0.5 * (2.0 * pi * t).sin(),
        d,
        opts.tol,
    )?);
    let g = rhs_by_quadrature(&kernel, d, &x, opts.tol)?;
    TestProblem::build("gravity", kernel, d, d, x, g, &opts.aca)
}

pub fn shaw(opts: &ProblemOptions) -> Result<TestProblem> {
    let h = std::f64::consts::FRAC_PI_2;
    let d = interval(-h, h);
    let kernel: Kernel = Arc::new(|s: f64, t: f64| {
        let u = std::f64::consts::PI * (s.sin() + t.sin());
        let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
        (s.cos() + t.cos()).powi(2) * sinc * sinc
    });
    let x = PiecewiseFunc::single(FuncApprox::approximate(
        |t: f64| 2.0 * (-6.0 * (t - 0.8).powi(2)).exp() + (-2.0 * (t + 0.5).powi(2)).exp(),
        d,
        opts.tol,
    )?);
    let g = rhs_by_quadrature(&kernel, d, &x, opts.tol)?;
    TestProblem::build("shaw", kernel, d, d, x, g, &opts.aca)
}

pub fn wing(opts: &ProblemOptions) -> Result<TestProblem> {
    let d = interval(0.0, 1.0);
    let kernel: Kernel = Arc::new(|s: f64, t: f64| t * (-s * t * t).exp());
    let x = PiecewiseFunc::indicator(d, 1.0 / 3.0, 2.0 / 3.0)?;
    // (e^{-s/9} - e^{-4s/9}) / (2s), written to stay accurate near s = 0
    let g = FuncApprox::approximate(
        |s: f64| {
            if s == 0.0 {
                1.0 / 6.0
            } else {
                -(-s / 9.0).exp() * (-s / 3.0).exp_m1() / (2.0 * s)
            }
        },
        d,
        opts.tol,
    )?;
    TestProblem::build("wing", kernel, d, d, x, g, &opts.aca)
}

pub fn gaussian_kernel(sigma: f64) -> Kernel {
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
    Arc::new(move |s: f64, t: f64| (-(t - s).powi(2) / (2.0 * sigma * sigma)).exp() / norm)
}

/// One factor of the blur: Gaussian kernel on `domain^2` applied to the
/// indicator of `(a, b)`.
pub fn blur_factor(name: &str, domain: Interval, a: f64, b: f64, opts: &ProblemOptions) -> Result<TestProblem> {
    let sigma = BLUR_SIGMA;
    let x = PiecewiseFunc::indicator(domain, a, b)?;
    let r = sigma * std::f64::consts::SQRT_2;
    let g = FuncApprox::approximate(
        |s: f64| 0.5 * (libm::erf((b - s) / r) - libm::erf((a - s) / r)),
        domain,
        opts.tol,
    )?;
    TestProblem::build(name, gaussian_kernel(sigma), domain, domain, x, g, &opts.aca)
}

pub fn blur2d(opts: &ProblemOptions) -> Result<Blur2d> {
    Ok(Blur2d {
        factor1: blur_factor("blur2d/1", interval(-1.0, 1.0), -0.5, 0.2, opts)?,
        factor2: blur_factor("blur2d/2", interval(-2.0, 2.0), -0.6, -0.2, opts)?,
    })
}

/// Noise level, shortest wavelength and seed of the band-limited noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub alpha: f64,
    pub vartheta: f64,
    pub seed: u64,
}

pub const DEFAULT_VARTHETA: f64 = 1e-2;
pub const DEFAULT_NOISE_RANK: usize = 10;

impl NoiseSpec {
    pub fn new(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            vartheta: DEFAULT_VARTHETA,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level {} must be >= 0", self.alpha)));
        }
        if !(self.vartheta > 0.0 && self.vartheta.is_finite()) {
            return Err(Error::InvalidArgument(format!("vartheta {} must be > 0", self.vartheta)));
        }
        Ok(())
    }
}

/// Random trigonometric polynomial with frequencies up to about `2 pi / vartheta`.
fn trig_draw(domain: Interval, vartheta: f64, rng: &mut ChaCha8Rng) -> Result<FuncApprox> {
    let len = domain.length();
    let m = (len / vartheta).ceil() as usize;
    let w = 2.0 * std::f64::consts::PI / len;
    let ab: Vec<(f64, f64)> = (0..=m)
        .map(|_| (StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let lo = domain.lo();
    FuncApprox::approximate(
        |s| {
            let th = w * (s - lo);
            ab.iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let (sn, cs) = (k as f64 * th).sin_cos();
                    a * cs + b * sn
                })
                .sum()
        },
        domain,
        1e-14,
    )
}

/// `F(s) = sum_{k=0}^{m} a_k cos(k w (s - lo)) + b_k sin(k w (s - lo))`,
/// `w = 2 pi / |domain|`, `m = ceil(|domain| / vartheta)`, with standard
/// normal coefficients drawn from a generator seeded by `spec.seed`.
pub fn smooth_noise(domain: Interval, spec: &NoiseSpec) -> Result<FuncApprox> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    trig_draw(domain, spec.vartheta, &mut rng)
}

/// `g + alpha ||g|| / ||F|| F` and `delta = ||g_delta - g||`.
pub fn contaminate(g: &FuncApprox, spec: &NoiseSpec) -> Result<(FuncApprox, f64)> {
    spec.validate()?;
    if spec.alpha == 0.0 {
        return Ok((g.clone(), 0.0));
    }
    let f = smooth_noise(g.domain(), spec)?;
    let fnorm = f.norm();
    if fnorm == 0.0 {
        return Err(Error::ZeroNoiseNorm);
    }
    let gd = FuncApprox::axpy(spec.alpha * g.norm() / fnorm, &f, g)?;
    let delta = gd.sub(g)?.norm();
    Ok((gd, delta))
}

/// `sum_{p < rank} u_p(s1) v_p(s2)` with every factor an independent 1D draw.
pub fn smooth_noise_2d(d1: Interval, d2: Interval, spec: &NoiseSpec, rank: usize) -> Result<LowRankKernel> {
    spec.validate()?;
    if rank == 0 {
        return Err(Error::InvalidArgument("noise rank must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut us = Vec::with_capacity(rank);
    let mut vs = Vec::with_capacity(rank);
    for _ in 0..rank {
        us.push(trig_draw(d1, spec.vartheta, &mut rng)?);
        vs.push(trig_draw(d2, spec.vartheta, &mut rng)?);
    }
    LowRankKernel::new(d1, d2, us, DMatrix::identity(rank, rank), vs)
}

/// 2D analogue of [`contaminate`]; `delta = alpha ||g||` by construction.
pub fn contaminate_2d(g: &LowRankKernel, spec: &NoiseSpec, rank: usize) -> Result<(LowRankKernel, f64)> {
    spec.validate()?;
    let gn = g.norm()?;
    if spec.alpha == 0.0 {
        return Ok((g.clone(), 0.0));
    }
    let f = smooth_noise_2d(g.domain_s(), g.domain_t(), spec, rank)?;
    let fnorm = f.norm()?;
    if fnorm == 0.0 {
        return Err(Error::ZeroNoiseNorm);
    }
    let w = spec.alpha * gn / fnorm;
    Ok((g.add_scaled(&f, w)?, w * fnorm))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn baart_closed_forms() {
        let p = baart(&ProblemOptions::default()).unwrap();
        for t in [0.0, 1.0, 3.0] {
            assert_eq!(p.eval_kernel(0.0, t), 1.0);
        }
        assert_abs_diff_eq!(p.g_exact.evaluate(0.0).unwrap(), 2.0, epsilon = 1e-13);
        assert!(p.consistency_error().unwrap() < CONSISTENCY_TOL);
    }

    #[test]
    fn foxgood_rhs_at_zero() {
        let p = foxgood(&ProblemOptions::default()).unwrap();
        assert_abs_diff_eq!(p.g_exact.evaluate(0.0).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn wing_rhs_limit() {
        let p = wing(&ProblemOptions::default()).unwrap();
        assert_abs_diff_eq!(p.g_exact.evaluate(0.0).unwrap(), 1.0 / 6.0, epsilon = 1e-14);
        assert_eq!(p.x_exact.breakpoints().len(), 4);
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            make_problem("deriv2").unwrap_err(),
            Error::UnknownProblem("deriv2".into())
        );
    }

    #[test]
    fn noise_is_deterministic() {
        let d = Interval::new(0.0, 1.0).unwrap();
        let spec = NoiseSpec::new(1e-2, 7);
        let a = smooth_noise(d, &spec).unwrap();
        let b = smooth_noise(d, &spec).unwrap();
        assert_eq!(a, b);
        let c = smooth_noise(d, &NoiseSpec::new(1e-2, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn contamination_scales_to_alpha() {
        let d = Interval::new(0.0, 1.0).unwrap();
        let g = FuncApprox::approximate(|s: f64| s.exp(), d, 1e-14).unwrap();
        let (gd, delta) = contaminate(&g, &NoiseSpec::new(1e-2, 1)).unwrap();
        assert_abs_diff_eq!(delta / g.norm(), 1e-2, epsilon = 1e-14);
        assert!(gd != g);
        let (g0, d0) = contaminate(&g, &NoiseSpec::new(0.0, 1)).unwrap();
        assert_eq!(g0, g);
        assert_eq!(d0, 0.0);
    }

    #[test]
    fn noise_2d_rank_and_scale() {
        let d1 = Interval::new(-1.0, 1.0).unwrap();
        let d2 = Interval::new(-2.0, 2.0).unwrap();
        let spec = NoiseSpec::new(1e-2, 3);
        let f = smooth_noise_2d(d1, d2, &spec, 4).unwrap();
        assert_eq!(f.rank(), 4);
        let g = LowRankKernel::outer(
            FuncApprox::approximate(|s: f64| s.cos(), d1, 1e-14).unwrap(),
            FuncApprox::approximate(|s: f64| (-s * s).exp(), d2, 1e-14).unwrap(),
            1.0,
        );
        let (_, delta) = contaminate_2d(&g, &spec, 4).unwrap();
        assert_abs_diff_eq!(delta, 1e-2 * g.norm().unwrap(), epsilon = 1e-16);
    }
}
