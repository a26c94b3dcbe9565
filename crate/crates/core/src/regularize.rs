//! Truncated-expansion and Tikhonov solvers built on a singular value
//! expansion, with discrepancy-principle parameter choice.
//!
//! Both 1D and separable 2D problems reduce to a list of (singular value,
//! data coefficient) pairs plus the squared norm of the data component
//! outside the span of the left singular functions.  The 2D singular values
//! are the products `sigma_i * mu_j`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bivariate::LowRankKernel;
use crate::error::{Error, Result};
use crate::funapprox::{check_same_domain, cross_gram, gram, FuncApprox, PiecewiseFunc};
use crate::sve::SveExpansion;

/// `lambda` is searched in `[LAMBDA_LO * s1, LAMBDA_HI * s1]`.
pub const LAMBDA_LO: f64 = 1e-12;
pub const LAMBDA_HI: f64 = 10.0;
const BRENT_MAX_ITER: usize = 200;
const BRENT_XTOL: f64 = 1e-12;

/// Data coefficients `c_i = <phi_i, g>` and the leftover `||g - sum c_i phi_i||^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsProjection {
    pub c: Vec<f64>,
    pub g_perp_norm_sq: f64,
    pub g_norm: f64,
}

pub fn project_rhs(s: &SveExpansion, g: &FuncApprox) -> Result<RhsProjection> {
    check_same_domain(&s.domain_s, &g.domain())?;
    let c = s
        .phis
        .iter()
        .map(|phi| phi.inner(g))
        .collect::<Result<Vec<_>>>()?;
    // evaluated as a norm of the remainder rather than ||g||^2 - |c|^2 to
    // avoid cancellation when g is almost entirely in the span
    let terms: Vec<(f64, &FuncApprox)> = std::iter::once((1.0, g))
        .chain(c.iter().zip(&s.phis).map(|(&ci, phi)| (-ci, phi)))
        .collect();
    let perp = FuncApprox::lincomb(&terms)?;
    Ok(RhsProjection {
        c,
        g_perp_norm_sq: perp.norm().powi(2),
        g_norm: g.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RegParam {
    /// Number of retained terms.  In 2D, the number of retained products in
    /// descending order of `sigma_i * mu_j`.
    Truncation(usize),
    Lambda(f64),
}

impl RegParam {
    pub fn as_f64(&self) -> f64 {
        match *self {
            RegParam::Truncation(l) => l as f64,
            RegParam::Lambda(l) => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution<'a> {
    pub betas: Vec<f64>,
    pub basis: &'a [FuncApprox],
    pub param: RegParam,
    pub residual_norm: f64,
}

impl RegularizedSolution<'_> {
    /// `sum_j beta_j psi_j` as a single Chebyshev series.
    pub fn to_function(&self) -> Result<FuncApprox> {
        if self.betas.is_empty() || self.basis.is_empty() {
            return Err(Error::EmptyExpansion);
        }
        let terms: Vec<(f64, &FuncApprox)> = self.betas.iter().copied().zip(self.basis).collect();
        FuncApprox::lincomb(&terms)
    }

    /// `||x_hat||`, using orthonormality of the basis.
    pub fn norm(&self) -> f64 {
        self.betas.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

/// Spectrum/coefficient pairs in the order in which truncation drops them.
pub(crate) struct Spectral {
    pub(crate) p: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) perp_sq: f64,
}

impl Spectral {
    pub(crate) fn truncation_residual(&self, m: usize) -> f64 {
        (self.c[m..].iter().map(|c| c * c).sum::<f64>() + self.perp_sq).sqrt()
    }

    /// All `residual(m)` for `m = 0..=len`, accumulated from the tail.
    pub(crate) fn truncation_residuals(&self) -> Vec<f64> {
        let n = self.c.len();
        let mut out = vec![0.0; n + 1];
        let mut acc = self.perp_sq;
        out[n] = acc.sqrt();
        for m in (0..n).rev() {
            acc += self.c[m] * self.c[m];
            out[m] = acc.sqrt();
        }
        out
    }

    pub(crate) fn tikhonov_residual(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let s: f64 = self
            .p
            .iter()
            .zip(&self.c)
            .map(|(&p, &c)| {
                let f = l2 / (p * p + l2);
                if f.is_nan() { 0.0 } else { f * f * c * c }
            })
            .sum();
        (s + self.perp_sq).sqrt()
    }

    pub(crate) fn discrepancy_truncation(&self, target: f64) -> Truncation {
        let res = self.truncation_residuals();
        let n = self.c.len();
        match (1..=n).find(|&m| res[m] <= target) {
            Some(m) => Truncation { ell: m, residual: res[m], attainable: true },
            None => Truncation { ell: n, residual: res[n], attainable: false },
        }
    }

    pub(crate) fn discrepancy_lambda(&self, target: f64) -> LambdaChoice {
        let p1 = self.p.iter().copied().fold(0.0, f64::max);
        let (lo, hi) = ((LAMBDA_LO * p1).ln(), (LAMBDA_HI * p1).ln());
        let obj = |u: f64| (self.tikhonov_residual(u.exp()) - target).powi(2);
        let (mut u, _) = minimize_bounded(obj, lo, hi, BRENT_XTOL, BRENT_MAX_ITER);
        let r_lo = self.tikhonov_residual(lo.exp());
        let r_hi = self.tikhonov_residual(hi.exp());
        let attainable = r_lo <= target && target <= r_hi;
        if attainable {
            // guard against a stall on one of the near-flat ends
            let tol = 1e-10 * r_hi.max(target);
            if (self.tikhonov_residual(u.exp()) - target).abs() > tol {
                u = bisect_increasing(|u| self.tikhonov_residual(u.exp()) - target, lo, hi);
            }
        }
        let lambda = u.exp();
        LambdaChoice {
            lambda,
            residual: self.tikhonov_residual(lambda),
            attainable,
        }
    }
}

fn spectral_1d(s: &SveExpansion, p: &RhsProjection) -> Result<Spectral> {
    if p.c.len() != s.len() {
        return Err(Error::InvalidArgument(format!(
            "projection has {} coefficients, expansion has {} terms",
            p.c.len(),
            s.len()
        )));
    }
    Ok(Spectral {
        p: s.sigmas.clone(),
        c: p.c.clone(),
        perp_sq: p.g_perp_norm_sq,
    })
}

pub fn tsve_solve<'a>(s: &'a SveExpansion, p: &RhsProjection, ell: usize) -> Result<RegularizedSolution<'a>> {
    if ell == 0 || ell > s.len() {
        return Err(Error::OutOfRange { index: ell, len: s.len() });
    }
    let sp = spectral_1d(s, p)?;
    let betas = (0..ell).map(|j| p.c[j] / s.sigmas[j]).collect();
    Ok(RegularizedSolution {
        betas,
        basis: &s.psis,
        param: RegParam::Truncation(ell),
        residual_norm: sp.truncation_residual(ell),
    })
}

pub fn tikhonov_solve<'a>(s: &'a SveExpansion, p: &RhsProjection, lambda: f64) -> Result<RegularizedSolution<'a>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let sp = spectral_1d(s, p)?;
    let l2 = lambda * lambda;
    let betas = s
        .sigmas
        .iter()
        .zip(&p.c)
        .map(|(&sg, &c)| sg * c / (sg * sg + l2))
        .collect();
    Ok(RegularizedSolution {
        betas,
        basis: &s.psis,
        param: RegParam::Lambda(lambda),
        residual_norm: sp.tikhonov_residual(lambda),
    })
}

/// Truncation index picked by a parameter rule.  `attainable == false`
/// means no index met the rule and the boundary value was returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub ell: usize,
    pub residual: f64,
    pub attainable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub lambda: f64,
    pub residual: f64,
    pub attainable: bool,
}

fn check_discrepancy_args(s: &SveExpansion, delta: f64, eta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be >= 1, got {eta}")));
    }
    if s.is_empty() {
        return Err(Error::EmptyExpansion);
    }
    Ok(())
}

/// Smallest `ell >= 1` with `residual(ell) <= eta * delta`.
pub fn discrepancy_truncation(s: &SveExpansion, p: &RhsProjection, delta: f64, eta: f64) -> Result<Truncation> {
    check_discrepancy_args(s, delta, eta)?;
    Ok(spectral_1d(s, p)?.discrepancy_truncation(eta * delta))
}

/// `lambda` with `residual(lambda) = eta * delta`, found by bounded Brent
/// minimization of the squared mismatch in `log(lambda)`.
pub fn discrepancy_lambda(s: &SveExpansion, p: &RhsProjection, delta: f64, eta: f64) -> Result<LambdaChoice> {
    check_discrepancy_args(s, delta, eta)?;
    Ok(spectral_1d(s, p)?.discrepancy_lambda(eta * delta))
}

/// Largest `ell` with `sigma_ell >= eta * delta`, so that the noise term
/// `delta / sigma_ell` of the error bound stays below `1 / eta`.
pub fn sigma_truncation(s: &SveExpansion, delta: f64, eta: f64) -> Result<Truncation> {
    check_discrepancy_args(s, delta, eta)?;
    let count = s.sigmas.iter().take_while(|&&sg| sg >= eta * delta).count();
    Ok(Truncation {
        ell: count.max(1),
        residual: f64::NAN,
        attainable: count >= 1,
    })
}

/// `sqrt(delta^2 / sigma_ell^2 + sum_{i > ell} beta_i^2)` with the
/// coefficients of the error-free solution.
pub fn tsve_error_bound(s: &SveExpansion, exact_betas: &[f64], ell: usize, delta: f64) -> Result<f64> {
    if ell == 0 || ell > s.len() {
        return Err(Error::OutOfRange { index: ell, len: s.len() });
    }
    let tail: f64 = exact_betas.iter().skip(ell).map(|b| b * b).sum();
    Ok(((delta / s.sigmas[ell - 1]).powi(2) + tail).sqrt())
}

/// `c_i / sigma_i` for error-free data.
pub fn exact_betas(s: &SveExpansion, p: &RhsProjection) -> Vec<f64> {
    p.c.iter().zip(&s.sigmas).map(|(c, sg)| c / sg).collect()
}

/// `||x_hat - x|| / ||x||`, integrated piecewise at `x`'s breakpoints.
pub fn relative_error(x_hat: &RegularizedSolution<'_>, x: &PiecewiseFunc) -> Result<f64> {
    let xn = x.norm();
    if xn == 0.0 {
        return Err(Error::ZeroExactNorm);
    }
    if x_hat.betas.is_empty() {
        return Ok(1.0);
    }
    Ok(x.sub_smooth(&x_hat.to_function()?)?.norm() / xn)
}

/// Data coefficients of a low-rank 2D right-hand side against
/// `phi^(1)_i(s1) phi^(2)_j(s2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsProjection2D {
    pub c: DMatrix<f64>,
    pub g_perp_norm_sq: f64,
    pub g_norm: f64,
}

pub fn project_rhs_2d(s1: &SveExpansion, s2: &SveExpansion, g: &LowRankKernel) -> Result<RhsProjection2D> {
    check_same_domain(&s1.domain_s, &g.domain_s())?;
    check_same_domain(&s2.domain_s, &g.domain_t())?;
    let g_norm = g.norm()?;
    if g.rank() == 0 || s1.is_empty() || s2.is_empty() {
        return Ok(RhsProjection2D {
            c: DMatrix::zeros(s1.len(), s2.len()),
            g_perp_norm_sq: g_norm * g_norm,
            g_norm,
        });
    }
    let a1 = cross_gram(&s1.phis, g.cols())?;
    let a2 = cross_gram(&s2.phis, g.rows())?;
    let c = &a1 * g.middle() * a2.transpose();
    let perp = (g_norm * g_norm - c.norm_squared()).max(0.0);
    Ok(RhsProjection2D {
        c,
        g_perp_norm_sq: perp,
        g_norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution2D<'a> {
    pub betas: DMatrix<f64>,
    pub basis1: &'a [FuncApprox],
    pub basis2: &'a [FuncApprox],
    pub param: RegParam,
    pub residual_norm: f64,
    pub attainable: bool,
}

impl Solution2D<'_> {
    pub fn evaluate(&self, t1: f64, t2: f64) -> Result<f64> {
        let a: Vec<f64> = self.basis1.iter().map(|f| f.evaluate(t1)).collect::<Result<_>>()?;
        let b: Vec<f64> = self.basis2.iter().map(|f| f.evaluate(t2)).collect::<Result<_>>()?;
        let mut s = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                s += ai * self.betas[(i, j)] * bj;
            }
        }
        Ok(s)
    }

    /// `out[i][j] = x_hat(t1s[i], t2s[j])`.
    pub fn sample_grid(&self, t1s: &[f64], t2s: &[f64]) -> Vec<Vec<f64>> {
        let m1 = DMatrix::from_fn(t1s.len(), self.basis1.len(), |i, k| self.basis1[k].eval_unchecked(t1s[i]));
        let m2 = DMatrix::from_fn(t2s.len(), self.basis2.len(), |j, k| self.basis2[k].eval_unchecked(t2s[j]));
        let v = m1 * &self.betas * m2.transpose();
        (0..t1s.len()).map(|i| v.row(i).iter().copied().collect()).collect()
    }

    pub fn norm(&self) -> Result<f64> {
        let g1 = gram(self.basis1)?;
        let g2 = gram(self.basis2)?;
        Ok((&g1 * &self.betas * &g2).component_mul(&self.betas).sum().max(0.0).sqrt())
    }
}

/// Flattened product spectrum in descending order with matching coefficients.
fn spectral_2d(s1: &SveExpansion, s2: &SveExpansion, p: &RhsProjection2D) -> Result<(Spectral, Vec<(usize, usize)>)> {
    if p.c.shape() != (s1.len(), s2.len()) {
        return Err(Error::InvalidArgument("projection shape does not match the expansions".into()));
    }
    let mut idx: Vec<(usize, usize)> = (0..s1.len())
        .flat_map(|i| (0..s2.len()).map(move |j| (i, j)))
        .collect();
    idx.sort_by(|a, b| {
        let pa = s1.sigmas[a.0] * s2.sigmas[a.1];
        let pb = s1.sigmas[b.0] * s2.sigmas[b.1];
        pb.total_cmp(&pa).then(a.cmp(b))
    });
    let sp = Spectral {
        p: idx.iter().map(|&(i, j)| s1.sigmas[i] * s2.sigmas[j]).collect(),
        c: idx.iter().map(|&(i, j)| p.c[(i, j)]).collect(),
        perp_sq: p.g_perp_norm_sq,
    };
    Ok((sp, idx))
}

/// 2D truncated expansion with the number of retained products picked by
/// the discrepancy principle.
pub fn solve_2d_tsve<'a>(
    s1: &'a SveExpansion,
    s2: &'a SveExpansion,
    p: &RhsProjection2D,
    delta: f64,
    eta: f64,
) -> Result<Solution2D<'a>> {
    check_discrepancy_args(s1, delta, eta)?;
    check_discrepancy_args(s2, delta, eta)?;
    let (sp, idx) = spectral_2d(s1, s2, p)?;
    let choice = sp.discrepancy_truncation(eta * delta);
    Ok(tsve_2d_from(s1, s2, p, &idx, &sp, choice.ell, choice.attainable))
}

/// 2D truncated expansion keeping the `m` largest products.
pub fn solve_2d_tsve_fixed<'a>(
    s1: &'a SveExpansion,
    s2: &'a SveExpansion,
    p: &RhsProjection2D,
    m: usize,
) -> Result<Solution2D<'a>> {
    let (sp, idx) = spectral_2d(s1, s2, p)?;
    if m == 0 || m > idx.len() {
        return Err(Error::OutOfRange { index: m, len: idx.len() });
    }
    Ok(tsve_2d_from(s1, s2, p, &idx, &sp, m, true))
}

fn tsve_2d_from<'a>(
    s1: &'a SveExpansion,
    s2: &'a SveExpansion,
    p: &RhsProjection2D,
    idx: &[(usize, usize)],
    sp: &Spectral,
    m: usize,
    attainable: bool,
) -> Solution2D<'a> {
    let mut betas = DMatrix::zeros(s1.len(), s2.len());
    for &(i, j) in &idx[..m] {
        betas[(i, j)] = p.c[(i, j)] / (s1.sigmas[i] * s2.sigmas[j]);
    }
    Solution2D {
        betas,
        basis1: &s1.psis,
        basis2: &s2.psis,
        param: RegParam::Truncation(m),
        residual_norm: sp.truncation_residual(m),
        attainable,
    }
}

/// 2D Tikhonov with `lambda` picked by the discrepancy principle.
pub fn solve_2d_tikhonov<'a>(
    s1: &'a SveExpansion,
    s2: &'a SveExpansion,
    p: &RhsProjection2D,
    delta: f64,
    eta: f64,
) -> Result<Solution2D<'a>> {
    check_discrepancy_args(s1, delta, eta)?;
    check_discrepancy_args(s2, delta, eta)?;
    let (sp, _) = spectral_2d(s1, s2, p)?;
    let choice = sp.discrepancy_lambda(eta * delta);
    let mut sol = solve_2d_tikhonov_fixed(s1, s2, p, choice.lambda)?;
    sol.attainable = choice.attainable;
    Ok(sol)
}

pub fn solve_2d_tikhonov_fixed<'a>(
    s1: &'a SveExpansion,
    s2: &'a SveExpansion,
    p: &RhsProjection2D,
    lambda: f64,
) -> Result<Solution2D<'a>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
    }
    let (sp, _) = spectral_2d(s1, s2, p)?;
    let l2 = lambda * lambda;
    let betas = DMatrix::from_fn(s1.len(), s2.len(), |i, j| {
        let pr = s1.sigmas[i] * s2.sigmas[j];
        pr * p.c[(i, j)] / (pr * pr + l2)
    });
    Ok(Solution2D {
        betas,
        basis1: &s1.psis,
        basis2: &s2.psis,
        param: RegParam::Lambda(lambda),
        residual_norm: sp.tikhonov_residual(lambda),
        attainable: true,
    })
}

/// `||x_hat - x1 (x) x2|| / ||x1 (x) x2||` for a separable exact solution,
/// expanded as `||x_hat||^2 - 2 <x_hat, x> + ||x||^2` so every integral is
/// one-dimensional and split at the breakpoints of `x1`, `x2`.
pub fn relative_error_2d(x_hat: &Solution2D<'_>, x1: &PiecewiseFunc, x2: &PiecewiseFunc) -> Result<f64> {
    let xn = x1.norm() * x2.norm();
    if xn == 0.0 {
        return Err(Error::ZeroExactNorm);
    }
    let a1: Vec<f64> = x_hat.basis1.iter().map(|f| x1.inner_smooth(f)).collect::<Result<_>>()?;
    let a2: Vec<f64> = x_hat.basis2.iter().map(|f| x2.inner_smooth(f)).collect::<Result<_>>()?;
    let mut cross = 0.0;
    for (i, ai) in a1.iter().enumerate() {
        for (j, aj) in a2.iter().enumerate() {
            cross += ai * x_hat.betas[(i, j)] * aj;
        }
    }
    let hn = x_hat.norm()?;
    let sq = hn * hn - 2.0 * cross + xn * xn;
    Ok(sq.max(0.0).sqrt() / xn)
}

/// Bounded scalar minimization (golden section with parabolic steps), in
/// the style of `fminbnd`.  Returns `(x, f(x))`.
pub fn minimize_bounded<F>(f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut v = a + golden * (b - a);
    let mut w = v;
    let mut x = v;
    let mut e = 0.0f64;
    let mut d = 0.0f64;
    let mut fx = f(x);
    let mut fv = fx;
    let mut fw = fx;

    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + xtol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        if fu <= fx {
            if u >= x { a = x } else { b = x }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x { a = u } else { b = u }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    // the interior search never evaluates the endpoints
    let (fa, fb) = (f(a), f(b));
    if fa < fx {
        return (a, fa);
    }
    if fb < fx {
        return (b, fb);
    }
    (x, fx)
}

/// Root of an increasing function with `g(lo) <= 0 <= g(hi)`.
fn bisect_increasing<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
