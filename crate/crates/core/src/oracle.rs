//! Brute-force discrete counterpart: Gauss-Legendre collocation with
//! symmetric square-root weights, dense SVD, and matrix TSVD/Tikhonov.
//!
//! With `A_ij = sqrt(ws_i) kappa(s_i, t_j) sqrt(wt_j)` the matrix singular
//! values approximate those of the integral operator, and Euclidean norms of
//! `sqrt(w) * samples` approximate `L^2` norms.

use nalgebra::{DMatrix, DVector};

use crate::dense;
use crate::error::{Error, Result};
use crate::funapprox::Interval;
use crate::problems::TestProblem;
use crate::regularize::{RegParam, Spectral};

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on
/// `[-1, 1]`, by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `domain`.
pub fn gauss_legendre_on(domain: Interval, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * domain.length();
    (
        x.iter().map(|&xi| domain.midpoint() + h * xi).collect(),
        w.iter().map(|&wi| h * wi).collect(),
    )
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub nodes_s: Vec<f64>,
    pub weights_s: Vec<f64>,
    pub nodes_t: Vec<f64>,
    pub weights_t: Vec<f64>,
    pub matrix: DMatrix<f64>,
    /// Left and right singular vectors and values, descending.
    pub u: DMatrix<f64>,
    pub sigmas: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn discretize<K>(kernel: &K, domain_s: Interval, domain_t: Interval, n: usize) -> Result<DiscreteOperator>
where
    K: Fn(f64, f64) -> f64 + ?Sized,
{
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 nodes, got {n}")));
    }
    let (ns, ws) = gauss_legendre_on(domain_s, n);
    let (nt, wt) = gauss_legendre_on(domain_t, n);
    let rs: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let rt: Vec<f64> = wt.iter().map(|w| w.sqrt()).collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| rs[i] * kernel(ns[i], nt[j]) * rt[j]);

    let dense::Svd { u, s: sigmas, v } = dense::svd(&matrix)?;

    Ok(DiscreteOperator {
        nodes_s: ns,
        weights_s: ws,
        nodes_t: nt,
        weights_t: wt,
        matrix,
        u,
        sigmas,
        v,
    })
}

pub fn discretize_problem(p: &TestProblem, n: usize) -> Result<DiscreteOperator> {
    discretize(&*p.kernel, p.domain_s, p.domain_t, n)
}

impl DiscreteOperator {
    pub fn n(&self) -> usize {
        self.nodes_s.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigmas
    }

    /// `sqrt(ws_i) f(s_i)`.
    pub fn weigh_s<F: Fn(f64) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.nodes_s.iter().zip(&self.weights_s).map(|(&s, &w)| w.sqrt() * f(s)),
        )
    }

    /// `sqrt(wt_j) x(t_j)`.
    pub fn weigh_t<F: Fn(f64) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.nodes_t.iter().zip(&self.weights_t).map(|(&t, &w)| w.sqrt() * f(t)),
        )
    }

    fn spectral(&self, b: &DVector<f64>) -> Spectral {
        let c = self.u.tr_mul(b);
        let perp = (b - &self.u * &c).norm_squared();
        Spectral {
            p: self.sigmas.clone(),
            c: c.iter().copied().collect(),
            perp_sq: perp,
        }
    }

    fn check_rhs(&self, b: &DVector<f64>) -> Result<()> {
        if b.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "right-hand side has {} entries, operator has {}",
                b.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Truncated SVD with `ell` terms; `b` is the weighted data vector.
    pub fn tsvd(&self, b: &DVector<f64>, ell: usize) -> Result<DiscreteSolution> {
        self.check_rhs(b)?;
        if ell == 0 || ell > self.n() {
            return Err(Error::OutOfRange { index: ell, len: self.n() });
        }
        let sp = self.spectral(b);
        let mut y = DVector::zeros(self.n());
        for k in 0..ell {
            y.axpy(sp.c[k] / self.sigmas[k], &self.v.column(k), 1.0);
        }
        Ok(DiscreteSolution {
            y,
            param: RegParam::Truncation(ell),
            residual: sp.truncation_residual(ell),
            attainable: true,
        })
    }

    pub fn tikhonov(&self, b: &DVector<f64>, lambda: f64) -> Result<DiscreteSolution> {
        self.check_rhs(b)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        let sp = self.spectral(b);
        let l2 = lambda * lambda;
        let mut y = DVector::zeros(self.n());
        for (k, &sg) in self.sigmas.iter().enumerate() {
            if sg > 0.0 {
                y.axpy(sg * sp.c[k] / (sg * sg + l2), &self.v.column(k), 1.0);
            }
        }
        Ok(DiscreteSolution {
            y,
            param: RegParam::Lambda(lambda),
            residual: sp.tikhonov_residual(lambda),
            attainable: true,
        })
    }

    /// TSVD with the smallest `ell` meeting `residual <= eta * delta`.
    pub fn tsvd_discrepancy(&self, b: &DVector<f64>, delta: f64, eta: f64) -> Result<DiscreteSolution> {
        self.check_rhs(b)?;
        check_args(delta, eta)?;
        let choice = self.spectral(b).discrepancy_truncation(eta * delta);
        let mut sol = self.tsvd(b, choice.ell)?;
        sol.attainable = choice.attainable;
        Ok(sol)
    }

    /// Tikhonov with `residual(lambda) = eta * delta`.
    pub fn tikhonov_discrepancy(&self, b: &DVector<f64>, delta: f64, eta: f64) -> Result<DiscreteSolution> {
        self.check_rhs(b)?;
        check_args(delta, eta)?;
        let choice = self.spectral(b).discrepancy_lambda(eta * delta);
        let mut sol = self.tikhonov(b, choice.lambda)?;
        sol.attainable = choice.attainable;
        Ok(sol)
    }
}

fn check_args(delta: f64, eta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be >= 1, got {eta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    /// `sqrt(wt_j) x_hat(t_j)`.
    pub y: DVector<f64>,
    pub param: RegParam,
    pub residual: f64,
    pub attainable: bool,
}

impl DiscreteSolution {
    /// Unweighted samples `x_hat(t_j)`.
    pub fn samples(&self, op: &DiscreteOperator) -> Vec<f64> {
        self.y.iter().zip(&op.weights_t).map(|(y, w)| y / w.sqrt()).collect()
    }

    /// Quadrature-weighted relative error against `x`.
    pub fn relative_error<F: Fn(f64) -> f64>(&self, op: &DiscreteOperator, x: F) -> Result<f64> {
        let ye = op.weigh_t(x);
        let n = ye.norm();
        if n == 0.0 {
            return Err(Error::ZeroExactNorm);
        }
        Ok((&self.y - ye).norm() / n)
    }
}
