//! Singular value expansion of a kernel in skeleton form.
//!
//! Orthonormalize the column and row quasimatrices, push the triangular
//! factors through the middle matrix, take a small dense SVD, and rotate the
//! orthonormal bases by the singular vectors:
//!
//! ```text
//! C D R^T = (Qc Rc) D (Qr Rr)^T = Qc (U S V^T) Qr^T
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bivariate::{aca, AcaOptions, LowRankKernel};
use crate::dense;
use crate::error::{Error, Result};
use crate::funapprox::{
    check_same_domain, clenshaw_curtis_weights, gram, values_to_coeffs, weighted_samples, FuncApprox,
    Interval,
};

pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// Columns whose remaining norm after orthogonalization falls below this
/// fraction of the largest diagonal of `R` are treated as dependent.
const RANK_TOL: f64 = 1e-14;

/// Output of [`qr_quasimatrix`]: `fs[j] = sum_i q[i] r[(i, j)]`.
#[derive(Debug, Clone)]
pub struct QuasiQr {
    pub q: Vec<FuncApprox>,
    /// `q.len() x fs.len()`, upper trapezoidal with positive pivots.
    pub r: DMatrix<f64>,
    /// Indices of columns found numerically dependent on earlier ones; they
    /// contribute no new basis function.
    pub dropped: Vec<usize>,
}

/// Modified Gram-Schmidt with one full reorthogonalization pass.
///
/// Inner products are evaluated with Clenshaw-Curtis quadrature on a grid
/// fine enough to integrate every pairwise product exactly.
pub fn qr_quasimatrix(fs: &[FuncApprox]) -> Result<QuasiQr> {
    let first = fs
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty quasimatrix".into()))?;
    let domain = first.domain();
    for f in fs {
        check_same_domain(&domain, &f.domain())?;
    }
    let max_len = fs.iter().map(FuncApprox::len).max().unwrap_or(1);
    let a = weighted_samples(fs)?;
    let n = a.nrows();
    let k = fs.len();

    let mut qs: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut dropped = Vec::new();
    let mut max_diag = 0.0f64;

    for j in 0..k {
        let mut v: DVector<f64> = a.column(j).clone_owned();
        let mut rj = vec![0.0; qs.len()];
        for _ in 0..2 {
            for (i, q) in qs.iter().enumerate() {
                let h = q.dot(&v);
                v.axpy(-h, q, 1.0);
                rj[i] += h;
            }
        }
        let nv = v.norm();
        if nv == 0.0 || nv <= RANK_TOL * max_diag {
            dropped.push(j);
        } else {
            max_diag = max_diag.max(nv);
            qs.push(v / nv);
            rj.push(nv);
        }
        r_cols.push(rj);
    }

    let nq = qs.len();
    let r = DMatrix::from_fn(nq, k, |i, j| r_cols[j].get(i).copied().unwrap_or(0.0));

    let sw: Vec<f64> = clenshaw_curtis_weights(n)
        .into_iter()
        .map(|w| (0.5 * domain.length() * w).sqrt())
        .collect();
    let q = qs
        .iter()
        .map(|qv| {
            let vals: Vec<f64> = qv.iter().zip(&sw).map(|(x, w)| x / w).collect();
            let mut c = values_to_coeffs(&vals);
            c.truncate(max_len);
            FuncApprox::new(domain, c)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(QuasiQr { q, r, dropped })
}

/// Ordered singular triples `(sigma_i, phi_i(s), psi_i(t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SveExpansion {
    pub domain_s: Interval,
    pub domain_t: Interval,
    pub sigmas: Vec<f64>,
    /// Left singular functions on the data domain.
    pub phis: Vec<FuncApprox>,
    /// Right singular functions on the solution domain.
    pub psis: Vec<FuncApprox>,
    pub cutoff_eps: f64,
}

impl SveExpansion {
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// The rank-`ell` truncation `sum_{i <= ell} sigma_i phi_i(s) psi_i(t)`.
    pub fn reconstruct(&self, ell: usize) -> Result<LowRankKernel> {
        if ell == 0 || ell > self.len() {
            return Err(Error::OutOfRange {
                index: ell,
                len: self.len(),
            });
        }
        LowRankKernel::new(
            self.domain_s,
            self.domain_t,
            self.phis[..ell].to_vec(),
            DMatrix::from_diagonal(&DVector::from_column_slice(&self.sigmas[..ell])),
            self.psis[..ell].to_vec(),
        )
    }

    /// `max |<f_i, f_j> - delta_ij|` for the left and right functions.
    pub fn orthonormality_defect(&self) -> Result<(f64, f64)> {
        let defect = |fs: &[FuncApprox]| -> Result<f64> {
            if fs.is_empty() {
                return Ok(0.0);
            }
            let g = gram(fs)?;
            let mut m = 0.0f64;
            for i in 0..g.nrows() {
                for j in 0..g.ncols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    m = m.max((g[(i, j)] - want).abs());
                }
            }
            Ok(m)
        };
        Ok((defect(&self.phis)?, defect(&self.psis)?))
    }
}

/// SVE of a skeleton-form kernel, keeping `sigma_i > cutoff_eps * sigma_1`.
///
/// A rank-0 kernel yields an empty expansion.
pub fn sve_from_lowrank(k: &LowRankKernel, cutoff_eps: f64) -> Result<SveExpansion> {
    if !(0.0..1.0).contains(&cutoff_eps) {
        return Err(Error::InvalidArgument(format!("cut-off {cutoff_eps} not in [0, 1)")));
    }
    let empty = SveExpansion {
        domain_s: k.domain_s(),
        domain_t: k.domain_t(),
        sigmas: Vec::new(),
        phis: Vec::new(),
        psis: Vec::new(),
        cutoff_eps,
    };
    if k.rank() == 0 {
        return Ok(empty);
    }

    let qc = qr_quasimatrix(k.cols())?;
    let qr = qr_quasimatrix(k.rows())?;
    let core = &qc.r * k.middle() * qr.r.transpose();
    let f = dense::svd(&core)?;
    let sigma1 = f.s[0];
    if sigma1 <= 0.0 {
        return Err(Error::EmptyExpansion);
    }

    let mut out = empty;
    for (idx, &sigma) in f.s.iter().enumerate() {
        if sigma <= cutoff_eps * sigma1 || sigma <= 0.0 {
            break;
        }
        let phi_terms: Vec<(f64, &FuncApprox)> = f.u.column(idx).iter().copied().zip(qc.q.iter()).collect();
        let psi_terms: Vec<(f64, &FuncApprox)> = f.v.column(idx).iter().copied().zip(qr.q.iter()).collect();
        let mut phi = FuncApprox::lincomb(&phi_terms)?;
        let mut psi = FuncApprox::lincomb(&psi_terms)?;
        // deterministic sign: phi is positive where |phi| peaks
        if phi.max_abs().1 < 0.0 {
            phi = phi.scale(-1.0);
            psi = psi.scale(-1.0);
        }
        out.sigmas.push(sigma);
        out.phis.push(phi);
        out.psis.push(psi);
    }
    Ok(out)
}

/// Cross approximation followed by [`sve_from_lowrank`].
pub fn sve_of_kernel<K>(
    kernel: &K,
    domain_s: Interval,
    domain_t: Interval,
    aca_opts: &AcaOptions,
    cutoff_eps: f64,
) -> Result<SveExpansion>
where
    K: Fn(f64, f64) -> f64,
{
    let (lr, _) = aca(kernel, domain_s, domain_t, aca_opts)?;
    sve_from_lowrank(&lr, cutoff_eps)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn unit() -> Interval {
        Interval::unit()
    }

    #[test]
    fn qr_of_constant() {
        let d = Interval::new(0.0, 1.0).unwrap();
        let out = qr_quasimatrix(&[FuncApprox::constant(1.0, d)]).unwrap();
        assert_eq!(out.q.len(), 1);
        assert_abs_diff_eq!(out.r[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.q[0].evaluate(0.3).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn qr_of_one_and_t_gives_normalized_legendre() {
        let fs = vec![
            FuncApprox::constant(1.0, unit()),
            FuncApprox::cheb_t(1, unit()),
        ];
        let out = qr_quasimatrix(&fs).unwrap();
        for i in 0..=10 {
            let t = -1.0 + 0.2 * i as f64;
            assert_abs_diff_eq!(out.q[0].evaluate(t).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
            assert_abs_diff_eq!(out.q[1].evaluate(t).unwrap(), t * 1.5f64.sqrt(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(out.r[(0, 0)], 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.r[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.r[(1, 1)], (2.0f64 / 3.0).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn qr_drops_dependent_columns() {
        let a = FuncApprox::cheb_t(2, unit());
        let b = FuncApprox::cheb_t(3, unit());
        let c = FuncApprox::lincomb(&[(2.0, &a), (-1.0, &b)]).unwrap();
        let out = qr_quasimatrix(&[a, b, c]).unwrap();
        assert_eq!(out.q.len(), 2);
        assert_eq!(out.dropped, vec![2]);
        assert_eq!(out.r.shape(), (2, 3));
    }

    #[test]
    fn rank_one_sve() {
        let d1 = Interval::new(0.0, 1.0).unwrap();
        let d2 = Interval::new(-1.0, 2.0).unwrap();
        let u = FuncApprox::approximate(|s: f64| 1.0 + s * s, d1, 1e-14).unwrap();
        let v = FuncApprox::approximate(|t: f64| (t).cos() + 2.0, d2, 1e-14).unwrap();
        let k = LowRankKernel::outer(u.clone(), v.clone(), 1.0);
        let s = sve_from_lowrank(&k, DEFAULT_CUTOFF).unwrap();
        assert_eq!(s.len(), 1);
        assert_abs_diff_eq!(s.sigmas[0], u.norm() * v.norm(), epsilon = 1e-13);
        // both u, v positive so the sign convention makes phi, psi positive
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert_abs_diff_eq!(s.phis[0].evaluate(x).unwrap(), u.evaluate(x).unwrap() / u.norm(), epsilon = 1e-13);
            let t = -1.0 + 0.3 * i as f64;
            assert_abs_diff_eq!(s.psis[0].evaluate(t).unwrap(), v.evaluate(t).unwrap() / v.norm(), epsilon = 1e-13);
        }
        let back = s.reconstruct(1).unwrap();
        assert_abs_diff_eq!(back.eval2(0.5, 0.5).unwrap(), k.eval2(0.5, 0.5).unwrap(), epsilon = 1e-13);
        assert!(matches!(s.reconstruct(2), Err(Error::OutOfRange { index: 2, len: 1 })));
        assert!(matches!(s.reconstruct(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rank_zero_gives_empty_expansion() {
        let z = LowRankKernel::zero(unit(), unit());
        assert!(sve_from_lowrank(&z, DEFAULT_CUTOFF).unwrap().is_empty());
    }
}
