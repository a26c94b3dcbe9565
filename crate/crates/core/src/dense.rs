//! Dense SVD.  nalgebra's SVD with singular vectors can return wrong
//! factors (it fails to reconstruct some rank-deficient and larger inputs),
//! so the factorization goes through faer and comes back as nalgebra storage.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Thin SVD `m = u diag(s) v^T` with `s` descending.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(r, 0),
            s: Vec::new(),
            v: DMatrix::zeros(c, 0),
        });
    }
    let a = faer::Mat::from_fn(r, c, |i, j| m[(i, j)]);
    let f = a
        .thin_svd()
        .map_err(|e| Error::InvalidArgument(format!("dense SVD failed: {e:?}")))?;
    let (u, s, v) = (f.U(), f.S().column_vector(), f.V());
    Ok(Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        s: (0..k).map(|i| s[i]).collect(),
        v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &DMatrix<f64>) {
        let f = svd(m).unwrap();
        let rec = &f.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(f.s.clone())) * f.v.transpose();
        assert!((rec - m).norm() <= 1e-13 * m.norm().max(1.0));
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_one_and_generic_inputs_reconstruct() {
        for n in [1, 2, 20, 40, 97] {
            let r: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).sin()).collect();
            check(&DMatrix::from_fn(n, n, |i, j| r[i] * r[j]));
            check(&DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin()));
        }
        check(&DMatrix::from_fn(5, 3, |i, j| (i + 2 * j) as f64));
    }
}
