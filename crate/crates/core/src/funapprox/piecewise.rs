use serde::Serialize;

use crate::error::{Error, Result};

use super::{check_same_domain, FuncApprox, Interval};

/// Abutting smooth pieces; used for exact solutions with jumps and for
/// error norms split at those jumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PiecewiseFunc {
    pieces: Vec<FuncApprox>,
}

impl PiecewiseFunc {
    pub fn new(pieces: Vec<FuncApprox>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidArgument("piecewise function needs at least one piece".into()));
        }
        for w in pieces.windows(2) {
            let (a, b) = (w[0].domain(), w[1].domain());
            let scale = a.length().max(b.length()).max(1.0);
            if (a.hi() - b.lo()).abs() > 1e-14 * scale {
                return Err(Error::InvalidArgument(format!(
                    "pieces {a} and {b} do not abut"
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn single(f: FuncApprox) -> Self {
        Self { pieces: vec![f] }
    }

    /// Approximates `f` separately on each interval between consecutive
    /// breakpoints (which must include both endpoints).
    pub fn approximate<F>(f: F, breakpoints: &[f64], tol: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument("need at least two breakpoints".into()));
        }
        let pieces = breakpoints
            .windows(2)
            .map(|w| FuncApprox::approximate(&f, Interval::new(w[0], w[1])?, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pieces)
    }

    /// `1` on `(a, b)` and `0` elsewhere in `domain`, with breakpoints at
    /// `a` and `b`.
    pub fn indicator(domain: Interval, a: f64, b: f64) -> Result<Self> {
        let inner = Interval::new(a, b)?;
        if !domain.contains_interval(&inner) {
            return Err(Error::DomainMismatch {
                left: domain,
                right: inner,
            });
        }
        let mut pieces = Vec::with_capacity(3);
        if a > domain.lo() {
            pieces.push(FuncApprox::zero(Interval::new(domain.lo(), a)?));
        }
        pieces.push(FuncApprox::constant(1.0, inner));
        if b < domain.hi() {
            pieces.push(FuncApprox::zero(Interval::new(b, domain.hi())?));
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[FuncApprox] {
        &self.pieces
    }

    pub fn domain(&self) -> Interval {
        Interval::new(
            self.pieces[0].domain().lo(),
            self.pieces[self.pieces.len() - 1].domain().hi(),
        )
        .expect("pieces are ordered")
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.domain().lo()).collect();
        b.push(self.domain().hi());
        b
    }

    /// Right-continuous at interior breakpoints.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let dom = self.domain();
        if !dom.contains(t) {
            return Err(Error::OutOfDomain { t, domain: dom });
        }
        let idx = self
            .pieces
            .iter()
            .position(|p| t < p.domain().hi())
            .unwrap_or(self.pieces.len() - 1);
        Ok(self.pieces[idx].eval_unchecked(t))
    }

    pub fn integrate(&self) -> f64 {
        self.pieces.iter().map(FuncApprox::integrate).sum()
    }

    pub fn norm(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `int self * f` with `f` smooth on the whole domain.
    pub fn inner_smooth(&self, f: &FuncApprox) -> Result<f64> {
        check_same_domain(&self.domain(), &f.domain())?;
        self.pieces
            .iter()
            .map(|p| p.inner(&f.restrict(p.domain())?))
            .sum()
    }

    /// `self - f`, split at this function's breakpoints.
    pub fn sub_smooth(&self, f: &FuncApprox) -> Result<Self> {
        check_same_domain(&self.domain(), &f.domain())?;
        let pieces = self
            .pieces
            .iter()
            .map(|p| p.sub(&f.restrict(p.domain())?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pieces })
    }
}

impl From<FuncApprox> for PiecewiseFunc {
    fn from(f: FuncApprox) -> Self {
        Self::single(f)
    }
}
