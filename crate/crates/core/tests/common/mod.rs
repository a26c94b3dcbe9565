#![allow(dead_code)]

use fredholm_core::oracle::gauss_legendre_on;
use fredholm_core::Interval;

pub fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

/// Normalized Legendre polynomial of degree `n` on `[-1, 1]`, by the
/// three-term recurrence.
pub fn legendre_normalized(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (0.5f64).sqrt();
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    ((2 * n + 1) as f64 / 2.0).sqrt() * p1
}

/// `int_d f` by a high-order Gauss-Legendre rule.
pub fn quad<F: Fn(f64) -> f64>(d: Interval, n: usize, f: F) -> f64 {
    let (x, w) = gauss_legendre_on(d, n);
    x.iter().zip(&w).map(|(&xi, &wi)| wi * f(xi)).sum()
}

/// `int_d f` split at the given interior points.
pub fn quad_split<F: Fn(f64) -> f64>(d: Interval, cuts: &[f64], n: usize, f: F) -> f64 {
    let mut pts = vec![d.lo()];
    pts.extend(cuts.iter().copied().filter(|&c| c > d.lo() && c < d.hi()));
    pts.push(d.hi());
    pts.windows(2).map(|w| quad(iv(w[0], w[1]), n, &f)).sum()
}
