mod common;

use approx::assert_abs_diff_eq;
use common::{iv, quad};
use fredholm_core::bivariate::{aca, AcaOptions};
use fredholm_core::problems::gaussian_kernel;

fn probe_residual<K: Fn(f64, f64) -> f64>(k: &K, lr: &fredholm_core::bivariate::LowRankKernel) -> (f64, f64) {
    let ss = lr.domain_s().cheb_points(101);
    let ts = lr.domain_t().cheb_points(101);
    let grid = lr.sample_grid(&ss, &ts);
    let (mut err, mut kmax) = (0.0f64, 0.0f64);
    for (i, &s) in ss.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            err = err.max((grid[i][j] - k(s, t)).abs());
            kmax = kmax.max(k(s, t).abs());
        }
    }
    (err, kmax)
}

#[test]
fn separable_kernel_has_its_exact_rank() {
    let k = |s: f64, t: f64| s.sin() * t.exp() + s * s * (2.0 * t).cos() + 1.0;
    let (lr, _) = aca(&k, iv(0.0, 1.0), iv(-1.0, 1.0), &AcaOptions::default()).unwrap();
    assert_eq!(lr.rank(), 3);
    let (err, kmax) = probe_residual(&k, &lr);
    assert!(err <= 1e-13 * kmax, "err {err}");
}

#[test]
fn gaussian_kernel_reconstruction_is_symmetric_and_accurate() {
    let k = gaussian_kernel(0.2);
    let d = iv(-1.0, 1.0);
    let opts = AcaOptions::default();
    let (lr, trace) = aca(&|s, t| k(s, t), d, d, &opts).unwrap();
    let (err, kmax) = probe_residual(&|s, t| k(s, t), &lr);
    assert!(err <= 10.0 * opts.tol * kmax, "err {err}");
    assert!(trace.first().unwrap() > 0.0);
    for &(s, t) in &[(0.3, -0.7), (-0.95, 0.1), (0.5, 0.55)] {
        assert_abs_diff_eq!(lr.eval2(s, t).unwrap(), lr.eval2(t, s).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn frobenius_norm_matches_double_quadrature() {
    let k = |s: f64, t: f64| (s * t).exp();
    let d = iv(0.0, 1.0);
    let (lr, _) = aca(&k, d, d, &AcaOptions::default()).unwrap();
    let want = quad(d, 60, |s| quad(d, 60, |t| k(s, t).powi(2))).sqrt();
    assert_abs_diff_eq!(lr.norm().unwrap(), want, epsilon = 1e-13);
}

#[test]
fn zero_kernel_gives_rank_zero() {
    let d = iv(0.0, 1.0);
    let (lr, trace) = aca(&|_, _| 0.0, d, d, &AcaOptions::default()).unwrap();
    assert_eq!(lr.rank(), 0);
    assert!(trace.zero_kernel);
}

#[test]
fn apply_matches_quadrature() {
    let k = |s: f64, t: f64| 1.0 / (1.0 + (s - t).powi(2));
    let d = iv(0.0, 2.0);
    let (lr, _) = aca(&k, d, d, &AcaOptions::default()).unwrap();
    let x = fredholm_core::FuncApprox::approximate(|t| t.cos(), d, 1e-14).unwrap();
    let y = lr.apply(&x).unwrap();
    for s in [0.0, 0.7, 1.3, 2.0] {
        let want = quad(d, 80, |t| k(s, t) * t.cos());
        assert_abs_diff_eq!(y.evaluate(s).unwrap(), want, epsilon = 1e-12);
    }
}
