mod common;

use approx::assert_abs_diff_eq;
use common::{iv, quad, quad_split};
use fredholm_core::problems::*;
use fredholm_core::regularize::project_rhs;
use fredholm_core::sve::sve_from_lowrank;

#[test]
fn every_named_problem_is_consistent() {
    let opts = ProblemOptions::default();
    for name in ONE_D {
        let p = make_1d(name, &opts).unwrap();
        assert!(p.consistency_error().unwrap() <= CONSISTENCY_TOL, "{name}");
        // right-hand side against quadrature of the kernel on the exact solution
        let cuts = p.x_exact.breakpoints();
        let s = p.domain_s.from_unit(0.3);
        let want = quad_split(p.domain_t, &cuts, 120, |t| p.eval_kernel(s, t) * p.x_exact.evaluate(t).unwrap());
        if name != "foxgood" {
            assert_abs_diff_eq!(p.g_exact.evaluate(s).unwrap(), want, epsilon = 1e-9);
        }
    }
    assert!(make_1d("nope", &opts).is_err());
}

#[test]
fn gaussian_kernel_is_symmetric_and_normalized() {
    let k = gaussian_kernel(BLUR_SIGMA);
    assert_abs_diff_eq!(k(0.2, -0.3), k(-0.3, 0.2), epsilon = 0.0);
    let total = quad(iv(-5.0, 5.0), 200, |t| k(0.0, t));
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
}

#[test]
fn noise_has_the_requested_relative_size() {
    let g = fredholm_core::FuncApprox::approximate(|x| 1.0 + x.sin(), iv(0.0, 3.0), 1e-14).unwrap();
    for seed in 0..5 {
        let (gd, delta) = contaminate(&g, &NoiseSpec::new(1e-2, seed)).unwrap();
        assert_abs_diff_eq!(delta, 1e-2 * g.norm(), epsilon = 1e-12 * g.norm());
        assert_abs_diff_eq!(gd.sub(&g).unwrap().norm(), delta, epsilon = 1e-15);
    }
    let (same, d0) = contaminate(&g, &NoiseSpec::new(0.0, 1)).unwrap();
    assert_eq!(d0, 0.0);
    assert_eq!(same, g);
}

#[test]
fn noise_is_reproducible_and_seed_dependent() {
    let d = iv(-1.0, 1.0);
    let a = smooth_noise(d, &NoiseSpec::new(1.0, 42)).unwrap();
    let b = smooth_noise(d, &NoiseSpec::new(1.0, 42)).unwrap();
    let c = smooth_noise(d, &NoiseSpec::new(1.0, 43)).unwrap();
    assert_eq!(a, b);
    assert!(a.sub(&c).unwrap().norm() > 0.1 * a.norm());
}

#[test]
fn noise_energy_matches_parseval() {
    // over one full period the trigonometric terms are orthogonal, so
    // ||F||^2 = L a_0^2 + (L / 2) sum_{k >= 1} (a_k^2 + b_k^2)
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    let d = iv(0.0, 2.0);
    let spec = NoiseSpec { alpha: 1.0, vartheta: 0.1, seed: 7 };
    let f = smooth_noise(d, &spec).unwrap();
    let m = (d.length() / spec.vartheta).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut energy = 0.0;
    for k in 0..=m {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        energy += if k == 0 { d.length() * a * a } else { 0.5 * d.length() * (a * a + b * b) };
    }
    assert_abs_diff_eq!(f.norm().powi(2), energy, epsilon = 1e-9 * energy);
}

#[test]
fn two_dimensional_noise_level() {
    let p = blur2d(&ProblemOptions::default()).unwrap();
    let g = p.g_exact();
    let (gd, delta) = contaminate_2d(&g, &NoiseSpec::new(1e-2, 3), DEFAULT_NOISE_RANK).unwrap();
    let gn = g.norm().unwrap();
    assert_abs_diff_eq!(delta, 1e-2 * gn, epsilon = 1e-12 * gn);
    let diff = gd.add_scaled(&g, -1.0).unwrap().norm().unwrap();
    assert_abs_diff_eq!(diff, delta, epsilon = 1e-8 * delta);
    assert_eq!(p.x_exact(0.0, -0.4).unwrap(), 1.0);
    assert_eq!(p.x_exact(0.5, -0.4).unwrap(), 0.0);
}

#[test]
fn exact_data_lie_in_the_range_up_to_the_cutoff() {
    let p = make_1d("shaw", &ProblemOptions::default()).unwrap();
    let s = sve_from_lowrank(&p.lowrank, 1e-10).unwrap();
    let pr = project_rhs(&s, &p.g_exact).unwrap();
    assert!(pr.g_perp_norm_sq.sqrt() <= 1e-9 * pr.g_norm);
    let dump = p.dump();
    assert_eq!(dump.kernel_probe.len(), 9);
    assert_eq!(dump.kernel_rank, p.lowrank.rank());
}
