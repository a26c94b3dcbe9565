//! Chebyshev points of the second kind and the DCT-I that maps samples at
//! those points to Chebyshev-T coefficients and back.
//!
//! Points are ordered from `+1` down to `-1`, i.e. `x_j = cos(pi j / N)` with
//! `N = n - 1`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Sizes at or below this use the dense cosine matrix.
pub const DIRECT_MAX: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Chebyshev points of the second kind on `[-1, 1]`, descending.
pub fn cheb_points(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let m = (n - 1) as f64;
            // sin form keeps the set exactly symmetric about zero
            (0..n)
                .map(|j| (PI * (m - 2.0 * j as f64) / (2.0 * m)).sin())
                .collect()
        }
    }
}

#[inline]
fn cos_jk(j: usize, k: usize, big_n: usize) -> f64 {
    let r = (j * k) % (2 * big_n);
    (PI * r as f64 / big_n as f64).cos()
}

/// Samples at `cheb_points(n)` to the `n` Chebyshev coefficients of the
/// interpolating polynomial.
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return values.to_vec();
    }
    if n <= DIRECT_MAX {
        values_to_coeffs_direct(values)
    } else {
        values_to_coeffs_fft(values)
    }
}

/// Coefficients to samples at `cheb_points(coeffs.len())`.
pub fn coeffs_to_values(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return coeffs.to_vec();
    }
    if n <= DIRECT_MAX {
        coeffs_to_values_direct(coeffs)
    } else {
        coeffs_to_values_fft(coeffs)
    }
}

/// Dense O(n^2) form of [`values_to_coeffs`].
pub fn values_to_coeffs_direct(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return values.to_vec();
    }
    let big_n = n - 1;
    let mut c: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = 0.5 * (values[0] + values[big_n] * cos_jk(big_n, k, big_n));
            for (j, v) in values.iter().enumerate().take(big_n).skip(1) {
                acc += v * cos_jk(j, k, big_n);
            }
            2.0 * acc / big_n as f64
        })
        .collect();
    c[0] *= 0.5;
    c[big_n] *= 0.5;
    c
}

/// Dense O(n^2) form of [`coeffs_to_values`].
pub fn coeffs_to_values_direct(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return coeffs.to_vec();
    }
    let big_n = n - 1;
    (0..n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * cos_jk(j, k, big_n))
                .sum()
        })
        .collect()
}

fn fft_even_extension(first: &[f64], interior_scale: f64) -> Vec<Complex<f64>> {
    let big_n = first.len() - 1;
    let len = 2 * big_n;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(len);
    for (j, v) in first.iter().enumerate() {
        let s = if j == 0 || j == big_n { 1.0 } else { interior_scale };
        buf.push(Complex::new(v * s, 0.0));
    }
    for j in (1..big_n).rev() {
        buf.push(Complex::new(first[j] * interior_scale, 0.0));
    }
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(len);
        fft.process(&mut buf);
    });
    buf
}

fn values_to_coeffs_fft(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let big_n = n - 1;
    let spec = fft_even_extension(values, 1.0);
    let mut c: Vec<f64> = spec[..n].iter().map(|z| z.re / big_n as f64).collect();
    c[0] *= 0.5;
    c[big_n] *= 0.5;
    c
}

fn coeffs_to_values_fft(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let spec = fft_even_extension(coeffs, 0.5);
    spec[..n].iter().map(|z| z.re).collect()
}
