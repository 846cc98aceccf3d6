//! Small DFT and series helpers shared by the harmonic solvers.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Uniform angle `2 pi j / m`.
#[inline]
pub fn angle(j: usize, m: usize) -> f64 {
    TAU * j as f64 / m as f64
}

/// Normalized DFT `(1/M) sum_j v_j e^{-i k theta_j}` for `k = 0..M`.
pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let m = values.len();
    let mut buf = values.to_vec();
    forward_plan(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Coefficients `k = 0..=M/2` of real periodic samples.
pub fn real_coefficients(samples: &[f64]) -> Vec<Complex64> {
    let buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let mut out = dft(&buf);
    out.truncate(samples.len() / 2 + 1);
    out
}

/// Polynomial `sum_k c_k u^k` by Horner's rule.
#[inline]
pub fn horner(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

/// Derivative `sum_k k c_k u^{k-1}`.
#[inline]
pub fn horner_derivative(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..coeffs.len()).rev() {
        acc = acc * u + coeffs[k] * k as f64;
    }
    acc
}

/// Truncated product of two power series.
pub fn series_mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}
