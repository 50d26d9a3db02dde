//! Independent reference computations used to validate the main paths.
//!
//! Nothing here calls into the stationary, spectral or simulation modules:
//! each quantity is recomputed from a different representation.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

/// Modified Bessel function `I_n(x)` by its power series.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term < 1e-18 * sum || m > 500 {
            break;
        }
    }
    sum
}

/// `I_1(x) / I_0(x)`, the self-consistency function without disorder.
pub fn bessel_ratio(x: f64) -> f64 {
    bessel_i(1, x) / bessel_i(0, x)
}

/// Root of `r = I_1(2 K r) / I_0(2 K r)` in `(0, 1)` by bisection, `None`
/// when `K <= 1`.
pub fn r0_bessel(k: f64) -> Option<f64> {
    if k <= 1.0 {
        return None;
    }
    let g = |r: f64| bessel_ratio(2.0 * k * r) - r;
    let (mut lo, mut hi) = (1e-3 * (k - 1.0).min(1.0), 1.0);
    if g(lo) <= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `S(theta)` for drift `dw = delta omega` through the Fourier series of the
/// convolution `int exp(-x cos(theta - s)) exp(2 dw s) ds`.
pub fn s_fourier(dw: f64, theta: f64, x: f64) -> f64 {
    let wrap = (4.0 * PI * dw).exp() - 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in -80i32..=80 {
        let inn = bessel_i(n.unsigned_abs(), x);
        if inn == 0.0 {
            continue;
        }
        let w_hat = if dw == 0.0 && n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(wrap, 0.0) / (TAU * Complex64::new(2.0 * dw, -(n as f64)))
        };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += TAU * sign * inn * w_hat * Complex64::from_polar(1.0, n as f64 * theta);
    }
    (x * theta.cos()).exp() * acc.re
}
