//! Independent oracles for the integration suites: direct quadrature on fine
//! grids (no FFT path), closed-form Gaussian moments, and small helpers.
//! Everything here is deliberately brute-force.

#![allow(dead_code)]

use num_complex::Complex64;

/// Analytic minimum-uncertainty packet, 1D.
pub fn gaussian_packet(x: f64, a: f64, p: f64, sigma: f64, hbar: f64) -> Complex64 {
    let prefactor = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    Complex64::from_polar(
        prefactor * (-(x - a) * (x - a) / (4.0 * sigma * sigma)).exp(),
        p * (x - a) / hbar,
    )
}

/// Composite Simpson rule for complex integrands.
pub fn simpson(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, intervals: usize) -> Complex64 {
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * (h / 3.0)
}

/// Overlap (phi_a, phi_b)_L2 of two packets by direct quadrature.
pub fn overlap_quadrature(
    (a1, p1, s1): (f64, f64, f64),
    (a2, p2, s2): (f64, f64, f64),
    hbar: f64,
) -> Complex64 {
    let spread = 12.0 * s1.max(s2);
    let lo = a1.min(a2) - spread;
    let hi = a1.max(a2) + spread;
    simpson(
        |x| gaussian_packet(x, a1, p1, s1, hbar) * gaussian_packet(x, a2, p2, s2, hbar).conj(),
        lo,
        hi,
        20_000,
    )
}

/// Double integral of k(x, y) f(x) conj(g(y)) with the Gaussian metric
/// kernel, by nested Simpson rules. Slow and exact enough for oracles.
pub fn h_inner_quadrature(
    kernel_sigma: f64,
    f: &dyn Fn(f64) -> Complex64,
    g: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    intervals: usize,
) -> Complex64 {
    let kernel = |x: f64, y: f64| (-(x - y) * (x - y) / (8.0 * kernel_sigma * kernel_sigma)).exp();
    simpson(
        |x| {
            let fx = f(x);
            if fx.norm() < 1e-300 {
                return Complex64::default();
            }
            fx * simpson(|y| Complex64::new(kernel(x, y), 0.0) * g(y).conj(), lo, hi, intervals)
        },
        lo,
        hi,
        intervals,
    )
}

/// Central moment E[u^k] of a zero-mean Gaussian with standard deviation sd.
pub fn gaussian_central_moment(sd: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut value = 1.0;
    let mut m = k as i64 - 1;
    while m > 0 {
        value *= m as f64;
        m -= 2;
    }
    value * sd.powi(k as i32)
}

/// E[p^4] for p ~ N(p0, dp^2).
pub fn p4_moment(p0: f64, dp: f64) -> f64 {
    p0.powi(4) + 6.0 * p0 * p0 * dp * dp + 3.0 * dp.powi(4)
}

/// E[p^8] for p ~ N(p0, dp^2).
pub fn p8_moment(p0: f64, dp: f64) -> f64 {
    p0.powi(8)
        + 28.0 * p0.powi(6) * dp.powi(2)
        + 210.0 * p0.powi(4) * dp.powi(4)
        + 420.0 * p0.powi(2) * dp.powi(6)
        + 105.0 * dp.powi(8)
}

/// Cholesky-based positive-definiteness check for a small symmetric matrix.
pub fn is_positive_definite(matrix: &[Vec<f64>]) -> bool {
    let n = matrix.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    true
}

/// Max absolute difference of two equal-length slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
