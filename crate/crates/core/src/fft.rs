//! Thin wrappers over `rustfft` used throughout the crate.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Unnormalized forward DFT, `X_k = sum_n x_n e^(-2 pi i n k / N)`, in place.
pub fn forward(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
    }
}

/// Unnormalized inverse DFT, `x_n = sum_k X_k e^(2 pi i n k / N)`, in place.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    }
}

/// Frequency of DFT bin `k` of an `n`-point transform with spacing `dt`, in
/// the signed range `[-1/(2 dt), 1/(2 dt))`.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let signed = if 2 * k >= n { k as f64 - n as f64 } else { k as f64 };
    signed / (n as f64 * dt)
}
