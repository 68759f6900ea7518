//! Derivatives of sampled functions by multiplication with `(2 pi i xi)^alpha`.

use rustfft::num_complex::Complex64;

use crate::fft;

/// Bins below this fraction of the spectral peak are treated as rounding noise and dropped.
pub const NOISE_FLOOR: f64 = 1e-13;
/// Bins below this fraction count as "near the floor" for the reliability estimate.
const NEAR_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SpectralDerivatives {
    /// `values[alpha][n]` is the `alpha`-th derivative at input sample `n`.
    pub values: Vec<Vec<Complex64>>,
    /// Share of `sum |2 pi xi|^alpha |F|` carried by bins close to the noise floor.
    pub noise_fraction: Vec<f64>,
}

/// Derivatives of orders `0..=alpha_max` of the periodic extension of the
/// samples; inputs that do not join smoothly across the ends must be
/// negligible there.
pub fn spectral_derivatives(samples: &[Complex64], dt: f64, alpha_max: u32) -> SpectralDerivatives {
    let n = samples.len();
    let big_n = n;
    let mut spec = samples.to_vec();
    fft::forward(&mut spec);

    let peak = spec.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let floor = NOISE_FLOOR * peak;
    let near = NEAR_FLOOR * peak;
    for c in spec.iter_mut() {
        if c.norm() < floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }

    let omegas: Vec<f64> = (0..big_n)
        .map(|k| 2.0 * std::f64::consts::PI * fft::bin_frequency(k, big_n, dt))
        .collect();
    let mut values = Vec::with_capacity(alpha_max as usize + 1);
    let mut noise_fraction = Vec::with_capacity(alpha_max as usize + 1);
    for alpha in 0..=alpha_max {
        let i_pow = Complex64::i().powu(alpha);
        let (mut total, mut noisy) = (0.0f64, 0.0f64);
        let mut buf: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if alpha % 2 == 1 && k == big_n / 2 {
                    return Complex64::new(0.0, 0.0);
                }
                let w = omegas[k].powi(alpha as i32);
                let mass = w.abs() * c.norm();
                total += mass;
                if c.norm() < near {
                    noisy += mass;
                }
                c * i_pow * w
            })
            .collect();
        fft::inverse(&mut buf);
        let scale = 1.0 / big_n as f64;
        values.push(buf[..n].iter().map(|c| c * scale).collect());
        noise_fraction.push(if total > 0.0 { noisy / total } else { 0.0 });
    }
    SpectralDerivatives { values, noise_fraction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_first_and_second_derivative() {
        let dt = 1.0 / 64.0;
        let n = 1024;
        let t = |i: usize| (i as f64 - n as f64 / 2.0) * dt;
        let f: Vec<Complex64> = (0..n).map(|i| Complex64::new((-PI * t(i) * t(i)).exp(), 0.0)).collect();
        let d = spectral_derivatives(&f, dt, 2);
        for i in (0..n).step_by(37) {
            let x = t(i);
            let g = (-PI * x * x).exp();
            assert!((d.values[1][i].re - (-2.0 * PI * x * g)).abs() < 1e-10);
            assert!((d.values[2][i].re - (4.0 * PI * PI * x * x - 2.0 * PI) * g).abs() < 1e-9);
            assert!(d.values[1][i].im.abs() < 1e-10);
        }
        assert!(d.noise_fraction[2] < 0.01);
    }

    #[test]
    fn periodic_inputs_are_exact() {
        let n = 256;
        let dt = 1.0 / 64.0;
        let c: Vec<Complex64> = vec![Complex64::new(3.0, 0.0); n];
        let d = spectral_derivatives(&c, dt, 3);
        assert!(d.values[1..].iter().flatten().all(|v| v.norm() < 1e-12));
        let s: Vec<Complex64> = (0..n).map(|i| Complex64::new((2.0 * PI * i as f64 * dt).sin(), 0.0)).collect();
        let d = spectral_derivatives(&s, dt, 4);
        for alpha in 0..=4 {
            let sup = d.values[alpha].iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!((sup / (2.0 * PI).powi(alpha as i32) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_input() {
        let d = spectral_derivatives(&[Complex64::new(0.0, 0.0); 16], 0.1, 3);
        assert!(d.values.iter().flatten().all(|c| c.norm() == 0.0));
        assert_eq!(d.noise_fraction, vec![0.0; 4]);
    }
}
