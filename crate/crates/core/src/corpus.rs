//! Deterministic test signals with known regularity and singularities.
//!
//! Every signal lives on `t_m = (m - n/2) dt`, `m = 0..n`, so `t = 0` is a
//! sample and the grid is symmetric up to its first point.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assoc::log_envelope_exponent;
use crate::error::{Error, Result};
use crate::fft;
use crate::sequence::GevreyParams;
use crate::stft::SampledSignal;
use crate::window::make_gevrey_bump;

fn default_frequency() -> f64 {
    1.0
}

fn default_period() -> f64 {
    1.0
}

fn default_half_width() -> f64 {
    1.0
}

fn default_radius() -> f64 {
    1.0
}

fn default_bump_params() -> GevreyParams {
    GevreyParams {
        tau: 1.0,
        sigma: 2.0,
        h: 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// `2^(1/4) e^(-pi t^2)`
    Gaussian,
    /// `1` for `t >= 0`, else `0`.
    Heaviside,
    AbsT,
    /// `t/P - round(t/P)`, jumping at odd multiples of `P/2`.
    Sawtooth {
        #[serde(default = "default_period")]
        period: f64,
    },
    /// `sin(2 pi f t)`
    Sine {
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
    /// `2^(1/4) e^(-pi t^2) cos(2 pi f t)`
    GaussianCosine {
        #[serde(default = "default_frequency")]
        frequency: f64,
    },
    /// A unit-mass bump from [`make_gevrey_bump`] centred at 0.
    Bump {
        #[serde(default = "default_bump_params")]
        params: GevreyParams,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// Zero-phase spectrum `e^(-T_params(|xi|))` at the FFT bins.
    EnvelopeSynth { params: GevreyParams },
    /// Zero-phase spectrum `e^(-|xi|^(1/tau))`.
    GevreySynth { tau: f64 },
    /// Indicator of `[-w, w)`.
    TwoStep {
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub kind: SignalKind,
    pub dt: f64,
    pub n: usize,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, dt: f64, n: usize) -> Self {
        SignalSpec { kind, dt, n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n < 256 || !self.n.is_power_of_two() {
            return Err(Error::InvalidSpec(format!("n must be a power of two >= 256, got {}", self.n)));
        }
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{what} must be > 0, got {v}")))
            }
        };
        match self.kind {
            SignalKind::Sawtooth { period } => positive(period, "period"),
            SignalKind::Sine { frequency } | SignalKind::GaussianCosine { frequency } => {
                if frequency.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("frequency must be finite".into()))
                }
            }
            SignalKind::Bump { params, radius } => {
                params.validate().map_err(|e| Error::InvalidSpec(e.to_string()))?;
                positive(radius, "radius")
            }
            SignalKind::EnvelopeSynth { params } => params.validate().map_err(|e| Error::InvalidSpec(e.to_string())),
            SignalKind::GevreySynth { tau } => positive(tau, "tau"),
            SignalKind::TwoStep { half_width } => positive(half_width, "half_width"),
            _ => Ok(()),
        }
    }

    pub fn t0(&self) -> f64 {
        -((self.n / 2) as f64) * self.dt
    }

    pub fn time(&self, m: usize) -> f64 {
        (m as f64 - (self.n / 2) as f64) * self.dt
    }
}

/// Samples the signal described by `spec`.
pub fn generate(spec: &SignalSpec) -> Result<SampledSignal> {
    spec.validate()?;
    let n = spec.n;
    let pointwise = |f: &dyn Fn(f64) -> f64| -> Vec<f64> { (0..n).map(|m| f(spec.time(m))).collect() };
    let values: Vec<f64> = match spec.kind {
        SignalKind::Gaussian => pointwise(&|t| 2f64.powf(0.25) * (-PI * t * t).exp()),
        SignalKind::Heaviside => pointwise(&|t| if t >= 0.0 { 1.0 } else { 0.0 }),
        SignalKind::AbsT => pointwise(&|t: f64| t.abs()),
        SignalKind::Sawtooth { period } => pointwise(&|t| t / period - (t / period).round()),
        SignalKind::Sine { frequency } => pointwise(&|t| (2.0 * PI * frequency * t).sin()),
        SignalKind::GaussianCosine { frequency } => {
            pointwise(&|t| 2f64.powf(0.25) * (-PI * t * t).exp() * (2.0 * PI * frequency * t).cos())
        }
        SignalKind::TwoStep { half_width } => pointwise(&|t| if t >= -half_width && t < half_width { 1.0 } else { 0.0 }),
        SignalKind::Bump { params, radius } => {
            let w = make_gevrey_bump(&params, radius, spec.dt, None).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            if w.len() > n {
                return Err(Error::InvalidSpec(format!("bump ({} samples) does not fit in n = {n}", w.len())));
            }
            let mut v = vec![0.0; n];
            let start = n / 2 - w.center_index;
            for (l, c) in w.samples.iter().enumerate() {
                v[start + l] = c.re;
            }
            v
        }
        SignalKind::EnvelopeSynth { params } => {
            let spectrum = synth_spectrum(spec, |xi| log_envelope_exponent(&params, xi))?;
            synthesize(spec, &spectrum)
        }
        SignalKind::GevreySynth { tau } => {
            let spectrum = synth_spectrum(spec, |xi| Ok(xi.powf(1.0 / tau)))?;
            synthesize(spec, &spectrum)
        }
    };
    SampledSignal::from_real(&values, spec.dt, spec.t0())
}

/// `e^(-exponent(|xi_k|))` at the `n` FFT bins `xi_k = k / (n dt)` (signed).
fn synth_spectrum(spec: &SignalSpec, exponent: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    (0..spec.n)
        .map(|k| Ok((-exponent(fft::bin_frequency(k, spec.n, spec.dt).abs())?).exp()))
        .collect()
}

/// `f(t_m) = dxi sum_k S_k e^(2 pi i t_m xi_k)`, real part.
fn synthesize(spec: &SignalSpec, spectrum: &[f64]) -> Vec<f64> {
    let n = spec.n;
    let d_xi = 1.0 / (n as f64 * spec.dt);
    // t_m xi_k = (m - n/2) k / n, so the shift contributes (-1)^k
    let mut buf: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(k, &s)| Complex64::new(if k % 2 == 0 { s } else { -s }, 0.0))
        .collect();
    fft::inverse(&mut buf);
    buf.iter().map(|c| c.re * d_xi).collect()
}

/// `dt sum_m f(t_m) e^(-2 pi i t_m xi_k)` at the `n` FFT bins, in FFT order.
pub fn sampled_spectrum(signal: &SampledSignal) -> Vec<Complex64> {
    let n = signal.len();
    let k0 = (signal.t0 / signal.dt).round() as i64;
    let mut buf = signal.samples.clone();
    fft::forward(&mut buf);
    buf.iter()
        .enumerate()
        .map(|(k, c)| {
            let turns = ((k0 as i128 * k as i128).rem_euclid(n as i128)) as f64 / n as f64;
            c * Complex64::from_polar(signal.dt, -2.0 * PI * turns)
        })
        .collect()
}

/// The reference signals used for smooth-signal checks and threshold calibration;
/// the bump matches the analysis window's class and radius.
pub fn smooth_reference_kinds(bump_params: GevreyParams, bump_radius: f64) -> Vec<SignalKind> {
    vec![
        SignalKind::Gaussian,
        SignalKind::GaussianCosine { frequency: 4.0 },
        SignalKind::Bump {
            params: bump_params,
            radius: bump_radius,
        },
    ]
}
