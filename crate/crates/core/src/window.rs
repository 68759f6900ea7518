//! Analysis windows: sampled Gaussians and compactly supported bumps built as
//! infinite-order box convolutions.
//!
//! A bump is `chi_{a_0} * chi_{a_1} * ... * chi_{a_J}` with unit-mass boxes of
//! widths `a_j` proportional to `M_j / M_{j+1}` and `sum a_j = 2 R`. Its Fourier
//! transform is the product `prod_j sinc(a_j xi)`, which is what gets sampled:
//! boxes far narrower than the grid spacing still contribute their (small)
//! factor, so the discrete window inherits the decay of the continuous one
//! instead of the Dirichlet-kernel plateau a sample-domain convolution would
//! leave.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::sequence::GevreyParams;
use crate::spectral::spectral_derivatives;
use crate::weight::WeightSpec;

/// Standard deviation of `e^(-pi t^2)` viewed as a density.
const GAUSSIAN_WIDTH: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2 pi)
/// Oversampling used when sampling a box product from its spectrum.
const OVERSAMPLE: usize = 4;
pub const DEFAULT_BUMP_FACTORS: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian,
    GevreyBump,
    BoxConvolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    /// Time of `samples[0]`.
    pub t0: f64,
    pub center_index: usize,
    pub kind: WindowKind,
    pub params: Option<GevreyParams>,
    pub support_radius: Option<f64>,
}

/// Serializable description of a window, without its samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowInfo {
    pub id: String,
    pub kind: WindowKind,
    pub dt: f64,
    pub len: usize,
    pub center: f64,
    pub params: Option<GevreyParams>,
    pub support_radius: Option<f64>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn center(&self) -> f64 {
        self.t0 + self.center_index as f64 * self.dt
    }

    pub fn time(&self, l: usize) -> f64 {
        self.t0 + l as f64 * self.dt
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius.is_some()
    }

    /// `sqrt(dt sum |g|^2)`
    pub fn l2_norm(&self) -> f64 {
        (self.dt * self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `dt sum g`
    pub fn integral(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() * self.dt
    }

    /// `<self, other> = dt sum self(t) conj(other(t))` over the common time grid.
    pub fn inner(&self, other: &Window) -> Result<Complex64> {
        check_same_dt(self.dt, other.dt)?;
        let offset = (other.t0 - self.t0) / self.dt;
        let k = offset.round();
        if (offset - k).abs() > 1e-6 {
            return Err(Error::StftConfig("window grids are not aligned".into()));
        }
        let k = k as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, g) in self.samples.iter().enumerate() {
            let j = l as i64 - k;
            if j >= 0 && (j as usize) < other.len() {
                acc += g * other.samples[j as usize].conj();
            }
        }
        Ok(acc * self.dt)
    }

    pub fn id(&self) -> String {
        match (self.kind, self.params, self.support_radius) {
            (WindowKind::Gaussian, _, _) => format!("gaussian(dt={},n={},center={})", self.dt, self.len(), self.center()),
            (WindowKind::GevreyBump, Some(p), Some(r)) => format!(
                "gevrey_bump(tau={},sigma={},radius={},dt={})",
                p.tau, p.sigma, r, self.dt
            ),
            (_, _, r) => format!("box_convolution(radius={},dt={})", r.unwrap_or(f64::NAN), self.dt),
        }
    }

    pub fn info(&self) -> WindowInfo {
        WindowInfo {
            id: self.id(),
            kind: self.kind,
            dt: self.dt,
            len: self.len(),
            center: self.center(),
            params: self.params,
            support_radius: self.support_radius,
        }
    }

    /// Same window re-centred at `center` (the grid is shifted, samples unchanged).
    pub fn recentered(&self, center: f64) -> Window {
        let mut w = self.clone();
        w.t0 = center - self.center_index as f64 * self.dt;
        w
    }
}

pub(crate) fn check_same_dt(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::DtMismatch {
            signal_dt: a,
            window_dt: b,
        });
    }
    Ok(())
}

/// Unit-L2 sampled Gaussian `2^(1/4) e^(-pi (t - center)^2)`.
///
/// `center` sits on sample `n_samples / 2`; the grid must reach six standard
/// widths on both sides.
pub fn make_gaussian(dt: f64, n_samples: usize, center: f64) -> Result<Window> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    if n_samples < 16 {
        return Err(Error::GridTooShort(format!("gaussian window needs >= 16 samples, got {n_samples}")));
    }
    let m = n_samples / 2;
    let reach = (n_samples - 1 - m) as f64 * dt;
    if reach < 6.0 * GAUSSIAN_WIDTH {
        return Err(Error::GridTooShort(format!(
            "gaussian grid reaches {reach} but needs {}",
            6.0 * GAUSSIAN_WIDTH
        )));
    }
    let a = 2f64.powf(0.25);
    let raw: Vec<f64> = (0..n_samples)
        .map(|l| {
            let s = (l as f64 - m as f64) * dt;
            a * (-std::f64::consts::PI * s * s).exp()
        })
        .collect();
    let norm = (dt * raw.iter().map(|v| v * v).sum::<f64>()).sqrt();
    Ok(Window {
        samples: raw.iter().map(|v| Complex64::new(v / norm, 0.0)).collect(),
        dt,
        t0: center - m as f64 * dt,
        center_index: m,
        kind: WindowKind::Gaussian,
        params: None,
        support_radius: None,
    })
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Convolution of unit-mass boxes of the given full widths, centred at 0 and
/// normalized to unit mass on the grid.
///
/// The result is even, nonnegative and vanishes for `|t| >= sum(widths) / 2`.
pub fn box_convolution_window(widths: &[f64], dt: f64) -> Result<Window> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    if widths.is_empty() || widths.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidParams("box widths must be finite and >= 0".into()));
    }
    let radius = widths.iter().sum::<f64>() / 2.0;
    let m = (radius / dt + 1e-9).floor() as usize;
    if m < 1 {
        return Err(Error::GridTooShort(format!("support radius {radius} is below dt {dt}")));
    }

    let fine_dt = dt / OVERSAMPLE as f64;
    let big_n = (2 * (2 * m * OVERSAMPLE + 1)).next_power_of_two();
    let mut spec = vec![Complex64::new(0.0, 0.0); big_n];
    for k in 0..=big_n / 2 {
        let xi = k as f64 / (big_n as f64 * fine_dt);
        let v: f64 = widths.iter().map(|a| sinc(a * xi)).product();
        spec[k] = Complex64::new(v, 0.0);
        if k > 0 && k < big_n / 2 {
            spec[big_n - k] = spec[k];
        }
    }
    fft::inverse(&mut spec);
    let scale = 1.0 / (big_n as f64 * fine_dt);

    let len = 2 * m + 1;
    let mut vals = vec![0.0f64; len];
    for d in 0..=m {
        let t = d as f64 * dt;
        let v = if t >= radius {
            0.0
        } else {
            let q = (d * OVERSAMPLE) % big_n;
            let qn = (big_n - q) % big_n;
            (0.5 * (spec[q].re + spec[qn].re) * scale).max(0.0)
        };
        vals[m + d] = v;
        vals[m - d] = v;
    }
    let mass = dt * vals.iter().sum::<f64>();
    if mass <= 0.0 {
        return Err(Error::GridTooShort("box product vanishes on the grid".into()));
    }
    Ok(Window {
        samples: vals.iter().map(|v| Complex64::new(v / mass, 0.0)).collect(),
        dt,
        t0: -(m as f64) * dt,
        center_index: m,
        kind: WindowKind::BoxConvolution,
        params: None,
        support_radius: Some(radius),
    })
}

/// Box widths `a_j`, `j = 0..=n_factors`, proportional to `M_j / M_{j+1}` and summing to `2 R`.
pub fn bump_widths(params: &GevreyParams, support_radius: f64, n_factors: usize) -> Vec<f64> {
    let logs: Vec<f64> = (0..=n_factors as u64).map(|j| params.log_m(j) - params.log_m(j + 1)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    logs.iter().map(|l| 2.0 * support_radius * (l - top).exp() / total).collect()
}

/// Compactly supported bump in the class of `params`, supported in `[-R, R]`
/// with unit mass. `n_factors` is `J`, the index of the last box.
pub fn make_gevrey_bump(
    params: &GevreyParams,
    support_radius: f64,
    dt: f64,
    n_factors: Option<usize>,
) -> Result<Window> {
    params.validate()?;
    if params.is_quasianalytic() {
        return Err(Error::Quasianalytic {
            tau: params.tau,
            sigma: params.sigma,
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
    }
    if !(support_radius.is_finite() && support_radius >= 16.0 * dt) {
        return Err(Error::GridTooShort(format!(
            "support radius {support_radius} must be at least 16 dt = {}",
            16.0 * dt
        )));
    }
    let j = n_factors.unwrap_or(DEFAULT_BUMP_FACTORS).max(1);
    let mut w = box_convolution_window(&bump_widths(params, support_radius, j), dt)?;
    w.kind = WindowKind::GevreyBump;
    w.params = Some(*params);
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeNorms {
    pub orders: Vec<u32>,
    /// `||d^alpha g||_{L^1_v}` per order.
    pub norms: Vec<f64>,
    /// Smallest `C_g` with `norm_alpha <= C_g^(alpha^sigma) alpha^(tau alpha^sigma)` over `alpha >= 1`.
    pub fitted_cg: f64,
    pub params: GevreyParams,
    pub noise_fraction: Vec<f64>,
    pub warning: Option<String>,
}

/// Share of spectral derivative mass near the rounding floor above which results are flagged.
pub const NOISE_WARNING_FRACTION: f64 = 0.01;

/// Fits `C = max_alpha (norm_alpha / alpha^(tau alpha^sigma))^(1 / alpha^sigma)`
/// over `alpha >= 1`, in log form; zero norms impose no constraint.
pub fn fit_growth_constant(norms: &[f64], params: &GevreyParams) -> f64 {
    let mut best = 0.0f64;
    for (alpha, &v) in norms.iter().enumerate().skip(1) {
        if v <= 0.0 {
            continue;
        }
        let a = alpha as f64;
        let e = a.powf(params.sigma);
        let c = ((v.ln() - params.tau * e * a.ln()) / e).exp();
        best = best.max(c);
    }
    best
}

/// Weighted `L^1` norms of the window's derivatives via spectral differentiation.
pub fn estimate_derivative_norms(
    window: &Window,
    alpha_max: u32,
    weight: &WeightSpec,
    params: &GevreyParams,
) -> Result<DerivativeNorms> {
    if alpha_max > 12 {
        return Err(Error::InvalidParams(format!("alpha_max must be <= 12, got {alpha_max}")));
    }
    weight.validate()?;
    let d = spectral_derivatives(&window.samples, window.dt, alpha_max + 1);
    let v: Vec<f64> = (0..window.len())
        .map(|l| weight.eval_x(window.time(l) - window.center()))
        .collect();
    let norms: Vec<f64> = d
        .values
        .windows(2)
        .map(|pair| weighted_l1(&pair[0], &pair[1], &v, window.dt))
        .collect();
    let noise_fraction = d.noise_fraction[..=alpha_max as usize].to_vec();
    let worst = noise_fraction.iter().cloned().fold(0.0f64, f64::max);
    let warning = (worst > NOISE_WARNING_FRACTION).then(|| {
        format!("spectral differentiation is noise-dominated: {:.1}% of high-order mass near the rounding floor", 100.0 * worst)
    });
    Ok(DerivativeNorms {
        orders: (0..=alpha_max).collect(),
        fitted_cg: fit_growth_constant(&norms, params),
        norms,
        params: *params,
        noise_fraction,
        warning,
    })
}

/// `int |f| v dt` by the trapezoid rule plus the leading kink correction.
///
/// For numerically real `f`, each simple zero `z = t_k + theta dt` makes `|f| v`
/// kink with derivative jump `J = 2 |f'(z)| v(z)`, which leaves a trapezoid
/// error of `-dt^2 (J/2) B_2(theta)`, `B_2(x) = x^2 - x + 1/6`. `derivative`
/// holds `f'` on the same grid.
pub(crate) fn weighted_l1(values: &[Complex64], derivative: &[Complex64], weight: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let g: Vec<f64> = values.iter().zip(weight).map(|(c, w)| c.norm() * w).collect();
    let trap = dt * (g.iter().sum::<f64>() - 0.5 * (g[0] + g[n - 1]));
    let peak = values.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if !values.iter().all(|c| c.im.abs() <= 1e-12 * peak) {
        return trap;
    }
    let mut correction = 0.0;
    for k in 0..n - 1 {
        let (a, b) = (values[k].re, values[k + 1].re);
        let theta = if a == 0.0 {
            let before = if k > 0 { values[k - 1].re } else { 0.0 };
            if before * b < 0.0 {
                0.0
            } else {
                continue;
            }
        } else if a * b < 0.0 {
            a / (a - b)
        } else {
            continue;
        };
        let lerp = |v: &[f64]| v[k] + theta * (v[k + 1] - v[k]);
        let slope = derivative[k].re + theta * (derivative[k + 1].re - derivative[k].re);
        let w = lerp(weight);
        let b2 = theta * theta - theta + 1.0 / 6.0;
        correction += dt * dt * slope.abs() * w * b2;
    }
    trap + correction
}
