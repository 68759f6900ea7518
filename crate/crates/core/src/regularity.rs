//! Regularity probes on sampled signals and their STFT grids.
//!
//! Three equivalent descriptions of `(tau, sigma)` regularity are made
//! measurable: derivative growth of the signal, polynomial moments of the STFT
//! in `xi`, and the envelope `|V| <~ m(x) e^(-T(|xi|))`. A grid search over
//! `(sigma, tau)` fits the envelope to the measured STFT decay.

use rayon::prelude::*;
use serde::Serialize;

use crate::assoc::{assoc_t, log_envelope_exponent};
use crate::error::{Error, Result};
use crate::sequence::GevreyParams;
use crate::spectral::{spectral_derivatives, NOISE_FLOOR};
use crate::stft::{SampledSignal, StftGrid};
use crate::weight::WeightSpec;
use crate::window::{fit_growth_constant, NOISE_WARNING_FRACTION};

/// Bins above this fraction of the Nyquist frequency are not trusted.
pub const ALIAS_GUARD: f64 = 0.8;
/// `relative_margin` above which condition iii is considered violated.
pub const DEFAULT_PASS_RATIO: f64 = 1e3;
/// Minimum number of profile points for a decay fit.
pub const MIN_FIT_POINTS: usize = 8;
/// Profile points kept (log-spaced) for the decay regression.
const MAX_FIT_POINTS: usize = 400;

/// Smallest `|xi|` with `ln ln(e + |xi|) >= 0.1`.
pub fn xi_floor() -> f64 {
    (0.1f64.exp()).exp() - std::f64::consts::E
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCertificate {
    pub orders: Vec<u32>,
    /// `sup_x |d^alpha f(x)| / m(x)` per order.
    pub sup_norms: Vec<f64>,
    /// Smallest `C_f` with `sup_norms[alpha] <= C_f^(alpha^sigma) alpha^(tau alpha^sigma)` for `alpha >= 1`.
    pub fitted_cf: f64,
    pub params: GevreyParams,
    pub noise_fraction: Vec<f64>,
    pub warning: Option<String>,
}

/// Spectral derivative bounds of a signal that is negligible (or periodic) at its ends.
pub fn probe_condition_i(
    f: &SampledSignal,
    alpha_max: u32,
    m: &WeightSpec,
    params: &GevreyParams,
) -> Result<DerivativeCertificate> {
    if alpha_max > 10 {
        return Err(Error::InvalidParams(format!("alpha_max must be <= 10, got {alpha_max}")));
    }
    params.validate()?;
    m.validate()?;
    let d = spectral_derivatives(&f.samples, f.dt, alpha_max);
    let weights: Vec<f64> = (0..f.len()).map(|s| m.eval_x(f.time(s))).collect();
    let sup_norms: Vec<f64> = d
        .values
        .iter()
        .map(|vals| vals.iter().zip(&weights).map(|(v, w)| v.norm() / w).fold(0.0, f64::max))
        .collect();
    let worst = d.noise_fraction.iter().cloned().fold(0.0f64, f64::max);
    let warning = (worst > NOISE_WARNING_FRACTION).then(|| {
        format!(
            "high-order derivatives are noise-dominated: {:.1}% of spectral mass near the rounding floor",
            100.0 * worst
        )
    });
    Ok(DerivativeCertificate {
        orders: (0..=alpha_max).collect(),
        fitted_cf: fit_growth_constant(&sup_norms, params),
        sup_norms,
        params: *params,
        noise_fraction: d.noise_fraction,
        warning,
    })
}

/// Grid cells that carry information: above the rounding floor and below the alias guard.
fn trusted_cells(grid: &StftGrid) -> (f64, f64) {
    let floor = NOISE_FLOOR * grid.max_abs();
    let nyquist = 0.5 / grid.dt;
    (floor, ALIAS_GUARD * nyquist)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub orders: Vec<u32>,
    /// `sup_{x, xi} |xi|^alpha |V(x, xi)| / m(x)`
    pub moments: Vec<f64>,
    pub fitted_cfg: f64,
    /// `(moments[alpha] / alpha^(tau alpha^sigma))^(1/alpha^sigma)` per order (`alpha >= 1`).
    pub per_order_constants: Vec<f64>,
    /// True when the per-order constants of the upper half of the orders do not
    /// exceed those of the lower half by more than 10%.
    pub compatible: bool,
    pub params: GevreyParams,
}

pub fn probe_condition_ii(grid: &StftGrid, m: &WeightSpec, alpha_max: u32, params: &GevreyParams) -> Result<MomentReport> {
    grid.check_finite()?;
    params.validate()?;
    m.validate()?;
    let (floor, xi_cap) = trusted_cells(grid);
    let nxi = grid.n_xi();
    let mut moments = vec![0.0f64; alpha_max as usize + 1];
    for i in 0..grid.n_x() {
        let w = m.eval_x(grid.x_axis[i]);
        for j in 0..nxi {
            let xi = grid.xi_axis[j].abs();
            let v = grid.get(i, j).norm();
            if v == 0.0 || v < floor || xi > xi_cap {
                continue;
            }
            let base = v / w;
            for (alpha, slot) in moments.iter_mut().enumerate() {
                *slot = slot.max(xi.powi(alpha as i32) * base);
            }
        }
    }
    let per_order_constants: Vec<f64> = (1..=alpha_max as usize)
        .map(|a| fit_growth_constant(&moments[..=a], params).min(single_constant(moments[a], a, params)))
        .collect();
    let half = per_order_constants.len() / 2;
    let compatible = if half == 0 {
        true
    } else {
        let low = per_order_constants[..half].iter().cloned().fold(0.0, f64::max);
        let high = per_order_constants[half..].iter().cloned().fold(0.0, f64::max);
        high <= 1.1 * low
    };
    Ok(MomentReport {
        orders: (0..=alpha_max).collect(),
        fitted_cfg: fit_growth_constant(&moments, params),
        moments,
        per_order_constants,
        compatible,
        params: *params,
    })
}

fn single_constant(v: f64, alpha: usize, params: &GevreyParams) -> f64 {
    if v <= 0.0 || alpha == 0 {
        return 0.0;
    }
    let a = alpha as f64;
    let e = a.powf(params.sigma);
    ((v.ln() - params.tau * e * a.ln()) / e).exp()
}

/// `ln sup_k k^N e^(-T(k)) = ln M_N - N^sigma ln h`, the moment implied by a unit envelope.
pub fn envelope_moment_log(params: &GevreyParams, n: u64) -> f64 {
    params.log_m(n) - (n as f64).powf(params.sigma) * params.h.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeProbe {
    pub params: GevreyParams,
    /// `sup |V| e^(T(|xi|)) / m(x)` over trusted cells.
    pub weighted_sup: f64,
    /// `sup |V| / m(x)` over the same cells.
    pub reference_sup: f64,
    /// `weighted_sup / reference_sup`; 0 for an empty grid.
    pub relative_margin: f64,
    pub tightest_x: Option<f64>,
    pub tightest_xi: Option<f64>,
    pub pass_ratio: f64,
    pub pass: bool,
}

/// Envelope test `|V(x, xi)| <= A m(x) e^(-T(|xi|))`, measured as the ratio of the
/// envelope-weighted supremum to the plain one.
pub fn probe_condition_iii(grid: &StftGrid, m: &WeightSpec, params: &GevreyParams) -> Result<EnvelopeProbe> {
    probe_condition_iii_with(grid, m, params, DEFAULT_PASS_RATIO)
}

pub fn probe_condition_iii_with(
    grid: &StftGrid,
    m: &WeightSpec,
    params: &GevreyParams,
    pass_ratio: f64,
) -> Result<EnvelopeProbe> {
    grid.check_finite()?;
    params.validate()?;
    m.validate()?;
    let (floor, xi_cap) = trusted_cells(grid);
    let t_of: Vec<Option<f64>> = grid
        .xi_axis
        .par_iter()
        .map(|xi| {
            let a = xi.abs();
            if a > xi_cap {
                Ok(None)
            } else {
                log_envelope_exponent(params, a).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let mut best = (0.0f64, None, None);
    let mut reference = 0.0f64;
    for i in 0..grid.n_x() {
        let w = m.eval_x(grid.x_axis[i]);
        for (j, t) in t_of.iter().enumerate() {
            let v = grid.get(i, j).norm();
            let Some(t) = t else { continue };
            if v == 0.0 || v < floor {
                continue;
            }
            reference = reference.max(v / w);
            let weighted = (v.ln() + t - w.ln()).exp();
            if weighted > best.0 {
                best = (weighted, Some(grid.x_axis[i]), Some(grid.xi_axis[j]));
            }
        }
    }
    let relative_margin = if reference > 0.0 { best.0 / reference } else { 0.0 };
    Ok(EnvelopeProbe {
        params: *params,
        weighted_sup: best.0,
        reference_sup: reference,
        relative_margin,
        tightest_x: best.1,
        tightest_xi: best.2,
        pass_ratio,
        pass: relative_margin <= pass_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeurlingReport {
    pub params_base: GevreyParams,
    pub rows: Vec<EnvelopeProbe>,
    /// Every `h` passes.
    pub beurling: bool,
    /// At least one `h` passes.
    pub roumieu: bool,
}

pub fn probe_beurling(grid: &StftGrid, m: &WeightSpec, params_base: &GevreyParams, h_list: &[f64]) -> Result<BeurlingReport> {
    if h_list.is_empty() || h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidParams("h_list must be nonempty and positive".into()));
    }
    let rows: Vec<EnvelopeProbe> = h_list
        .iter()
        .map(|&h| probe_condition_iii(grid, m, &params_base.with_h(h)))
        .collect::<Result<_>>()?;
    Ok(BeurlingReport {
        params_base: *params_base,
        beurling: rows.iter().all(|r| r.pass),
        roumieu: rows.iter().any(|r| r.pass),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Gevrey,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub tau_hat: f64,
    pub sigma_hat: f64,
    /// Intercept `a` of `-ln E = b x + a`; `e^(-a)` is the envelope amplitude.
    pub amplitude: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub xi_range: (f64, f64),
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOptions {
    /// Candidate `sigma > 1`; `sigma = 1` is always tried.
    pub sigma_grid: Vec<f64>,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            sigma_grid: (1..=19).map(|i| 1.0 + 0.05 * i as f64).collect(),
            tau_min: 0.2,
            tau_max: 5.0,
        }
    }
}

/// `E(|xi|) = sup_x max(|V(x, xi)|, |V(x, -xi)|) / m(x)` for `xi >= 0`, ascending.
pub fn decay_profile(grid: &StftGrid, m: &WeightSpec) -> Vec<(f64, f64)> {
    let n = grid.n_xi();
    let half = n / 2;
    let weights: Vec<f64> = grid.x_axis.iter().map(|&x| m.eval_x(x)).collect();
    (0..half)
        .map(|k| {
            let pos = half + k;
            let neg = half - k;
            let e = (0..grid.n_x())
                .map(|i| grid.get(i, pos).norm().max(grid.get(i, neg).norm()) / weights[i])
                .fold(0.0, f64::max);
            (grid.xi_axis[pos], e)
        })
        .collect()
}

pub fn fit_envelope(grid: &StftGrid, m: &WeightSpec) -> Result<DecayFit> {
    fit_envelope_with(grid, m, &FitOptions::default())
}

pub fn fit_envelope_with(grid: &StftGrid, m: &WeightSpec, opts: &FitOptions) -> Result<DecayFit> {
    grid.check_finite()?;
    m.validate()?;
    let xi_cap = ALIAS_GUARD * 0.5 / grid.dt;
    fit_profile(&decay_profile(grid, m), xi_cap, opts)
}

/// Fits `-ln E` against the model regressors. Points with `|xi| <= xi_cap`,
/// above the rounding floor and above the `ln ln` floor are used.
pub fn fit_profile(profile: &[(f64, f64)], xi_cap: f64, opts: &FitOptions) -> Result<DecayFit> {
    let peak = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return Err(Error::DegenerateProfile("profile is identically zero".into()));
    }
    let lo = xi_floor();
    if xi_cap < 100.0 * lo {
        return Err(Error::InsufficientRange(format!(
            "usable frequencies end at {xi_cap}, need at least {}",
            100.0 * lo
        )));
    }
    let floor = NOISE_FLOOR * peak;
    let usable: Vec<(f64, f64)> = profile
        .iter()
        .cloned()
        .filter(|&(xi, e)| xi >= lo && xi <= xi_cap && e > floor)
        .collect();
    let points = log_thin(&usable, MAX_FIT_POINTS);
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateProfile(format!(
            "{} usable profile points above the noise floor, need {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.ln()).collect();
    let xi_range = (xs[0], xs[xs.len() - 1]);

    let mut candidates: Vec<(f64, DecayFit)> = Vec::new();
    let gevrey = search_tau(opts, |tau| Ok(xs.iter().map(|x| x.powf(1.0 / tau)).collect()), &ys)?;
    candidates.push((1.0, make_fit(DecayModel::Gevrey, 1.0, gevrey, xi_range, xs.len())));
    let extended: Vec<(f64, DecayFit)> = opts
        .sigma_grid
        .par_iter()
        .filter(|s| **s > 1.0)
        .map(|&sigma| {
            let res = search_tau(
                opts,
                |tau| {
                    let p = GevreyParams { tau, sigma, h: 1.0 };
                    xs.iter().map(|&x| assoc_t(&p, x).map(|e| e.value)).collect()
                },
                &ys,
            )?;
            Ok((sigma, make_fit(DecayModel::Extended, sigma, res, xi_range, xs.len())))
        })
        .collect::<Result<_>>()?;
    candidates.extend(extended);

    let mut best: Option<(f64, DecayFit)> = None;
    for (sigma, fit) in candidates {
        let better = match &best {
            None => true,
            Some((bs, bf)) => fit.r_squared > bf.r_squared || (fit.r_squared == bf.r_squared && sigma < *bs),
        };
        if better {
            best = Some((sigma, fit));
        }
    }
    Ok(best.expect("at least the gevrey candidate").1)
}

fn make_fit(model: DecayModel, sigma: f64, r: Regression, xi_range: (f64, f64), n: usize) -> DecayFit {
    DecayFit {
        model,
        tau_hat: r.tau,
        sigma_hat: sigma,
        amplitude: r.intercept,
        slope: r.slope,
        r_squared: r.r_squared,
        xi_range,
        n_points: n,
    }
}

/// At most `max` points, spread evenly in `ln xi`; input ascending in `xi`.
fn log_thin(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max {
        return points.to_vec();
    }
    let (a, b) = (points[0].0.ln(), points[points.len() - 1].0.ln());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(max);
    let mut next = 0usize;
    for k in 0..max {
        let target = a + (b - a) * k as f64 / (max - 1) as f64;
        while next < points.len() && points[next].0.ln() < target {
            next += 1;
        }
        let idx = next.min(points.len() - 1);
        if out.last().map(|p: &(f64, f64)| p.0) != Some(points[idx].0) {
            out.push(points[idx]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Regression {
    tau: f64,
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx, (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}

/// Maximizes R^2 over `tau` in `[tau_min, tau_max]`: coarse log grid, then golden section.
fn search_tau(opts: &FitOptions, regressor: impl Fn(f64) -> Result<Vec<f64>>, ys: &[f64]) -> Result<Regression> {
    let eval = |ln_tau: f64| -> Result<Regression> {
        let tau = ln_tau.exp();
        let x = regressor(tau)?;
        let (slope, intercept, r_squared) = linear_fit(&x, ys);
        Ok(Regression {
            tau,
            slope,
            intercept,
            r_squared,
        })
    };
    let (a, b) = (opts.tau_min.ln(), opts.tau_max.ln());
    const COARSE: usize = 24;
    let grid: Vec<Regression> = (0..=COARSE)
        .map(|i| eval(a + (b - a) * i as f64 / COARSE as f64))
        .collect::<Result<_>>()?;
    let mut k = 0;
    for (i, r) in grid.iter().enumerate() {
        if r.r_squared > grid[k].r_squared {
            k = i;
        }
    }
    let step = (b - a) / COARSE as f64;
    let (mut lo, mut hi) = ((a + step * (k as f64 - 1.0)).max(a), (a + step * (k as f64 + 1.0)).min(b));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    for _ in 0..40 {
        if fc.r_squared >= fd.r_squared {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = eval(d)?;
        }
    }
    let mut best = grid[k];
    for cand in [fc, fd] {
        if cand.r_squared > best.r_squared {
            best = cand;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyWindow {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub window: ClassifyWindow,
    pub weight: WeightSpec,
    pub fit: FitOptions,
    pub hop: f64,
    /// Frames are restricted to this range of `x` in addition to lying inside the signal.
    pub x_range: Option<(f64, f64)>,
    pub alpha_max: u32,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            window: ClassifyWindow::Gaussian,
            weight: WeightSpec::Unweighted,
            fit: FitOptions::default(),
            hop: 0.5,
            x_range: None,
            alpha_max: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub window: crate::window::WindowInfo,
    pub fit: DecayFit,
    pub condition_i: DerivativeCertificate,
    pub condition_ii: MomentReport,
    /// Envelope probe at the fitted `(tau, sigma)` with `h = 1`.
    pub condition_iii: EnvelopeProbe,
}

/// Analysis window used by [`classify`] at sample spacing `dt`.
pub fn classify_window(kind: ClassifyWindow, dt: f64) -> Result<crate::window::Window> {
    match kind {
        ClassifyWindow::Gaussian => {
            // make_gaussian needs a half-length of at least 6 standard deviations
            let n = ((4.8 / dt).ceil() as usize + 2).max(16).next_power_of_two();
            crate::window::make_gaussian(dt, n, 0.0)
        }
        ClassifyWindow::Bump => crate::wavefront::default_window(dt),
    }
}

/// Fits the decay model to the STFT of `f` over frames whose window lies inside
/// the signal, and reports all three regularity probes at the fitted class.
pub fn classify(f: &SampledSignal, opts: &ClassifyOptions) -> Result<ClassifyReport> {
    let g = classify_window(opts.window, f.dt)?;
    if g.len() > f.len() {
        return Err(Error::WindowTooLong {
            window_len: g.len(),
            signal_len: f.len(),
        });
    }
    let lo = f.t0 - g.t0;
    let hi = f.t0 + (f.len() - g.len()) as f64 * f.dt - g.t0;
    let (lo, hi) = match opts.x_range {
        Some((a, b)) => (lo.max(a), hi.min(b)),
        None => (lo, hi),
    };
    let grid = crate::stft::stft_region(f, &g, opts.hop, g.len().next_power_of_two(), lo, hi)?;
    let fit = fit_envelope_with(&grid, &opts.weight, &opts.fit)?;
    let fitted = GevreyParams::new(fit.tau_hat, fit.sigma_hat, 1.0)?;
    Ok(ClassifyReport {
        window: g.info(),
        condition_i: probe_condition_i(f, opts.alpha_max, &opts.weight, &fitted)?,
        condition_ii: probe_condition_ii(&grid, &opts.weight, opts.alpha_max, &fitted)?,
        condition_iii: probe_condition_iii(&grid, &opts.weight, &fitted)?,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, SignalKind, SignalSpec};
    use crate::stft::stft;
    use crate::window::make_gaussian;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn gp(tau: f64, sigma: f64, h: f64) -> GevreyParams {
        GevreyParams::new(tau, sigma, h).unwrap()
    }

    fn gaussian_pair_grid() -> StftGrid {
        let dt = 1.0 / 64.0;
        let f = generate(&SignalSpec::new(SignalKind::Gaussian, dt, 1024)).unwrap();
        let g = make_gaussian(dt, 512, 0.0).unwrap();
        stft(&f, &g, 8.0 * dt, 512).unwrap()
    }

    #[test]
    fn gaussian_certificate_matches_hermite_bounds() {
        let f = generate(&SignalSpec::new(SignalKind::Gaussian, 1.0 / 64.0, 1024)).unwrap();
        let c = probe_condition_i(&f, 6, &WeightSpec::Unweighted, &gp(1.0, 1.0, 1.0)).unwrap();
        // sup |f'| = 2^(1/4) sqrt(2 pi) e^(-1/2), attained at t = 1/sqrt(2 pi)
        let expect = 2f64.powf(0.25) * (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert!((c.sup_norms[1] - expect).abs() < 1e-3 * expect);
        assert!((c.sup_norms[0] - 2f64.powf(0.25)).abs() < 1e-12);
        assert!(c.fitted_cf.is_finite() && c.fitted_cf > 0.0);
        assert!(c.warning.is_none());
    }

    #[test]
    fn constant_signal_has_zero_certificate() {
        let f = SampledSignal::from_real(&[2.5; 256], 0.01, 0.0).unwrap();
        let c = probe_condition_i(&f, 5, &WeightSpec::Unweighted, &gp(1.0, 1.0, 1.0)).unwrap();
        assert!(c.sup_norms[1..].iter().all(|v| *v < 1e-10));
        assert!(c.fitted_cf < 1e-9);
    }

    #[test]
    fn sine_certificate() {
        let f = generate(&SignalSpec::new(SignalKind::Sine { frequency: 1.0 }, 1.0 / 64.0, 256)).unwrap();
        let c = probe_condition_i(&f, 6, &WeightSpec::Unweighted, &gp(0.05, 1.0, 1.0)).unwrap();
        for a in 0..=6 {
            assert!((c.sup_norms[a] / (2.0 * PI).powi(a as i32) - 1.0).abs() < 1e-9);
        }
        assert!(c.fitted_cf >= 2.0 * PI * (1.0 - 1e-9));
    }

    #[test]
    fn moments_of_zero_and_gaussian_grids() {
        let grid = gaussian_pair_grid();
        let zero = grid.scaled(Complex64::new(0.0, 0.0));
        let r = probe_condition_ii(&zero, &WeightSpec::Unweighted, 4, &gp(1.0, 1.0, 1.0)).unwrap();
        assert!(r.moments.iter().all(|m| *m == 0.0));

        let r = probe_condition_ii(&grid, &WeightSpec::Unweighted, 6, &gp(1.0, 1.0, 1.0)).unwrap();
        for a in 1..=6 {
            // sup_xi xi^a e^(-pi xi^2 / 2) = (a/pi)^(a/2) e^(-a/2)
            let af = a as f64;
            let oracle = (af / PI).powf(af / 2.0) * (-af / 2.0).exp();
            assert!((r.moments[a] / oracle - 1.0).abs() < 0.05, "alpha={a}");
        }
        assert!(r.compatible);
    }

    #[test]
    fn duality_of_envelope_and_moments() {
        for p in [gp(1.0, 1.5, 1.0), gp(0.7, 1.2, 2.0), gp(1.0, 1.0, 1.0)] {
            for n in 1..=6u64 {
                let exact = envelope_moment_log(&p, n);
                let best = crate::grid::log_grid(1.0, 1e9, 20_000)
                    .into_iter()
                    .map(|k| n as f64 * k.ln() - assoc_t(&p, k).unwrap().value)
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(best <= exact + 1e-9, "{p:?} n={n}");
                assert!(exact - best < 1e-3, "{p:?} n={n}: {best} vs {exact}");
            }
        }
    }

    #[test]
    fn envelope_probe_on_gaussian_pair() {
        let grid = gaussian_pair_grid();
        let r = probe_condition_iii(&grid, &WeightSpec::Unweighted, &gp(1.0, 1.0, 1.0)).unwrap();
        assert!(r.pass && r.relative_margin < 10.0);
        let zero = grid.scaled(Complex64::new(0.0, 0.0));
        let r = probe_condition_iii(&zero, &WeightSpec::Unweighted, &gp(1.0, 1.0, 1.0)).unwrap();
        assert!(r.pass);
        assert_eq!(r.relative_margin, 0.0);
        let b = probe_beurling(&grid, &WeightSpec::Unweighted, &gp(1.0, 1.5, 1.0), &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(b.beurling && b.roumieu);
        let bz = probe_beurling(&zero, &WeightSpec::Unweighted, &gp(1.0, 1.5, 1.0), &[0.25, 4.0]).unwrap();
        assert!(bz.beurling);
    }

    #[test]
    fn gaussian_pair_fits_fast_gevrey() {
        let dt = 1.0 / 128.0;
        let f = generate(&SignalSpec::new(SignalKind::Gaussian, dt, 2048)).unwrap();
        let g = make_gaussian(dt, 1024, 0.0).unwrap();
        let grid = stft(&f, &g, 64.0 * dt, 1024).unwrap();
        let fit = fit_envelope(&grid, &WeightSpec::Unweighted).unwrap();
        assert_eq!(fit.model, DecayModel::Gevrey);
        assert!(fit.tau_hat <= 0.6, "{fit:?}");
    }

    #[test]
    fn fit_errors() {
        let grid = gaussian_pair_grid();
        let zero = grid.scaled(Complex64::new(0.0, 0.0));
        assert!(matches!(
            fit_envelope(&zero, &WeightSpec::Unweighted),
            Err(Error::DegenerateProfile(_))
        ));
        let coarse = {
            let dt = 0.25;
            let f = generate(&SignalSpec::new(SignalKind::Gaussian, dt, 256)).unwrap();
            let g = make_gaussian(dt, 32, 0.0).unwrap();
            stft(&f, &g, dt, 32).unwrap()
        };
        assert!(matches!(
            fit_envelope(&coarse, &WeightSpec::Unweighted),
            Err(Error::InsufficientRange(_))
        ));
    }

    #[test]
    fn synthetic_profile_recovers_parameters() {
        let p = gp(1.0, 1.5, 1.0);
        let profile: Vec<(f64, f64)> = crate::grid::log_grid(0.3, 2e3, 300)
            .into_iter()
            .map(|xi| (xi, 3.0 * (-assoc_t(&p, xi).unwrap().value).exp()))
            .collect();
        let fit = fit_profile(&profile, 2e3, &FitOptions::default()).unwrap();
        assert_eq!(fit.model, DecayModel::Extended);
        assert!((fit.sigma_hat - 1.5).abs() < 0.051, "{fit:?}");
        assert!((fit.tau_hat - 1.0).abs() < 0.1, "{fit:?}");
    }
}
