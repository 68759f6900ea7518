//! Discrete short-time Fourier transform
//!
//! ```text
//! V_g f(x_i, xi_j) = dt sum_s f(t_s) conj(g(t_s - x_i)) e^(-2 pi i t_s xi_j)
//! ```
//!
//! with the phase referenced to absolute time. Frames are centred on signal
//! samples `0, H, 2H, ...` (`H = hop / dt`); the signal is zero outside its grid.
//! Frequencies are the `N = n_freq` FFT bins `xi_j = (j - N/2) / (N dt)`, stored
//! in ascending order.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weight::WeightSpec;
use crate::window::{check_same_dt, Window};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    /// Time of the first sample.
    pub t0: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, dt: f64, t0: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParams(format!("signal needs >= 2 samples, got {}", samples.len())));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be > 0, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::NonFinite("signal t0"));
        }
        if samples.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("signal samples"));
        }
        Ok(SampledSignal { samples, dt, t0 })
    }

    pub fn from_real(values: &[f64], dt: f64, t0: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), dt, t0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, s: usize) -> f64 {
        self.t0 + s as f64 * self.dt
    }

    /// `sqrt(dt sum |f|^2)`
    pub fn l2_norm(&self) -> f64 {
        (self.dt * self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `T_u f` for `u = shift * dt`: identical samples on a grid moved by `u`.
    pub fn translated(&self, shift: i64) -> SampledSignal {
        SampledSignal {
            samples: self.samples.clone(),
            dt: self.dt,
            t0: self.t0 + shift as f64 * self.dt,
        }
    }

    pub fn scaled(&self, c: Complex64) -> SampledSignal {
        SampledSignal {
            samples: self.samples.iter().map(|v| v * c).collect(),
            dt: self.dt,
            t0: self.t0,
        }
    }
}

/// `e^(-2 pi i t xi)` for grid times `t = t0 + s dt` and bins `xi = jj / (N dt)`.
///
/// When `t0` is a whole number of samples the argument `t xi` is the rational
/// `(k0 + s) jj / N` and is reduced exactly in integer arithmetic.
#[derive(Debug, Clone, Copy)]
struct PhaseRef {
    t0: f64,
    dt: f64,
    k0: Option<i64>,
}

impl PhaseRef {
    fn new(t0: f64, dt: f64) -> Self {
        let r = t0 / dt;
        let k = r.round();
        let k0 = ((r - k).abs() <= 1e-9 * r.abs().max(1.0) && k.abs() < 1e15).then_some(k as i64);
        PhaseRef { t0, dt, k0 }
    }

    fn factor(&self, s: i64, jj: i64, n: usize) -> Complex64 {
        let n_i = n as i128;
        let turns = match self.k0 {
            Some(k0) => ((k0 as i128 + s as i128) * jj as i128).rem_euclid(n_i) as f64 / n as f64,
            None => {
                let a = (self.t0 * jj as f64 / (n as f64 * self.dt)).rem_euclid(1.0);
                let b = ((s as i128 * jj as i128).rem_euclid(n_i)) as f64 / n as f64;
                (a + b).rem_euclid(1.0)
            }
        };
        Complex64::from_polar(1.0, -2.0 * PI * turns)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StftGrid {
    /// Row-major `[x_index][xi_index]`.
    #[serde(skip)]
    pub values: Vec<Complex64>,
    pub x_axis: Vec<f64>,
    pub xi_axis: Vec<f64>,
    pub window_id: String,
    pub dt: f64,
    pub hop: f64,
    pub hop_samples: usize,
    /// Signal index under window sample 0, per frame.
    pub frame_starts: Vec<i64>,
    pub signal_len: usize,
    pub signal_t0: f64,
}

impl StftGrid {
    pub fn n_x(&self) -> usize {
        self.x_axis.len()
    }

    pub fn n_xi(&self) -> usize {
        self.xi_axis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n_xi() + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.n_xi();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn d_xi(&self) -> f64 {
        1.0 / (self.n_xi() as f64 * self.dt)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same axes with every value multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> StftGrid {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= c);
        g
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("STFT grid"));
        }
        Ok(())
    }
}

/// Validated frame layout and FFT plan shared by the direct path and streaming consumers.
pub struct StftPlan<'a> {
    signal: &'a SampledSignal,
    window: &'a Window,
    n_freq: usize,
    hop_samples: usize,
    frame_starts: Vec<i64>,
    phase: PhaseRef,
    fft: Arc<dyn Fft<f64>>,
}

fn hop_in_samples(hop: f64, dt: f64) -> Result<usize> {
    if !(hop.is_finite() && hop >= dt * (1.0 - 1e-9)) {
        return Err(Error::StftConfig(format!("hop {hop} must be >= dt {dt}")));
    }
    let h = hop / dt;
    let k = h.round();
    if (h - k).abs() > 1e-6 * k {
        return Err(Error::StftConfig(format!("hop {hop} is not a whole number of samples (dt {dt})")));
    }
    Ok(k as usize)
}

impl<'a> StftPlan<'a> {
    pub fn new(signal: &'a SampledSignal, window: &'a Window, hop: f64, n_freq: usize) -> Result<Self> {
        check_same_dt(signal.dt, window.dt)?;
        if window.len() > signal.len() {
            return Err(Error::WindowTooLong {
                window_len: window.len(),
                signal_len: signal.len(),
            });
        }
        if !n_freq.is_power_of_two() || n_freq < window.len() {
            return Err(Error::StftConfig(format!(
                "n_freq {n_freq} must be a power of two >= window length {}",
                window.len()
            )));
        }
        let hop_samples = hop_in_samples(hop, signal.dt)?;
        let m = window.center_index as i64;
        let frame_starts = (0..signal.len()).step_by(hop_samples).map(|c| c as i64 - m).collect();
        Ok(StftPlan {
            signal,
            window,
            n_freq,
            hop_samples,
            frame_starts,
            phase: PhaseRef::new(signal.t0, signal.dt),
            fft: FftPlanner::new().plan_fft_forward(n_freq),
        })
    }

    pub fn n_frames(&self) -> usize {
        self.frame_starts.len()
    }

    /// Window position `x_i` of frame `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.signal.t0 + self.frame_starts[i] as f64 * self.signal.dt - self.window.t0
    }

    pub fn xi_axis(&self) -> Vec<f64> {
        let n = self.n_freq as i64;
        (0..n).map(|j| (j - n / 2) as f64 / (n as f64 * self.signal.dt)).collect()
    }

    pub fn frame_start(&self, i: usize) -> i64 {
        self.frame_starts[i]
    }

    /// One row `V(x_i, .)` in ascending frequency order.
    pub fn frame(&self, i: usize) -> Vec<Complex64> {
        let n = self.n_freq;
        let s0 = self.frame_starts[i];
        let mut buf = vec![ZERO; n];
        for (l, g) in self.window.samples.iter().enumerate() {
            let s = s0 + l as i64;
            if s >= 0 && (s as usize) < self.signal.len() {
                buf[l] = self.signal.samples[s as usize] * g.conj();
            }
        }
        self.fft.process(&mut buf);
        let dt = self.signal.dt;
        (0..n)
            .map(|j| {
                let jj = j as i64 - (n / 2) as i64;
                buf[jj.rem_euclid(n as i64) as usize] * self.phase.factor(s0, jj, n) * dt
            })
            .collect()
    }

    fn empty_grid(&self, hop: f64) -> StftGrid {
        StftGrid {
            values: Vec::new(),
            x_axis: (0..self.n_frames()).map(|i| self.x(i)).collect(),
            xi_axis: self.xi_axis(),
            window_id: self.window.id(),
            dt: self.signal.dt,
            hop,
            hop_samples: self.hop_samples,
            frame_starts: self.frame_starts.clone(),
            signal_len: self.signal.len(),
            signal_t0: self.signal.t0,
        }
    }
}

/// Direct path: one windowed FFT per frame, frames evaluated in parallel.
pub fn stft(f: &SampledSignal, g: &Window, hop: f64, n_freq: usize) -> Result<StftGrid> {
    let plan = StftPlan::new(f, g, hop, n_freq)?;
    stft_plan(&plan, f.dt)
}

fn stft_plan(plan: &StftPlan, dt: f64) -> Result<StftGrid> {
    let rows: Vec<Vec<Complex64>> = (0..plan.n_frames()).into_par_iter().map(|i| plan.frame(i)).collect();
    let mut grid = plan.empty_grid(plan.hop_samples as f64 * dt);
    grid.values = rows.into_iter().flatten().collect();
    grid.check_finite()?;
    Ok(grid)
}

/// Direct path restricted to frames with `x_min <= x <= x_max`, on the same hop lattice as [`stft`].
pub fn stft_region(f: &SampledSignal, g: &Window, hop: f64, n_freq: usize, x_min: f64, x_max: f64) -> Result<StftGrid> {
    let mut plan = StftPlan::new(f, g, hop, n_freq)?;
    let keep: Vec<i64> = (0..plan.n_frames())
        .filter(|&i| {
            let x = plan.x(i);
            x >= x_min && x <= x_max
        })
        .map(|i| plan.frame_starts[i])
        .collect();
    if keep.is_empty() {
        return Err(Error::StftConfig(format!("no frames with x in [{x_min}, {x_max}]")));
    }
    plan.frame_starts = keep;
    stft_plan(&plan, f.dt)
}

/// Factorized path: form `F(x, t) = f(t) conj(g(t - x))` over the whole signal
/// for each `x` (tensor product followed by the shear `(x, t) -> (t, t - x)`),
/// then take a full-length Fourier transform in `t` and read off the bins.
pub fn stft_via_factorization(f: &SampledSignal, g: &Window, hop: f64, n_freq: usize) -> Result<StftGrid> {
    let plan = StftPlan::new(f, g, hop, n_freq)?;
    let n = f.len();
    let n_pad = n.max(n_freq).div_ceil(n_freq) * n_freq;
    let stride = (n_pad / n_freq) as i64;
    let fft = FftPlanner::new().plan_fft_forward(n_pad);
    let phase = PhaseRef::new(f.t0, f.dt);
    let rows: Vec<Vec<Complex64>> = (0..plan.n_frames())
        .into_par_iter()
        .map(|i| {
            let s0 = plan.frame_start(i);
            let mut row = vec![ZERO; n_pad];
            for (s, v) in f.samples.iter().enumerate() {
                let l = s as i64 - s0;
                if l >= 0 && (l as usize) < g.len() {
                    row[s] = v * g.samples[l as usize].conj();
                }
            }
            fft.process(&mut row);
            (0..n_freq)
                .map(|j| {
                    let jj = j as i64 - (n_freq / 2) as i64;
                    let k = (jj * stride).rem_euclid(n_pad as i64) as usize;
                    row[k] * phase.factor(0, jj, n_freq) * f.dt
                })
                .collect()
        })
        .collect();
    let mut grid = plan.empty_grid(plan.hop_samples as f64 * f.dt);
    grid.values = rows.into_iter().flatten().collect();
    grid.check_finite()?;
    Ok(grid)
}

/// `sum_{i,j} hop dxi F(x_i, xi_j) e^(2 pi i t xi_j) g(t - x_i)` at every signal sample.
pub fn adjoint(grid: &StftGrid, g: &Window) -> Result<Vec<Complex64>> {
    check_same_dt(grid.dt, g.dt)?;
    grid.check_finite()?;
    let n = grid.n_xi();
    let phase = PhaseRef::new(grid.signal_t0, grid.dt);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let d_xi = grid.d_xi();
    let contributions: Vec<(i64, Vec<Complex64>)> = (0..grid.n_x())
        .into_par_iter()
        .map(|i| -> Result<(i64, Vec<Complex64>)> {
            let s0 = grid.frame_starts[i];
            let mut buf = vec![ZERO; n];
            for (j, v) in grid.row(i).iter().enumerate() {
                let jj = j as i64 - (n / 2) as i64;
                buf[jj.rem_euclid(n as i64) as usize] = v * phase.factor(s0, jj, n).conj();
            }
            ifft.process(&mut buf);
            let g_start = aligned_index(grid.x_axis[i] + g.t0 - grid.signal_t0, grid.dt)?;
            let out = g
                .samples
                .iter()
                .enumerate()
                .map(|(l, gl)| {
                    let s = g_start + l as i64;
                    buf[(s - s0).rem_euclid(n as i64) as usize] * d_xi * gl * grid.hop
                })
                .collect();
            Ok((g_start, out))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![ZERO; grid.signal_len];
    for (start, vals) in contributions {
        for (l, v) in vals.into_iter().enumerate() {
            let s = start + l as i64;
            if s >= 0 && (s as usize) < acc.len() {
                acc[s as usize] += v;
            }
        }
    }
    Ok(acc)
}

fn aligned_index(offset: f64, dt: f64) -> Result<i64> {
    let r = offset / dt;
    let k = r.round();
    if (r - k).abs() > 1e-6 {
        return Err(Error::StftConfig("window is not aligned with the signal grid".into()));
    }
    Ok(k as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub signal: SampledSignal,
    /// `<g, psi>` used for normalization.
    pub pairing: Complex64,
    /// Largest deviation from 1 of the normalized frame sum `hop sum_i g conj(psi) (t - x_i) / <g, psi>`
    /// over samples covered by every window position.
    pub frame_ripple: f64,
    pub warning: Option<String>,
}

/// Frame-sum ripple above which a reconstruction is reported as unreliable.
pub const RIPPLE_TOLERANCE: f64 = 1e-6;

/// Inverts a grid computed with window `psi` using synthesis window `g`:
/// `f = <g, psi>^(-1) V*_g V_psi f`.
pub fn istft(grid: &StftGrid, g: &Window, psi: &Window) -> Result<Reconstruction> {
    check_same_dt(g.dt, psi.dt)?;
    let pairing = g.inner(psi)?;
    let bound = 1e-8 * g.l2_norm() * psi.l2_norm();
    if pairing.norm() <= bound {
        return Err(Error::OrthogonalWindows {
            inner: pairing.norm(),
            bound,
        });
    }
    let raw = adjoint(grid, g)?;
    let samples: Vec<Complex64> = raw.iter().map(|v| v / pairing).collect();

    // frame sum of g conj(psi), positions of psi taken from the grid
    let n = grid.signal_len;
    let mut sum = vec![ZERO; n];
    for i in 0..grid.n_x() {
        let g_start = aligned_index(grid.x_axis[i] + g.t0 - grid.signal_t0, grid.dt)?;
        let p_start = grid.frame_starts[i];
        for (l, gl) in g.samples.iter().enumerate() {
            let s = g_start + l as i64;
            let lp = s - p_start;
            if s >= 0 && (s as usize) < n && lp >= 0 && (lp as usize) < psi.len() {
                sum[s as usize] += gl * psi.samples[lp as usize].conj() * grid.hop;
            }
        }
    }
    let reach = g.len().max(psi.len());
    let interior: Vec<usize> = (reach..n.saturating_sub(reach)).collect();
    let range: Box<dyn Iterator<Item = usize>> = if interior.is_empty() {
        Box::new(0..n)
    } else {
        Box::new(interior.into_iter())
    };
    let frame_ripple = range.map(|s| (sum[s] / pairing - 1.0).norm()).fold(0.0, f64::max);
    let warning = (frame_ripple > RIPPLE_TOLERANCE)
        .then(|| format!("frame sum ripple {frame_ripple:e} exceeds {RIPPLE_TOLERANCE:e}; reconstruction is approximate"));
    Ok(Reconstruction {
        signal: SampledSignal::new(samples, grid.dt, grid.signal_t0)?,
        pairing,
        frame_ripple,
        warning,
    })
}

/// Exponent in `[1, inf]`.
fn check_exponent(p: f64, name: &str) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParams(format!("{name} must lie in [1, inf], got {p}")));
    }
    Ok(())
}

/// `(sum_j (sum_i |V m|^p hop)^(q/p) dxi)^(1/q)`, with `inf` replaced by a max.
pub fn modulation_norm(grid: &StftGrid, p: f64, q: f64, m: &WeightSpec) -> Result<f64> {
    check_exponent(p, "p")?;
    check_exponent(q, "q")?;
    grid.check_finite()?;
    m.validate()?;
    let (nx, nxi) = (grid.n_x(), grid.n_xi());
    let weighted: Vec<f64> = (0..nx * nxi)
        .map(|k| grid.values[k].norm() * m.eval(grid.x_axis[k / nxi], grid.xi_axis[k % nxi]))
        .collect();
    let scale = weighted.iter().cloned().fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let inner: Vec<f64> = (0..nxi)
        .map(|j| {
            let col = (0..nx).map(|i| weighted[i * nxi + j] / scale);
            if p.is_infinite() {
                col.fold(0.0, f64::max)
            } else {
                (col.map(|v| v.powf(p)).sum::<f64>() * grid.hop).powf(1.0 / p)
            }
        })
        .collect();
    let outer = if q.is_infinite() {
        inner.iter().cloned().fold(0.0, f64::max)
    } else {
        (inner.iter().map(|v| v.powf(q)).sum::<f64>() * grid.d_xi()).powf(1.0 / q)
    };
    Ok(scale * outer)
}

/// Largest singular value of `F -> V*_g F` restricted to the grid layout,
/// by power iteration on `V_g V*_g` started from `grid`.
pub fn adjoint_operator_norm(grid: &StftGrid, g: &Window, iterations: usize) -> Result<f64> {
    let mut current = grid.clone();
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let norm = discrete_l2(&current);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let back = adjoint(&current, g)?;
        let f = SampledSignal::new(back, grid.dt, grid.signal_t0)?;
        estimate = f.l2_norm() / norm;
        let mut next = stft(&f, g, grid.hop, grid.n_xi())?;
        let s = discrete_l2(&next);
        if s == 0.0 {
            return Ok(estimate);
        }
        next.values.iter_mut().for_each(|v| *v /= s);
        current = next;
    }
    Ok(estimate)
}

fn discrete_l2(grid: &StftGrid) -> f64 {
    (grid.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.hop * grid.d_xi()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{make_gaussian, make_gevrey_bump};
    use crate::GevreyParams;

    fn gaussian_signal(dt: f64, n: usize) -> SampledSignal {
        let t0 = -(n as f64 / 2.0) * dt;
        let v: Vec<f64> = (0..n)
            .map(|s| {
                let t = t0 + s as f64 * dt;
                2f64.powf(0.25) * (-PI * t * t).exp()
            })
            .collect();
        SampledSignal::from_real(&v, dt, t0).unwrap()
    }

    /// Direct quadruple-free evaluation of one grid value.
    fn brute(f: &SampledSignal, g: &Window, x: f64, xi: f64) -> Complex64 {
        let mut acc = ZERO;
        for (s, v) in f.samples.iter().enumerate() {
            let t = f.time(s);
            let l = ((t - x - g.t0) / f.dt).round();
            if l >= 0.0 && (l as usize) < g.len() {
                acc += v * g.samples[l as usize].conj() * Complex64::from_polar(1.0, -2.0 * PI * t * xi);
            }
        }
        acc * f.dt
    }

    #[test]
    fn gaussian_pair_closed_form() {
        let dt = 1.0 / 64.0;
        let f = gaussian_signal(dt, 1024);
        let g = make_gaussian(dt, 512, 0.0).unwrap();
        let grid = stft(&f, &g, 4.0 * dt, 512).unwrap();
        for i in 0..grid.n_x() {
            let x = grid.x_axis[i];
            if x.abs() > 3.0 {
                continue;
            }
            for (j, &xi) in grid.xi_axis.iter().enumerate() {
                if xi.abs() > 3.0 {
                    continue;
                }
                let expect = (-PI * (x * x + xi * xi) / 2.0).exp();
                assert!((grid.get(i, j).norm() - expect).abs() < 1e-6, "x={x} xi={xi}");
            }
        }
    }

    #[test]
    fn matches_brute_force_sum() {
        let dt = 0.05;
        let v: Vec<Complex64> = (0..256).map(|s| Complex64::new((s as f64 * 0.3).sin(), (s as f64).cos())).collect();
        let f = SampledSignal::new(v, dt, 0.37).unwrap();
        let g = make_gaussian(dt, 100, 0.0).unwrap();
        let grid = stft(&f, &g, 3.0 * dt, 128).unwrap();
        for i in [0, 5, 40, grid.n_x() - 1] {
            for j in [0, 7, 64, 127] {
                let b = brute(&f, &g, grid.x_axis[i], grid.xi_axis[j]);
                assert!((grid.get(i, j) - b).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn zero_signal_gives_zero_grid() {
        let f = SampledSignal::new(vec![ZERO; 256], 0.05, 0.0).unwrap();
        let g = make_gaussian(0.05, 128, 0.0).unwrap();
        assert!(stft(&f, &g, 0.05, 128).unwrap().values.iter().all(|c| *c == ZERO));
        assert!(stft_via_factorization(&f, &g, 0.05, 128).unwrap().values.iter().all(|c| *c == ZERO));
    }

    #[test]
    fn single_sample_signal() {
        let dt = 0.05;
        let mut v = vec![ZERO; 256];
        v[70] = Complex64::new(2.0, -1.0);
        let f = SampledSignal::new(v, dt, -3.2).unwrap();
        let g = make_gaussian(dt, 128, 0.0).unwrap();
        for grid in [stft(&f, &g, dt, 128).unwrap(), stft_via_factorization(&f, &g, dt, 128).unwrap()] {
            let t = f.time(70);
            for i in (0..grid.n_x()).step_by(9) {
                for j in (0..128).step_by(5) {
                    let (x, xi) = (grid.x_axis[i], grid.xi_axis[j]);
                    let l = ((t - x - g.t0) / dt).round();
                    let gv = if l >= 0.0 && (l as usize) < g.len() { g.samples[l as usize] } else { ZERO };
                    let expect = Complex64::new(2.0, -1.0) * gv.conj() * Complex64::from_polar(dt, -2.0 * PI * t * xi);
                    assert!((grid.get(i, j) - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn factorization_agrees_with_direct_path() {
        let dt = 1.0 / 32.0;
        let v: Vec<f64> = (0..300).map(|s| ((s as f64) * 0.11).sin() + if s > 150 { 1.0 } else { 0.0 }).collect();
        let f = SampledSignal::from_real(&v, dt, 1.23).unwrap();
        let g = make_gevrey_bump(&GevreyParams::new(1.0, 1.5, 1.0).unwrap(), 1.0, dt, None).unwrap();
        let a = stft(&f, &g, 5.0 * dt, 128).unwrap();
        let b = stft_via_factorization(&f, &g, 5.0 * dt, 128).unwrap();
        let max = a.max_abs();
        let dev = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10 * max, "{dev}");
        assert_eq!(a.x_axis, b.x_axis);
    }

    #[test]
    fn translation_moves_magnitudes() {
        let dt = 1.0 / 32.0;
        let f = gaussian_signal(dt, 512);
        let g = make_gaussian(dt, 160, 0.0).unwrap();
        let a = stft(&f, &g, 4.0 * dt, 256).unwrap();
        let b = stft(&f.translated(24), &g, 4.0 * dt, 256).unwrap();
        for i in 0..a.n_x() {
            assert!((b.x_axis[i] - a.x_axis[i] - 24.0 * dt).abs() < 1e-12);
            for j in 0..a.n_xi() {
                assert!((a.get(i, j).norm() - b.get(i, j).norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_at_unit_hop() {
        let dt = 1.0 / 16.0;
        let f = gaussian_signal(dt, 512);
        let g = make_gaussian(dt, 128, 0.0).unwrap();
        let grid = stft(&f, &g, dt, 128).unwrap();
        let r = istft(&grid, &g, &g).unwrap();
        let err: f64 = r.signal.samples.iter().zip(&f.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        let rel = (err * dt).sqrt() / f.l2_norm();
        assert!(rel < 1e-8, "{rel}");
        assert!(r.frame_ripple < 1e-12);
        assert!(r.warning.is_none());
        assert!((r.pairing.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_hop_reports_ripple() {
        let dt = 1.0 / 16.0;
        let f = gaussian_signal(dt, 512);
        let g = make_gaussian(dt, 128, 0.0).unwrap();
        let grid = stft(&f, &g, 24.0 * dt, 128).unwrap();
        let r = istft(&grid, &g, &g).unwrap();
        assert!(r.frame_ripple > RIPPLE_TOLERANCE);
        assert!(r.warning.is_some());
    }

    #[test]
    fn zero_grid_inverts_to_zero() {
        let dt = 1.0 / 16.0;
        let f = SampledSignal::new(vec![ZERO; 256], dt, 0.0).unwrap();
        let g = make_gaussian(dt, 128, 0.0).unwrap();
        let grid = stft(&f, &g, dt, 128).unwrap();
        assert!(istft(&grid, &g, &g).unwrap().signal.samples.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn orthogonal_windows_rejected() {
        let dt = 1.0 / 16.0;
        let f = gaussian_signal(dt, 256);
        let g = make_gaussian(dt, 129, 0.0).unwrap();
        let mut odd = g.clone();
        let m = odd.center_index;
        for l in 0..odd.len() {
            odd.samples[l] *= (l as i64 - m as i64).signum() as f64;
        }
        let grid = stft(&f, &g, dt, 256).unwrap();
        let r = istft(&grid, &g, &odd);
        assert!(matches!(r, Err(Error::OrthogonalWindows { .. })), "{:?}", r.map(|r| r.pairing));
    }

    #[test]
    fn configuration_errors() {
        let dt = 0.1;
        let f = SampledSignal::from_real(&[0.0; 32], dt, 0.0).unwrap();
        let g = make_gaussian(dt, 64, 0.0).unwrap();
        assert!(matches!(stft(&f, &g, dt, 64), Err(Error::WindowTooLong { .. })));
        let f = SampledSignal::from_real(&[0.0; 128], dt, 0.0).unwrap();
        assert!(matches!(stft(&f, &g, dt, 48), Err(Error::StftConfig(_))));
        assert!(matches!(stft(&f, &g, 0.15, 64), Err(Error::StftConfig(_))));
        assert!(matches!(stft(&f, &g, 0.05, 64), Err(Error::StftConfig(_))));
        let h = make_gaussian(0.05, 128, 0.0).unwrap();
        assert!(matches!(stft(&f, &h, dt, 64), Err(Error::DtMismatch { .. })));
        assert!(SampledSignal::from_real(&[1.0], dt, 0.0).is_err());
        assert!(SampledSignal::from_real(&[1.0, f64::NAN], dt, 0.0).is_err());
    }

    #[test]
    fn gaussian_norm_and_scaling() {
        let dt = 1.0 / 32.0;
        let f = gaussian_signal(dt, 512);
        let g = make_gaussian(dt, 256, 0.0).unwrap();
        let grid = stft(&f, &g, dt, 256).unwrap();
        let n2 = modulation_norm(&grid, 2.0, 2.0, &WeightSpec::Unweighted).unwrap();
        assert!((n2 - 1.0).abs() < 0.02, "{n2}");
        let half = grid.scaled(Complex64::new(-0.5, 0.0));
        for (p, q) in [(1.0, 1.0), (2.0, f64::INFINITY), (f64::INFINITY, 1.0)] {
            let a = modulation_norm(&grid, p, q, &WeightSpec::Unweighted).unwrap();
            let b = modulation_norm(&half, p, q, &WeightSpec::Unweighted).unwrap();
            assert_eq!(b, 0.5 * a);
        }
        let zero = grid.scaled(ZERO);
        assert_eq!(modulation_norm(&zero, 2.0, 2.0, &WeightSpec::Unweighted).unwrap(), 0.0);
        assert!(modulation_norm(&grid, 0.5, 2.0, &WeightSpec::Unweighted).is_err());
    }

    #[test]
    fn adjoint_norm_is_finite() {
        let dt = 1.0 / 16.0;
        let f = gaussian_signal(dt, 256);
        let g = make_gaussian(dt, 128, 0.0).unwrap();
        let grid = stft(&f, &g, 2.0 * dt, 128).unwrap();
        let n = adjoint_operator_norm(&grid, &g, 8).unwrap();
        assert!(n.is_finite() && n > 0.0);
    }
}
