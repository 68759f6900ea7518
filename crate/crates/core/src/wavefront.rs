//! Wave front set and singular support estimates from compact-window STFT decay.
//!
//! Each analysis frame `x` and each half-line of frequencies gets a margin
//! `sup_{xi in cone} |V(x, xi)| e^(T_h(|xi|)) / sup_{x, xi} |V|`, minimized
//! (Roumieu) or maximized (Beurling) over a small grid of `h`. A cell is singular
//! when that margin exceeds a threshold calibrated on smooth reference signals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assoc::log_envelope_exponent;
use crate::corpus::{generate, smooth_reference_kinds, SignalSpec};
use crate::error::{Error, Result};
use crate::regularity::{fit_profile, xi_floor, DecayFit, FitOptions, ALIAS_GUARD};
use crate::sequence::GevreyParams;
use crate::spectral::NOISE_FLOOR;
use crate::stft::{stft, SampledSignal};
use crate::window::{make_gevrey_bump, Window, WindowKind};

/// Scale grid standing in for "there exists h" (Roumieu) or "for every h" (Beurling).
pub const H_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
/// Cones with fewer usable bins are rejected.
pub const MIN_CONE_BINS: usize = 16;
/// Cells whose peak is below this fraction of the global peak carry no information.
pub const NEGLIGIBLE_FRACTION: f64 = 1e-6;
/// Default threshold is this multiple of the median smooth-reference margin.
pub const THRESHOLD_FACTOR: f64 = 1e3;
/// Lower bound on the median used for the default threshold.
const MARGIN_FLOOR: f64 = 1e-12;

/// Window class used by the default scan: sharper than the classes being tested.
pub const DEFAULT_WINDOW_PARAMS: GevreyParams = GevreyParams {
    tau: 1.0,
    sigma: 1.1,
    h: 1.0,
};
pub const DEFAULT_WINDOW_RADIUS: f64 = 0.5;
pub const DEFAULT_HOP: f64 = 1.0 / 16.0;
pub const DEFAULT_XI_MIN: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Roumieu,
    Beurling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOptions {
    pub hop: f64,
    /// Both cones are `xi_min <= |xi| <= 0.8 Nyquist`.
    pub xi_min: f64,
    /// `None` calibrates on the smooth reference corpus.
    pub threshold: Option<f64>,
    pub mode: ScanMode,
    /// Fit the decay model per cell (slow; off by default).
    pub fit_cells: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            hop: DEFAULT_HOP,
            xi_min: DEFAULT_XI_MIN,
            threshold: None,
            mode: ScanMode::Roumieu,
            fit_cells: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub x_center: f64,
    pub direction: Direction,
    pub singular: bool,
    /// Mode-reduced margin over the `h` grid; 0 for negligible cells.
    pub envelope_margin: f64,
    pub margins_by_h: Vec<f64>,
    pub negligible: bool,
    pub fit: Option<DecayFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveFrontReport {
    pub params: GevreyParams,
    pub window_id: String,
    pub mode: ScanMode,
    pub threshold: f64,
    pub hop: f64,
    pub xi_min: f64,
    pub h_grid: Vec<f64>,
    /// Ordered by `x_center`, positive direction first within a frame.
    pub cells: Vec<Cell>,
}

impl WaveFrontReport {
    pub fn flagged_x(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.cells.iter().filter(|c| c.singular).map(|c| c.x_center).collect();
        xs.dedup();
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.start <= x && x <= self.end
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// Default compact window for scans at sample spacing `dt`.
pub fn default_window(dt: f64) -> Result<Window> {
    make_gevrey_bump(&DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS, dt, None)
}

fn check_window(phi: &Window) -> Result<f64> {
    match (phi.kind, phi.support_radius) {
        (WindowKind::GevreyBump | WindowKind::BoxConvolution, Some(r)) => Ok(r),
        _ => Err(Error::NonCompactWindow),
    }
}

struct Cone {
    /// Bin indices with `xi_min <= xi <= cap`, per direction.
    positive: Vec<usize>,
    negative: Vec<usize>,
    /// `T_h(|xi_j|)` per h, indexed by bin.
    exponents: Vec<Vec<f64>>,
}

fn build_cone(xi_axis: &[f64], dt: f64, xi_min: f64, params: &GevreyParams) -> Result<Cone> {
    if !(xi_min.is_finite() && xi_min >= xi_floor()) {
        return Err(Error::InvalidParams(format!(
            "xi_min must be at least {} (fit floor), got {xi_min}",
            xi_floor()
        )));
    }
    let cap = ALIAS_GUARD * 0.5 / dt;
    let inside = |a: f64| a >= xi_min && a <= cap;
    let positive: Vec<usize> = (0..xi_axis.len()).filter(|&j| xi_axis[j] > 0.0 && inside(xi_axis[j])).collect();
    let negative: Vec<usize> = (0..xi_axis.len()).filter(|&j| xi_axis[j] < 0.0 && inside(-xi_axis[j])).collect();
    let bins = positive.len().min(negative.len());
    if bins < MIN_CONE_BINS {
        return Err(Error::ConeTooNarrow {
            bins,
            required: MIN_CONE_BINS,
        });
    }
    let exponents = H_GRID
        .iter()
        .map(|&h| {
            let p = params.with_h(h);
            xi_axis
                .iter()
                .map(|xi| if inside(xi.abs()) { log_envelope_exponent(&p, xi.abs()) } else { Ok(0.0) })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(Cone {
        positive,
        negative,
        exponents,
    })
}

/// Scans every frame whose window lies inside the signal, in both cones.
pub fn scan_wavefront(u: &SampledSignal, phi: &Window, params: &GevreyParams, opts: &ScanOptions) -> Result<WaveFrontReport> {
    let threshold = match opts.threshold {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => return Err(Error::InvalidParams(format!("threshold must be finite and >= 0, got {t}"))),
        None => default_threshold(u.dt, u.len(), phi, params, opts)?,
    };
    scan_with_threshold(u, phi, params, opts, threshold)
}

fn scan_with_threshold(
    u: &SampledSignal,
    phi: &Window,
    params: &GevreyParams,
    opts: &ScanOptions,
    threshold: f64,
) -> Result<WaveFrontReport> {
    check_window(phi)?;
    params.validate()?;
    if u.samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("signal"));
    }
    let n_freq = phi.len().next_power_of_two();
    let grid = stft(u, phi, opts.hop, n_freq)?;
    let cone = build_cone(&grid.xi_axis, grid.dt, opts.xi_min, params)?;
    let global = grid.max_abs();
    let floor = NOISE_FLOOR * global;
    let interior: Vec<usize> = (0..grid.n_x())
        .filter(|&i| {
            let s0 = grid.frame_starts[i];
            s0 >= 0 && s0 as usize + phi.len() <= u.len()
        })
        .collect();
    let fit_opts = FitOptions::default();
    let xi_cap = ALIAS_GUARD * 0.5 / grid.dt;

    let cells: Vec<Cell> = interior
        .par_iter()
        .flat_map_iter(|&i| {
            let row = grid.row(i);
            let peak = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let negligible = peak == 0.0 || peak < NEGLIGIBLE_FRACTION * global;
            [(Direction::Positive, &cone.positive), (Direction::Negative, &cone.negative)]
                .into_iter()
                .map(|(direction, bins)| {
                    let margins_by_h: Vec<f64> = if negligible {
                        vec![0.0; H_GRID.len()]
                    } else {
                        cone.exponents
                            .iter()
                            .map(|t| {
                                bins.iter()
                                    .filter_map(|&j| {
                                        let a = row[j].norm();
                                        (a >= floor && a > 0.0).then(|| (a.ln() + t[j] - global.ln()).exp())
                                    })
                                    .fold(0.0, f64::max)
                            })
                            .collect()
                    };
                    let envelope_margin = match opts.mode {
                        ScanMode::Roumieu => margins_by_h.iter().cloned().fold(f64::INFINITY, f64::min),
                        ScanMode::Beurling => margins_by_h.iter().cloned().fold(0.0, f64::max),
                    };
                    let fit = if opts.fit_cells && !negligible {
                        let mut profile: Vec<(f64, f64)> = bins.iter().map(|&j| (grid.xi_axis[j].abs(), row[j].norm())).collect();
                        profile.sort_by(|a, b| a.0.total_cmp(&b.0));
                        fit_profile(&profile, xi_cap, &fit_opts).ok()
                    } else {
                        None
                    };
                    Cell {
                        x_center: grid.x_axis[i],
                        direction,
                        singular: !negligible && envelope_margin > threshold,
                        envelope_margin,
                        margins_by_h,
                        negligible,
                        fit,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(WaveFrontReport {
        params: *params,
        window_id: phi.id(),
        mode: opts.mode,
        threshold,
        hop: grid.hop,
        xi_min: opts.xi_min,
        h_grid: H_GRID.to_vec(),
        cells,
    })
}

/// `THRESHOLD_FACTOR` times the median non-negligible cell margin over the
/// smooth reference corpus, scanned with the same window, hop, cone and mode
/// on a grid with the same `dt`.
pub fn default_threshold(dt: f64, n: usize, phi: &Window, params: &GevreyParams, opts: &ScanOptions) -> Result<f64> {
    let radius = check_window(phi)?;
    let bump_params = phi.params.unwrap_or(DEFAULT_WINDOW_PARAMS);
    let n_ref = n.next_power_of_two().max(256);
    let mut margins: Vec<f64> = Vec::new();
    for kind in smooth_reference_kinds(bump_params, radius) {
        let f = generate(&SignalSpec::new(kind, dt, n_ref))?;
        let report = scan_with_threshold(&f, phi, params, opts, f64::INFINITY)?;
        margins.extend(report.cells.iter().filter(|c| !c.negligible).map(|c| c.envelope_margin));
    }
    if margins.is_empty() {
        return Err(Error::InsufficientRange("no informative cells in the smooth reference corpus".into()));
    }
    margins.sort_by(f64::total_cmp);
    let mid = margins.len() / 2;
    let median = if margins.len() % 2 == 1 {
        margins[mid]
    } else {
        0.5 * (margins[mid - 1] + margins[mid])
    };
    Ok(THRESHOLD_FACTOR * median.max(MARGIN_FLOOR))
}

/// Projection of the singular cells onto `x`, each cell widened to
/// `[x - hop/2, x + hop/2]` and merged into maximal intervals.
pub fn singular_support(report: &WaveFrontReport) -> Vec<Interval> {
    let half = 0.5 * report.hop;
    let mut out: Vec<Interval> = Vec::new();
    for x in report.flagged_x() {
        let (start, end) = (x - half, x + half);
        match out.last_mut() {
            Some(last) if start <= last.end + 1e-9 * report.hop => last.end = end,
            _ => out.push(Interval { start, end }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffReport {
    pub window_ids: Vec<String>,
    pub supports: Vec<Vec<Interval>>,
    /// Frame positions flagged by some but not all windows.
    pub disagreements: Vec<f64>,
    /// Disagreements farther than one window diameter from every interval endpoint.
    pub interior_disagreements: Vec<f64>,
    pub pass: bool,
}

/// Scans with several compact windows and compares the flagged frames. Only
/// frames scanned by every window are compared. Agreement is evidence of
/// cutoff independence, not a proof: only finitely many windows are sampled.
pub fn cutoff_independence_check(
    u: &SampledSignal,
    params: &GevreyParams,
    windows: &[Window],
    opts: &ScanOptions,
) -> Result<CutoffReport> {
    if windows.len() < 2 {
        return Err(Error::InvalidParams("need at least two windows".into()));
    }
    let radii: Vec<f64> = windows.iter().map(check_window).collect::<Result<_>>()?;
    let (rmin, rmax) = radii.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    if rmax > 2.0 * rmin {
        return Err(Error::InvalidParams(format!(
            "window support radii must agree within a factor 2, got {rmin} and {rmax}"
        )));
    }
    let reports: Vec<WaveFrontReport> = windows
        .iter()
        .map(|w| scan_wavefront(u, w, params, opts))
        .collect::<Result<_>>()?;
    let key = |x: f64| (x / u.dt).round() as i64;
    let scanned: Vec<std::collections::BTreeSet<i64>> = reports
        .iter()
        .map(|r| r.cells.iter().map(|c| key(c.x_center)).collect())
        .collect();
    let flagged: Vec<std::collections::BTreeSet<i64>> =
        reports.iter().map(|r| r.flagged_x().into_iter().map(key).collect()).collect();
    let common: std::collections::BTreeSet<i64> = scanned[1..]
        .iter()
        .fold(scanned[0].clone(), |acc, s| acc.intersection(s).cloned().collect());
    let supports: Vec<Vec<Interval>> = reports.iter().map(singular_support).collect();
    let endpoints: Vec<f64> = supports.iter().flatten().flat_map(|iv| [iv.start, iv.end]).collect();
    let diameter = 2.0 * rmax;
    let mut disagreements = Vec::new();
    let mut interior_disagreements = Vec::new();
    for &k in &common {
        let votes = flagged.iter().filter(|f| f.contains(&k)).count();
        if votes == 0 || votes == flagged.len() {
            continue;
        }
        let x = k as f64 * u.dt;
        disagreements.push(x);
        if endpoints.iter().all(|e| (x - e).abs() > diameter) {
            interior_disagreements.push(x);
        }
    }
    Ok(CutoffReport {
        window_ids: reports.iter().map(|r| r.window_id.clone()).collect(),
        supports,
        pass: interior_disagreements.is_empty(),
        disagreements,
        interior_disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SignalKind;

    const DT: f64 = 1.0 / 4096.0;
    const N: usize = 1 << 14;

    fn scan_params() -> GevreyParams {
        GevreyParams::new(1.0, 1.5, 1.0).unwrap()
    }

    fn signal(kind: SignalKind) -> SampledSignal {
        generate(&SignalSpec::new(kind, DT, N)).unwrap()
    }

    fn scan(kind: SignalKind, opts: &ScanOptions) -> WaveFrontReport {
        let phi = default_window(DT).unwrap();
        scan_wavefront(&signal(kind), &phi, &scan_params(), opts).unwrap()
    }

    #[test]
    fn heaviside_flags_the_step_only() {
        let r = scan(SignalKind::Heaviside, &ScanOptions::default());
        let s = singular_support(&r);
        assert_eq!(s.len(), 1, "{s:?}");
        assert!(s[0].contains(0.0));
        assert!(s[0].width() <= 2.0 * DEFAULT_WINDOW_RADIUS + DEFAULT_HOP);
        for c in r.cells.iter().filter(|c| c.x_center.abs() < 0.25) {
            assert!(c.singular, "{c:?}");
        }
    }

    #[test]
    fn smooth_signals_have_no_flags() {
        let opts = ScanOptions::default();
        for kind in smooth_reference_kinds(DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS) {
            let r = scan(kind, &opts);
            let worst = r.cells.iter().map(|c| (c.envelope_margin, c.x_center)).fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            assert!(singular_support(&r).is_empty(), "{kind:?} threshold {} worst {worst:?}", r.threshold);
        }
    }

    #[test]
    fn abs_t_and_two_step() {
        let r = scan(SignalKind::AbsT, &ScanOptions::default());
        let s = singular_support(&r);
        assert_eq!(s.len(), 1);
        assert!(s[0].contains(0.0));
        let r = scan(SignalKind::TwoStep { half_width: 1.0 }, &ScanOptions::default());
        let s = singular_support(&r);
        assert_eq!(s.len(), 2, "{s:?}");
        assert!(s[0].contains(-1.0) && s[1].contains(1.0));
        assert!(s[0].end < s[1].start);
    }

    #[test]
    fn projection_identity_and_threshold_monotonicity() {
        let r = scan(SignalKind::TwoStep { half_width: 0.5 }, &ScanOptions::default());
        let mut projected: Vec<f64> = r.cells.iter().filter(|c| c.singular).map(|c| c.x_center).collect();
        projected.sort_by(f64::total_cmp);
        projected.dedup();
        assert!(!projected.is_empty());
        assert_eq!(r.flagged_x(), projected);
        for x in &projected {
            assert!(singular_support(&r).iter().any(|iv| iv.contains(*x)));
        }
        let mut last = usize::MAX;
        for t in [1e-8, 1e-5, 1e-2, 1.0, 10.0, 1e3] {
            let opts = ScanOptions {
                threshold: Some(t),
                ..ScanOptions::default()
            };
            let n = scan(SignalKind::TwoStep { half_width: 0.5 }, &opts)
                .cells
                .iter()
                .filter(|c| c.singular)
                .count();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn translation_moves_flags_exactly() {
        let phi = default_window(DT).unwrap();
        let u = signal(SignalKind::Heaviside);
        let opts = ScanOptions {
            threshold: Some(1e-3),
            ..ScanOptions::default()
        };
        let a = scan_wavefront(&u, &phi, &scan_params(), &opts).unwrap();
        let shift = 256i64;
        let b = scan_wavefront(&u.translated(shift), &phi, &scan_params(), &opts).unwrap();
        let fa = a.flagged_x();
        let fb = b.flagged_x();
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert!((y - x - shift as f64 * DT).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_independence_on_heaviside_and_gaussian() {
        let w20 = make_gevrey_bump(&DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS, DT, Some(20)).unwrap();
        let w28 = make_gevrey_bump(&DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS, DT, Some(28)).unwrap();
        let opts = ScanOptions::default();
        let r = cutoff_independence_check(&signal(SignalKind::Heaviside), &scan_params(), &[w20.clone(), w28.clone()], &opts)
            .unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.supports[0].len(), 1);
        let r = cutoff_independence_check(&signal(SignalKind::Gaussian), &scan_params(), &[w20, w28], &opts).unwrap();
        assert!(r.pass && r.supports.iter().all(|s| s.is_empty()));
    }

    #[test]
    fn rejects_bad_windows_and_cones() {
        let coarse = generate(&SignalSpec::new(SignalKind::Gaussian, 1.0 / 64.0, 1024)).unwrap();
        let g = crate::window::make_gaussian(1.0 / 64.0, 512, 0.0).unwrap();
        assert_eq!(
            scan_wavefront(&coarse, &g, &scan_params(), &ScanOptions::default()),
            Err(Error::NonCompactWindow)
        );
        let u = signal(SignalKind::Gaussian);
        let phi = default_window(DT).unwrap();
        let narrow = ScanOptions {
            xi_min: 1634.0,
            threshold: Some(1.0),
            ..ScanOptions::default()
        };
        assert!(matches!(
            scan_wavefront(&u, &phi, &scan_params(), &narrow),
            Err(Error::ConeTooNarrow { .. })
        ));
    }

    #[test]
    fn cell_fits_are_attached_on_request() {
        let phi = default_window(DT).unwrap();
        let u = signal(SignalKind::Gaussian);
        let opts = ScanOptions {
            threshold: Some(1.0),
            fit_cells: true,
            hop: 0.5,
            ..ScanOptions::default()
        };
        let r = scan_wavefront(&u, &phi, &scan_params(), &opts).unwrap();
        assert!(r.cells.iter().filter(|c| !c.negligible).all(|c| c.fit.is_some()));
    }
}
