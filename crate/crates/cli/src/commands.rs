use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use gevrey_tf::assoc::{assoc_bracket, assoc_t};
use gevrey_tf::grid::{lin_grid, log_grid};
use gevrey_tf::io::{fmt_f64, stft_csv, table_csv};
use gevrey_tf::regularity::{classify_window, ClassifyOptions, ClassifyWindow, FitOptions};
use gevrey_tf::stft::{istft, modulation_norm, stft as run_stft};
use gevrey_tf::wavefront::{self, scan_wavefront, singular_support, Direction, ScanMode, ScanOptions};
use gevrey_tf::window::{estimate_derivative_norms, make_gaussian, make_gevrey_bump, Window};
use gevrey_tf::{verify as suites, GevreyParams, SampledSignal, WeightSpec};

use crate::config::{require, resolve, SignalSource};
use crate::error::CliError;
use crate::output::Outputs;

pub struct Context<'a> {
    pub config: Option<&'a Map<String, Value>>,
    pub strict: bool,
}

fn pretty(v: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::internal(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKindArg {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Roumieu,
    Beurling,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssocArgs {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Scale parameter (default 1).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Log-spaced k grid instead of linear.
    #[arg(long)]
    #[serde(default)]
    pub log_grid: bool,
    /// CSV output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn assoc(flags: &AssocArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let params = GevreyParams::new(require(a.tau, "tau")?, require(a.sigma, "sigma")?, a.h.unwrap_or(1.0))?;
    let (k_min, k_max) = (a.k_min.unwrap_or(std::f64::consts::E), a.k_max.unwrap_or(1e8));
    let points = a.points.unwrap_or(200);
    if !(k_min > 0.0 && k_max >= k_min && points >= 2) {
        return Err(CliError::config("need 0 < k-min <= k-max and points >= 2"));
    }
    let ks = if a.log_grid { log_grid(k_min, k_max, points) } else { lin_grid(k_min, k_max, points) };
    let mut csv = String::from("k,T,argmax_p,lower_exponent,upper_exponent\n");
    for k in ks {
        let e = assoc_t(&params, k)?;
        let (lo, hi) = match assoc_bracket(&params, k) {
            Ok(b) => (fmt_f64(b.lower_exponent), fmt_f64(b.upper_exponent)),
            Err(_) => (String::new(), String::new()),
        };
        csv.push_str(&format!("{},{},{},{lo},{hi}\n", fmt_f64(k), fmt_f64(e.value), e.argmax_p));
    }
    let mut out = Outputs::default();
    out.push(a.out, csv);
    Ok(out)
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowArgs {
    #[arg(long, value_enum)]
    pub kind: Option<WindowKindArg>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Bump support radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Gaussian window length in samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// Index of the last box factor of a bump.
    #[arg(long)]
    pub factors: Option<usize>,
    /// Highest derivative order in the report.
    #[arg(long)]
    pub alpha_max: Option<u32>,
    /// CSV of samples `t,re,im` (default: stdout when no report is requested).
    #[arg(long)]
    pub emit: Option<PathBuf>,
    /// JSON report with window info and derivative norms.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn window(flags: &WindowArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let dt = require(a.dt, "dt")?;
    let params = GevreyParams::new(
        a.tau.unwrap_or(wavefront::DEFAULT_WINDOW_PARAMS.tau),
        a.sigma.unwrap_or(wavefront::DEFAULT_WINDOW_PARAMS.sigma),
        a.h.unwrap_or(1.0),
    )?;
    let w = match a.kind.unwrap_or(WindowKindArg::Bump) {
        WindowKindArg::Bump => make_gevrey_bump(&params, a.radius.unwrap_or(wavefront::DEFAULT_WINDOW_RADIUS), dt, a.factors)?,
        WindowKindArg::Gaussian => match a.n {
            Some(n) => make_gaussian(dt, n, 0.0)?,
            None => classify_window(ClassifyWindow::Gaussian, dt)?,
        },
    };
    let mut out = Outputs::default();
    if let Some(path) = a.report {
        let norms = estimate_derivative_norms(&w, a.alpha_max.unwrap_or(6), &WeightSpec::Unweighted, &params)?;
        if ctx.strict {
            if let Some(msg) = &norms.warning {
                return Err(CliError::numerical(msg.clone()));
            }
        }
        out.push(Some(path), pretty(&json!({ "window": w.info(), "derivative_norms": norms }))?);
        if let Some(p) = a.emit {
            out.push(Some(p), window_csv(&w));
        }
    } else {
        out.push(a.emit, window_csv(&w));
    }
    Ok(out)
}

fn window_csv(w: &Window) -> String {
    table_csv(
        &["t", "re", "im"],
        w.samples.iter().enumerate().map(|(l, z)| vec![w.time(l), z.re, z.im]),
    )
}

fn analysis_window(
    kind: Option<WindowKindArg>,
    dt: f64,
    n: Option<usize>,
    radius: Option<f64>,
    tau: Option<f64>,
    sigma: Option<f64>,
) -> Result<Window, CliError> {
    Ok(match kind.unwrap_or(WindowKindArg::Gaussian) {
        WindowKindArg::Gaussian => match n {
            Some(n) => make_gaussian(dt, n, 0.0)?,
            None => classify_window(ClassifyWindow::Gaussian, dt)?,
        },
        WindowKindArg::Bump => {
            let p = GevreyParams::new(
                tau.unwrap_or(wavefront::DEFAULT_WINDOW_PARAMS.tau),
                sigma.unwrap_or(wavefront::DEFAULT_WINDOW_PARAMS.sigma),
                1.0,
            )?;
            make_gevrey_bump(&p, radius.unwrap_or(wavefront::DEFAULT_WINDOW_RADIUS), dt, None)?
        }
    })
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftArgs {
    /// CSV path (`t,re[,im]`) or inline JSON spec.
    #[arg(long)]
    pub signal: Option<SignalSource>,
    #[arg(long, value_enum)]
    pub window_kind: Option<WindowKindArg>,
    /// Gaussian window length in samples.
    #[arg(long)]
    pub window_n: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub window_tau: Option<f64>,
    #[arg(long)]
    pub window_sigma: Option<f64>,
    /// Frame step in time units (default: 1/4 for the Gaussian, radius/32 for a bump).
    #[arg(long)]
    pub hop: Option<f64>,
    #[arg(long)]
    pub nfreq: Option<usize>,
    /// CSV of `x,xi,abs,arg`.
    #[arg(long)]
    pub emit_grid: Option<PathBuf>,
    /// Mixed norm `p,q[,weight]`, e.g. `2,2` or `1,inf,poly:1,0`.
    #[arg(long)]
    pub norm: Option<String>,
    /// Reconstruct with the analysis window and report the relative error.
    #[arg(long)]
    #[serde(default)]
    pub roundtrip: bool,
    /// JSON summary (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_norm(text: &str) -> Result<(f64, f64, WeightSpec), CliError> {
    let mut parts = text.splitn(3, ',');
    let exp = |s: Option<&str>| -> Result<f64, CliError> {
        match s.map(str::trim) {
            Some("inf") => Ok(f64::INFINITY),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|p| *p >= 1.0)
                .ok_or_else(|| CliError::config(format!("norm exponent `{v}` must be a number >= 1 or inf"))),
            None => Err(CliError::config("norm needs p,q")),
        }
    };
    let p = exp(parts.next())?;
    let q = exp(parts.next())?;
    let m = match parts.next() {
        Some(w) => WeightSpec::parse(w)?,
        None => WeightSpec::Unweighted,
    };
    Ok((p, q, m))
}

fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_f64(v))
    }
}

pub fn stft(flags: &StftArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let norm = a.norm.as_deref().map(parse_norm).transpose()?;
    let signal: SampledSignal = a.signal.as_ref().ok_or_else(|| CliError::config("missing required option --signal"))?.load()?;
    let g = analysis_window(a.window_kind, signal.dt, a.window_n, a.radius, a.window_tau, a.window_sigma)?;
    let hop = a.hop.unwrap_or_else(|| {
        // Frame sums stay flat to ~1e-10 at these steps.
        let target = g.support_radius.map_or(0.25, |r| r / 32.0);
        (target / signal.dt).round().max(1.0) * signal.dt
    });
    let nfreq = a.nfreq.unwrap_or(g.len().next_power_of_two());
    let grid = run_stft(&signal, &g, hop, nfreq)?;
    let mut report = json!({
        "window": g.info(),
        "n_x": grid.n_x(),
        "n_xi": grid.n_xi(),
        "hop": grid.hop,
        "max_abs": grid.max_abs(),
    });
    if let Some((p, q, m)) = norm {
        let value = modulation_norm(&grid, p, q, &m)?;
        report["norm"] = json!({ "p": json_f64(p), "q": json_f64(q), "weight": m, "value": value });
    }
    if a.roundtrip {
        let rec = istft(&grid, &g, &g)?;
        let num: f64 = rec.signal.samples.iter().zip(&signal.samples).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = signal.samples.iter().map(|y| y.norm_sqr()).sum();
        let rel = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
        if ctx.strict {
            if let Some(w) = &rec.warning {
                return Err(CliError::numerical(w.clone()).with_context("frame_ripple", rec.frame_ripple));
            }
        }
        report["reconstruction"] = json!({
            "relative_l2_error": rel,
            "frame_ripple": rec.frame_ripple,
            "warning": rec.warning,
        });
    }
    let mut out = Outputs::default();
    if let Some(p) = a.emit_grid {
        out.push(Some(p), stft_csv(&grid));
    }
    out.push(a.report, pretty(&report)?);
    Ok(out)
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub signal: Option<SignalSource>,
    #[arg(long, value_enum)]
    pub window_kind: Option<WindowKindArg>,
    /// Weight `none`, `poly:t[,s]` or `exp:s`.
    #[arg(long)]
    pub m_weight: Option<String>,
    /// Candidate sigma values > 1: `start:stop:step` or a comma list.
    #[arg(long)]
    pub sigma_grid: Option<String>,
    #[arg(long)]
    pub hop: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<u32>,
    /// JSON report (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_sigma_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("cannot parse sigma grid `{text}`"));
    let nums = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b, step) = (nums(parts[0])?, nums(parts[1])?, nums(parts[2])?);
        if !(step > 0.0 && b >= a) {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| a + step * i as f64).collect()
    } else {
        text.split(',').map(nums).collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid.iter().any(|s| !(*s > 1.0 && *s < 2.0)) {
        return Err(CliError::config("sigma grid values must lie in (1, 2)"));
    }
    Ok(grid)
}

pub fn classify(flags: &ClassifyArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let mut opts = ClassifyOptions::default();
    if let Some(w) = &a.m_weight {
        opts.weight = WeightSpec::parse(w)?;
    }
    if let Some(s) = &a.sigma_grid {
        opts.fit = FitOptions {
            sigma_grid: parse_sigma_grid(s)?,
            ..FitOptions::default()
        };
    }
    if let Some(h) = a.hop {
        opts.hop = h;
    }
    if let Some(am) = a.alpha_max {
        opts.alpha_max = am;
    }
    opts.window = match a.window_kind.unwrap_or(WindowKindArg::Gaussian) {
        WindowKindArg::Gaussian => ClassifyWindow::Gaussian,
        WindowKindArg::Bump => ClassifyWindow::Bump,
    };
    let signal = a.signal.as_ref().ok_or_else(|| CliError::config("missing required option --signal"))?.load()?;
    let report = gevrey_tf::regularity::classify(&signal, &opts)?;
    if ctx.strict {
        if let Some(w) = &report.condition_i.warning {
            return Err(CliError::numerical(w.clone()));
        }
    }
    let mut out = Outputs::default();
    out.push(a.report, pretty(&report)?);
    Ok(out)
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefrontArgs {
    #[arg(long)]
    pub signal: Option<SignalSource>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub window_radius: Option<f64>,
    #[arg(long)]
    pub window_tau: Option<f64>,
    #[arg(long)]
    pub window_sigma: Option<f64>,
    #[arg(long)]
    pub hop: Option<f64>,
    /// Lower frequency edge of both cones.
    #[arg(long)]
    pub xi_min: Option<f64>,
    /// Margin above which a cell is singular (default: calibrated on smooth references).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Attach a decay fit to every cell.
    #[arg(long)]
    #[serde(default)]
    pub fit_cells: bool,
    /// JSON report (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV of `x,direction,margin` with direction +1 or -1.
    #[arg(long)]
    pub emit_margins: Option<PathBuf>,
}

pub fn wavefront(flags: &WavefrontArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let params = GevreyParams::new(require(a.tau, "tau")?, require(a.sigma, "sigma")?, 1.0)?;
    let signal = a.signal.as_ref().ok_or_else(|| CliError::config("missing required option --signal"))?.load()?;
    let phi = analysis_window(
        Some(WindowKindArg::Bump),
        signal.dt,
        None,
        a.window_radius,
        a.window_tau,
        a.window_sigma,
    )?;
    let defaults = ScanOptions::default();
    let opts = ScanOptions {
        hop: a.hop.unwrap_or(defaults.hop),
        xi_min: a.xi_min.unwrap_or(defaults.xi_min),
        threshold: a.threshold,
        mode: match a.mode.unwrap_or(ModeArg::Roumieu) {
            ModeArg::Roumieu => ScanMode::Roumieu,
            ModeArg::Beurling => ScanMode::Beurling,
        },
        fit_cells: a.fit_cells,
    };
    let report = scan_wavefront(&signal, &phi, &params, &opts)?;
    let support = singular_support(&report);
    let mut out = Outputs::default();
    if let Some(p) = a.emit_margins {
        let rows = report.cells.iter().map(|c| {
            let d = if c.direction == Direction::Positive { 1.0 } else { -1.0 };
            vec![c.x_center, d, c.envelope_margin]
        });
        out.push(Some(p), table_csv(&["x", "direction", "margin"], rows));
    }
    out.push(a.report, pretty(&json!({ "report": report, "singular_support": support }))?);
    Ok(out)
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// One of sequences, lambert, assoc-bracket, stft-roundtrip, classify-synthetic, wavefront-corpus, all.
    #[arg(long)]
    pub suite: Option<String>,
    /// JSON scorecard (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn verify(flags: &VerifyArgs, ctx: &Context) -> Result<Outputs, CliError> {
    let a = resolve(flags, ctx.config)?;
    let card = suites::run(a.suite.as_deref().unwrap_or("all"))?;
    if !card.passed {
        let failed: Vec<String> = card
            .suites
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", s.suite, c.name)))
            .collect();
        return Err(CliError::numerical("verification failed").with_context("failed_checks", failed));
    }
    let mut out = Outputs::default();
    out.push(a.report, card.to_json());
    Ok(out)
}
