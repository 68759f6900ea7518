//! Property suites behind `verify`, reported as a deterministic scorecard.
//!
//! Every suite is a pure function of fixed inputs; the scorecard holds no
//! timings, and parallel stages reduce in a fixed order, so repeated runs
//! serialize to identical bytes.

use serde::Serialize;

use crate::assoc::{assoc_t, assoc_t_gevrey_limit, bracket_offsets};
use crate::corpus::{generate, SignalKind, SignalSpec};
use crate::error::{Error, Result};
use crate::grid::log_grid;
use crate::lambert::{lambert_bracket, lambert_w0};
use crate::regularity::{classify, probe_beurling, ClassifyOptions, DecayModel};
use crate::sequence::{check_m1_logconvex, check_m2bar, check_m2prime, check_m3prime, check_power_inequalities, GevreyParams};
use crate::stft::{istft, stft, stft_via_factorization, SampledSignal};
use crate::wavefront::{
    cutoff_independence_check, default_threshold, default_window, scan_wavefront, singular_support, ScanOptions,
    DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS,
};
use crate::weight::WeightSpec;
use crate::window::{make_gaussian, make_gevrey_bump};

pub const SUITES: [&str; 6] = [
    "sequences",
    "lambert",
    "assoc-bracket",
    "stft-roundtrip",
    "classify-synthetic",
    "wavefront-corpus",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scorecard {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl Scorecard {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scorecard serializes") + "\n"
    }
}

fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= limit,
        value,
        limit,
    }
}

fn flag(name: impl Into<String>, ok: bool) -> Check {
    Check {
        name: name.into(),
        passed: ok,
        value: if ok { 1.0 } else { 0.0 },
        limit: 1.0,
    }
}

/// Runs one suite by name, or all of them for `"all"`.
pub fn run(suite: &str) -> Result<Scorecard> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Error::InvalidParams(format!(
            "unknown suite `{suite}`; expected one of {} or all",
            SUITES.join(", ")
        )));
    };
    let suites: Vec<SuiteReport> = names
        .into_iter()
        .map(|name| {
            let checks = match name {
                "sequences" => sequences()?,
                "lambert" => lambert()?,
                "assoc-bracket" => assoc_bracket()?,
                "stft-roundtrip" => stft_roundtrip()?,
                "classify-synthetic" => classify_synthetic()?,
                _ => wavefront_corpus()?,
            };
            Ok(SuiteReport {
                suite: name.to_string(),
                passed: checks.iter().all(|c| c.passed),
                checks,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Scorecard {
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

fn sequences() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for tau in [0.5, 1.0, 2.0] {
        for sigma in [1.2, 1.5, 2.0, 3.0] {
            let p = GevreyParams::new(tau, sigma, 1.0)?;
            let tag = format!("tau={tau},sigma={sigma}");
            let m1 = check_m1_logconvex(&p, 10_000)?;
            out.push(at_most(format!("m1 violations {tag}"), m1.violations.len() as f64, 0.0));
            let m3 = check_m3prime(&p, 10_000)?;
            out.push(at_most(format!("m3' violations {tag}"), m3.violations.len() as f64, 0.0));
            let c100 = check_m2bar(&p, 100, 100)?.fitted_constant.unwrap_or(0.0).exp();
            let c200 = check_m2bar(&p, 200, 200)?.fitted_constant.unwrap_or(0.0).exp();
            out.push(at_most(format!("m2-bar constant drift {tag}"), (c200 / c100 - 1.0).abs(), 0.01));
            let m2p = check_m2prime(&p, 200, 4)?;
            out.push(at_most(format!("m2' growing constants {tag}"), m2p.violations.len() as f64, 0.0));
        }
    }
    for sigma in [1.2, 1.5, 2.0, 3.0] {
        out.push(at_most(
            format!("power inequalities sigma={sigma}"),
            check_power_inequalities(sigma, 100).len() as f64,
            0.0,
        ));
    }
    Ok(out)
}

fn lambert() -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut xs = vec![0.0];
    xs.extend(log_grid(1e-12, 1e12, 100_000));
    for &x in &xs {
        let w = lambert_w0(x)?;
        worst = worst.max((w * w.exp() - x).abs() / x.max(1.0));
    }
    let mut bracket_violation: f64 = 0.0;
    let mut strict = true;
    let e = std::f64::consts::E;
    for &x in log_grid(e, 1e12, 100_000).iter() {
        let w = lambert_w0(x)?;
        let (lo, hi) = lambert_bracket(x)?;
        bracket_violation = bracket_violation.max(lo - w).max(w - hi);
        if x > e * (1.0 + 1e-3) && !(lo < w && w < hi) {
            strict = false;
        }
    }
    let (lo, hi) = lambert_bracket(e)?;
    let at_e = (lo - 1.0).abs().max((hi - 1.0).abs());
    Ok(vec![
        at_most("max relative residual of W e^W = x", worst, 1e-12),
        at_most("bracket violation", bracket_violation, 1e-12),
        flag("bracket strict above e", strict),
        at_most("bracket equality at e", at_e, 1e-12),
    ])
}

fn assoc_bracket() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for h in [0.5, 1.0, 2.0] {
        let p = GevreyParams::new(1.0, 1.5, h)?;
        let b = bracket_offsets(&p, std::f64::consts::E.powi(2), 1e12, 40)?;
        out.push(at_most(format!("per-decade drift h={h}"), b.max_relative_drift, 0.05));
    }
    for tau in [0.5, 1.0, 2.0] {
        let p = GevreyParams::new(tau, 1.0, 1.0)?;
        let mut gap_max: f64 = 0.0;
        let mut above: f64 = 0.0;
        for k in log_grid(std::f64::consts::E, 1e8, 1000) {
            let t = assoc_t(&p, k)?.value;
            let limit = assoc_t_gevrey_limit(tau, k)?;
            gap_max = gap_max.max(limit - t);
            above = above.max(t - limit);
        }
        out.push(at_most(format!("gevrey gap tau={tau}"), gap_max, tau));
        out.push(at_most(format!("gevrey exceedance tau={tau}"), above, 0.0));
    }
    Ok(out)
}

fn stft_roundtrip() -> Result<Vec<Check>> {
    let dt = 1.0 / 256.0;
    let g = make_gaussian(dt, 2048, 0.0)?;
    let f = generate(&SignalSpec::new(SignalKind::Gaussian, dt, 4096))?;
    let grid = stft(&f, &g, 8.0 * dt, 2048)?;
    let mut err: f64 = 0.0;
    for i in 0..grid.n_x() {
        let x = grid.x_axis[i];
        if x.abs() > 3.0 {
            continue;
        }
        for (j, v) in grid.row(i).iter().enumerate() {
            let xi = grid.xi_axis[j];
            if xi.abs() <= 3.0 {
                let exact = (-std::f64::consts::PI * (x * x + xi * xi) / 2.0).exp();
                err = err.max((v.norm() - exact).abs());
            }
        }
    }
    let mut path_gap: f64 = 0.0;
    for kind in [SignalKind::Heaviside, SignalKind::AbsT, SignalKind::Sawtooth { period: 1.0 }] {
        let u = generate(&SignalSpec::new(kind, dt, 4096))?;
        let a = stft(&u, &g, 16.0 * dt, 2048)?;
        let b = stft_via_factorization(&u, &g, 16.0 * dt, 2048)?;
        let scale = a.max_abs();
        for (x, y) in a.values.iter().zip(&b.values) {
            path_gap = path_gap.max((x - y).norm() / scale);
        }
    }
    let u = generate(&SignalSpec::new(SignalKind::GaussianCosine { frequency: 4.0 }, dt, 4096))?;
    let full = stft(&u, &g, dt, 2048)?;
    let rec = istft(&full, &g, &g)?;
    let rel = relative_l2(&rec.signal, &u);
    Ok(vec![
        at_most("gaussian pair abs error", err, 1e-6),
        at_most("direct vs factorized relative gap", path_gap, 1e-10),
        at_most("round trip relative L2 error at hop dt", rel, 1e-6),
    ])
}

fn relative_l2(a: &SampledSignal, b: &SampledSignal) -> f64 {
    let num: f64 = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.samples.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Grid on which synthetic signals are classified.
pub const CLASSIFY_DT: f64 = 1.0 / 4096.0;
pub const CLASSIFY_N: usize = 1 << 16;

fn classify_synthetic() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let opts = ClassifyOptions::default();
    for (tau, sigma) in [(1.0, 1.3), (1.0, 1.5), (0.5, 1.7), (2.0, 1.5)] {
        let params = GevreyParams::new(tau, sigma, 1.0)?;
        let f = generate(&SignalSpec::new(SignalKind::EnvelopeSynth { params }, CLASSIFY_DT, CLASSIFY_N))?;
        let r = classify(&f, &opts)?;
        let tag = format!("tau={tau},sigma={sigma}");
        out.push(at_most(format!("sigma error {tag}"), (r.fit.sigma_hat - sigma).abs(), 0.1));
        out.push(at_most(format!("relative tau error {tag}"), (r.fit.tau_hat / tau - 1.0).abs(), 0.25));
    }
    for tau in [1.0, 2.0] {
        let f = generate(&SignalSpec::new(SignalKind::GevreySynth { tau }, CLASSIFY_DT, CLASSIFY_N))?;
        let r = classify(&f, &opts)?;
        out.push(flag(format!("gevrey model tau={tau}"), r.fit.model == DecayModel::Gevrey));
        out.push(at_most(format!("relative tau error gevrey tau={tau}"), (r.fit.tau_hat / tau - 1.0).abs(), 0.15));
    }
    // Roumieu-only synthesis versus the Gaussian under the h grid
    let base = GevreyParams::new(1.0, 1.5, 1.0)?;
    let g = crate::regularity::classify_window(opts.window, CLASSIFY_DT)?;
    let f = generate(&SignalSpec::new(SignalKind::EnvelopeSynth { params: base }, CLASSIFY_DT, CLASSIFY_N))?;
    let grid = crate::stft::stft_region(&f, &g, 0.5, g.len().next_power_of_two(), -1.0, 1.0)?;
    let roumieu = crate::regularity::probe_condition_iii(&grid, &WeightSpec::Unweighted, &base)?;
    out.push(flag("envelope synth passes at h=1", roumieu.pass));
    let b = probe_beurling(&grid, &WeightSpec::Unweighted, &base, &[4.0])?;
    out.push(flag("envelope synth fails at h=4", !b.rows[0].pass));
    let gauss = generate(&SignalSpec::new(SignalKind::Gaussian, CLASSIFY_DT, CLASSIFY_N))?;
    let grid = crate::stft::stft_region(&gauss, &g, 0.5, g.len().next_power_of_two(), -1.0, 1.0)?;
    let b = probe_beurling(&grid, &WeightSpec::Unweighted, &base, &[0.25, 0.5, 1.0, 2.0, 4.0])?;
    out.push(flag("gaussian passes every h", b.beurling));
    Ok(out)
}

/// Grid on which the wave front corpus is scanned.
pub const WAVEFRONT_DT: f64 = 1.0 / 4096.0;
pub const WAVEFRONT_N: usize = 1 << 14;

fn wavefront_corpus() -> Result<Vec<Check>> {
    let params = GevreyParams::new(1.0, 1.5, 1.0)?;
    let phi = default_window(WAVEFRONT_DT)?;
    let base = ScanOptions::default();
    let threshold = default_threshold(WAVEFRONT_DT, WAVEFRONT_N, &phi, &params, &base)?;
    let opts = ScanOptions {
        threshold: Some(threshold),
        ..base
    };
    let support = |kind: SignalKind| -> Result<Vec<crate::wavefront::Interval>> {
        let u = generate(&SignalSpec::new(kind, WAVEFRONT_DT, WAVEFRONT_N))?;
        Ok(singular_support(&scan_wavefront(&u, &phi, &params, &opts)?))
    };
    let mut out = Vec::new();
    let diameter = 2.0 * DEFAULT_WINDOW_RADIUS;
    let s = support(SignalKind::Heaviside)?;
    out.push(flag("heaviside: one interval containing 0", s.len() == 1 && s[0].contains(0.0)));
    out.push(at_most(
        "heaviside interval width",
        s.first().map_or(f64::INFINITY, |iv| iv.width()),
        diameter + opts.hop,
    ));
    let s = support(SignalKind::AbsT)?;
    out.push(flag("abs_t: flagged at 0", s.iter().any(|iv| iv.contains(0.0))));
    for kind in [
        SignalKind::Gaussian,
        SignalKind::Bump {
            params: DEFAULT_WINDOW_PARAMS,
            radius: DEFAULT_WINDOW_RADIUS,
        },
    ] {
        let s = support(kind)?;
        out.push(at_most(format!("{} flagged intervals", kind_name(&kind)), s.len() as f64, 0.0));
    }
    let s = support(SignalKind::TwoStep { half_width: 1.0 })?;
    out.push(flag(
        "two_step: two disjoint intervals at the steps",
        s.len() == 2 && s[0].contains(-1.0) && s[1].contains(1.0) && s[0].end < s[1].start,
    ));
    let w20 = make_gevrey_bump(&DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS, WAVEFRONT_DT, Some(20))?;
    let w28 = make_gevrey_bump(&DEFAULT_WINDOW_PARAMS, DEFAULT_WINDOW_RADIUS, WAVEFRONT_DT, Some(28))?;
    for kind in [SignalKind::Heaviside, SignalKind::Sawtooth { period: 1.0 }] {
        let u = generate(&SignalSpec::new(kind, WAVEFRONT_DT, WAVEFRONT_N))?;
        let r = cutoff_independence_check(&u, &params, &[w20.clone(), w28.clone()], &opts)?;
        out.push(flag(format!("cutoff independence {}", kind_name(&kind)), r.pass));
    }
    Ok(out)
}

fn kind_name(kind: &SignalKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run("nope"), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn fast_suites_pass_and_are_stable() {
        for suite in ["lambert", "assoc-bracket"] {
            let a = run(suite).unwrap();
            assert!(a.passed, "{}", a.to_json());
            assert_eq!(a.to_json(), run(suite).unwrap().to_json());
        }
    }
}
