//! CSV signal input and plot-ready CSV output.
//!
//! Numbers are written with Rust's shortest round-trip representation, so a
//! value read back parses to the same `f64` and outputs are byte-stable.

use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::{SampledSignal, StftGrid};

/// Largest accepted deviation of a sample time from the uniform grid, relative to `dt`.
pub const TIME_JITTER: f64 = 1e-9;

/// Shortest decimal string that parses back to `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Parses `t,re[,im]` rows with a header line. Times must be uniform.
pub fn parse_signal_csv(text: &str) -> Result<SampledSignal> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let has_im = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["t", "re"] => false,
        ["t", "re", "im"] => true,
        _ => return Err(Error::Parse(format!("header must be `t,re` or `t,re,im`, got `{}`", header.join(",")))),
    };
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            let s = &record[i];
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse(format!("line {line}: `{s}` is not a finite number"))),
            }
        };
        times.push(num(0)?);
        let im = if has_im { num(2)? } else { 0.0 };
        samples.push(Complex64::new(num(1)?, im));
    }
    if times.len() < 2 {
        return Err(Error::Parse(format!("need at least 2 samples, got {}", times.len())));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    // times are finite here, so dt is too
    if dt <= 0.0 {
        return Err(Error::Parse("sample times must increase".into()));
    }
    for (i, t) in times.iter().enumerate() {
        let expect = times[0] + i as f64 * dt;
        if (t - expect).abs() > TIME_JITTER * dt {
            return Err(Error::Parse(format!(
                "sample times are not uniform: t[{i}] = {t}, expected {expect}"
            )));
        }
    }
    SampledSignal::new(samples, dt, times[0])
}

pub fn read_signal_csv(path: &Path) -> Result<SampledSignal> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_signal_csv(&text)
}

/// `t,re,im` with one row per sample.
pub fn signal_csv(signal: &SampledSignal) -> String {
    let mut out = String::from("t,re,im\n");
    for (s, z) in signal.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(signal.time(s)), fmt_f64(z.re), fmt_f64(z.im));
    }
    out
}

/// Generic CSV table.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt_f64).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `x,xi,abs,arg`, rows in frame-major order.
pub fn stft_csv(grid: &StftGrid) -> String {
    let mut out = String::from("x,xi,abs,arg\n");
    for i in 0..grid.n_x() {
        for (j, v) in grid.row(i).iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(grid.x_axis[i]),
                fmt_f64(grid.xi_axis[j]),
                fmt_f64(v.norm()),
                fmt_f64(v.arg())
            );
        }
    }
    out
}
