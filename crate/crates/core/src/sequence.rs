//! Defining sequences `M_p = p^(tau p^sigma)` in the log domain, with
//! executable checks of their structural properties (log-convexity, the
//! stability estimates, and non-quasianalyticity).
//!
//! Orders are scalar: for one-dimensional signals `|alpha|` is a nonnegative
//! integer and every estimate depends only on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter triple `(tau, sigma, h)` for sequences, associated functions and envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub tau: f64,
    pub sigma: f64,
    pub h: f64,
}

impl GevreyParams {
    pub fn new(tau: f64, sigma: f64, h: f64) -> Result<Self> {
        let p = Self { tau, sigma, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParams(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 1.0) {
            return Err(Error::InvalidParams(format!("sigma must be >= 1, got {}", self.sigma)));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidParams(format!("h must be > 0, got {}", self.h)));
        }
        Ok(())
    }

    /// Same `(tau, sigma)` with a different scale `h`.
    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..*self }
    }

    /// `sigma = 1, tau <= 1`: the class has no nontrivial compactly supported members.
    pub fn is_quasianalytic(&self) -> bool {
        self.sigma == 1.0 && self.tau <= 1.0
    }

    pub fn log_m(&self, p: u64) -> f64 {
        log_m(self.tau, self.sigma, p)
    }
}

/// `ln M_p = tau * p^sigma * ln p`, with `ln M_0 = ln M_1 = 0`.
pub fn log_m(tau: f64, sigma: f64, p: u64) -> f64 {
    if p <= 1 {
        return 0.0;
    }
    let pf = p as f64;
    tau * pf.powf(sigma) * pf.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScannedRange {
    pub p_max: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of one property scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub params: GevreyParams,
    pub scanned_range: ScannedRange,
    /// Log of the fitted constant, where the property has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_q_constants: Option<Vec<f64>>,
    /// Last ratio `M_{p-1}/M_p` of the scan (the Cauchy increment of the series).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_increment: Option<f64>,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

// comparisons allow a few ulp of the larger side
fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + 4.0 * f64::EPSILON * lhs.abs().max(rhs.abs())
}

/// `(M_p)^2 <= M_{p-1} M_{p+1}` for `1 <= p <= p_max`.
pub fn check_m1_logconvex(params: &GevreyParams, p_max: u64) -> Result<PropertyReport> {
    if p_max < 2 {
        return Err(Error::InvalidParams(format!("p_max must be >= 2, got {p_max}")));
    }
    let violations = (1..=p_max)
        .filter_map(|p| {
            let lhs = 2.0 * params.log_m(p);
            let rhs = params.log_m(p - 1) + params.log_m(p + 1);
            exceeds(lhs, rhs).then_some(Violation {
                p,
                q: None,
                lhs,
                rhs,
            })
        })
        .collect();
    Ok(PropertyReport {
        property: "M.1 log-convexity".into(),
        params: *params,
        scanned_range: ScannedRange { p_max, q_max: None },
        fitted_constant: None,
        per_q_constants: None,
        tail_increment: None,
        violations,
    })
}

/// Smallest `ln C` with `M_{p+q} <= C^(p^s + q^s) M'_p M'_q`, where `M'` uses `tau 2^(s-1)`.
///
/// The scan covers `0 <= p <= p_max`, `0 <= q <= q_max` except the origin.
pub fn check_m2bar(params: &GevreyParams, p_max: u64, q_max: u64) -> Result<PropertyReport> {
    if p_max < 1 || q_max < 1 {
        return Err(Error::InvalidParams("p_max and q_max must be >= 1".into()));
    }
    let (tau, sigma) = (params.tau, params.sigma);
    let tau2 = tau * 2f64.powf(sigma - 1.0);
    let mut ln_c = f64::NEG_INFINITY;
    for p in 0..=p_max {
        for q in 0..=q_max {
            if p == 0 && q == 0 {
                continue;
            }
            let num = log_m(tau, sigma, p + q) - log_m(tau2, sigma, p) - log_m(tau2, sigma, q);
            let den = (p as f64).powf(sigma) + (q as f64).powf(sigma);
            ln_c = ln_c.max(num / den);
        }
    }
    Ok(PropertyReport {
        property: "M.2-bar stability".into(),
        params: *params,
        scanned_range: ScannedRange {
            p_max,
            q_max: Some(q_max),
        },
        fitted_constant: Some(ln_c),
        per_q_constants: None,
        tail_increment: None,
        violations: Vec::new(),
    })
}

/// Per-`q` constants `ln C_q = sup_p [ln M_{p+q} - ln M_p] / p^sigma`.
///
/// A violation is recorded when the supremum over the upper half of the
/// `p` range exceeds the one over the lower half, i.e. `C_q` is still growing
/// with `p`.
pub fn check_m2prime(params: &GevreyParams, p_max: u64, q_max: u64) -> Result<PropertyReport> {
    if p_max < 2 || q_max < 1 {
        return Err(Error::InvalidParams("p_max must be >= 2 and q_max >= 1".into()));
    }
    let mut per_q = Vec::with_capacity(q_max as usize);
    let mut violations = Vec::new();
    for q in 1..=q_max {
        let term = |p: u64| (params.log_m(p + q) - params.log_m(p)) / (p as f64).powf(params.sigma);
        let half = p_max / 2;
        let low = (1..=half).map(term).fold(f64::NEG_INFINITY, f64::max);
        let high = (half + 1..=p_max).map(term).fold(f64::NEG_INFINITY, f64::max);
        if exceeds(high, low) {
            violations.push(Violation {
                p: p_max,
                q: Some(q),
                lhs: high,
                rhs: low,
            });
        }
        per_q.push(low.max(high));
    }
    Ok(PropertyReport {
        property: "M.2-prime stability".into(),
        params: *params,
        scanned_range: ScannedRange {
            p_max,
            q_max: Some(q_max),
        },
        fitted_constant: per_q.iter().copied().reduce(f64::max),
        per_q_constants: Some(per_q),
        tail_increment: None,
        violations,
    })
}

/// `M_{p-1}/M_p <= (2p)^(-tau (p-1)^(sigma-1))` for `2 <= p <= p_max`.
pub fn check_m3prime(params: &GevreyParams, p_max: u64) -> Result<PropertyReport> {
    if params.is_quasianalytic() {
        return Err(Error::Quasianalytic {
            tau: params.tau,
            sigma: params.sigma,
        });
    }
    if p_max < 2 {
        return Err(Error::InvalidParams(format!("p_max must be >= 2, got {p_max}")));
    }
    let (tau, sigma) = (params.tau, params.sigma);
    let violations = (2..=p_max)
        .filter_map(|p| {
            let lhs = params.log_m(p - 1) - params.log_m(p);
            let rhs = -tau * ((p - 1) as f64).powf(sigma - 1.0) * (2.0 * p as f64).ln();
            exceeds(lhs, rhs).then_some(Violation {
                p,
                q: None,
                lhs,
                rhs,
            })
        })
        .collect();
    let tail = (params.log_m(p_max - 1) - params.log_m(p_max)).exp();
    Ok(PropertyReport {
        property: "M.3-prime non-quasianalyticity".into(),
        params: *params,
        scanned_range: ScannedRange { p_max, q_max: None },
        fitted_constant: None,
        per_q_constants: None,
        tail_increment: Some(tail),
        violations,
    })
}

/// `a^s + b^s <= (a+b)^s <= 2^(s-1) (a^s + b^s)` for integer pairs up to `n_max`.
pub fn check_power_inequalities(sigma: f64, n_max: u64) -> Vec<(u64, u64)> {
    let c = 2f64.powf(sigma - 1.0);
    let mut bad = Vec::new();
    for a in 0..=n_max {
        let asg = (a as f64).powf(sigma);
        for b in 0..=n_max {
            let bsg = (b as f64).powf(sigma);
            let mid = ((a + b) as f64).powf(sigma);
            if exceeds(asg + bsg, mid) || exceeds(mid, c * (asg + bsg)) {
                bad.push((a, b));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(tau: f64, sigma: f64) -> GevreyParams {
        GevreyParams::new(tau, sigma, 1.0).unwrap()
    }

    #[test]
    fn log_m_values() {
        assert!((log_m(1.0, 2.0, 2) - 4.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_m(3.7, 1.9, 1), 0.0);
        assert_eq!(log_m(3.7, 1.9, 0), 0.0);
        // 2 * 3^1.5 * ln 3
        assert!((log_m(2.0, 1.5, 3) - 11.417113810756153).abs() < 1e-12);
    }

    #[test]
    fn log_m_no_overflow_at_large_orders() {
        let v = log_m(10.0, 3.0, 1_000_000);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(GevreyParams::new(0.0, 1.5, 1.0).is_err());
        assert!(GevreyParams::new(1.0, 0.9, 1.0).is_err());
        assert!(GevreyParams::new(1.0, 1.5, -1.0).is_err());
        assert!(gp(1.0, 1.0).is_quasianalytic());
        assert!(!gp(1.5, 1.0).is_quasianalytic());
    }

    #[test]
    fn m1_passes() {
        assert!(check_m1_logconvex(&gp(1.0, 2.0), 1000).unwrap().passed());
        assert!(check_m1_logconvex(&gp(0.5, 1.2), 1000).unwrap().passed());
        assert!(check_m1_logconvex(&gp(1.0, 1.0), 10).unwrap().passed());
        assert!(check_m1_logconvex(&gp(1.0, 1.0), 1).is_err());
    }

    #[test]
    fn m2bar_smallest_term_and_stability() {
        // p = q = 1 contributes ln M_2 / 2
        let r = check_m2bar(&gp(1.0, 2.0), 1, 1).unwrap();
        let c = r.fitted_constant.unwrap();
        assert!(c >= log_m(1.0, 2.0, 2) / 2.0 - 1e-15);

        let a = check_m2bar(&gp(1.0, 2.0), 100, 100).unwrap().fitted_constant.unwrap();
        let b = check_m2bar(&gp(1.0, 2.0), 200, 200).unwrap().fitted_constant.unwrap();
        assert!(a.is_finite() && ((a - b) / b).abs() < 0.01);

        let r = check_m2bar(&gp(1.0, 1.5), 500, 500).unwrap();
        assert!(r.passed() && r.fitted_constant.unwrap().is_finite());
    }

    #[test]
    fn m2prime_bounded_in_p() {
        let r = check_m2prime(&gp(1.0, 1.5), 400, 8).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        let cq = r.per_q_constants.unwrap();
        assert_eq!(cq.len(), 8);
        assert!(cq.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn m3prime_passes_and_rejects_quasianalytic() {
        let r = check_m3prime(&gp(1.0, 2.0), 10_000).unwrap();
        assert!(r.passed());
        assert!(r.tail_increment.unwrap() < 1e-15);
        assert!(check_m3prime(&gp(0.1, 3.0), 1000).unwrap().passed());
        assert!(matches!(
            check_m3prime(&gp(1.0, 1.0), 10),
            Err(Error::Quasianalytic { .. })
        ));
    }

    #[test]
    fn m3prime_first_ratio() {
        // M_1 / M_2 = 1/16 <= 1/4
        let r = check_m3prime(&gp(1.0, 2.0), 2).unwrap();
        assert!(r.passed());
        assert!((r.tail_increment.unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn simple_power_inequalities() {
        for s in [1.0, 1.2, 1.5, 2.0, 3.0] {
            assert!(check_power_inequalities(s, 300).is_empty(), "sigma={s}");
        }
    }

    #[test]
    fn report_serializes() {
        let r = check_m1_logconvex(&gp(1.0, 2.0), 10).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["violations"].as_array().unwrap().len(), 0);
        assert_eq!(v["scanned_range"]["p_max"], 10);
    }
}
