//! The extended associated function
//!
//! ```text
//! T(k) = sup_{p >= 0} max(0, p^sigma ln h + p ln k - tau p^sigma ln p)
//! ```
//!
//! evaluated exactly over integer `p`, together with the Gevrey (`sigma = 1`)
//! reference `(tau/e) k^(1/tau)`, the Lambert-W bracket for `sigma > 1`, and the
//! envelope `exp(-T)`.
//!
//! For `sigma > 1` the exponent `f(p)` is convex up to the inflection point
//! `p_c = exp(ln h / tau - 1/sigma - 1/(sigma-1))` and concave beyond it, so the
//! integer supremum is attained next to `p = 1`, next to `p_c`, or next to the
//! root of `f'` in the concave part. Those three neighbourhoods are the only
//! places evaluated; no linear scan up to the maximizer is needed.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::lambert::lambert_w0;
use crate::sequence::GevreyParams;

/// Integers evaluated on each side of a critical point.
const WINDOW: u64 = 3;
/// Lower bound for the reported scan bound.
const MIN_TRUNCATION: u64 = 64;
/// Largest `p` for which consecutive integers are exactly representable.
const EXACT_INT_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssocEval {
    pub params: GevreyParams,
    pub k: f64,
    pub value: f64,
    pub argmax_p: u64,
    /// Every integer `p > truncation_p` gives a strictly smaller term.
    pub truncation_p: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticBracket {
    pub k: f64,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    pub c_tsh: f64,
}

/// The exponent `p^sigma ln h + p ln k - tau p^sigma ln p` for one integer `p`.
///
/// This is the canonical evaluation order; brute-force checks that want
/// bit-identical values must use the same expression.
#[inline]
pub fn assoc_term(params: &GevreyParams, p: u64, ln_k: f64) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let pf = p as f64;
    let ps = pf.powf(params.sigma);
    ps * params.h.ln() + pf * ln_k - params.tau * ps * pf.ln()
}

/// `T_{tau,sigma,h}(k)` for `k > 0`.
pub fn assoc_t(params: &GevreyParams, k: f64) -> Result<AssocEval> {
    params.validate()?;
    if !(k.is_finite() && k > 0.0) {
        return Err(domain("assoc_t", format!("k must be finite and > 0, got {k}")));
    }
    if params.sigma == 1.0 {
        gevrey_case(params, k)
    } else {
        extended_case(params, k)
    }
}

fn extended_case(params: &GevreyParams, k: f64) -> Result<AssocEval> {
    let GevreyParams { tau, sigma, h } = *params;
    let ln_k = k.ln();
    let ln_h = h.ln();

    // f'(e^L) = ln k + e^{(sigma-1) L} (sigma ln h - tau sigma L - tau)
    let slope = |l: f64| ln_k + ((sigma - 1.0) * l).exp() * (sigma * ln_h - tau * sigma * l - tau);
    let ln_pc = ln_h / tau - 1.0 / sigma - 1.0 / (sigma - 1.0);
    let start = ln_pc.max(0.0);

    let mut candidates: Vec<u64> = (1..=WINDOW + 1).collect();
    let mut truncation = MIN_TRUNCATION;
    if ln_pc > 0.0 {
        let pc = ln_pc.exp();
        if pc > EXACT_INT_LIMIT {
            return Err(domain("assoc_t", "inflection point beyond exact integer range"));
        }
        let w = noise_window(params, pc, ln_k);
        push_window(&mut candidates, pc, w);
        truncation = truncation.max(pc.ceil() as u64 + w);
    }
    if slope(start) > 0.0 {
        let ln_root = bisect_decreasing(slope, start)?;
        let root = ln_root.exp();
        if root > EXACT_INT_LIMIT {
            return Err(domain("assoc_t", format!("maximizer p* = {root:e} beyond exact integer range")));
        }
        let w = noise_window(params, root, ln_k);
        push_window(&mut candidates, root, w);
        truncation = truncation.max(root.ceil() as u64 + w);
    }

    let (argmax_p, value) = best_of(candidates.into_iter(), |p| assoc_term(params, p, ln_k));
    Ok(AssocEval {
        params: *params,
        k,
        value,
        argmax_p,
        truncation_p: truncation,
    })
}

// sigma = 1: f(p) = tau (p* - g(p)) with p* = exp((ln k + ln h)/tau - 1) and
// g(p) = p ln(p/p*) - p + p* >= 0. Working with the deficit g keeps the result
// at or below the continuous maximum tau p* even when p* ~ 1e15.
fn gevrey_case(params: &GevreyParams, k: f64) -> Result<AssocEval> {
    let tau = params.tau;
    let ln_star = (k.ln() + params.h.ln()) / tau - 1.0;
    let p_star = ln_star.exp();
    if !p_star.is_finite() {
        return Err(domain("assoc_t", "continuous maximizer overflows"));
    }
    let deficit = |p: f64| {
        let r = (p - p_star) / p_star;
        let g = if r.abs() < 0.5 {
            p_star * ((1.0 + r) * r.ln_1p() - r)
        } else {
            p * (p / p_star).ln() - p + p_star
        };
        g.max(0.0)
    };

    let mut candidates: Vec<u64> = vec![1];
    if p_star >= EXACT_INT_LIMIT {
        // adjacent integers are not representable; the continuous point is exact enough
        let value = tau * p_star;
        return Ok(AssocEval {
            params: *params,
            k,
            value,
            argmax_p: p_star as u64,
            truncation_p: p_star as u64,
        });
    }
    push_window(&mut candidates, p_star, WINDOW);
    let truncation = MIN_TRUNCATION.max(p_star.ceil() as u64 + WINDOW);
    let (argmax_p, value) = best_of(candidates.into_iter(), |p| tau * (p_star - deficit(p as f64)));
    Ok(AssocEval {
        params: *params,
        k,
        value,
        argmax_p,
        truncation_p: truncation,
    })
}

fn push_window(candidates: &mut Vec<u64>, centre: f64, half_width: u64) {
    let c = centre.floor() as u64;
    let lo = c.saturating_sub(half_width).max(1);
    candidates.extend(lo..=c + half_width + 1);
}

/// Half-width of the neighbourhood of `p` inside which rounding in
/// [`assoc_term`] can reorder terms: the true change of `f` must exceed a few
/// ulps of the largest partial product before the order is trustworthy.
fn noise_window(params: &GevreyParams, p: f64, ln_k: f64) -> u64 {
    const CAP: f64 = 1_048_576.0;
    let GevreyParams { tau, sigma, h } = *params;
    let (ln_h, ln_p) = (h.ln(), p.ln());
    let ps = p.powf(sigma);
    let scale = (ps * ln_h).abs().max((p * ln_k).abs()).max((tau * ps * ln_p).abs());
    let noise = 16.0 * f64::EPSILON * scale;
    let q = p.powf(sigma - 2.0);
    let f1 = (ln_k + p.powf(sigma - 1.0) * (sigma * ln_h - tau * sigma * ln_p - tau)).abs();
    let f2 = ((sigma - 1.0) * q * (sigma * ln_h - tau * sigma * ln_p - tau) - tau * sigma * q).abs();
    let by_slope = if f1 > 0.0 { noise / f1 } else { f64::INFINITY };
    let by_curvature = if f2 > 0.0 { (2.0 * noise / f2).sqrt() } else { f64::INFINITY };
    WINDOW + by_slope.min(by_curvature).min(CAP).ceil() as u64
}

/// Largest term, ties resolved to the smallest `p`; `p = 0` (value 0) always competes.
fn best_of(candidates: impl Iterator<Item = u64>, term: impl Fn(u64) -> f64) -> (u64, f64) {
    let mut best = (0u64, 0.0f64);
    let mut ps: Vec<u64> = candidates.collect();
    ps.sort_unstable();
    ps.dedup();
    for p in ps {
        let v = term(p);
        if v > best.1 {
            best = (p, v);
        }
    }
    best
}

/// Root of a function that is positive at `start` and eventually decreasing to `-inf`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, start: f64) -> Result<f64> {
    let mut lo = start;
    let mut step = 1.0;
    let mut hi = start + step;
    while f(hi) > 0.0 {
        lo = hi;
        step *= 2.0;
        hi = start + step;
        if hi > 800.0 {
            return Err(domain("assoc_t", "maximizer beyond representable range"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Continuous relaxation of the Gevrey associated function, `(tau/e) k^(1/tau)`.
///
/// Computed as `tau * exp(ln k / tau - 1)`, the same expression `assoc_t` uses
/// for its continuous maximizer when `sigma = 1, h = 1`.
pub fn assoc_t_gevrey_limit(tau: f64, k: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(domain("assoc_t_gevrey_limit", format!("tau must be > 0, got {tau}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(domain("assoc_t_gevrey_limit", format!("k must be > 0, got {k}")));
    }
    Ok(tau * (k.ln() / tau - 1.0).exp())
}

/// `C_{tau,sigma,h} = h^(-(sigma-1)/tau) e^((sigma-1)/sigma) (sigma-1)/(tau sigma)`.
pub fn c_tsh(params: &GevreyParams) -> f64 {
    let GevreyParams { tau, sigma, h } = *params;
    h.powf(-(sigma - 1.0) / tau) * ((sigma - 1.0) / sigma).exp() * (sigma - 1.0) / (tau * sigma)
}

/// Lower and upper Lambert-W exponents bracketing `T(k)` up to additive constants.
pub fn assoc_bracket(params: &GevreyParams, k: f64) -> Result<AsymptoticBracket> {
    params.validate()?;
    let GevreyParams { tau, sigma, .. } = *params;
    if sigma <= 1.0 {
        return Err(domain("assoc_bracket", "requires sigma > 1"));
    }
    if !(k.is_finite() && k > std::f64::consts::E) {
        return Err(domain("assoc_bracket", format!("k must be > e, got {k}")));
    }
    let c = c_tsh(params);
    let ln_k = k.ln();
    let inv = 1.0 / (sigma - 1.0);
    let w = lambert_w0(c * ln_k)?;
    let common = w.powf(-inv) * ln_k.powf(sigma * inv);
    let lower = (2f64.powf(sigma - 1.0) * tau).powf(-inv) * ((sigma - 1.0) / sigma).powf(sigma * inv) * common;
    let upper = ((sigma - 1.0) / (tau * sigma)).powf(inv) * common;
    Ok(AsymptoticBracket {
        k,
        lower_exponent: lower,
        upper_exponent: upper,
        c_tsh: c,
    })
}

/// `ln^(sigma/(sigma-1)) k / ln^(1/(sigma-1)) (ln k)`, the simplified asymptotic shape.
pub fn assoc_simplified(sigma: f64, k: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 1.0) {
        return Err(domain("assoc_simplified", format!("sigma must be > 1, got {sigma}")));
    }
    if !(k.is_finite() && k > std::f64::consts::E) {
        return Err(domain("assoc_simplified", format!("k must be > e, got {k}")));
    }
    let inv = 1.0 / (sigma - 1.0);
    let lk = k.ln();
    Ok(lk.powf(sigma * inv) / lk.ln().powf(inv))
}

/// `exp(-T(|xi|))`, equal to 1 at the origin.
pub fn envelope(params: &GevreyParams, xi_abs: f64) -> Result<f64> {
    Ok((-log_envelope_exponent(params, xi_abs)?).exp())
}

/// `T(|xi|)` with `T(0) = 0`; the exponent of [`envelope`] without exponentiating.
pub fn log_envelope_exponent(params: &GevreyParams, xi_abs: f64) -> Result<f64> {
    if !(xi_abs.is_finite() && xi_abs >= 0.0) {
        return Err(domain("envelope", format!("|xi| must be finite and >= 0, got {xi_abs}")));
    }
    if xi_abs == 0.0 {
        return Ok(0.0);
    }
    Ok(assoc_t(params, xi_abs)?.value)
}

/// Additive offsets needed to fit `T` inside the Lambert-W bracket over one decade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecadeOffsets {
    pub k_start: f64,
    /// Upper exponent at the first grid point of the decade.
    pub exponent_at_start: f64,
    /// Running `sup (lower - T)^+` up to the end of this decade.
    pub c_lower: f64,
    /// Running `sup (T - upper)^+` up to the end of this decade.
    pub c_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketOffsets {
    pub params: GevreyParams,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Largest decade-to-decade growth of either constant relative to the exponent.
    pub max_relative_drift: f64,
    pub decades: Vec<DecadeOffsets>,
}

/// Fits `c_lower, c_upper >= 0` with `lower - c_lower <= T <= upper + c_upper` on a
/// log grid over `[k_min, k_max]` and tracks how the constants grow per decade.
pub fn bracket_offsets(
    params: &GevreyParams,
    k_min: f64,
    k_max: f64,
    points_per_decade: usize,
) -> Result<BracketOffsets> {
    if !(k_min > std::f64::consts::E && k_max > k_min) {
        return Err(domain("bracket_offsets", "need e < k_min < k_max"));
    }
    let decades = (k_max.log10() - k_min.log10()).ceil().max(1.0) as usize;
    let mut rows = Vec::with_capacity(decades);
    let (mut c_lo, mut c_hi) = (0.0f64, 0.0f64);
    let mut drift = 0.0f64;
    for d in 0..decades {
        let a = k_min * 10f64.powi(d as i32);
        let b = (a * 10.0).min(k_max);
        let start = assoc_bracket(params, a)?;
        let (prev_lo, prev_hi) = (c_lo, c_hi);
        for k in crate::grid::log_grid(a, b, points_per_decade.max(2)) {
            let t = assoc_t(params, k)?.value;
            let br = assoc_bracket(params, k)?;
            c_lo = c_lo.max(br.lower_exponent - t);
            c_hi = c_hi.max(t - br.upper_exponent);
        }
        if d > 0 {
            let scale = start.upper_exponent.abs().max(f64::MIN_POSITIVE);
            drift = drift.max((c_lo - prev_lo) / scale).max((c_hi - prev_hi) / scale);
        }
        rows.push(DecadeOffsets {
            k_start: a,
            exponent_at_start: start.upper_exponent,
            c_lower: c_lo,
            c_upper: c_hi,
        });
    }
    Ok(BracketOffsets {
        params: *params,
        c_lower: c_lo,
        c_upper: c_hi,
        max_relative_drift: drift,
        decades: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn gp(tau: f64, sigma: f64, h: f64) -> GevreyParams {
        GevreyParams::new(tau, sigma, h).unwrap()
    }

    /// Exhaustive maximum over `0 <= p <= p_max`, written out independently.
    fn brute(params: &GevreyParams, k: f64, p_max: u64) -> (u64, f64) {
        let (ln_h, ln_k) = (params.h.ln(), k.ln());
        let mut best = (0u64, 0.0f64);
        for p in 1..=p_max {
            let pf = p as f64;
            let ps = pf.powf(params.sigma);
            let v = ps * ln_h + pf * ln_k - params.tau * ps * pf.ln();
            if v > best.1 {
                best = (p, v);
            }
        }
        best
    }

    #[test]
    fn zero_at_unit_k() {
        let e = assoc_t(&gp(1.0, 2.0, 1.0), 1.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.argmax_p, 0);
    }

    #[test]
    fn gevrey_example_e_squared() {
        let e = assoc_t(&gp(1.0, 1.0, 1.0), E * E).unwrap();
        let (bp, bv) = brute(&gp(1.0, 1.0, 1.0), E * E, 10_000);
        assert_eq!(e.argmax_p, 3);
        assert_eq!(bp, 3);
        assert!((e.value - (6.0 - 3.0 * 3f64.ln())).abs() < 1e-12);
        assert!((e.value - bv).abs() < 1e-12);
        assert!((e.value - 2.70417).abs() < 1e-5);
    }

    #[test]
    fn extended_example_e_fourth() {
        let p = gp(1.0, 2.0, 1.0);
        let e = assoc_t(&p, E.powi(4)).unwrap();
        let (bp, bv) = brute(&p, E.powi(4), 10_000);
        assert_eq!((e.argmax_p, e.value), (bp, bv));
        assert_eq!(e.argmax_p, 2);
        assert!((e.value - (8.0 - 4.0 * 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_with_large_h() {
        for &(tau, sigma, h, k) in &[
            (0.3, 1.05, 2.0, 1e3),
            (0.4, 1.1, 0.25, 1e10),
            (0.5, 1.3, 3.0, 20.0),
            (2.0, 2.5, 0.25, 1e10),
            (1.0, 1.5, 4.0, 0.5),
            (0.7, 3.0, 4.0, 1.0),
        ] {
            let p = gp(tau, sigma, h);
            let e = assoc_t(&p, k).unwrap();
            let b = brute(&p, k, 10 * e.truncation_p);
            assert_eq!((e.argmax_p, e.value), b, "{tau} {sigma} {h} {k}");
        }
    }

    #[test]
    fn gevrey_limit_values() {
        assert!((assoc_t_gevrey_limit(1.0, E).unwrap() - 1.0).abs() < 1e-15);
        assert!((assoc_t_gevrey_limit(1.0, E * E).unwrap() - E).abs() < 1e-14);
        assert!((assoc_t_gevrey_limit(2.0, E.powi(4)).unwrap() - 2.0 * E).abs() < 1e-14);
        let t = assoc_t(&gp(1.0, 1.0, 1.0), E * E).unwrap().value;
        assert!(t <= assoc_t_gevrey_limit(1.0, E * E).unwrap());
        assert!(assoc_t_gevrey_limit(0.0, 2.0).is_err());
        assert!(assoc_t_gevrey_limit(1.0, 0.0).is_err());
    }

    #[test]
    fn gevrey_huge_maximizer_stays_below_continuous() {
        let p = gp(0.5, 1.0, 1.0);
        let t = assoc_t(&p, 1e8).unwrap();
        let c = assoc_t_gevrey_limit(0.5, 1e8).unwrap();
        assert!(t.value <= c);
        assert!(c - t.value <= 0.5);
    }

    #[test]
    fn bracket_examples() {
        let p = gp(1.0, 2.0, 1.0);
        let b = assoc_bracket(&p, E.powi(10)).unwrap();
        assert!((b.c_tsh - 0.5f64.exp() / 2.0 * 0.5 * 2.0).abs() < 1e-15);
        assert!(b.lower_exponent < b.upper_exponent);

        let b2 = assoc_bracket(&gp(1.0, 2.0, 2.0), E.powi(10)).unwrap();
        assert!((b2.c_tsh - 0.5 * 0.5f64.exp() * 0.5).abs() < 1e-15);

        assert!(assoc_bracket(&gp(1.0, 1.0, 1.0), 100.0).is_err());
        assert!(assoc_bracket(&p, 2.0).is_err());
    }

    #[test]
    fn simplified_shape() {
        assert!((assoc_simplified(2.0, E.powf(E)).unwrap() - E * E).abs() < 1e-12);
        let v = assoc_simplified(2.0, E.powf(E * E)).unwrap();
        assert!((v - E.powi(4) / 2.0).abs() < 1e-10);
        assert!(assoc_simplified(1.0, 100.0).is_err());
        assert!(assoc_simplified(2.0, E).is_err());
    }

    #[test]
    fn simplified_ratio_stable_over_decades() {
        let p = gp(1.0, 1.5, 1.0);
        let ratios: Vec<f64> = [1e6, 1e8, 1e10, 1e12]
            .iter()
            .map(|&k| assoc_bracket(&p, k).unwrap().upper_exponent / assoc_simplified(1.5, k).unwrap())
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(ratios.iter().all(|r| (r / mean - 1.0).abs() < 0.10), "{ratios:?}");
    }

    #[test]
    fn envelope_values() {
        let p = gp(1.0, 1.0, 1.0);
        assert_eq!(envelope(&p, 0.0).unwrap(), 1.0);
        let expect = (-(6.0 - 3.0 * 3f64.ln())).exp();
        assert!((envelope(&p, E * E).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.066926).abs() < 1e-6);
        let q = gp(1.0, 2.0, 1.0);
        let expect = (-(8.0 - 4.0 * 2f64.ln())).exp();
        assert!((envelope(&q, E.powi(4)).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.0053674).abs() < 1e-7);
    }

    #[test]
    fn envelope_super_polynomial() {
        let p = gp(1.0, 1.5, 1.0);
        for n in [1, 5, 10, 20] {
            let far = 1e300f64.min(10f64.powf(3000.0 / n as f64));
            let v = (n as f64) * far.ln() - log_envelope_exponent(&p, far).unwrap();
            let near = (n as f64) * 1e3f64.ln() - log_envelope_exponent(&p, 1e3).unwrap();
            assert!(v < near || v < 0.0, "N={n}: {v} vs {near}");
        }
    }

    #[test]
    fn bracket_offsets_small_range() {
        let r = bracket_offsets(&gp(1.0, 1.5, 1.0), E * E, 1e6, 20).unwrap();
        assert_eq!(r.decades.len(), 6);
        assert!(r.c_lower >= 0.0 && r.c_upper >= 0.0);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(assoc_t(&gp(1.0, 1.5, 1.0), 0.0).is_err());
        assert!(assoc_t(&gp(1.0, 1.5, 1.0), -1.0).is_err());
        assert!(envelope(&gp(1.0, 1.5, 1.0), -1.0).is_err());
    }
}
