use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight `m(x, xi)` on the time-frequency plane.
///
/// The polynomial kind is `<x>^t <xi>^s` with `<y> = sqrt(1 + y^2)`; the
/// exponential kind depends on position only, `e^(s |x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    #[default]
    Unweighted,
    Polynomial { t_exp: f64, s_exp: f64 },
    Exponential { s: f64 },
}

fn japanese(y: f64) -> f64 {
    y.hypot(1.0)
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightSpec::Unweighted => true,
            WeightSpec::Polynomial { t_exp, s_exp } => t_exp.is_finite() && s_exp.is_finite(),
            WeightSpec::Exponential { s } => s.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("non-finite weight exponent in {self:?}")))
        }
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        match *self {
            WeightSpec::Unweighted => 1.0,
            WeightSpec::Polynomial { t_exp, s_exp } => japanese(x).powf(t_exp) * japanese(xi).powf(s_exp),
            WeightSpec::Exponential { s } => (s * x.abs()).exp(),
        }
    }

    /// The position factor `m(x, 0)`.
    pub fn eval_x(&self, x: f64) -> f64 {
        self.eval(x, 0.0)
    }

    /// Parses `none`, `poly:t,s` or `exp:s`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse weight '{text}' (expected none, poly:t,s or exp:s)"));
        let text = text.trim();
        if text.is_empty() || text == "none" || text == "1" {
            return Ok(WeightSpec::Unweighted);
        }
        let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let w = match (kind, nums.as_slice()) {
            ("poly", [t]) => WeightSpec::Polynomial { t_exp: *t, s_exp: 0.0 },
            ("poly", [t, s]) => WeightSpec::Polynomial { t_exp: *t, s_exp: *s },
            ("exp", [s]) => WeightSpec::Exponential { s: *s },
            _ => return Err(bad()),
        };
        w.validate()?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(WeightSpec::Unweighted.eval(3.0, -2.0), 1.0);
        let p = WeightSpec::Polynomial { t_exp: 2.0, s_exp: 1.0 };
        assert!((p.eval(1.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((p.eval(0.0, 3.0) - 10f64.sqrt()).abs() < 1e-15);
        assert!((WeightSpec::Exponential { s: 0.5 }.eval(-2.0, 9.0) - 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn parsing() {
        assert_eq!(WeightSpec::parse("none").unwrap(), WeightSpec::Unweighted);
        assert_eq!(
            WeightSpec::parse("poly:1,2").unwrap(),
            WeightSpec::Polynomial { t_exp: 1.0, s_exp: 2.0 }
        );
        assert_eq!(WeightSpec::parse("exp:0.25").unwrap(), WeightSpec::Exponential { s: 0.25 });
        assert!(WeightSpec::parse("poly:a").is_err());
        assert!(WeightSpec::parse("cubic:1").is_err());
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&WeightSpec::Exponential { s: 1.0 }).unwrap();
        assert_eq!(s, r#"{"kind":"exponential","s":1.0}"#);
    }
}
