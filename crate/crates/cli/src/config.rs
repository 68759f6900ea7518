//! Layering of `--config` JSON under command-line flags.

use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use gevrey_tf::corpus::{generate, SignalSpec};
use gevrey_tf::io::read_signal_csv;
use gevrey_tf::SampledSignal;

use crate::error::CliError;

/// Reads a JSON object from `path`; the file must hold an object at top level.
pub fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::config("config must be a JSON object")),
        Err(e) => Err(CliError::config(format!("config is not valid JSON: {e}"))),
    }
}

/// Overlays the flags that were given on top of the config and deserializes
/// the result. Unset flags (`null`) and unset switches (`false`) do not override.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Map<String, Value>>) -> Result<T, CliError> {
    let mut merged = config.cloned().unwrap_or_default();
    if let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::internal(e.to_string()))? {
        for (k, v) in given {
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("invalid configuration: {e}")))
}

pub fn require<T: Copy>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::config(format!("missing required option --{name}")))
}

/// A signal given as a CSV path or an inline JSON spec such as
/// `{"kind":"heaviside","dt":0.001,"n":4096}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSource {
    Spec(SignalSpec),
    Path(String),
}

impl FromStr for SignalSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with('{') {
            serde_json::from_str(s).map(SignalSource::Spec).map_err(|e| format!("invalid signal spec: {e}"))
        } else {
            Ok(SignalSource::Path(s.to_string()))
        }
    }
}

impl SignalSource {
    pub fn load(&self) -> Result<SampledSignal, CliError> {
        match self {
            SignalSource::Spec(spec) => Ok(generate(spec)?),
            SignalSource::Path(p) => Ok(read_signal_csv(Path::new(p))?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Demo {
        tau: Option<f64>,
        #[serde(default)]
        flag: bool,
    }

    #[test]
    fn flags_win_over_config() {
        let cfg: Map<String, Value> = serde_json::from_str(r#"{"tau": 2.0, "flag": true}"#).unwrap();
        let got = resolve(&Demo { tau: Some(3.0), flag: false }, Some(&cfg)).unwrap();
        assert_eq!(got, Demo { tau: Some(3.0), flag: true });
        let got = resolve(&Demo { tau: None, flag: false }, Some(&cfg)).unwrap();
        assert_eq!(got.tau, Some(2.0));
    }

    #[test]
    fn signal_source_forms() {
        assert_eq!(SignalSource::from_str("a.csv").unwrap(), SignalSource::Path("a.csv".into()));
        let s = SignalSource::from_str(r#"{"kind":"heaviside","dt":0.01,"n":256}"#).unwrap();
        assert!(matches!(s, SignalSource::Spec(_)));
        let v: SignalSource = serde_json::from_str(r#"{"kind":"envelope_synth","dt":0.01,"n":256,"params":{"tau":1,"sigma":1.5,"h":1}}"#).unwrap();
        assert!(matches!(v, SignalSource::Spec(_)));
    }
}
