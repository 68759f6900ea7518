use serde_json::{json, Value};

use gevrey_tf::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Numerical,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Internal => 1,
            Kind::Config => 2,
            Kind::Numerical => 3,
        }
    }

    fn code(self) -> &'static str {
        match self {
            Kind::Internal => "internal_error",
            Kind::Config => "config_error",
            Kind::Numerical => "numerical_quality",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    pub context: Value,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Config,
            message: message.into(),
            context: Value::Null,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Numerical,
            message: message.into(),
            context: Value::Null,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Internal,
            message: message.into(),
            context: Value::Null,
        }
    }

    pub fn with_context(mut self, key: &str, value: impl Into<Value>) -> Self {
        if !self.context.is_object() {
            self.context = json!({});
        }
        self.context[key] = value.into();
        self
    }

    pub fn to_json(&self) -> String {
        json!({ "code": self.kind.code(), "message": self.message, "context": self.context }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Convergence { .. }
            | Error::NonFinite(_)
            | Error::DegenerateProfile(_)
            | Error::OrthogonalWindows { .. } => Kind::Numerical,
            _ => Kind::Config,
        };
        let variant = format!("{e:?}");
        let variant = variant.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string();
        CliError {
            kind,
            message: e.to_string(),
            context: json!({ "error": variant }),
        }
    }
}
