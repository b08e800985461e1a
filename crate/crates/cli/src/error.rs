use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent scenario; `field` is a JSON path.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Core(#[from] mwelim::Error),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, field) = match self {
            CliError::Config { field, .. } => ("config", Some(field.as_str())),
            CliError::Core(e) => (e.kind(), None),
            CliError::Io(_) => ("io", None),
        };
        json!({ "error": { "kind": kind, "field": field, "message": self.to_string() } })
    }
}
