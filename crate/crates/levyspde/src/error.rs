use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum SpdeError {
    /// A configuration value is missing, unparseable, or fails validation.
    /// `key` is the full path of the offending field (e.g. `solver.dt`).
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// Two objects built against different discretizations (or with
    /// inconsistent lengths) were combined.
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },

    /// The requested operation is refused because a structural hypothesis of
    /// the underlying theory is not met (e.g. moment estimation with a
    /// nonzero large-jump map).
    #[error("refusing to run: {0}")]
    Refused(String),

    /// I/O failure while reading configs or writing reports.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SpdeError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SpdeError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        SpdeError::Parameter {
            name,
            message: message.into(),
        }
    }
}
