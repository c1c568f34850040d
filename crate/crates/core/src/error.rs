use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {message}")]
    Parameter { name: &'static str, message: String },

    #[error("{}line {line}: {message}", source_prefix(.source_name))]
    Parse {
        source_name: Option<String>,
        line: usize,
        message: String,
    },

    #[error("taxonomy error: {0}")]
    Taxonomy(String),

    #[error("rebalance error: {0}")]
    Rebalance(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("missing pseudo-label files for {} record(s): {}", .0.len(), display_paths(.0))]
    MissingPseudoLabels(Vec<PathBuf>),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file name to a parse error produced from in-memory text.
    pub fn with_source_name(self, name: impl Into<String>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                source_name: Some(name.into()),
                line,
                message,
            },
            other => other,
        }
    }
}

fn source_prefix(name: &Option<String>) -> String {
    name.as_ref().map(|n| format!("{n}: ")).unwrap_or_default()
}

fn display_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
