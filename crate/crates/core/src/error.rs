use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("marker density must be a positive finite number, got {0}")]
    InvalidDensity(f64),

    #[error("world bounds are degenerate")]
    DegenerateBounds,

    #[error("no free space left for markers: obstacles cover the world")]
    EmptyField,

    /// Deserialization failure; `path` is the field path, e.g. `spawn_groups[0].count`.
    #[error("config parse error at `{path}`: {message}")]
    ConfigParse { path: String, message: String },

    #[error("invalid config value at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("unknown preset `{name}`; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("could not place agent {agent} of spawn group {group}: region too crowded or blocked")]
    SpawnFailed { group: usize, agent: usize },

    #[error("no agents with profile label `{0}` in frame")]
    UnknownGroup(String),

    #[error("trajectory file {path}: line {line}: {message}")]
    TrajectoryFormat { path: PathBuf, line: usize, message: String },

    #[error("input trace line {line}: {message}")]
    TraceFormat { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid { path: path.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
