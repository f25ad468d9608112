use thiserror::Error;

/// A value that violates a model invariant, named by its config path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field} {constraint}")]
pub struct ValidationError {
    pub field: String,
    pub constraint: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    /// Prefixes the field path, e.g. `particle_radius` -> `clouds[0].particle_radius`.
    pub fn within(mut self, parent: impl AsRef<str>) -> Self {
        self.field = format!("{}.{}", parent.as_ref(), self.field);
        self
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid configuration: {0}")]
    Invalid(#[from] ValidationError),
    #[error("unknown sensor preset `{name}` (valid presets: {valid})")]
    UnknownPreset { name: String, valid: String },
    #[error("parameter `{0}` is not sweepable (valid: density, cloud_front_distance)")]
    NotSweepable(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum InjectError {
    #[error("input references channels not present in sensor `{sensor}`: {channels:?}")]
    UnknownChannels { sensor: String, channels: Vec<u16> },
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("return references unknown object id {0}")]
    UnknownObject(u32),
    #[error("return references unknown cloud id {0}")]
    UnknownCloud(u32),
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("bad magic {0:#010x}, expected 0x414c4453")]
    BadMagic(u32),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated stream: {0}")]
    Truncated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure while delivering frames to a sink; carries the frame that could not be written.
#[derive(Debug, Error)]
#[error("sink failed at frame {frame_id}: {source}")]
pub struct SinkError {
    pub frame_id: u64,
    #[source]
    pub source: std::io::Error,
}
