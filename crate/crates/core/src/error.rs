use thiserror::Error;

/// Errors raised anywhere in the radar chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("scene error: {0}")]
    Scene(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A least-squares fit failed; `residual` is the best residual seen.
    #[error("fit error: {reason} (residual {residual:.3e})")]
    Fit { reason: String, residual: f64 },

    #[error("filter design error: {0}")]
    Design(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("mapping error: {0}")]
    Mapping(String),

    /// Loss became non-finite; carries the per-epoch history up to that point.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, history: Vec<f64> },

    #[error("format error: {0}")]
    Format(String),

    #[error("missing artifact {artifact}: run `{stage}` first")]
    MissingArtifact { artifact: String, stage: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("toml decode: {0}")]
    TomlDecode(#[from] toml::de::Error),

    #[error("toml encode: {0}")]
    TomlEncode(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
