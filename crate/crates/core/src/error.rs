use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tree order k must be at least 1")]
    ZeroOrder,

    #[error("tree order k={k} exceeds the configured cap of {cap}")]
    OrderTooLarge { k: u32, cap: u32 },

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    ProbabilityOutOfRange(String),

    #[error("cannot parse probability {0:?}")]
    BadProbability(String),

    #[error("exact rational mode requires a rational p, got {0}")]
    IrrationalInExactMode(String),

    #[error("expected 0 < 2*gamma <= 1, got gamma = {0}")]
    GammaOutOfRange(String),

    #[error("tolerance must be positive, got {0}")]
    BadTolerance(String),

    #[error("mean depth is undefined when no bits were emitted")]
    NoOutput,

    #[error("{test} needs at least {min} bits, got {got}")]
    SampleTooSmall { test: &'static str, min: usize, got: usize },

    #[error("codebook corrupted: buffer of length {len} matches no codeword and is not a restart word")]
    CorruptCodebook { len: usize },

    #[error("invalid codebook file, line {line}: {msg}")]
    CodebookFormat { line: usize, msg: String },

    #[error("invalid byte 0x{byte:02x} at offset {offset} in ascii01 input")]
    BadAsciiBit { byte: u8, offset: usize },

    #[error("requested {requested} bits but the input holds only {available}")]
    NotEnoughBits { requested: usize, available: usize },

    #[error("expected height did not converge to tolerance by k={k_reached} (last delta {last_delta}, best value {best})")]
    NotConverged { k_reached: u32, best: String, last_delta: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
