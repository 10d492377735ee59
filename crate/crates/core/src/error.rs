use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time series is empty")]
    EmptySeries,
    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },
    #[error("sampling step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("period of {period} samples exceeds series length {len}")]
    PeriodExceedsLength { period: usize, len: usize },
    #[error("period must be at least one sample")]
    ZeroPeriod,
    #[error("series of length {len} is too short (need at least {needed})")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("harmonic {harmonic} of period {period} lies above the Nyquist frequency")]
    HarmonicAboveNyquist { period: usize, harmonic: usize },
    #[error("bandwidth planning needs at least two frequencies or an explicit window")]
    NeedTwoFrequencies,
    #[error("filter window must be an odd integer >= 3, got {0}")]
    NotOdd(usize),
    #[error("duplicate component frequency {0}")]
    DuplicateFrequency(f64),
    #[error("frequency {0} is outside (0, 0.5]")]
    FrequencyOutOfRange(f64),
    #[error("invalid filter configuration: {0}")]
    InvalidFilter(String),
    #[error("series of length {len} is shorter than the filter span {span}")]
    SeriesShorterThanWindow { len: usize, span: usize },
    #[error("replicate count must be at least {needed}, got {got}")]
    DegenerateEnsemble { got: usize, needed: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("ensembles disagree on replicate count ({0} vs {1})")]
    MismatchedB(usize, usize),
    #[error("no ensembles to combine")]
    NothingToCombine,
    #[error("combined period overflows: {0}")]
    PeriodOverflow(String),
    #[error("bands with periods {0} and {1} cannot be compared")]
    IncomparableBands(usize, usize),
    #[error("reference band has zero width at every phase")]
    AllZeroWidths,
    #[error("series do not overlap")]
    NoOverlap,
    #[error("aligned series has zero variance")]
    ZeroVariance,
    #[error("arrays have mismatched lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}
