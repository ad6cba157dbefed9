use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {ell} is too small (need ell >= {min})")]
    PrimeTooSmall { ell: u32, min: u32 },
    #[error("modulus {ell}^{m} does not fit in 32 bits")]
    ModulusTooLarge { ell: u32, m: u32 },
    #[error("power m must be positive")]
    ZeroPower,
    #[error("{0} is not a unit modulo the ring")]
    NotAUnit(i64),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("leading coefficient is not a unit")]
    LeadingNotUnit,
    #[error("insufficient precision: need {needed} (24ths), have {available}")]
    InsufficientPrecision { needed: i64, available: i64 },
    #[error("series has fractional exponents; an integer-q series is required")]
    FractionalSupport,
    #[error("odd weight {0}")]
    OddWeight(i64),
    #[error("no candidate weight up to {0} contains the series")]
    NoCandidateWeight(u32),
    #[error("series is not in the weight {weight} space at level {level}")]
    NotInAmbientSpace { weight: u32, level: u32 },
    #[error("span did not stabilize by level {0}")]
    NotStabilized(u32),
    #[error("operator iteration exceeded dimension {0}")]
    NonTermination(usize),
    #[error("malformed input: {0}")]
    Invalid(String),
    #[error("corrupt cache record: {0}")]
    CorruptCache(String),
    #[error("unsupported record format version {found} (this build reads version {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
