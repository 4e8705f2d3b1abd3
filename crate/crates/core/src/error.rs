use thiserror::Error;

/// Errors raised by the library. The variant name is what the CLI reports.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("CompositeP: {0} is not prime")]
    CompositeP(u32),
    #[error("UnsupportedPrime: p = {0}, only odd primes are supported")]
    UnsupportedPrime(u32),
    #[error("ReducibleModulus: {0:?} is reducible over F_p")]
    ReducibleModulus(Vec<u32>),
    #[error("ZeroPrecision: {0}")]
    ZeroPrecision(&'static str),
    #[error("TooLarge: {0}")]
    TooLarge(String),
    #[error("BadDescriptor: {0}")]
    BadDescriptor(String),
    #[error("RingMismatch: {0}")]
    RingMismatch(String),
    #[error("NonIntegralDivision: coefficient {coeff} of {poly} not divisible by {divisor}")]
    NonIntegralDivision { poly: String, coeff: String, divisor: String },
    #[error("LengthTooShort: need length {needed}, have {have}")]
    LengthTooShort { needed: usize, have: usize },
    #[error("NotInAugmentationIdeal")]
    NotInAugmentationIdeal,
    #[error("NoSection: {0}")]
    NoSection(String),
    #[error("NotInRelativeIdeal")]
    NotInRelativeIdeal,
    #[error("NotSquareZero")]
    NotSquareZero,
    #[error("SingularBasis")]
    SingularBasis,
    #[error("BadRank: {0}")]
    BadRank(String),
    #[error("FiltrationChanged")]
    FiltrationChanged,
    #[error("NotAPairMorphism")]
    NotAPairMorphism,
    #[error("NonUnit")]
    NonUnit,
    #[error("SingularPsi")]
    SingularPsi,
    #[error("BadTruncation: ({m}, {n})")]
    BadTruncation { m: usize, n: usize },
    #[error("OddRank: {0}")]
    OddRank(usize),
    #[error("NotAlternating")]
    NotAlternating,
    #[error("BudgetExceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("InvalidFiltrationLift: {0}")]
    InvalidFiltrationLift(String),
    #[error("NonConvergent after {0} terms")]
    NonConvergent(usize),
    #[error("ValuationMismatch: {0}")]
    ValuationMismatch(String),
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// The bare variant name, used by the CLI for domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::CompositeP(_) => "CompositeP",
            Error::UnsupportedPrime(_) => "UnsupportedPrime",
            Error::ReducibleModulus(_) => "ReducibleModulus",
            Error::ZeroPrecision(_) => "ZeroPrecision",
            Error::TooLarge(_) => "TooLarge",
            Error::BadDescriptor(_) => "BadDescriptor",
            Error::RingMismatch(_) => "RingMismatch",
            Error::NonIntegralDivision { .. } => "NonIntegralDivision",
            Error::LengthTooShort { .. } => "LengthTooShort",
            Error::NotInAugmentationIdeal => "NotInAugmentationIdeal",
            Error::NoSection(_) => "NoSection",
            Error::NotInRelativeIdeal => "NotInRelativeIdeal",
            Error::NotSquareZero => "NotSquareZero",
            Error::SingularBasis => "SingularBasis",
            Error::BadRank(_) => "BadRank",
            Error::FiltrationChanged => "FiltrationChanged",
            Error::NotAPairMorphism => "NotAPairMorphism",
            Error::NonUnit => "NonUnit",
            Error::SingularPsi => "SingularPsi",
            Error::BadTruncation { .. } => "BadTruncation",
            Error::OddRank(_) => "OddRank",
            Error::NotAlternating => "NotAlternating",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidFiltrationLift(_) => "InvalidFiltrationLift",
            Error::NonConvergent(_) => "NonConvergent",
            Error::ValuationMismatch(_) => "ValuationMismatch",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
