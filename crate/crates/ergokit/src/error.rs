use alloc::string::String;

use crate::scalar::Scalar;

/// A half-open interval reported alongside a failed check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Witness {
    pub fn new(lo: Scalar, hi: Scalar) -> Self {
        Witness { lo, hi }
    }
}

impl core::fmt::Display for Witness {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: rt({0}) against rt({1})")]
    FieldMismatch(u64, u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("tail periods have an irrational ratio")]
    IncommensurablePeriods,
    #[error("domain gap at {0}")]
    DomainGap(Witness),
    #[error("domain overlap at {0}")]
    DomainOverlap(Witness),
    #[error("image gap at {0}")]
    ImageGap(Witness),
    #[error("image overlap at {0}")]
    ImageOverlap(Witness),
    #[error("composition leaves the eventually periodic class: {0}")]
    CompositionOutOfClass(String),
    #[error("sets do not partition the line near {0}")]
    NotAPartition(Witness),
    #[error("range of the inner map differs from the domain of the outer map")]
    DomainRangeMismatch,
    #[error("overlap at {0}")]
    Overlap(Witness),
    #[error("family is not increasing at position {0}")]
    NotIncreasing(usize),
    #[error("supremum has infinite measure")]
    InfiniteSupremum,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("restricting set has infinite measure")]
    CInfinite,
    #[error("measure mismatch: {0}")]
    MeasureMismatch(String),
    #[error("set is not contained in the ambient set")]
    NotSubset,
    #[error("map is not an involution")]
    NotInvolution,
    #[error("support has infinite measure")]
    InfiniteSupport,
    #[error("conservative aperiodic component present")]
    UnsupportedAperiodic,
    #[error("out of class: {0}")]
    OutOfClass(String),
    #[error("mass escapes without returning near {0}")]
    NotConservative(Witness),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("map is not aperiodic on its support")]
    NotAperiodic,
    #[error("classification left unknown components")]
    ClassificationIncomplete,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl Error {
    /// Stable upper-case code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DIVISION_BY_ZERO",
            Error::FieldMismatch(..) => "FIELD_MISMATCH",
            Error::Parse(_) => "PARSE_ERROR",
            Error::IncommensurablePeriods => "INCOMMENSURABLE_PERIODS",
            Error::DomainGap(_) => "DOMAIN_GAP",
            Error::DomainOverlap(_) => "DOMAIN_OVERLAP",
            Error::ImageGap(_) => "IMAGE_GAP",
            Error::ImageOverlap(_) => "IMAGE_OVERLAP",
            Error::CompositionOutOfClass(_) => "COMPOSITION_OUT_OF_CLASS",
            Error::NotAPartition(_) => "NOT_A_PARTITION",
            Error::DomainRangeMismatch => "DOMAIN_RANGE_MISMATCH",
            Error::Overlap(_) => "OVERLAP",
            Error::NotIncreasing(_) => "NOT_INCREASING",
            Error::InfiniteSupremum => "INFINITE_SUPREMUM",
            Error::OutOfRange(_) => "OUT_OF_RANGE",
            Error::CInfinite => "C_INFINITE",
            Error::MeasureMismatch(_) => "MEASURE_MISMATCH",
            Error::NotSubset => "NOT_SUBSET",
            Error::NotInvolution => "NOT_INVOLUTION",
            Error::InfiniteSupport => "INFINITE_SUPPORT",
            Error::UnsupportedAperiodic => "UNSUPPORTED_APERIODIC",
            Error::OutOfClass(_) => "OUT_OF_CLASS",
            Error::NotConservative(_) => "NOT_CONSERVATIVE",
            Error::BudgetExhausted(_) => "BUDGET_EXHAUSTED",
            Error::NotAperiodic => "NOT_APERIODIC",
            Error::ClassificationIncomplete => "CLASSIFICATION_INCOMPLETE",
            Error::VerificationFailed(_) => "VERIFICATION_FAILED",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Error::DomainGap(w)
            | Error::DomainOverlap(w)
            | Error::ImageGap(w)
            | Error::ImageOverlap(w)
            | Error::NotAPartition(w)
            | Error::Overlap(w)
            | Error::NotConservative(w) => Some(w),
            _ => None,
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
