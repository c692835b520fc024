use thiserror::Error;

/// Crate-wide error type. Solver outcomes that are expected results
/// (LP infeasibility, AHK infeasibility certificates) are modeled as
/// enum values in their modules, not as errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown tenant `{0}`")]
    UnknownTenant(String),
    #[error("unknown view `{0}`")]
    UnknownView(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("allocation mass {mass} is not 1 within tolerance")]
    UnnormalizedAllocation { mass: f64 },
    #[error("candidate view list is empty")]
    EmptyCatalog,
    #[error("instance has {count} views, enumeration is limited to {limit}")]
    TooManyViews { count: usize, limit: usize },
    #[error("instance has {count} tenants, limit for this operation is {limit}")]
    TooManyTenants { count: usize, limit: usize },
    #[error("tenant `{0}` has zero standalone utility")]
    ZeroMaxUtility(String),
    #[error("no tenant has positive standalone utility")]
    NoActiveTenants,
    #[error("oracle slack {slack} exceeds declared width {width}")]
    WidthViolation { slack: f64, width: f64 },
    #[error("oracle call budget exhausted ({calls} calls, cap {cap})")]
    BudgetExceeded { calls: u64, cap: u64 },
    #[error("log-utility target {q} is unattainable")]
    InfeasibleQ { q: f64 },
    #[error("tenant `{0}` has zero utility for every pooled configuration")]
    NoCoverage(String),
    #[error("internal linear program unexpectedly {0}")]
    DegenerateLp(String),
    #[error("wall time is zero")]
    ZeroDuration,
    #[error("baseline run does not cover the same queries")]
    MisalignedBaseline,
    #[error("run contains no queries")]
    NoQueries,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::MalformedTrace(format!("{other:?}")),
            }
        } else {
            Error::MalformedTrace(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
