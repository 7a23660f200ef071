use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid limits: {0}")]
    InvalidLimits(String),

    #[error("singular parameterization at u = {u}: |C'(u)| vanishes")]
    SingularParameterization { u: f64 },

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(usize),

    #[error("parameter step does not advance at u = {u} with feed {v} mm/s")]
    StepDegeneracy { u: f64, v: f64 },

    #[error("feed rate limiting did not converge at u = {u} after {iterations} iterations")]
    ScanConvergence { u: f64, iterations: usize },

    #[error("malformed scatter: {0}")]
    MalformedScatter(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("block with zero start and end feed (dwell) is not supported")]
    DwellUnsupported,

    #[error("infeasible junction: {0}")]
    InfeasibleJunction(String),

    #[error("schedule did not converge after {sweeps} sweeps: {detail}")]
    NonConvergence { sweeps: usize, detail: String },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("interpolation failed in block {block} at t = {t}: {detail}")]
    Interpolation {
        block: usize,
        t: f64,
        detail: String,
    },

    #[error("{source_name}:{location}: {message}")]
    Parse {
        source_name: String,
        location: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }

    pub(crate) fn parse(
        source_name: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
