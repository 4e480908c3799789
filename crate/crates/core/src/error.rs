use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The trajectory left the region where the chart data is analytic.
    #[error("left continuation tube at s = {time}: {reason}")]
    LeftTube { time: Complex64, reason: String },

    /// A real trajectory left the chart box.
    #[error("trajectory left the chart box at s = {time}")]
    ChartExit { time: Complex64 },

    #[error("step size underflow at s = {time} (h = {step:e})")]
    StepUnderflow { time: Complex64, step: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),

    #[error("time path leaves the disk of radius {radius}: |s| = {modulus}")]
    OutsideDisk { radius: f64, modulus: f64 },

    #[error("flow depends on the time path: discrepancy {0:e}")]
    PathDependence(f64),

    #[error("ill-conditioned matrix: {0}")]
    IllConditioned(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

impl Error {
    /// Short code used in per-row CSV failure columns.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::LeftTube { .. } | Error::PathDependence(_) => "BLOWUP",
            Error::ChartExit { .. } => "CHART_EXIT",
            Error::StepUnderflow { .. } | Error::MaxSteps(_) => "TOL",
            Error::Config { .. } | Error::UnknownSuite(_) => "CONFIG",
            Error::InvalidInput(_) | Error::OutsideDisk { .. } => "INPUT",
            Error::IllConditioned(_) => "ILL_CONDITIONED",
        }
    }
}
