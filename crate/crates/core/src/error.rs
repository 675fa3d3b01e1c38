use thiserror::Error;

/// Every failure mode surfaced by the library.
///
/// The CLI maps [`Error::is_validation`] variants to exit code 2 and the rest
/// to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite evaluation of {what} at ({u_sq}, {v})")]
    NonFiniteEvaluation { what: &'static str, u_sq: f64, v: f64 },
    #[error("quadrature failed: estimated error {error_estimate:.3e} after {intervals} subintervals")]
    QuadratureFailure { error_estimate: f64, intervals: usize },
    #[error("no fold found in v-window [{lo}, {hi}]")]
    NoFoldFound { lo: f64, hi: f64 },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("continuation stalled at gamma = {gamma:.6e}, v0 = {v0:.6e}")]
    ContinuationStall { gamma: f64, v0: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("spatial eigenvalue ordering breaks down: {0}")]
    OrderingBreakdown(String),
    #[error("|lambda + 2| = {distance:.3e} is within 10 eps of -2")]
    NearMinusTwo { distance: f64 },
    #[error("step size underflow at xi = {xi:.6e}")]
    StiffnessFailure { xi: f64 },
    #[error("precision loss during renormalization at xi = {xi:.6e}")]
    PrecisionLoss { xi: f64 },
    #[error("square-root argument {re:.3e}{im:+.3e}i lies on the branch cut")]
    BranchCut { re: f64, im: f64 },
    #[error("contour refinement exceeded {0} points")]
    ContourTooCoarse(usize),
    #[error("eigenvalue solver failed: {0}")]
    SolverFailure(String),
    #[error("eigenvector has mixed parity")]
    MixedParity,
    #[error("non-finite state at t = {t:.6e}")]
    NonFinite { t: f64 },
}

impl Error {
    /// True for failures caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Regime(_)
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::Grid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
