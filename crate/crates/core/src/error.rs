use thiserror::Error;

/// Errors raised by game construction, composition, classification and sweeps.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry {0} is not a probability in [0, 1]")]
    InvalidProbability(usize),

    #[error("cannot parse probability {0:?}")]
    ParseProbability(String),

    #[error("game has spatial period 0")]
    EmptyGame,

    #[error("degenerate game: entry {0} is 0 or 1")]
    DegenerateGame(usize),

    #[error("games have different spatial periods ({expected} vs {found})")]
    PeriodMismatch { expected: usize, found: usize },

    #[error("expected {expected} mixing weights, got {found}")]
    WeightCountMismatch { expected: usize, found: usize },

    #[error("schedule has no games")]
    EmptySchedule,

    #[error("phase {phase} is not a residue modulo {period}")]
    InvalidPhase { phase: usize, period: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("degenerate step distribution at residue {0}: extremal step has zero probability")]
    DegenerateDistribution(usize),

    #[error("eigenvalue refinement did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },

    #[error("residue chain is reducible")]
    ReducibleResidueChain,

    #[error("simulation inconclusive: velocity {velocity:e} +/- {half_width:e}")]
    InconclusiveSimulation { velocity: f64, half_width: f64 },

    #[error("kernel is fair within tolerance (ln c = {ln_c:e}); no drift sign to compare")]
    FairWithinTolerance { ln_c: f64 },

    #[error("unknown figure {0}")]
    UnknownFigure(u32),

    #[error("figure {figure}: {message}")]
    FigureParameter { figure: u32, message: String },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("at grid point {point:?}: {source}")]
    AtGridPoint {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ConvergenceFailure { .. } | Error::InconclusiveSimulation { .. } => true,
            Error::AtGridPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at_point(self, point: &[f64]) -> Error {
        Error::AtGridPoint {
            point: point.to_vec(),
            source: Box::new(self),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
