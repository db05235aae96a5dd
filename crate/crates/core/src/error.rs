use thiserror::Error;

/// Errors raised by the model and the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpdcError {
    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("invalid dimensionless configuration: {0}")]
    InvalidConfig(String),

    #[error("signal and idler group indices coincide (|n'_s - n'_i| = {delta:e}); frequency scale undefined")]
    DegenerateDispersion { delta: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error {error:e}, tolerance {tolerance:e})")]
    NoConvergence {
        subdivisions: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("no half-maximum crossing found within {radius} of the peak on the {side} side")]
    NoBracket { side: &'static str, radius: f64 },

    #[error("kernel denominator vanishes on the integration path")]
    SingularDenominator,

    #[error("a joint spectral grid needs a pump with nonzero bandwidth")]
    MonochromaticPump,

    #[error("grid edge density {ratio:e} of maximum still above 1e-4 after {rounds} expansions")]
    EdgeCriterionUnmet { ratio: f64, rounds: usize },

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("phase-mismatch integral tail not converged at |phi| <= {phi_max}")]
    TailNotConverged { phi_max: f64 },

    #[error("mode sum not converged after {modes} modes (tail bound {tail:e})")]
    SumNotConverged { modes: usize, tail: f64 },

    #[error("grids have different axes")]
    AxisMismatch,

    #[error("pair-probability level {level} is not attainable (maximum {max})")]
    ConstraintInfeasible { level: f64, max: f64 },
}

impl SpdcError {
    /// True for failures of a numerical method, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SpdcError::NoConvergence { .. }
                | SpdcError::NoBracket { .. }
                | SpdcError::SingularDenominator
                | SpdcError::EdgeCriterionUnmet { .. }
                | SpdcError::TailNotConverged { .. }
                | SpdcError::SumNotConverged { .. }
                | SpdcError::ConstraintInfeasible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, SpdcError>;
