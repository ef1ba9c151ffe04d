use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial degree {found} is too low (need at least {needed})")]
    DegreeTooLow { found: usize, needed: usize },

    #[error("root near {root} is not simple (|P'| = {derivative:e})")]
    MultipleRoot { root: Complex64, derivative: f64 },

    #[error("root iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("pole at {at} is degenerate (|den'| = {derivative:e})")]
    DegeneratePole { at: Complex64, derivative: f64 },

    #[error("path endpoint {point} lies within {eps} of root {root}")]
    EndpointTooClose { point: Complex64, root: Complex64, eps: f64 },

    #[error("y = {y} is within the clearance radius of root #{root}")]
    NearRoot { y: Complex64, root: usize },

    #[error("integration step failed near {at}")]
    StepFailure { at: Complex64 },

    #[error("contour integral of 1/P_0 vanishes ({value})")]
    ZeroDenominator { value: Complex64 },

    #[error("quadrature cross-check failed: {detail}")]
    QuadratureMismatch { detail: String },

    #[error("arg(x) jumps by {jump} at x = {x}")]
    BranchDiscontinuity { x: Complex64, jump: f64 },

    #[error("Newton iteration diverged at x = {x} after {iterations} steps (|G| = {residual:e})")]
    NewtonDiverged { x: Complex64, iterations: usize, residual: f64 },

    #[error("Newton iterates at x = {x} wound around root #{root}")]
    JumpedBranch { x: Complex64, root: usize },

    #[error("continuation step at x = {x} could not be refined enough")]
    StepTooLarge { x: Complex64 },

    #[error("decay condition violated: {detail}")]
    DecayViolation { detail: String },

    #[error("path to {y} passes through root {root}")]
    PathThroughRoot { y: Complex64, root: Complex64 },

    #[error("solution blew up at x = {x} (y = {y})")]
    BlowupDetected { x: Complex64, y: Complex64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: Complex64 },

    #[error("no blow-up near {x_sing} (closest approach {closest:e}, max |y| = {max_abs_y:e})")]
    NoBlowup { x_sing: Complex64, closest: f64, max_abs_y: f64 },

    #[error("samples leave the root region (max |y - p| = {max_distance})")]
    NotInRootRegion { max_distance: f64 },

    #[error("transseries constant is unstable (spread {stability})")]
    UnstableFit { stability: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable variant name, used on diagnostic streams.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegreeTooLow { .. } => "DegreeTooLow",
            Error::MultipleRoot { .. } => "MultipleRoot",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegeneratePole { .. } => "DegeneratePole",
            Error::EndpointTooClose { .. } => "EndpointTooClose",
            Error::NearRoot { .. } => "NearRoot",
            Error::StepFailure { .. } => "StepFailure",
            Error::ZeroDenominator { .. } => "ZeroDenominator",
            Error::QuadratureMismatch { .. } => "QuadratureMismatch",
            Error::BranchDiscontinuity { .. } => "BranchDiscontinuity",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::JumpedBranch { .. } => "JumpedBranch",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::DecayViolation { .. } => "DecayViolation",
            Error::PathThroughRoot { .. } => "PathThroughRoot",
            Error::BlowupDetected { .. } => "BlowupDetected",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::NoBlowup { .. } => "NoBlowup",
            Error::NotInRootRegion { .. } => "NotInRootRegion",
            Error::UnstableFit { .. } => "UnstableFit",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// True for failures of a numerical verification step rather than of the math itself.
    pub fn is_verification(&self) -> bool {
        matches!(
            self,
            Error::NoBlowup { .. }
                | Error::QuadratureMismatch { .. }
                | Error::UnstableFit { .. }
                | Error::NotInRootRegion { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
