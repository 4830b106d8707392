use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Hilbert space specification: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "Fock truncation too small: tail population {tail:.3e} exceeds {threshold:.1e}; \
         try fock_dim >= {suggested}"
    )]
    Truncation {
        tail: f64,
        threshold: f64,
        suggested: usize,
    },

    #[error("unstable steady state: lambda = {lambda:.6} >= lambda_c = {lambda_c:.6}")]
    Instability { lambda: f64, lambda_c: f64 },

    #[error("spectrum collapse: 2*xi = {two_xi:.6e} rad/s >= omega = {omega:.6e} rad/s")]
    SpectrumCollapse { two_xi: f64, omega: f64 },

    #[error("observable has zero force derivative; no sensitivity")]
    NoSensitivity,

    #[error("no momentum signal without dissipation (gamma = 0)")]
    NoSignal,

    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e} s)")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("maximum number of integrator steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("steady state not reached by t = {t:.6e} s: residual {residual:.3e} (in units of gamma)")]
    NotConverged { t: f64, residual: f64 },

    #[error("total dimension {dim} exceeds the dense superoperator limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("Liouvillian null space is degenerate (multiplicity {multiplicity})")]
    DegenerateNullSpace { multiplicity: usize },

    #[error("fidelity {fidelity:.12} exceeds 1 beyond numerical tolerance")]
    FidelityOverflow { fidelity: f64 },

    #[error("root not bracketed in [{lo:.3e}, {hi:.3e}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by the physical parameter choice rather than by
    /// a numerical method.
    pub fn is_physics_domain(&self) -> bool {
        matches!(
            self,
            Error::Instability { .. }
                | Error::SpectrumCollapse { .. }
                | Error::NoSensitivity
                | Error::NoSignal
                | Error::InvalidParameter(_)
                | Error::InvalidSpec(_)
        )
    }
}
