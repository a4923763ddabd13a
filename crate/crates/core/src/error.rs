use thiserror::Error;

/// Errors surfaced by the form algebra, the solvers and the CLI loaders.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible dimensions, ranks or bidegrees.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A matrix claimed Hermitian fails the tolerance check.
    #[error("not Hermitian: {0}")]
    NotHermitian(String),

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The trace used to fix the dHYM angle is numerically zero.
    #[error("degenerate angle: |trace| = {modulus:.3e} below threshold")]
    DegenerateAngle { modulus: f64 },

    /// Newton hit a Jacobian with condition number beyond 1e12.
    #[error("singular Jacobian at {context}: condition number {cond:.3e}")]
    SingularJacobian { context: String, cond: f64 },

    /// Newton ran out of iterations; the trace of residual norms is attached.
    #[error("Newton did not converge at {context} after {iterations} iterations; residual {residual:.3e}, trace {trace:?}")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    /// The off-diagonal amplitude fit found a non-negative slope, so no
    /// amplitude can drive the positivity witness to zero.
    #[error("infeasible amplitude fit: slope {slope:.3e} is not negative")]
    InfeasibleFit { slope: f64 },

    /// A residual that should be diagonal for the model shapes is not.
    #[error("residual not diagonal at {context}: off-diagonal norm {norm:.3e}")]
    NotDiagonal { context: String, norm: f64 },

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// I/O failure while reading inputs or writing reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
