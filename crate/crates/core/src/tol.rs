//! Numerical tolerances used across the crate.
//!
//! All thresholds live here so the solvers, the verification suites and the
//! CLI report exactly the values they enforce. Nothing below is tuned per
//! test; these are the contract numbers.

/// Hermiticity check: `max|M - M*| <= HERMITIAN_REL * (1 + max|M|)`.
pub const HERMITIAN_REL: f64 = 1e-12;

/// Positive definiteness: smallest eigenvalue must exceed
/// `PD_MIN_EIG_REL * (1 + ||M||_F)`. Scale-aware so path endpoints with
/// exact zeros classify as "not positive definite" rather than flapping.
pub const PD_MIN_EIG_REL: f64 = 1e-9;

/// Coefficient pruning inside the sparse form maps, relative to the largest
/// term of the same form.
pub const PRUNE_REL: f64 = 1e-15;

/// Imaginary part allowed on quantities that are real by symmetry.
pub const IMAG_LEAK: f64 = 1e-12;

/// Residual of an equation along a closed-form path (Frobenius norm).
pub const PATH_RESIDUAL: f64 = 1e-10;

/// Positivity witness "has reached zero" threshold at a path endpoint.
pub const WITNESS_ZERO: f64 = 1e-8;

/// Relative agreement between a closed-form expression and the wedge engine.
pub const CLOSED_FORM_REL: f64 = 1e-9;

/// Pairing identity between the trace form and the symbol matrix.
pub const PAIRING: f64 = 1e-10;

/// Agreement of the dHYM coefficient expansion with the direct complex
/// evaluation of `Im(e^{-iθ̂}(ω Id - F)^n)`.
pub const DHYM_IDENTITY: f64 = 1e-10;

/// The exact identity `3 = 1/r + 1/v + 1/z` on the first J-path segment.
pub const SEGMENT_IDENTITY: f64 = 1e-14;

/// Default Newton residual target.
pub const NEWTON_TOL: f64 = 1e-12;

/// Default relative step for finite-difference Jacobians.
pub const FD_STEP: f64 = 1e-7;

/// Newton aborts when the Jacobian condition number exceeds this.
pub const JACOBIAN_COND_MAX: f64 = 1e12;

/// Exactness check for the affine amplitude fit at a third sample point.
pub const AFFINE_FIT: f64 = 1e-10;

/// Alternating minimisation declares stationarity below this change.
pub const STATIONARITY: f64 = 1e-12;

/// Residual norm accepted for every solved continuation grid point.
pub const SOLVED_RESIDUAL: f64 = 1e-8;
