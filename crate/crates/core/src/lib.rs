//! Pointwise numerical laboratory for generalised Monge-Ampère equations on
//! vector bundles.
//!
//! Everything here lives at a single point of a complex manifold: curvature
//! data is a collection of `r × r` complex blocks, differential forms are
//! finite sums of `End(E)`-valued `dz^I ∧ dz̄^J` monomials, and the equations
//! (vbMA, σ_k, J, dHYM) reduce to matrix identities between top-degree
//! coefficients. On top of the exact form algebra sit:
//!
//! - principal-symbol construction and the rank-one trace positivity check
//!   ("condition E") for each equation,
//! - the explicit curvature families along which the equations are satisfied
//!   while the positivity check degenerates,
//! - Newton/implicit-function continuations that extend those families to
//!   the σ_k and dHYM settings at small ε.
//!
//! Modules are layered bottom-up: [`matrixkit`] (dense complex linear
//! algebra) → [`forms`] (graded wedge algebra) → [`equations`] (residual
//! evaluators and closed forms) → [`models`] (explicit curvature families) →
//! [`ellipticity`] (symbols and positivity scans) → [`continuation`]
//! (Newton drivers and path reports) → [`cli`] (command front end).

pub mod cli;
pub mod continuation;
pub mod ellipticity;
pub mod equations;
mod error;
pub mod forms;
pub mod matrixkit;
pub mod models;
pub mod report;
pub mod tol;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
