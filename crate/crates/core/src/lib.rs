//! Simulation and verification toolkit for the symmetric tridiagonal
//! matrix process with Brownian diagonal and Bessel off-diagonal entries,
//! and for the stochastic differential equations satisfied by its
//! eigenvalues.
//!
//! Module map:
//!
//! - [`tridiag`]: matrix type, principal minors, continuants, deleted-minor
//!   determinants (float and exact rational).
//! - [`eig`]: Sturm-sequence bisection eigensolver, characteristic
//!   polynomial derivatives, interlacing checks.
//! - [`sde`]: reproducible driving noise and Bessel integrators.
//! - [`dyson`]: matrix paths, minor eigenvalue paths, and every coefficient
//!   of the eigenvalue SDE, plus pathwise and ensemble verification.
//! - [`identities`]: exact-arithmetic certification of the determinant
//!   identities the SDE rests on.
//! - [`gbe`]: the static Gaussian beta ensemble and its moment checks.

pub mod dyson;
pub mod eig;
pub mod gbe;
pub mod identities;
pub mod sde;
pub mod tridiag;

pub use tridiag::{MinorRange, RationalTridiag, SymTridiag};
