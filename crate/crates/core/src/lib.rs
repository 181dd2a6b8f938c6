//! Exact-arithmetic canonical heights and their realization as entropies.
//!
//! The library computes canonical heights of rational points on elliptic
//! curves and of rational numbers under polynomial maps, place by place,
//! in exact arithmetic wherever the quantity is exact (valuations, division
//! polynomial values, divisibility sequences) and in documented-precision
//! floating point where a real number is unavoidable (logarithms, entropy
//! quotients). The same local data is then re-read as Bowen volume-growth
//! entropy of diagonal sequential actions on the adeles: a sequence of
//! multiplication maps shrinks a reference box, the exact log-measure of
//! the common preimage is tracked per place, and the normalized growth
//! quotient converges to the height that produced the sequence.
//!
//! Modules, in dependency order:
//!
//! * [`places`]: exact rationals, p-adic valuations, logs at all places.
//! * [`solenoid`]: genus-0 baseline (projective heights, Jensen quadrature,
//!   periodic counts, Mobius realizability congruence).
//! * [`elliptic`]: Weierstrass curves, group law, division polynomials,
//!   elliptic divisibility sequences, reduction analysis.
//! * [`heights`]: local canonical heights by closed form, Tate formula and
//!   division-polynomial limit; the global height and its decomposition.
//! * [`adelic`]: diagonal actions on the adeles and their volume-growth
//!   entropy traces.
//! * [`morphic`]: canonical heights for polynomial maps of the projective
//!   line and their entropy identities.
//! * [`julia`]: archimedean morphic heights through periodic-point sums
//!   and the Tchebycheff/arcsine closed forms.

pub mod adelic;
pub mod elliptic;
pub mod error;
pub mod heights;
pub mod julia;
pub mod morphic;
pub mod places;
pub mod solenoid;

pub use error::{Error, Result};
pub use places::{ExactRational, Place, RateFunction};
