//! Weak functional inequalities for one-dimensional probability measures.
//!
//! The crate works with measures `dμ = e^{-Φ} dx / Z` given through their
//! potential `Φ` and provides:
//!
//! * the core functionals (entropy, variance, oscillation, Dirichlet energy)
//!   over piecewise-linear test functions ([`measure`]);
//! * 1D capacities of half-lines and the capacity-measure necessary condition
//!   for the weak log-Sobolev inequality ([`capacity`]);
//! * Hardy-type two-sided bounds on the optimal weak log-Sobolev constant and
//!   a sufficient-condition checker for potentials ([`hardy`]);
//! * the rate-function algebra converting between the weak log-Sobolev, weak
//!   Poincaré, super-Poincaré and general Beckner families ([`rate`]);
//! * unbounded perturbation machinery for growth-dominated potentials
//!   ([`perturb`]);
//! * predicted entropy/variance/total-variation decay curves for the
//!   associated reversible diffusion semigroup ([`decay`]);
//! * a conservative 1D Fokker-Planck solver and an Euler-Maruyama sampler
//!   producing measured decay traces ([`semigroup`]);
//! * direct empirical verification of the defining inequalities on structured
//!   test-function families ([`verify`]).
//!
//! All types are immutable after construction and every operation is a pure
//! function of its inputs, so concurrent evaluation over parameter grids is
//! safe without synchronization.

pub mod capacity;
pub mod decay;
mod error;
pub mod hardy;
pub mod measure;
pub(crate) mod numerics;
pub mod perturb;
pub mod quad;
pub mod rate;
pub mod semigroup;
pub mod verify;

pub use error::CoreError;
pub use numerics::{lin_spaced, log_spaced};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
