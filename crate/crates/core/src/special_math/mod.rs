//! Special functions and quadrature used by the cascade-channel formulas.
//!
//! Everything here is pure; [`QuadratureRule`] values are immutable once
//! built and can be shared across threads.

mod bessel;
mod gamma;
pub mod integrate;
mod kernel;
mod laguerre;
mod sum;

pub use bessel::{bessel_k, ln_bessel_k, BESSEL_SEAM, MAX_BESSEL_ORDER};
pub use gamma::{gamma_int, ln_gamma_int, EULER_GAMMA, MAX_GAMMA_ARG};
pub use kernel::ScaledBesselKernel;
pub use laguerre::{gauss_laguerre, laguerre_eval, QuadratureRule, MAX_RULE_ORDER};
pub use sum::{compensated_sum, CompensatedSum};

pub(crate) use gamma::binomial;
