//! Transition probabilities of driven two-level systems.
//!
//! A system `H(t) = ½[[α, V], [V, −α]]` is reduced to the adiabatic-frame
//! amplitude `a₊(∞) ≈ ∫ exp F(t) dt` with `F = iΔ + ln η`. The probability
//! is available from
//!
//! * [`oracle`]: the full equations of motion integrated on the real axis,
//!   and direct quadrature of the first-order amplitude;
//! * [`ddp`]: the closing-point exponent `P ≈ exp(−2 Im Δ(t_c))`;
//! * [`thimble`]: saddles of `F`, their steepest descents and intersection
//!   numbers, evaluated either in the Gaussian approximation or by exact
//!   quadrature along the descents.
//!
//! [`model`] holds the catalog of analytic two-level models and
//! [`schwinger`] maps electric-field profiles onto them.

pub mod continuation;
pub mod ddp;
pub mod error;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod parallel;
pub mod quadrature;
pub mod schwinger;
pub mod thimble;

pub use error::{Error, Result, Warning};
pub use model::{ModelSpec, SingularityCatalog, Window};

pub type C64 = num_complex::Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
