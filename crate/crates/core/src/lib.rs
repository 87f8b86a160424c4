//! Boost-weight decomposition of the Weyl tensor in `d >= 4` dimensions and a
//! numerical peeling cascade built from radial linear ODE systems of the form
//! `dy/dr = (A/r + B(r)) y + b(r)`.
//!
//! * [`weyl`]: frame components, irreducible parts, validation.
//! * [`ode`]: integration in `ln r`, boundedness checks, decay exponent fits.
//! * [`cascade`]: Sachs equation and the staged boost-weight systems.
//! * [`checks`]: brute-force oracles and the acceptance suite.

pub mod cascade;
pub mod checks;
mod error;
pub mod frame;
pub mod ode;
pub mod weyl;

pub use error::{Error, Result};
pub use frame::{boost_weight_of, FrameConvention};
pub use weyl::{decompose, reconstruct, validate_weyl, IrreducibleParts, WeylTensor};
