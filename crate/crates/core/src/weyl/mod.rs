//! Weyl tensor frame components and their boost-weight irreducible parts.

mod decompose;
mod json;
mod parts;
mod random;
mod tensor;
pub mod transverse;
mod validate;

pub use decompose::{decompose, reconstruct};
pub use json::{parts_from_json, parts_to_json, weyl_from_json, weyl_to_json};
pub use parts::IrreducibleParts;
pub use random::{random_parts, random_weyl};
pub use tensor::WeylTensor;
pub use transverse::{TMatrix, TRank3, TRank4, TVector, Tensor};
pub use validate::{validate_weyl, ValidationReport, Violation, ViolationKind, IDENTITY_TOL};

pub(crate) use random::{project_rank3, symmetric_traceless};
