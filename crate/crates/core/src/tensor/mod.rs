//! Symmetry-aware tensor storage.

mod canonical;
mod dense;
mod index;
pub mod quaternion;

pub use canonical::{
    flatten_isometry, identity_tensor, unflatten_isometry, CanonicalTensor, CanonicalizeOptions, ComponentKind,
    FreeCoordinate, SymmetryClass, CLASS_TOLERANCE,
};
pub use dense::DenseTensor;
pub use index::{gamma, has_repeat, is_paired, sort_sign, MultiIndex, Positions, TensorShape};
