//! The incremental Lagrangian of a backward step and its first and second
//! variations, assembled by forward-mode automatic differentiation over the
//! element-local degrees of freedom, plus the directly coded weak forms of
//! the binary system for cross-validation.

mod assemble;
mod binary;
mod dual;
mod layout;
mod ternary;

pub use assemble::{build_pattern, AssembledSystem, CsrMatrix, SparsityPattern};
pub use binary::{
    binary_lagrangian_density, binary_mesh_1d, binary_mesh_2d, BinaryStepProblem, Diffusivity,
    QpBasis, BINARY_FIELDS,
};
pub use dual::Dual2;
pub use layout::{Discretization, DofLayout, FieldDef};
pub use ternary::{TernaryStepProblem, TERNARY_FIELDS};
