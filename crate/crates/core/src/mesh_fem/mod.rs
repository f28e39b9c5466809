//! Meshes, degree-two Lagrange spaces, quadrature and field evaluation.

mod field;
mod mesh;
mod quadrature;
mod space;

pub use field::{integrate_scalar, interpolate, interpolate_vector, Field};
pub use mesh::{build_interval_mesh, build_unit_square_mesh, Facet, Mesh, Point};
pub use quadrature::QuadratureRule;
pub use space::{
    build_function_space, local_scalar_dofs, reference_gradients, reference_values, BasisEval,
    CellGeometry, FunctionSpace,
};
