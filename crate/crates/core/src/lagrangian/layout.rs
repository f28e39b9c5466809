use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh_fem::{build_function_space, FunctionSpace, Mesh, QuadratureRule};

/// One unknown field of the monolithic system.
#[derive(Debug, Clone)]
pub struct FieldDef {
    pub name: &'static str,
    pub components: usize,
    /// Offset of this field's block in the global dof vector.
    pub offset: usize,
    pub len: usize,
}

/// Ordered fields of a step problem, each a contiguous dof block.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub fields: Vec<FieldDef>,
    pub total: usize,
}

impl DofLayout {
    pub fn new(specs: &[(&'static str, usize)], n_scalar: usize) -> Self {
        let mut fields = Vec::with_capacity(specs.len());
        let mut offset = 0;
        for &(name, components) in specs {
            let len = components * n_scalar;
            fields.push(FieldDef { name, components, offset, len });
            offset += len;
        }
        DofLayout { fields, total: offset }
    }

    pub fn field(&self, name: &str) -> &FieldDef {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .unwrap_or_else(|| panic!("unknown field {name}"))
    }

    pub fn slice<'a>(&self, name: &str, u: &'a [f64]) -> &'a [f64] {
        let f = self.field(name);
        &u[f.offset..f.offset + f.len]
    }

    pub fn slice_mut<'a>(&self, name: &str, u: &'a mut [f64]) -> &'a mut [f64] {
        let f = self.field(name);
        &mut u[f.offset..f.offset + f.len]
    }
}

/// Shared spatial data of a step problem: spaces, quadrature, the dof
/// layout, and the flux constraints of the closed system.
#[derive(Debug)]
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    pub scalar: Arc<FunctionSpace>,
    pub vector: Arc<FunctionSpace>,
    pub quad: QuadratureRule,
    pub layout: DofLayout,
    /// Global dofs pinned to zero: normal flux components on the boundary.
    pub constrained: Vec<usize>,
}

impl Discretization {
    /// Builds spaces and the layout; `fields` names each unknown with its
    /// kind (`true` marks flux fields living in the vector space and
    /// receiving the zero-normal-flux constraint).
    pub fn new(mesh: Arc<Mesh>, fields: &[(&'static str, bool)]) -> Result<Self> {
        let scalar = Arc::new(build_function_space(mesh.clone(), 1)?);
        let dim = mesh.dimension();
        let vector = if dim == 1 {
            scalar.clone()
        } else {
            Arc::new(build_function_space(mesh.clone(), dim)?)
        };
        let n_scalar = scalar.n_scalar_dofs();
        let specs: Vec<(&'static str, usize)> = fields
            .iter()
            .map(|&(name, is_flux)| (name, if is_flux { dim } else { 1 }))
            .collect();
        let layout = DofLayout::new(&specs, n_scalar);
        let flux_local = vector.normal_flux_dofs();
        let mut constrained = Vec::new();
        for (def, &(_, is_flux)) in layout.fields.iter().zip(fields) {
            if is_flux {
                constrained.extend(flux_local.iter().map(|&d| def.offset + d));
            }
        }
        constrained.sort_unstable();
        let quad = QuadratureRule::for_dimension(dim);
        Ok(Discretization { mesh, scalar, vector, quad, layout, constrained })
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.total
    }

    /// Splits a state vector into named field views (for diagnostics).
    pub fn field_values<'a>(&self, name: &str, u: &'a [f64]) -> &'a [f64] {
        self.layout.slice(name, u)
    }

    pub fn check_state_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_dofs() {
            return Err(Error::invalid(format!(
                "state length {} does not match dof count {}",
                u.len(),
                self.n_dofs()
            )));
        }
        Ok(())
    }
}
