use std::sync::Arc;

use super::mesh::{Mesh, Point};
use super::quadrature::QuadratureRule;
use super::space::FunctionSpace;
use crate::error::{Error, Result};

/// A finite-element function: a coefficient per dof of its space.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<FunctionSpace>,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn new(space: Arc<FunctionSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::invalid(format!(
                "coefficient length {} does not match space dof count {}",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(Field { space, coeffs })
    }

    pub fn zeros(space: Arc<FunctionSpace>) -> Self {
        let n = space.n_dofs();
        Field { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Value of a scalar field at a reference point of a cell.
    pub fn eval_in_cell(&self, cell: usize, p: Point) -> Result<f64> {
        let basis = self.space.evaluate_basis(cell, &[p])?;
        let dofs = self.space.cell_scalar_dofs(cell);
        Ok(dofs
            .iter()
            .zip(&basis.values[0])
            .map(|(&d, &n)| self.coeffs[d] * n)
            .sum())
    }

    /// Integral of a scalar field over the domain.
    pub fn integral(&self) -> f64 {
        let quad = QuadratureRule::for_dimension(self.space.mesh().dimension());
        let mut total = 0.0;
        for cell in 0..self.space.mesh().n_cells() {
            let geom = self.space.cell_geometry(cell);
            let dofs = self.space.cell_scalar_dofs(cell);
            let basis = self.space.evaluate_basis(cell, &quad.points).expect("cell in range");
            for (q, w) in quad.weights.iter().enumerate() {
                let v: f64 = dofs
                    .iter()
                    .zip(&basis.values[q])
                    .map(|(&d, &n)| self.coeffs[d] * n)
                    .sum();
                total += w * geom.det * v;
            }
        }
        total
    }
}

/// Interpolates a scalar function by evaluation at the Lagrange nodes.
pub fn interpolate(space: &Arc<FunctionSpace>, f: impl Fn(Point) -> f64) -> Result<Field> {
    if space.components() != 1 {
        return Err(Error::invalid("interpolate expects a scalar space"));
    }
    let coeffs = (0..space.n_scalar_dofs()).map(|s| f(space.dof_point(s))).collect();
    Field::new(space.clone(), coeffs)
}

/// Interpolates a vector-valued function (component-major coefficients).
pub fn interpolate_vector(space: &Arc<FunctionSpace>, f: impl Fn(Point) -> [f64; 2]) -> Result<Field> {
    let comps = space.components();
    let n = space.n_scalar_dofs();
    let mut coeffs = vec![0.0; comps * n];
    for s in 0..n {
        let v = f(space.dof_point(s));
        for c in 0..comps {
            coeffs[c * n + s] = v[c];
        }
    }
    Field::new(space.clone(), coeffs)
}

/// Sum over cells and quadrature points of `w |J| density(cell, point)`.
///
/// The callback receives the cell index and the physical coordinates of the
/// quadrature point. Cells are visited in order, so the reduction is
/// deterministic.
pub fn integrate_scalar(
    mesh: &Arc<Mesh>,
    quad: &QuadratureRule,
    mut density: impl FnMut(usize, Point) -> f64,
) -> f64 {
    let mut total = 0.0;
    for cell in 0..mesh.n_cells() {
        let ids = mesh.cell_vertex_ids(cell);
        let a = mesh.vertex(ids[0]);
        let det;
        let (bx, cx);
        if mesh.dimension() == 1 {
            let b = mesh.vertex(ids[1]);
            det = b[0] - a[0];
            bx = [det, 0.0];
            cx = [0.0, 0.0];
        } else {
            let b = mesh.vertex(ids[1]);
            let c = mesh.vertex(ids[2]);
            bx = [b[0] - a[0], b[1] - a[1]];
            cx = [c[0] - a[0], c[1] - a[1]];
            det = bx[0] * cx[1] - cx[0] * bx[1];
        }
        for (q, &w) in quad.weights.iter().enumerate() {
            let p = quad.points[q];
            let phys = [
                a[0] + p[0] * bx[0] + p[1] * cx[0],
                a[1] + p[0] * bx[1] + p[1] * cx[1],
            ];
            total += w * det * density(cell, phys);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_fem::mesh::{build_interval_mesh, build_unit_square_mesh};
    use crate::mesh_fem::space::build_function_space;

    fn space_1d(n: usize) -> Arc<FunctionSpace> {
        Arc::new(build_function_space(Arc::new(build_interval_mesh(n, 1.0).unwrap()), 1).unwrap())
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let s = space_1d(4);
        let c = interpolate(&s, |_| 0.5).unwrap();
        assert!(c.coeffs().iter().all(|&v| v == 0.5));

        let ramp = interpolate(&s, |p| p[0]).unwrap();
        for d in 0..s.n_scalar_dofs() {
            assert!((ramp.coeffs()[d] - s.dof_point(d)[0]).abs() < 1e-15);
        }

        // quadratics are reproduced exactly: check at off-node points
        let sq = interpolate(&s, |p| p[0] * p[0]).unwrap();
        let mut max_err: f64 = 0.0;
        for cell in 0..4 {
            for &t in &[0.123, 0.5, 0.88] {
                let p = sq.space().map_point(cell, [t, 0.0]);
                let v = sq.eval_in_cell(cell, [t, 0.0]).unwrap();
                max_err = max_err.max((v - p[0] * p[0]).abs());
            }
        }
        assert!(max_err < 1e-14, "max interpolation error {max_err}");
    }

    #[test]
    fn integrals_match_closed_forms() {
        let q1 = QuadratureRule::interval();
        let m1 = Arc::new(build_interval_mesh(8, 1.0).unwrap());
        let one = integrate_scalar(&m1, &q1, |_, _| 1.0);
        assert!((one - 1.0).abs() < 1e-14);
        let ramp = integrate_scalar(&m1, &q1, |_, p| p[0]);
        assert!((ramp - 0.5).abs() < 1e-12);
        let sq = integrate_scalar(&m1, &q1, |_, p| p[0] * p[0]);
        assert!((sq - 1.0 / 3.0).abs() < 1e-12);

        let q2 = QuadratureRule::triangle();
        let m2 = Arc::new(build_unit_square_mesh(4, 4).unwrap());
        let one2 = integrate_scalar(&m2, &q2, |_, _| 1.0);
        assert!((one2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn field_integral_of_interpolant() {
        let s = space_1d(8);
        let f = interpolate(&s, |p| p[0] * p[0]).unwrap();
        assert!((f.integral() - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn refinement_reduces_cubic_interpolation_error() {
        // L2 interpolation error of s^3 decays at third order for quadratic
        // elements, so halving h shrinks it by about 8
        let err = |n: usize| -> f64 {
            let s = space_1d(n);
            let f = interpolate(&s, |p| p[0].powi(3)).unwrap();
            let quad = QuadratureRule::interval();
            let mut e2 = 0.0;
            for cell in 0..n {
                let geom = s.cell_geometry(cell);
                for (q, &w) in quad.weights.iter().enumerate() {
                    let p = quad.points[q];
                    let phys = s.map_point(cell, p);
                    let d = f.eval_in_cell(cell, p).unwrap() - phys[0].powi(3);
                    e2 += w * geom.det * d * d;
                }
            }
            e2.sqrt()
        };
        let (e4, e8) = (err(4), err(8));
        assert!(e4 / e8 >= 7.0, "convergence ratio {}", e4 / e8);
    }

    #[test]
    fn coefficient_length_checked() {
        let s = space_1d(4);
        assert!(Field::new(s, vec![0.0; 3]).is_err());
    }
}
