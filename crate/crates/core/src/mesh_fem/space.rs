use std::sync::Arc;

use super::mesh::{Mesh, Point};
use crate::error::{Error, Result};

/// Continuous Lagrange space of polynomial degree two.
///
/// Scalar dofs sit at mesh vertices first, then at edge midpoints (2-D) or
/// cell midpoints (1-D), numbered lexicographically by the sorted vertex
/// pair of the edge. Vector spaces store one scalar block per component,
/// so global dof `c * n_scalar + s` is component `c` of scalar dof `s`.
#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    components: usize,
    n_scalar: usize,
    /// Flattened cell -> local scalar dof map (3 per cell in 1-D, 6 in 2-D).
    cell_dofs: Vec<usize>,
    /// Coordinates of the Lagrange node of each scalar dof.
    dof_points: Vec<Point>,
}

/// Basis values and physical-space gradients at a set of reference points.
///
/// Layout: `values[q][a]`, `gradients[q][a]` for point `q` and local
/// scalar shape function `a`.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 2]>>,
}

/// Affine geometry of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    /// Jacobian determinant (interval length in 1-D, 2x area in 2-D).
    pub det: f64,
    /// Inverse-transpose Jacobian, mapping reference to physical gradients.
    pub inv_jac_t: [[f64; 2]; 2],
}

pub fn local_scalar_dofs(dim: usize) -> usize {
    match dim {
        1 => 3,
        _ => 6,
    }
}

/// Values of the reference shape functions at a reference point.
pub fn reference_values(dim: usize, p: Point) -> Vec<f64> {
    match dim {
        1 => {
            let s = p[0];
            vec![(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)]
        }
        _ => {
            let (x, y) = (p[0], p[1]);
            let l = [1.0 - x - y, x, y];
            vec![
                l[0] * (2.0 * l[0] - 1.0),
                l[1] * (2.0 * l[1] - 1.0),
                l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[1] * l[2],
                4.0 * l[0] * l[2],
                4.0 * l[0] * l[1],
            ]
        }
    }
}

/// Gradients of the reference shape functions at a reference point.
pub fn reference_gradients(dim: usize, p: Point) -> Vec<[f64; 2]> {
    match dim {
        1 => {
            let s = p[0];
            vec![[4.0 * s - 3.0, 0.0], [4.0 * s - 1.0, 0.0], [4.0 - 8.0 * s, 0.0]]
        }
        _ => {
            let (x, y) = (p[0], p[1]);
            let l = [1.0 - x - y, x, y];
            let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut g = Vec::with_capacity(6);
            for i in 0..3 {
                g.push([(4.0 * l[i] - 1.0) * dl[i][0], (4.0 * l[i] - 1.0) * dl[i][1]]);
            }
            for (i, j) in [(1, 2), (0, 2), (0, 1)] {
                g.push([
                    4.0 * (l[i] * dl[j][0] + l[j] * dl[i][0]),
                    4.0 * (l[i] * dl[j][1] + l[j] * dl[i][1]),
                ]);
            }
            g
        }
    }
}

/// Builds a degree-two Lagrange space with the given component count
/// (1 for scalars, `mesh.dimension()` for flux fields).
pub fn build_function_space(mesh: Arc<Mesh>, components: usize) -> Result<FunctionSpace> {
    if components != 1 && components != mesh.dimension() {
        return Err(Error::invalid(format!(
            "unsupported component count {components} for a {}-D mesh",
            mesh.dimension()
        )));
    }
    let nv = mesh.n_vertices();
    let nc = mesh.n_cells();
    let mut cell_dofs;
    let mut dof_points: Vec<Point> = (0..nv).map(|v| mesh.vertex(v)).collect();
    let n_scalar;
    if mesh.dimension() == 1 {
        n_scalar = nv + nc;
        cell_dofs = Vec::with_capacity(3 * nc);
        for c in 0..nc {
            let ids = mesh.cell_vertex_ids(c);
            cell_dofs.extend_from_slice(&[ids[0], ids[1], nv + c]);
            let a = mesh.vertex(ids[0]);
            let b = mesh.vertex(ids[1]);
            dof_points.push([0.5 * (a[0] + b[0]), 0.0]);
        }
    } else {
        // number edges lexicographically by their sorted vertex pair
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for c in 0..nc {
            let ids = mesh.cell_vertex_ids(c);
            for (a, b) in [(ids[1], ids[2]), (ids[0], ids[2]), (ids[0], ids[1])] {
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let edge_id = |a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            edges.binary_search(&key).expect("edge present by construction")
        };
        n_scalar = nv + edges.len();
        for &(a, b) in &edges {
            let pa = mesh.vertex(a);
            let pb = mesh.vertex(b);
            dof_points.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        cell_dofs = Vec::with_capacity(6 * nc);
        for c in 0..nc {
            let ids = mesh.cell_vertex_ids(c);
            cell_dofs.extend_from_slice(&[
                ids[0],
                ids[1],
                ids[2],
                nv + edge_id(ids[1], ids[2]),
                nv + edge_id(ids[0], ids[2]),
                nv + edge_id(ids[0], ids[1]),
            ]);
        }
    }
    Ok(FunctionSpace { mesh, components, n_scalar, cell_dofs, dof_points })
}

impl FunctionSpace {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_scalar
    }

    pub fn n_dofs(&self) -> usize {
        self.components * self.n_scalar
    }

    pub fn n_local_scalar(&self) -> usize {
        local_scalar_dofs(self.mesh.dimension())
    }

    pub fn cell_scalar_dofs(&self, cell: usize) -> &[usize] {
        let k = self.n_local_scalar();
        &self.cell_dofs[cell * k..(cell + 1) * k]
    }

    pub fn dof_point(&self, scalar_dof: usize) -> Point {
        self.dof_points[scalar_dof]
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        let ids = self.mesh.cell_vertex_ids(cell);
        if self.mesh.dimension() == 1 {
            let h = self.mesh.vertex(ids[1])[0] - self.mesh.vertex(ids[0])[0];
            CellGeometry { det: h, inv_jac_t: [[1.0 / h, 0.0], [0.0, 0.0]] }
        } else {
            let a = self.mesh.vertex(ids[0]);
            let b = self.mesh.vertex(ids[1]);
            let c = self.mesh.vertex(ids[2]);
            let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            // inverse transpose of J
            let inv_jac_t = [
                [j[1][1] / det, -j[1][0] / det],
                [-j[0][1] / det, j[0][0] / det],
            ];
            CellGeometry { det, inv_jac_t }
        }
    }

    /// Physical coordinates of a reference point in a cell.
    pub fn map_point(&self, cell: usize, p: Point) -> Point {
        let ids = self.mesh.cell_vertex_ids(cell);
        let a = self.mesh.vertex(ids[0]);
        if self.mesh.dimension() == 1 {
            let b = self.mesh.vertex(ids[1]);
            [a[0] + p[0] * (b[0] - a[0]), 0.0]
        } else {
            let b = self.mesh.vertex(ids[1]);
            let c = self.mesh.vertex(ids[2]);
            [
                a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]),
                a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]),
            ]
        }
    }

    /// Values and physical gradients of the local shape functions.
    pub fn evaluate_basis(&self, cell: usize, points: &[Point]) -> Result<BasisEval> {
        if cell >= self.mesh.n_cells() {
            return Err(Error::invalid(format!("cell index {cell} out of range")));
        }
        let dim = self.mesh.dimension();
        let geom = self.cell_geometry(cell);
        let mut values = Vec::with_capacity(points.len());
        let mut gradients = Vec::with_capacity(points.len());
        for &p in points {
            values.push(reference_values(dim, p));
            let refg = reference_gradients(dim, p);
            gradients.push(
                refg.iter()
                    .map(|g| {
                        [
                            geom.inv_jac_t[0][0] * g[0] + geom.inv_jac_t[0][1] * g[1],
                            geom.inv_jac_t[1][0] * g[0] + geom.inv_jac_t[1][1] * g[1],
                        ]
                    })
                    .collect(),
            );
        }
        Ok(BasisEval { values, gradients })
    }

    /// Dofs a zero-normal-flux condition pins, assuming this space carries
    /// the flux field (`components == mesh.dimension()`).
    ///
    /// Both mesh families have axis-aligned boundary facets, so the normal
    /// component of a vector field is a single coordinate component per
    /// facet; corners constrain both.
    pub fn normal_flux_dofs(&self) -> Vec<usize> {
        let mesh = &self.mesh;
        let dim = mesh.dimension();
        let mut constrained = Vec::new();
        if self.components != dim {
            return constrained;
        }
        let mut mark = vec![[false; 2]; self.n_scalar];
        for facet in mesh.boundary_facets() {
            let n = mesh.facet_normal(facet);
            let comp = if n[0].abs() > 0.5 { 0 } else { 1 };
            if dim == 1 {
                mark[facet.vertices[0]][0] = true;
            } else {
                // facet scalar dofs: two endpoints plus the edge midpoint
                let (a, b) = (facet.vertices[0], facet.vertices[1]);
                mark[a][comp] = true;
                mark[b][comp] = true;
                let ids = self.cell_scalar_dofs(facet.cell);
                let cv = mesh.cell_vertex_ids(facet.cell);
                let pair = (a.min(b), a.max(b));
                for (e, (i, j)) in [(3, (1usize, 2usize)), (4, (0, 2)), (5, (0, 1))] {
                    let key = (cv[i].min(cv[j]), cv[i].max(cv[j]));
                    if key == pair {
                        mark[ids[e]][comp] = true;
                    }
                }
            }
        }
        for s in 0..self.n_scalar {
            for c in 0..self.components {
                if mark[s][c] {
                    constrained.push(c * self.n_scalar + s);
                }
            }
        }
        constrained.sort_unstable();
        constrained
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_fem::mesh::{build_interval_mesh, build_unit_square_mesh};

    fn interval_space(n: usize, comps: usize) -> FunctionSpace {
        build_function_space(Arc::new(build_interval_mesh(n, 1.0).unwrap()), comps).unwrap()
    }

    #[test]
    fn dof_counts() {
        assert_eq!(interval_space(4, 1).n_dofs(), 9);
        let sq = Arc::new(build_unit_square_mesh(1, 1).unwrap());
        let s = build_function_space(sq.clone(), 1).unwrap();
        assert_eq!(s.n_dofs(), 9); // 4 vertices + 5 edges
        let v = build_function_space(sq, 2).unwrap();
        assert_eq!(v.n_dofs(), 18);
    }

    #[test]
    fn rejects_bad_component_count() {
        let m = Arc::new(build_interval_mesh(2, 1.0).unwrap());
        assert!(build_function_space(m, 2).is_err());
    }

    #[test]
    fn partition_of_unity() {
        for (dim, pts) in [
            (1, vec![[0.11, 0.0], [0.5, 0.0], [0.98, 0.0]]),
            (2, vec![[0.2, 0.3], [0.05, 0.9], [1.0 / 3.0, 1.0 / 3.0]]),
        ] {
            for &p in &pts {
                let vals = reference_values(dim, p);
                let grads = reference_gradients(dim, p);
                let sum: f64 = vals.iter().sum();
                assert!((sum - 1.0).abs() < 1e-14, "dim {dim}: sum {sum}");
                let gx: f64 = grads.iter().map(|g| g[0]).sum();
                let gy: f64 = grads.iter().map(|g| g[1]).sum();
                assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lagrange_delta_property() {
        // node reference coordinates, matching the local dof order
        let nodes_1d = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]];
        for (a, &p) in nodes_1d.iter().enumerate() {
            let vals = reference_values(1, p);
            for (b, &v) in vals.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14);
            }
        }
        let nodes_2d = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.0, 0.5],
            [0.5, 0.0],
        ];
        for (a, &p) in nodes_2d.iter().enumerate() {
            let vals = reference_values(2, p);
            for (b, &v) in vals.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14, "node {a} fn {b}: {v}");
            }
        }
    }

    #[test]
    fn basis_out_of_range_cell() {
        let s = interval_space(4, 1);
        assert!(s.evaluate_basis(4, &[[0.5, 0.0]]).is_err());
    }

    #[test]
    fn flux_constraints_1d() {
        let m = Arc::new(build_interval_mesh(4, 1.0).unwrap());
        let v = build_function_space(m, 1).unwrap();
        // the 1-D flux space pins the two boundary vertices
        assert_eq!(v.normal_flux_dofs(), vec![0, 4]);
    }

    #[test]
    fn flux_constraints_2d() {
        let m = Arc::new(build_unit_square_mesh(2, 2).unwrap());
        let v = build_function_space(m, 2).unwrap();
        let c = v.normal_flux_dofs();
        // boundary scalar nodes: 8 vertices + 8 edge midpoints = 16 per side
        // sides constrain one component each, corners both
        assert!(!c.is_empty());
        // every constrained dof must lie on the boundary
        for d in &c {
            let p = v.dof_point(d % v.n_scalar_dofs());
            let on = p[0].abs() < 1e-14
                || (p[0] - 1.0).abs() < 1e-14
                || p[1].abs() < 1e-14
                || (p[1] - 1.0).abs() < 1e-14;
            assert!(on);
        }
    }
}
