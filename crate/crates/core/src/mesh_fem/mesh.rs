use crate::error::{Error, Result};

/// Coordinates of a point; 1-D meshes keep the second entry at zero.
pub type Point = [f64; 2];

/// A boundary facet: a vertex in 1-D (both entries equal), an edge in 2-D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Facet {
    pub vertices: [usize; 2],
    /// The unique cell owning this facet.
    pub cell: usize,
}

/// Simplicial mesh: intervals in 1-D, triangles in 2-D.
///
/// Immutable after construction; cells are stored flattened with
/// `dimension + 1` vertex ids each, in construction order.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    boundary: Vec<Facet>,
}

impl Mesh {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices_per_cell(&self) -> usize {
        self.dim + 1
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / self.vertices_per_cell()
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cell_vertex_ids(&self, cell: usize) -> &[usize] {
        let k = self.vertices_per_cell();
        &self.cells[cell * k..(cell + 1) * k]
    }

    pub fn boundary_facets(&self) -> &[Facet] {
        &self.boundary
    }

    /// Measure of a cell: interval length or (positive) triangle area.
    pub fn cell_measure(&self, cell: usize) -> f64 {
        let ids = self.cell_vertex_ids(cell);
        match self.dim {
            1 => self.vertices[ids[1]][0] - self.vertices[ids[0]][0],
            _ => {
                let [a, b, c] = [self.vertices[ids[0]], self.vertices[ids[1]], self.vertices[ids[2]]];
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
            }
        }
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_measure(c)).sum()
    }

    /// Outward unit normal of a boundary facet.
    pub fn facet_normal(&self, facet: &Facet) -> [f64; 2] {
        if self.dim == 1 {
            let v = self.vertices[facet.vertices[0]][0];
            let ids = self.cell_vertex_ids(facet.cell);
            let mid = 0.5 * (self.vertices[ids[0]][0] + self.vertices[ids[1]][0]);
            if v < mid {
                [-1.0, 0.0]
            } else {
                [1.0, 0.0]
            }
        } else {
            let a = self.vertices[facet.vertices[0]];
            let b = self.vertices[facet.vertices[1]];
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut n = [t[1] / len, -t[0] / len];
            // orient away from the owning cell's centroid
            let ids = self.cell_vertex_ids(facet.cell);
            let cx = ids.iter().map(|&v| self.vertices[v][0]).sum::<f64>() / 3.0;
            let cy = ids.iter().map(|&v| self.vertices[v][1]).sum::<f64>() / 3.0;
            let mx = 0.5 * (a[0] + b[0]) - cx;
            let my = 0.5 * (a[1] + b[1]) - cy;
            if n[0] * mx + n[1] * my < 0.0 {
                n = [-n[0], -n[1]];
            }
            n
        }
    }

    /// Checks the structural invariants; used by tests.
    pub fn validate(&self) -> Result<()> {
        let nv = self.n_vertices();
        if self.cells.iter().any(|&v| v >= nv) {
            return Err(Error::invalid("cell connectivity index out of range"));
        }
        for c in 0..self.n_cells() {
            if self.cell_measure(c) <= 0.0 {
                return Err(Error::invalid(format!("cell {c} has non-positive measure")));
            }
        }
        for f in &self.boundary {
            if f.cell >= self.n_cells() {
                return Err(Error::invalid("boundary facet owner out of range"));
            }
        }
        Ok(())
    }
}

/// Uniform mesh of `n_cells` intervals on `[0, length]`.
pub fn build_interval_mesh(n_cells: usize, length: f64) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(Error::invalid("interval mesh needs at least one cell"));
    }
    if !(length > 0.0) {
        return Err(Error::invalid("interval mesh needs a positive length"));
    }
    let h = length / n_cells as f64;
    let vertices: Vec<Point> = (0..=n_cells)
        .map(|i| {
            let s = if i == n_cells { length } else { i as f64 * h };
            [s, 0.0]
        })
        .collect();
    let mut cells = Vec::with_capacity(2 * n_cells);
    for i in 0..n_cells {
        cells.push(i);
        cells.push(i + 1);
    }
    let boundary = vec![
        Facet { vertices: [0, 0], cell: 0 },
        Facet { vertices: [n_cells, n_cells], cell: n_cells - 1 },
    ];
    Ok(Mesh { dim: 1, vertices, cells, boundary })
}

/// Structured triangulation of the unit square; each grid quad is split
/// along the diagonal from its lower-left to its upper-right corner.
pub fn build_unit_square_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("square mesh needs at least one subdivision per direction"));
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    let mesh = Mesh { dim: 2, vertices, cells, boundary: Vec::new() };
    let boundary = find_boundary_facets(&mesh);
    Ok(Mesh { boundary, ..mesh })
}

fn find_boundary_facets(mesh: &Mesh) -> Vec<Facet> {
    use std::collections::HashMap;
    let mut seen: HashMap<(usize, usize), (usize, [usize; 2], usize)> = HashMap::new();
    for c in 0..mesh.n_cells() {
        let ids = mesh.cell_vertex_ids(c);
        for (a, b) in [(ids[1], ids[2]), (ids[0], ids[2]), (ids[0], ids[1])] {
            let key = (a.min(b), a.max(b));
            seen.entry(key)
                .and_modify(|e| e.0 += 1)
                .or_insert((1, [a, b], c));
        }
    }
    let mut facets: Vec<Facet> = seen
        .into_iter()
        .filter(|(_, (count, _, _))| *count == 1)
        .map(|(_, (_, vertices, cell))| Facet { vertices, cell })
        .collect();
    facets.sort_by_key(|f| (f.vertices[0].min(f.vertices[1]), f.vertices[0].max(f.vertices[1])));
    facets
}
