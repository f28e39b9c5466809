use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lagrangian::Discretization;
use crate::mesh_fem::{Field, FunctionSpace};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header and connectivity of a quadratic unstructured grid in the legacy
/// text format. Points are the Lagrange nodes, cells are quadratic edges
/// or quadratic triangles.
fn write_grid(out: &mut String, space: &FunctionSpace, title: &str) {
    let mesh = space.mesh();
    let dim = mesh.dimension();
    let n_points = space.n_scalar_dofs();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push('\n');
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {n_points} double\n"));
    for s in 0..n_points {
        let p = space.dof_point(s);
        out.push_str(&format!("{} {} {}\n", fmt(p[0]), fmt(p[1]), fmt(0.0)));
    }
    let n_cells = mesh.n_cells();
    let nodes_per_cell = if dim == 1 { 3 } else { 6 };
    out.push_str(&format!("CELLS {} {}\n", n_cells, n_cells * (nodes_per_cell + 1)));
    for cell in 0..n_cells {
        let d = space.cell_scalar_dofs(cell);
        if dim == 1 {
            // quadratic edge: ends then midpoint
            out.push_str(&format!("3 {} {} {}\n", d[0], d[1], d[2]));
        } else {
            // quadratic triangle: corners then midside nodes on edges
            // (0,1), (1,2), (2,0); local edge dofs are opposite the vertex
            out.push_str(&format!(
                "6 {} {} {} {} {} {}\n",
                d[0], d[1], d[2], d[5], d[3], d[4]
            ));
        }
    }
    out.push_str(&format!("CELL_TYPES {n_cells}\n"));
    let ty = if dim == 1 { 21 } else { 22 };
    for _ in 0..n_cells {
        out.push_str(&format!("{ty}\n"));
    }
    out.push_str(&format!("POINT_DATA {n_points}\n"));
}

fn push_scalars(out: &mut String, name: &str, values: &[f64]) {
    out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
    for &v in values {
        out.push_str(&fmt(v));
        out.push('\n');
    }
}

fn push_vectors(out: &mut String, name: &str, comps: usize, n_scalar: usize, block: &[f64]) {
    out.push_str(&format!("VECTORS {name} double\n"));
    for s in 0..n_scalar {
        let x = block[s];
        let y = if comps > 1 { block[n_scalar + s] } else { 0.0 };
        out.push_str(&format!("{} {} {}\n", fmt(x), fmt(y), fmt(0.0)));
    }
}

/// Writes every field of a state snapshot. Multiplier blocks are negated
/// so the stored affinities come out with their thermodynamic sign.
pub fn write_snapshot(disc: &Discretization, state: &[f64], path: &Path) -> Result<()> {
    let mut out = String::new();
    write_grid(&mut out, &disc.scalar, "state snapshot");
    let n_scalar = disc.scalar.n_scalar_dofs();
    for f in &disc.layout.fields {
        let block = &state[f.offset..f.offset + f.len];
        if f.components > 1 {
            push_vectors(&mut out, &flux_name(f.name), f.components, n_scalar, block);
        } else if f.name.starts_with("mu") {
            let negated: Vec<f64> = block.iter().map(|v| -v).collect();
            push_scalars(&mut out, &affinity_name(f.name), &negated);
        } else if f.name.starts_with('j') {
            // one-dimensional flux block
            push_vectors(&mut out, &flux_name(f.name), 1, n_scalar, block);
        } else {
            push_scalars(&mut out, f.name, block);
        }
    }
    write_file(path, &out)
}

fn flux_name(field: &str) -> String {
    match field {
        "j" => "flux".to_string(),
        other => format!("flux{}", other.trim_start_matches('j')),
    }
}

fn affinity_name(field: &str) -> String {
    match field {
        "mu" => "affinity".to_string(),
        other => format!("affinity{}", other.trim_start_matches("mu")),
    }
}

/// Writes a single scalar field (used by tests and tooling).
pub fn write_field(field: &Field, name: &str, path: &Path) -> Result<()> {
    let mut out = String::new();
    write_grid(&mut out, field.space(), "field snapshot");
    push_scalars(&mut out, name, field.coeffs());
    write_file(path, &out)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(io_err(path))?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(content.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_fem::{build_function_space, build_interval_mesh, interpolate};
    use std::sync::Arc;

    /// Minimal legacy-format reader for round-trip checks: returns points
    /// and the named scalar array.
    pub fn parse_point_scalars(text: &str, name: &str) -> (Vec<[f64; 3]>, Vec<f64>) {
        let mut lines = text.lines().peekable();
        let mut points = Vec::new();
        let mut data = Vec::new();
        while let Some(line) = lines.next() {
            if let Some(rest) = line.strip_prefix("POINTS ") {
                let n: usize = rest.split_whitespace().next().unwrap().parse().unwrap();
                for _ in 0..n {
                    let xyz: Vec<f64> = lines
                        .next()
                        .unwrap()
                        .split_whitespace()
                        .map(|t| t.parse().unwrap())
                        .collect();
                    points.push([xyz[0], xyz[1], xyz[2]]);
                }
            }
            if line.starts_with(&format!("SCALARS {name} ")) {
                lines.next(); // lookup table
                for _ in 0..points.len() {
                    data.push(lines.next().unwrap().trim().parse().unwrap());
                }
            }
        }
        (points, data)
    }

    #[test]
    fn snapshot_round_trip_preserves_nodal_values() {
        let mesh = Arc::new(build_interval_mesh(8, 1.0).unwrap());
        let space = Arc::new(build_function_space(mesh, 1).unwrap());
        let f = interpolate(&space, |p| p[0] * p[0]).unwrap();
        let dir = std::env::temp_dir().join("diffusim_vtk_test");
        let path = dir.join("field.vtk");
        write_field(&f, "x", &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let (points, values) = parse_point_scalars(&text, "x");
        assert_eq!(values.len(), space.n_scalar_dofs());
        for s in 0..space.n_scalar_dofs() {
            assert!((points[s][0] - space.dof_point(s)[0]).abs() < 1e-12);
            assert!((values[s] - f.coeffs()[s]).abs() < 1e-12);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
