use rayon::prelude::*;

use super::dual::Dual2;
use super::layout::{Discretization, FieldDef};
use crate::error::{Error, Result};

/// Row-compressed sparse matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Index of entry (row, col) in the value array, if present.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .binary_search(&col)
            .ok()
            .map(|k| range.start + k)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for row in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[row] = acc;
        }
    }

    /// Largest absolute asymmetry `|A - A^T|` over the pattern.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[k];
                let t = self.position(col, row).map_or(0.0, |p| self.values[p]);
                worst = worst.max((self.values[k] - t).abs());
            }
        }
        worst
    }
}

/// Residual and Jacobian of one incremental step, with the dof partition.
#[derive(Debug)]
pub struct AssembledSystem {
    pub residual: Vec<f64>,
    pub jacobian: CsrMatrix,
    pub partition: Vec<FieldDef>,
}

/// Immutable sparsity data shared by every assembly of one problem.
#[derive(Debug)]
pub struct SparsityPattern {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    /// Value positions of all off-diagonal entries in constrained columns.
    constrained_col_positions: Vec<usize>,
}

/// Builds the global sparsity from element connectivity, restricted to the
/// field pairs the density actually couples.
pub fn build_pattern(
    disc: &Discretization,
    coupled: impl Fn(usize, usize) -> bool,
) -> SparsityPattern {
    let n = disc.n_dofs();
    let n_cells = disc.mesh.n_cells();
    let mut pairs: Vec<u64> = Vec::new();
    let mut globals: Vec<Vec<usize>> = Vec::new();
    for cell in 0..n_cells {
        field_globals(disc, cell, &mut globals);
        for (fi, gi) in globals.iter().enumerate() {
            for (fj, gj) in globals.iter().enumerate() {
                if !coupled(fi, fj) {
                    continue;
                }
                for &ga in gi {
                    for &gb in gj {
                        pairs.push(((ga as u64) << 32) | gb as u64);
                    }
                }
            }
        }
    }
    // identity rows for the constrained dofs
    for &d in &disc.constrained {
        pairs.push(((d as u64) << 32) | d as u64);
    }
    pairs.par_sort_unstable();
    pairs.dedup();

    let mut row_ptr = vec![0usize; n + 1];
    for &p in &pairs {
        row_ptr[(p >> 32) as usize + 1] += 1;
    }
    for i in 0..n {
        row_ptr[i + 1] += row_ptr[i];
    }
    let col_idx: Vec<usize> = pairs.iter().map(|&p| (p & 0xffff_ffff) as usize).collect();

    let mut is_constrained = vec![false; n];
    for &d in &disc.constrained {
        is_constrained[d] = true;
    }
    let mut constrained_col_positions = Vec::new();
    for row in 0..n {
        for k in row_ptr[row]..row_ptr[row + 1] {
            if is_constrained[col_idx[k]] && row != col_idx[k] {
                constrained_col_positions.push(k);
            }
        }
    }
    SparsityPattern { row_ptr, col_idx, constrained_col_positions }
}

/// Global dofs of each field on one cell, component-major within a field,
/// matching the local dof convention of the element kernels.
pub fn field_globals(disc: &Discretization, cell: usize, out: &mut Vec<Vec<usize>>) {
    let n_scalar = disc.scalar.n_scalar_dofs();
    let sdofs = disc.scalar.cell_scalar_dofs(cell);
    out.clear();
    for f in &disc.layout.fields {
        let mut g = Vec::with_capacity(f.components * sdofs.len());
        for c in 0..f.components {
            for &s in sdofs {
                g.push(f.offset + c * n_scalar + s);
            }
        }
        out.push(g);
    }
}

pub(crate) struct CellOutput {
    pub cell: usize,
    pub globals: Vec<usize>,
    pub grad: Vec<f64>,
    /// Row-major local Hessian, `len = L*L`.
    pub hess: Vec<f64>,
}

/// Runs the element kernel over all cells (in parallel, chunked) and
/// scatters deterministically in cell order. The kernel fills the local
/// gradient and Hessian of the summed Lagrangian for one cell.
pub fn assemble_system(
    disc: &Discretization,
    pattern: &SparsityPattern,
    u: &[f64],
    kernel: impl Fn(usize, &mut Vec<usize>, &mut Vec<f64>, &mut Vec<f64>) -> Result<()> + Sync,
) -> Result<AssembledSystem> {
    disc.check_state_len(u)?;
    let n = disc.n_dofs();
    let n_cells = disc.mesh.n_cells();
    let mut residual = vec![0.0; n];
    let mut jacobian = CsrMatrix {
        n,
        row_ptr: pattern.row_ptr.clone(),
        col_idx: pattern.col_idx.clone(),
        values: vec![0.0; pattern.col_idx.len()],
    };

    const CHUNK: usize = 256;
    let mut outputs: Vec<Result<CellOutput>> = Vec::with_capacity(CHUNK);
    for chunk_start in (0..n_cells).step_by(CHUNK) {
        let chunk_end = (chunk_start + CHUNK).min(n_cells);
        (chunk_start..chunk_end)
            .into_par_iter()
            .map(|cell| {
                let mut globals = Vec::new();
                let mut grad = Vec::new();
                let mut hess = Vec::new();
                kernel(cell, &mut globals, &mut grad, &mut hess)?;
                Ok(CellOutput { cell, globals, grad, hess })
            })
            .collect_into_vec(&mut outputs);
        for out in outputs.drain(..) {
            let out = out?;
            let l = out.globals.len();
            debug_assert_eq!(out.grad.len(), l);
            debug_assert_eq!(out.hess.len(), l * l);
            for (a, &ga) in out.globals.iter().enumerate() {
                residual[ga] += out.grad[a];
                for (b, &gb) in out.globals.iter().enumerate() {
                    let v = out.hess[a * l + b];
                    if v != 0.0 {
                        match jacobian.position(ga, gb) {
                            Some(p) => jacobian.values[p] += v,
                            None => {
                                return Err(Error::Assembly {
                                    cell: out.cell,
                                    detail: format!(
                                        "coupling ({ga},{gb}) outside the sparsity pattern"
                                    ),
                                })
                            }
                        }
                    }
                }
            }
        }
    }

    // symmetric elimination of the flux constraints: identity row/column,
    // residual pinned to the current value so zero stays a fixed point
    for &pos in &pattern.constrained_col_positions {
        jacobian.values[pos] = 0.0;
    }
    for &d in &disc.constrained {
        for k in jacobian.row_ptr[d]..jacobian.row_ptr[d + 1] {
            jacobian.values[k] = if jacobian.col_idx[k] == d { 1.0 } else { 0.0 };
        }
        residual[d] = u[d];
    }

    Ok(AssembledSystem {
        residual,
        jacobian,
        partition: disc.layout.fields.clone(),
    })
}

pub(crate) const MAX_LOCAL: usize = 54;
/// Longest extraction row: the divergence variable reads all components of
/// a 2-D flux field (12 local dofs).
pub(crate) const MAX_ROW: usize = 12;

/// One variable's extraction row: which contiguous span of local dofs it
/// reads and with what weights (basis values or gradient components).
#[derive(Clone, Copy)]
pub(crate) struct VarRow {
    pub start: usize,
    pub len: usize,
    pub w: [f64; MAX_ROW],
}

impl VarRow {
    pub fn empty() -> Self {
        VarRow { start: 0, len: 0, w: [0.0; MAX_ROW] }
    }
}

/// Accumulates `w * B^T g` and `w * B^T H B` into the local gradient and
/// Hessian, where `B` is given by the sparse variable rows.
pub(crate) fn accumulate_qp<const NV: usize>(
    weight: f64,
    density: &Dual2<NV>,
    rows: &[VarRow; NV],
    l_total: usize,
    grad: &mut [f64],
    hess: &mut [f64],
) {
    for (i, row) in rows.iter().enumerate() {
        let gi = weight * density.grad[i];
        if gi != 0.0 {
            for t in 0..row.len {
                grad[row.start + t] += gi * row.w[t];
            }
        }
    }
    // T = H * B (rows of B are sparse)
    let mut t_mat = [[0.0f64; MAX_LOCAL]; NV];
    for i in 0..NV {
        for (j, row) in rows.iter().enumerate() {
            let h = density.hess[i][j];
            if h != 0.0 {
                for t in 0..row.len {
                    t_mat[i][row.start + t] += h * row.w[t];
                }
            }
        }
    }
    // local Hessian += w * B^T T
    for (i, row) in rows.iter().enumerate() {
        for t in 0..row.len {
            let c = weight * row.w[t];
            if c != 0.0 {
                let l = row.start + t;
                let dst = &mut hess[l * l_total..l * l_total + l_total];
                let src = &t_mat[i][..l_total];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_position_and_matvec() {
        // [[2, 1, 0], [0, 3, 0], [4, 0, 5]]
        let m = CsrMatrix {
            n: 3,
            row_ptr: vec![0, 2, 3, 5],
            col_idx: vec![0, 1, 1, 0, 2],
            values: vec![2.0, 1.0, 3.0, 4.0, 5.0],
        };
        assert_eq!(m.position(0, 1), Some(1));
        assert_eq!(m.position(1, 0), None);
        let mut y = vec![0.0; 3];
        m.matvec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![4.0, 6.0, 19.0]);
    }

    #[test]
    fn quadratic_form_accumulation_matches_dense() {
        // two variables reading overlapping dof spans; compare against a
        // dense B^T H B computed by hand
        let mut rows = [VarRow::empty(); 2];
        rows[0] = VarRow { start: 0, len: 2, w: { let mut w = [0.0; MAX_ROW]; w[0] = 1.0; w[1] = 2.0; w } };
        rows[1] = VarRow { start: 1, len: 2, w: { let mut w = [0.0; MAX_ROW]; w[0] = -1.0; w[1] = 0.5; w } };
        let mut d = Dual2::<2>::constant(0.0);
        d.grad = [1.5, -0.5];
        d.hess = [[2.0, 1.0], [1.0, 4.0]];
        let l = 3;
        let mut grad = vec![0.0; l];
        let mut hess = vec![0.0; l * l];
        accumulate_qp(0.5, &d, &rows, l, &mut grad, &mut hess);

        let b = [[1.0, 2.0, 0.0], [0.0, -1.0, 0.5]];
        for a in 0..l {
            let expect_g = 0.5 * (d.grad[0] * b[0][a] + d.grad[1] * b[1][a]);
            assert!((grad[a] - expect_g).abs() < 1e-15);
            for c in 0..l {
                let mut expect_h = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        expect_h += 0.5 * b[i][a] * d.hess[i][j] * b[j][c];
                    }
                }
                assert!((hess[a * l + c] - expect_h).abs() < 1e-15);
            }
        }
    }
}
