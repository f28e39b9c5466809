use faer::linalg::solvers::Solve;
use faer::prelude::Reborrow;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};

use crate::error::{Error, Result};
use crate::lagrangian::CsrMatrix;

/// Direct sparse LU with reusable symbolic analysis.
///
/// The Jacobians here are structurally symmetric saddle-point matrices with
/// entries spanning several orders of magnitude, so the solver equilibrates
/// rows and columns symmetrically before factorizing and verifies the
/// residual of every solve against the unscaled system.
pub struct SparseLu {
    cached: Option<Cached>,
}

struct Cached {
    n: usize,
    nnz: usize,
    /// csr value index feeding each csc slot.
    csr_to_csc: Vec<usize>,
    symbolic_mat: SymbolicSparseColMat<usize>,
    symbolic_lu: faer::sparse::linalg::solvers::SymbolicLu<usize>,
}

impl Default for SparseLu {
    fn default() -> Self {
        Self::new()
    }
}

impl SparseLu {
    pub fn new() -> Self {
        SparseLu { cached: None }
    }

    fn prepare(&mut self, a: &CsrMatrix) -> Result<()> {
        if let Some(c) = &self.cached {
            if c.n == a.n && c.nnz == a.nnz() {
                return Ok(());
            }
        }
        // the pattern is structurally symmetric, so the csc pattern equals
        // the csr pattern; values need the transpose permutation
        let mut csr_to_csc = vec![0usize; a.nnz()];
        for col in 0..a.n {
            for k in a.row_ptr[col]..a.row_ptr[col + 1] {
                let row = a.col_idx[k];
                let p = a.position(row, col).ok_or_else(|| {
                    Error::LinearSolve("matrix pattern is not structurally symmetric".into())
                })?;
                csr_to_csc[k] = p;
            }
        }
        let symbolic_mat = SymbolicSparseColMat::new_checked(
            a.n,
            a.n,
            a.row_ptr.clone(),
            None,
            a.col_idx.clone(),
        );
        let symbolic_lu = faer::sparse::linalg::solvers::SymbolicLu::try_new(symbolic_mat.rb())
            .map_err(|e| Error::LinearSolve(format!("symbolic analysis failed: {e:?}")))?;
        self.cached = Some(Cached {
            n: a.n,
            nnz: a.nnz(),
            csr_to_csc,
            symbolic_mat,
            symbolic_lu,
        });
        Ok(())
    }

    /// Solves `A x = b` to the strict residual bound
    /// `1e-10 (1 + max|b|)`, erring when it cannot be met.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_policy(a, b, true)
    }

    /// Solves as well as iterative refinement allows without enforcing the
    /// strict bound; used inside Newton, where an inexact direction is
    /// still productive and the outer iteration verifies progress.
    pub fn solve_relaxed(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_policy(a, b, false)
    }

    fn solve_with_policy(&mut self, a: &CsrMatrix, b: &[f64], strict: bool) -> Result<Vec<f64>> {
        if b.len() != a.n {
            return Err(Error::invalid("rhs length does not match the matrix"));
        }
        self.prepare(a)?;
        let cached = self.cached.as_ref().expect("prepared above");

        // symmetric equilibration from row maxima
        let mut scale = vec![1.0f64; a.n];
        for row in 0..a.n {
            let mut m: f64 = 0.0;
            for k in a.row_ptr[row]..a.row_ptr[row + 1] {
                m = m.max(a.values[k].abs());
            }
            if m > 0.0 && m.is_finite() {
                scale[row] = 1.0 / m.sqrt();
            }
        }

        let mut csc_vals = vec![0.0f64; a.nnz()];
        for col in 0..a.n {
            for k in a.row_ptr[col]..a.row_ptr[col + 1] {
                let row = a.col_idx[k];
                // entry (row, col) of the scaled matrix
                csc_vals[k] = scale[row] * a.values[cached.csr_to_csc[k]] * scale[col];
            }
        }
        let mat = SparseColMat::new(cached.symbolic_mat.clone(), csc_vals);
        let lu = faer::sparse::linalg::solvers::Lu::try_new_with_symbolic(
            cached.symbolic_lu.clone(),
            mat.rb(),
        )
        .map_err(|e| Error::LinearSolve(format!("numeric factorization failed: {e:?}")))?;

        let solve_scaled = |rhs: &[f64]| -> Vec<f64> {
            let mut m = faer::Mat::<f64>::zeros(a.n, 1);
            for (i, &v) in rhs.iter().enumerate() {
                m[(i, 0)] = v * scale[i];
            }
            lu.solve_in_place(m.as_mut());
            (0..a.n).map(|i| m[(i, 0)] * scale[i]).collect()
        };

        let mut x = solve_scaled(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve(
                "solution is not finite; the matrix is numerically singular".into(),
            ));
        }
        let bound = |rhs: &[f64]| {
            1e-10 * (1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        };
        let residual_inf = |x: &[f64]| -> f64 {
            let mut y = vec![0.0; a.n];
            a.matvec(x, &mut y);
            y.iter().zip(b).fold(0.0f64, |m, (ax, bv)| {
                let d = (ax - bv).abs();
                if d.is_finite() {
                    m.max(d)
                } else {
                    f64::INFINITY
                }
            })
        };
        let mut res = residual_inf(&x);
        for _ in 0..3 {
            if res <= bound(b) {
                break;
            }
            // iterative refinement
            let mut r = vec![0.0; a.n];
            a.matvec(&x, &mut r);
            for i in 0..a.n {
                r[i] = b[i] - r[i];
            }
            let dx = solve_scaled(&r);
            if dx.iter().any(|v| !v.is_finite()) {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let trial_res = residual_inf(&trial);
            if trial_res >= res {
                break;
            }
            x = trial;
            res = trial_res;
        }
        if strict && res > bound(b) {
            return Err(Error::LinearSolve(format!(
                "residual {res:.3e} exceeds bound {:.3e} after refinement",
                bound(b)
            )));
        }
        if !res.is_finite() {
            return Err(Error::LinearSolve(
                "residual is not finite; the matrix is numerically singular".into(),
            ));
        }
        Ok(x)
    }
}

/// One-shot direct solve of a sparse system.
pub fn linear_solve(matrix: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    SparseLu::new().solve(matrix, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense_to_csr(d: &[Vec<f64>]) -> CsrMatrix {
        let n = d.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in d {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    #[test]
    fn identity_returns_rhs() {
        let a = dense_to_csr(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let x = linear_solve(&a, &[3.0, -4.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);
        assert!((x[1] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = dense_to_csr(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        let x = linear_solve(&a, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_spd_system_meets_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        // A = B^T B + I, dense SPD
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b[k][i] * b[k][j];
                }
                a[i][j] = s + if i == j { 1.0 } else { 0.0 };
            }
        }
        let csr = dense_to_csr(&a);
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = linear_solve(&csr, &rhs).unwrap();
        let mut y = vec![0.0; n];
        csr.matvec(&x, &mut y);
        let res = y
            .iter()
            .zip(&rhs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let bnd = 1e-10 * (1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        assert!(res <= bnd, "residual {res} vs bound {bnd}");
    }

    #[test]
    fn singular_matrix_is_an_error() {
        let a = dense_to_csr(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(linear_solve(&a, &[1.0, 2.0]).is_err());
    }
}
