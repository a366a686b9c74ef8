//! Dense LU factorization with partial (row) pivoting.

use nalgebra::DMatrix;

/// `P A = L U` stored compactly: unit-lower `L` below the diagonal, `U` on
/// and above it.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl LuDecomposition {
    pub fn new(a: &DMatrix<f64>) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;

        for col in 0..n {
            let (pivot_row, pivot_abs) =
                (col..n)
                    .map(|r| (r, lu[(r, col)].abs()))
                    .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == 0.0 {
                singular = true;
                continue;
            }
            if pivot_row != col {
                lu.swap_rows(pivot_row, col);
                perm.swap(pivot_row, col);
                sign = -sign;
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        lu[(r, c)] -= factor * lu[(col, c)];
                    }
                }
            }
        }
        Self { lu, perm, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        self.sign * (0..self.lu.nrows()).map(|i| self.lu[(i, i)]).product::<f64>()
    }

    /// Solves `A x = b` in place. Returns `false` if the factorization is singular.
    pub fn solve_in_place(&self, b: &mut [f64]) -> bool {
        if self.singular {
            return false;
        }
        let n = self.lu.nrows();
        let permuted: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * b[j]).sum();
            b[i] = (b[i] - s) / self.lu[(i, i)];
        }
        true
    }

    /// `A^{-1}`, obtained column by column by solving against the identity.
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        let n = self.lu.nrows();
        let mut inv = DMatrix::<f64>::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|x| *x = 0.0);
            col[j] = 1.0;
            if !self.solve_in_place(&mut col) {
                return None;
            }
            for (i, x) in col.iter().enumerate() {
                inv[(i, j)] = *x;
            }
        }
        Some(inv)
    }
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}
