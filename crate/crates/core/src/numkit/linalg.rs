//! Dense symmetric positive-definite solves via Cholesky factorization.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative jitter added once to the diagonal when the first factorization
/// attempt fails.
pub const JITTER: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
    jittered: bool,
}

pub fn is_symmetric(a: &Matrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.nrows();
    for u in 0..n {
        for v in (u + 1)..n {
            let (x, y) = (a[(u, v)], a[(v, u)]);
            if (x - y).abs() > 1e-10 * (1.0 + x.abs()) {
                return false;
            }
        }
    }
    true
}

fn factor(a: &Matrix, shift: f64) -> core::result::Result<Matrix, (usize, f64)> {
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] + shift;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err((j, d));
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

impl Cholesky {
    /// Factorizes `a`, retrying once with `JITTER·mean(diag)` added to the
    /// diagonal before giving up.
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                row: 0,
                pivot: f64::NAN,
            });
        }
        match factor(a, 0.0) {
            Ok(l) => Ok(Cholesky { l, jittered: false }),
            Err(_) => {
                let n = a.nrows().max(1) as f64;
                let mean_diag = a.diagonal().iter().sum::<f64>() / n;
                let shift = JITTER * mean_diag.abs();
                factor(a, shift)
                    .map(|l| Cholesky { l, jittered: true })
                    .map_err(|(row, pivot)| Error::NotPositiveDefinite { row, pivot })
            }
        }
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `A x = b` in place on one column.
    pub fn solve_vec_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        let l = &self.l;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
    }

    pub fn solve(&self, b: &Matrix) -> Matrix {
        let mut x = b.clone();
        let mut col = alloc::vec![0.0; self.dim()];
        for c in 0..b.ncols() {
            for r in 0..self.dim() {
                col[r] = b[(r, c)];
            }
            self.solve_vec_in_place(&mut col);
            for r in 0..self.dim() {
                x[(r, c)] = col[r];
            }
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = self.solve(&Matrix::identity(n, n));
        // exact symmetry
        for u in 0..n {
            for v in (u + 1)..n {
                let m = 0.5 * (inv[(u, v)] + inv[(v, u)]);
                inv[(u, v)] = m;
                inv[(v, u)] = m;
            }
        }
        inv
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// Solves `A X = B` for symmetric positive-definite `A`.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    if !is_symmetric(a) {
        return Err(Error::domain("solve_spd requires a symmetric matrix"));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    Ok(Cholesky::new(a)?.inverse())
}

/// Whether the rows of `x` selected by `keep` span all of its columns, judged
/// by an unjittered Cholesky factorization of the column-scaled Gram matrix.
pub fn has_full_column_rank(x: &Matrix, keep: impl Fn(usize) -> bool) -> bool {
    let k = x.ncols();
    let mut gram = Matrix::zeros(k, k);
    for i in (0..x.nrows()).filter(|&i| keep(i)) {
        let row = x.row(i);
        gram += row.transpose() * row;
    }
    let scale: Vec<f64> = gram.diagonal().iter().map(|d| d.sqrt()).collect();
    if k == 0 || scale.contains(&0.0) {
        return false;
    }
    let scaled = Matrix::from_fn(k, k, |u, v| gram[(u, v)] / (scale[u] * scale[v]));
    matches!(Cholesky::new(&scaled), Ok(c) if !c.jittered())
}

/// `‖A‖∞`, the maximum absolute row sum.
pub fn norm_inf(a: &Matrix) -> f64 {
    (0..a.nrows())
        .map(|r| a.row(r).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
