//! Dense LU factorization with partial pivoting.

use ndarray::{Array1, Array2};

use super::inf_norm;
use crate::error::{Error, Result};

/// Packed LU factors of a square matrix (Doolittle, partial pivoting).
pub struct LuFactors {
    lu: Array2<f64>,
    perm: Vec<usize>,
    /// Cheap conditioning proxy: min |u_ii| / max |u_ii|.
    rcond: f64,
}

impl LuFactors {
    pub fn factor(a: &Array2<f64>) -> Result<Self> {
        let d = a.nrows();
        assert_eq!(d, a.ncols(), "LU requires a square matrix");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let scale = inf_norm(&a.view()).max(f64::MIN_POSITIVE);

        for col in 0..d {
            let mut max_val = 0.0;
            let mut max_row = col;
            for row in col..d {
                let v = lu[[row, col]].abs();
                if v > max_val {
                    max_val = v;
                    max_row = row;
                }
            }
            if max_val <= f64::EPSILON * scale {
                return Err(Error::SingularMatrix {
                    rcond: max_val / scale,
                });
            }
            if max_row != col {
                perm.swap(col, max_row);
                for j in 0..d {
                    let tmp = lu[[col, j]];
                    lu[[col, j]] = lu[[max_row, j]];
                    lu[[max_row, j]] = tmp;
                }
            }
            let pivot = lu[[col, col]];
            for row in (col + 1)..d {
                let factor = lu[[row, col]] / pivot;
                lu[[row, col]] = factor;
                for j in (col + 1)..d {
                    lu[[row, j]] -= factor * lu[[col, j]];
                }
            }
        }

        let mut umin = f64::INFINITY;
        let mut umax = 0.0f64;
        for i in 0..d {
            let u = lu[[i, i]].abs();
            umin = umin.min(u);
            umax = umax.max(u);
        }
        let rcond = if umax > 0.0 { umin / umax } else { 0.0 };
        Ok(Self { lu, perm, rcond })
    }

    pub fn rcond_estimate(&self) -> f64 {
        self.rcond
    }

    pub fn solve(&self, rhs: &Array1<f64>) -> Array1<f64> {
        let d = self.lu.nrows();
        assert_eq!(rhs.len(), d);
        let mut x = Array1::zeros(d);
        for i in 0..d {
            x[i] = rhs[self.perm[i]];
        }
        // forward substitution (unit lower)
        for i in 1..d {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        // back substitution
        for i in (0..d).rev() {
            let mut s = x[i];
            for j in (i + 1)..d {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        x
    }
}

/// Solve `B x = rhs` for a single right-hand side.
pub fn solve_linear(b: &Array2<f64>, rhs: &Array1<f64>) -> Result<Array1<f64>> {
    Ok(LuFactors::factor(b)?.solve(rhs))
}

/// Solve `B X = RHS` column by column.
pub fn solve_linear_multi(b: &Array2<f64>, rhs: &Array2<f64>) -> Result<Array2<f64>> {
    let factors = LuFactors::factor(b)?;
    let (d, m) = rhs.dim();
    let mut x = Array2::zeros((d, m));
    for j in 0..m {
        let col = rhs.column(j).to_owned();
        let sol = factors.solve(&col);
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}
