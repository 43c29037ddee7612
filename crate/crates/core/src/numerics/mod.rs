//! Dense linear-algebra kernels: matrix exponential, real nonsymmetric
//! eigenvalues, LU solves, and a reference adaptive ODE integrator.
//!
//! Everything here is pure and reentrant; matrices are `ndarray::Array2<f64>`
//! in standard (row-major) layout.

mod eig;
mod expm;
mod linsolve;
mod ode;

pub use eig::{eigenvalues, spectral_abscissa, Eigenvalue};
pub use expm::expm;
pub use linsolve::{solve_linear, solve_linear_multi, LuFactors};
pub use ode::integrate_ode;

use ndarray::{Array2, ArrayView2};

/// Maximum absolute column sum.
pub fn one_norm(a: &ArrayView2<f64>) -> f64 {
    let (rows, cols) = a.dim();
    let mut best = 0.0f64;
    for j in 0..cols {
        let mut s = 0.0;
        for i in 0..rows {
            s += a[[i, j]].abs();
        }
        best = best.max(s);
    }
    best
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &ArrayView2<f64>) -> f64 {
    let (rows, cols) = a.dim();
    let mut best = 0.0f64;
    for i in 0..rows {
        let mut s = 0.0;
        for j in 0..cols {
            s += a[[i, j]].abs();
        }
        best = best.max(s);
    }
    best
}

pub fn identity(d: usize) -> Array2<f64> {
    Array2::eye(d)
}
