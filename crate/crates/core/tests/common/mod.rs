//! Shared independent oracles for the integration tests. Everything here is
//! deliberately dumb and slow: quadrature, finite differences, brute-force
//! recursions.

#![allow(dead_code)]

use ndarray::{Array1, Array2};

/// Adaptive Simpson quadrature of a vector-valued function, component max
/// error below `tol`.
pub fn adaptive_simpson_vec<F>(mut f: F, a: f64, b: f64, tol: f64) -> Array1<f64>
where
    F: FnMut(f64) -> Array1<f64>,
{
    fn simpson(fa: &Array1<f64>, fm: &Array1<f64>, fb: &Array1<f64>, h: f64) -> Array1<f64> {
        (fa + &(fm * 4.0) + fb) * (h / 6.0)
    }
    fn recurse<F>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: Array1<f64>,
        fm: Array1<f64>,
        fb: Array1<f64>,
        whole: Array1<f64>,
        tol: f64,
        depth: usize,
    ) -> Array1<f64>
    where
        F: FnMut(f64) -> Array1<f64>,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(&fa, &flm, &fm, m - a);
        let right = simpson(&fm, &frm, &fb, b - m);
        let combined = &left + &right;
        let err = (&combined - &whole).iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
        if depth == 0 || err < 15.0 * tol {
            combined + (combined.clone() - whole) / 15.0
        } else {
            let l = recurse(f, a, m, fa, flm, fm.clone(), left, tol / 2.0, depth - 1);
            let r = recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
            l + r
        }
    }
    if a == b {
        return f(a) * 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(&fa, &fm, &fb, b - a);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Mean of M/M/inf at time t from an empty start.
pub fn mm_inf_mean(lambda: f64, mu: f64, t: f64) -> f64 {
    lambda / mu * (1.0 - (-mu * t).exp())
}

/// Integral of the M/M/inf mean over [0, t] from an empty start.
pub fn mm_inf_integrated_mean(lambda: f64, mu: f64, t: f64) -> f64 {
    lambda / mu * (t - (1.0 - (-mu * t).exp()) / mu)
}

/// Dense random matrix with entries in [-1, 1].
pub fn random_matrix(d: usize, rng: &mut impl rand::Rng) -> Array2<f64> {
    Array2::from_shape_fn((d, d), |_| rng.random_range(-1.0..1.0))
}

/// Random matrix shifted to be strictly stable (all eigenvalues have
/// negative real part): subtract (1-norm + margin) from the diagonal.
pub fn random_stable_matrix(d: usize, rng: &mut impl rand::Rng) -> Array2<f64> {
    let mut b = random_matrix(d, rng);
    let norm = mtqnet::numerics::one_norm(&b.view());
    for i in 0..d {
        b[[i, i]] -= norm + 0.1;
    }
    b
}

/// Dominant-eigenvalue modulus by power iteration; returns None when the
/// iteration fails to settle (e.g. a complex dominant pair).
pub fn power_iteration_radius(b: &Array2<f64>, iters: usize, tol: f64) -> Option<f64> {
    let d = b.nrows();
    let mut v = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    let mut prev = 0.0f64;
    for it in 0..iters {
        let w = b.dot(&v);
        let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            return Some(0.0);
        }
        v = &w / norm;
        if it > 10 && (norm - prev).abs() <= tol * norm {
            return Some(norm);
        }
        prev = norm;
    }
    None
}
