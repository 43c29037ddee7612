//! Real nonsymmetric eigenvalues: balancing, Hessenberg reduction by
//! stabilized elementary similarity transforms, then Francis double-shift QR.
//! Classic EISPACK lineage (balanc / elmhes / hqr), eigenvalues only.

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Max iterations per eigenvalue block before reporting non-convergence.
const MAX_ITS: usize = 40;

/// Largest real part over the spectrum of `b`.
pub fn spectral_abscissa(b: &Array2<f64>) -> Result<f64> {
    let eigs = eigenvalues(b)?;
    Ok(eigs
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues of a real square matrix.
pub fn eigenvalues(b: &Array2<f64>) -> Result<Vec<Eigenvalue>> {
    let n = b.nrows();
    assert_eq!(n, b.ncols(), "eigenvalues requires a square matrix");
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "eigenvalue input contains non-finite entries".into(),
        ));
    }
    match n {
        0 => return Ok(vec![]),
        1 => {
            return Ok(vec![Eigenvalue {
                re: b[[0, 0]],
                im: 0.0,
            }])
        }
        _ => {}
    }
    let mut a = b.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

/// EISPACK `balanc`: similarity scaling by radix powers so that row and
/// column norms become comparable. Eigenvalues are unchanged.
fn balance(a: &mut Array2<f64>) {
    const RADIX: f64 = 2.0;
    const SQRDX: f64 = RADIX * RADIX;
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[[j, i]].abs();
                    r += a[[i, j]].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                let mut c_acc = c;
                while c_acc < g {
                    f *= RADIX;
                    c_acc *= SQRDX;
                }
                g = r * RADIX;
                while c_acc > g {
                    f /= RADIX;
                    c_acc /= SQRDX;
                }
                if (c_acc + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        a[[i, j]] *= ginv;
                    }
                    for j in 0..n {
                        a[[j, i]] *= f;
                    }
                }
            }
        }
    }
}

/// EISPACK `elmhes`: reduce to upper Hessenberg form by stabilized
/// elementary similarity transformations; below-subdiagonal entries are
/// cleared afterwards.
fn hessenberg(a: &mut Array2<f64>) {
    let n = a.nrows();
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0f64;
        let mut i_piv = m;
        for j in m..n {
            if a[[j, m - 1]].abs() > x.abs() {
                x = a[[j, m - 1]];
                i_piv = j;
            }
        }
        if i_piv != m {
            for j in (m - 1)..n {
                let tmp = a[[i_piv, j]];
                a[[i_piv, j]] = a[[m, j]];
                a[[m, j]] = tmp;
            }
            for j in 0..n {
                let tmp = a[[j, i_piv]];
                a[[j, i_piv]] = a[[j, m]];
                a[[j, m]] = tmp;
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[[i, m - 1]];
                if y != 0.0 {
                    y /= x;
                    a[[i, m - 1]] = y;
                    for j in m..n {
                        let t = y * a[[m, j]];
                        a[[i, j]] -= t;
                    }
                    for j in 0..n {
                        let t = y * a[[j, i]];
                        a[[j, m]] += t;
                    }
                }
            }
        }
    }
    // multipliers were stashed below the subdiagonal; clear them
    for i in 2..n {
        for j in 0..(i - 1) {
            a[[i, j]] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK `hqr`).
fn hqr(a: &mut Array2<f64>) -> Result<Vec<Eigenvalue>> {
    let n = a.nrows() as isize;
    let at = |a: &Array2<f64>, i: isize, j: isize| a[[i as usize, j as usize]];
    let set = |a: &mut Array2<f64>, i: isize, j: isize, v: f64| a[[i as usize, j as usize]] = v;

    let mut wr = vec![0.0f64; n as usize];
    let mut wi = vec![0.0f64; n as usize];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(a, i, j).abs();
        }
    }

    let eps = f64::EPSILON;
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l > 0 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() <= eps * s {
                    set(a, l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                // one root found
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = at(a, nn - 1, nn - 1);
            let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
            if l == nn - 1 {
                // two roots found
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.abs().copysign(p);
                    wr[(nn - 1) as usize] = x + z;
                    wr[nn as usize] = x + z;
                    if z != 0.0 {
                        wr[nn as usize] = x - w / z;
                    }
                    wi[(nn - 1) as usize] = 0.0;
                    wi[nn as usize] = 0.0;
                } else {
                    wr[(nn - 1) as usize] = x + p;
                    wr[nn as usize] = x + p;
                    wi[nn as usize] = z;
                    wi[(nn - 1) as usize] = -z;
                }
                nn -= 2;
                break;
            }
            // no root found; continue iterating
            if its == MAX_ITS {
                return Err(Error::EigenNonConvergence {
                    index: nn as usize,
                    iterations: its,
                });
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nn {
                    let v = at(a, i, i) - x;
                    set(a, i, i, v);
                }
                let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            // form shift, then look for two consecutive small subdiagonals
            let mut m = nn - 2;
            let mut p = 0.0;
            let mut q = 0.0;
            let mut r = 0.0;
            while m >= l {
                let z = at(a, m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - rr - ss;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v =
                    p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                set(a, i, i - 2, 0.0);
            }
            for i in (m + 3)..=nn {
                set(a, i, i - 3, 0.0);
            }
            // double QR step on rows l..nn and columns m..nn
            for k in m..nn {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = if k != nn - 1 { at(a, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            let v = -at(a, k, k - 1);
                            set(a, k, k - 1, v);
                        }
                    } else {
                        set(a, k, k - 1, -s * x);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = at(a, k, j) + q * at(a, k + 1, j);
                        if k != nn - 1 {
                            pp += r * at(a, k + 2, j);
                            let v = at(a, k + 2, j) - pp * z;
                            set(a, k + 2, j, v);
                        }
                        let v1 = at(a, k + 1, j) - pp * y;
                        set(a, k + 1, j, v1);
                        let v0 = at(a, k, j) - pp * x;
                        set(a, k, j, v0);
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * at(a, i, k) + y * at(a, i, k + 1);
                        if k != nn - 1 {
                            pp += z * at(a, i, k + 2);
                            let v = at(a, i, k + 2) - pp * r;
                            set(a, i, k + 2, v);
                        }
                        let v1 = at(a, i, k + 1) - pp * q;
                        set(a, i, k + 1, v1);
                        let v0 = at(a, i, k) - pp;
                        set(a, i, k, v0);
                    }
                }
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Eigenvalue { re, im })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn sorted_re(mut v: Vec<Eigenvalue>) -> Vec<Eigenvalue> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn diagonal() {
        let b = array![[-1.0, 0.0], [0.0, -3.0]];
        assert_abs_diff_eq!(spectral_abscissa(&b).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_pair_rotation() {
        // [[0,-1],[1,0]] has eigenvalues +/- i
        let b = array![[0.0, -1.0], [1.0, 0.0]];
        let eigs = eigenvalues(&b).unwrap();
        assert_abs_diff_eq!(eigs[0].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[0].im.abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1].im.abs(), 1.0, epsilon = 1e-12);
        assert!(eigs[0].im * eigs[1].im < 0.0);
    }

    #[test]
    fn known_3x3() {
        // companion matrix of (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let b = array![[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let eigs = sorted_re(eigenvalues(&b).unwrap());
        assert_abs_diff_eq!(eigs[0].re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eigs[1].re, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eigs[2].re, 3.0, epsilon = 1e-9);
        for e in eigs {
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn generator_has_zero_abscissa() {
        let b = array![[-0.1, 0.1], [0.5, -0.5]];
        assert_abs_diff_eq!(spectral_abscissa(&b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn upper_triangular_spectrum_is_diagonal() {
        let b = array![
            [2.0, 5.0, -3.0, 1.0],
            [0.0, -1.5, 4.0, 2.0],
            [0.0, 0.0, 0.25, -7.0],
            [0.0, 0.0, 0.0, -4.0]
        ];
        let eigs = sorted_re(eigenvalues(&b).unwrap());
        let expect = [-4.0, -1.5, 0.25, 2.0];
        for (e, x) in eigs.iter().zip(expect) {
            assert_abs_diff_eq!(e.re, x, epsilon = 1e-9);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-9);
        }
    }
}
