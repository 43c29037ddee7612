//! Matrix exponential via scaling-and-squaring with a degree-13 diagonal
//! Padé approximant (Higham 2005). The degree is fixed rather than selected
//! per input so that repeated runs are bit-identical.

use ndarray::Array2;

use super::{identity, linsolve::solve_linear_multi, one_norm};
use crate::error::{Error, Result};

/// 1-norm threshold for the degree-13 approximant (Higham 2005, Table 10.2).
const THETA_13: f64 = 5.371_920_351_148_152;

/// Padé(13,13) numerator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Compute `exp(B * t)`.
///
/// Scaling is chosen from the 1-norm of `B*t` against `THETA_13`; a
/// non-finite result is reported as an overflow rather than returned.
pub fn expm(b: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
    let d = b.nrows();
    assert_eq!(d, b.ncols(), "expm requires a square matrix");
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "expm requires finite t >= 0, got {t}"
        )));
    }
    if d == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let bt = b * t;
    if bt.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "expm input contains non-finite entries".into(),
        ));
    }
    let norm = one_norm(&bt.view());
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    // 2^squarings can exceed f64 range only for absurd norms; report instead.
    if squarings > 1000 {
        return Err(Error::ExpOverflow { norm });
    }
    let scaled = &bt / (2.0f64).powi(squarings as i32);
    let mut result = pade13(&scaled)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    if result.iter().any(|x| !x.is_finite()) {
        return Err(Error::ExpOverflow { norm });
    }
    Ok(result)
}

fn pade13(a: &Array2<f64>) -> Result<Array2<f64>> {
    let d = a.nrows();
    let eye = identity(d);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = &a6 * PADE13[13] + &a4 * PADE13[11] + &a2 * PADE13[9];
    let w2 = w1.dot(&a6) + &a6 * PADE13[7] + &a4 * PADE13[5] + &a2 * PADE13[3] + &eye * PADE13[1];
    let u = a.dot(&w2);

    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v1 = &a6 * PADE13[12] + &a4 * PADE13[10] + &a2 * PADE13[8];
    let v = v1.dot(&a6) + &a6 * PADE13[6] + &a4 * PADE13[4] + &a2 * PADE13[2] + &eye * PADE13[0];

    // exp(A) ~= (v - u)^{-1} (v + u)
    let num = &v + &u;
    let den = &v - &u;
    solve_linear_multi(&den, &num)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn zero_matrix_gives_identity() {
        let b = Array2::<f64>::zeros((3, 3));
        let e = expm(&b, 1.0).unwrap();
        assert_eq!(e, identity(3));
    }

    #[test]
    fn diagonal_case() {
        let b = array![[-1.0, 0.0], [0.0, -2.0]];
        let e = expm(&b, 1.0).unwrap();
        assert_abs_diff_eq!(e[[0, 0]], (-1.0f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[[1, 1]], (-2.0f64).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[[0, 1]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[[1, 0]], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn generator_transpose_columns_sum_to_one() {
        // two-state chain, gamma_up = 0.1, gamma_down = 0.5
        let a_env = array![[-0.1, 0.1], [0.5, -0.5]];
        let b = a_env.t().to_owned();
        for t in [0.1, 1.0, 10.0] {
            let e = expm(&b, t).unwrap();
            for j in 0..2 {
                let s: f64 = (0..2).map(|i| e[[i, j]]).sum();
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn nilpotent_block() {
        // exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
        let b = array![[0.0, 1.0], [0.0, 0.0]];
        let e = expm(&b, 3.5).unwrap();
        assert_abs_diff_eq!(e[[0, 0]], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[[0, 1]], 3.5, epsilon = 1e-13);
        assert_abs_diff_eq!(e[[1, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[[1, 1]], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn overflow_is_reported() {
        let b = array![[300.0, 0.0], [0.0, 300.0]];
        match expm(&b, 10.0) {
            Err(Error::ExpOverflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
