//! Adaptive Dormand-Prince 5(4) integrator, used as the independent
//! cross-check path for the moment differential equation.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Integrate `y' = rhs(t, y)` from 0 to `t_end`, returning `y(t_end)`.
///
/// Mixed absolute/relative error control: both tolerances equal `tol`
/// (default choice in this crate: 1e-10).
pub fn integrate_ode<F>(mut rhs: F, y0: &Array1<f64>, t_end: f64, tol: f64) -> Result<Array1<f64>>
where
    F: FnMut(f64, &Array1<f64>) -> Array1<f64>,
{
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration horizon must be finite and >= 0, got {t_end}"
        )));
    }
    if t_end == 0.0 {
        return Ok(y0.clone());
    }

    // Dormand-Prince coefficients
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // 5th order weights (same as last row of A: FSAL)
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    // 4th order embedded weights
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let dim = y0.len();
    let mut t = 0.0;
    let mut y = y0.clone();
    let mut h = (t_end / 100.0).min(0.1 * t_end.max(1.0)).max(1e-8);
    let mut k: Vec<Array1<f64>> = vec![Array1::zeros(dim); 7];
    k[0] = rhs(t, &y);

    let h_min_floor = t_end * 1e-15;
    loop {
        if t >= t_end {
            return Ok(y);
        }
        if h < h_min_floor {
            return Err(Error::StepSizeUnderflow { t });
        }
        h = h.min(t_end - t);

        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage) {
                if A[stage][j] != 0.0 {
                    ys.scaled_add(h * A[stage][j], kj);
                }
            }
            k[stage] = rhs(t + C[stage] * h, &ys);
        }

        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                y5.scaled_add(h * B5[j], kj);
            }
            if B4[j] != 0.0 {
                y4.scaled_add(h * B4[j], kj);
            }
        }

        // scaled max error
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let scale = tol + tol * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }

        if err <= 1.0 {
            t += h;
            y = y5;
            // FSAL: k7 of the accepted step is k1 of the next
            k[0] = k[6].clone();
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn exponential_decay() {
        let y = integrate_ode(|_, y| -y.clone(), &array![1.0], 1.0, 1e-10).unwrap();
        assert_abs_diff_eq!(y[0], (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn zero_rhs_returns_initial_exactly() {
        let y0 = array![2.0, -3.0];
        let y = integrate_ode(|_, y| Array1::zeros(y.len()), &y0, 5.0, 1e-10).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn zero_horizon_returns_initial() {
        let y0 = array![1.0, 2.0];
        let y = integrate_ode(|_, y| y.clone(), &y0, 0.0, 1e-10).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn harmonic_oscillator() {
        // y'' = -y as a system; y(0)=1, y'(0)=0 -> y(t)=cos t
        let y = integrate_ode(
            |_, y| array![y[1], -y[0]],
            &array![1.0, 0.0],
            std::f64::consts::PI,
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(y[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-9);
    }
}
