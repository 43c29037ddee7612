//! Closed-form stationary means of the single-station retrial system,
//! solved by hand from the three stationary balance equations. Serves as an
//! independent oracle for the linear-algebra path.

use crate::error::{Error, Result};

/// Stationary means and loss ratio of the two-queue retrial system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrialStationaryMeans {
    /// Mean station occupancy while up.
    pub station_up: f64,
    /// Mean pool occupancy while the station is up.
    pub pool_up: f64,
    /// Mean pool occupancy while the station is down.
    pub pool_down: f64,
    /// Long-run fraction of customers leaving unserved.
    pub loss_ratio: f64,
}

pub fn retrial_closed_form(
    lambda: f64,
    kappa: f64,
    nu: f64,
    mu: f64,
    gamma_up: f64,
    gamma_down: f64,
) -> Result<RetrialStationaryMeans> {
    for (name, v) in [
        ("lambda", lambda),
        ("kappa", kappa),
        ("nu", nu),
        ("mu", mu),
        ("gamma_up", gamma_up),
        ("gamma_down", gamma_down),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "closed form requires {name} > 0, got {v}"
            )));
        }
    }
    let big_gamma = gamma_up + gamma_down;
    let eta = (kappa + nu + gamma_up) * (nu + gamma_down) / gamma_down
        - kappa * gamma_up / (mu + gamma_up)
        - gamma_up;
    if eta <= 0.0 {
        return Err(Error::ClosedFormInvalid { eta });
    }
    let pool_up = lambda * gamma_up / (big_gamma * eta)
        * ((mu + gamma_up + gamma_down) / (mu + gamma_up));
    let station_up = (kappa * pool_up + lambda * gamma_down / big_gamma) / (mu + gamma_up);
    let pool_down = (kappa + nu + gamma_up) / gamma_down * pool_up;
    let loss_ratio = nu / lambda * (pool_up + pool_down);
    Ok(RetrialStationaryMeans {
        station_up,
        pool_up,
        pool_down,
        loss_ratio,
    })
}

/// Limit of the loss ratio as the repair rate grows without bound.
pub fn retrial_loss_floor(lambda: f64, kappa: f64, nu: f64, mu: f64, gamma_up: f64) -> f64 {
    let _ = lambda;
    nu * gamma_up / (kappa * mu + nu * mu + nu * gamma_up)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_operating_point() {
        let m = retrial_closed_form(100.0, 2.0, 2.0, 1.0, 0.1, 2.1496).unwrap();
        assert_abs_diff_eq!(m.loss_ratio, 0.10, epsilon = 1e-3);
    }

    #[test]
    fn fast_repair_limit() {
        let m = retrial_closed_form(100.0, 2.0, 2.0, 1.0, 0.1, 1e9).unwrap();
        let floor = retrial_loss_floor(100.0, 2.0, 2.0, 1.0, 0.1);
        assert_abs_diff_eq!(floor, 0.2 / 4.2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.loss_ratio, floor, epsilon = 1e-7);
        assert_abs_diff_eq!(m.pool_down, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn rare_failure_limit() {
        let m = retrial_closed_form(100.0, 2.0, 2.0, 1.0, 1e-9, 0.5).unwrap();
        assert_abs_diff_eq!(m.pool_up, 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.pool_down, 0.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.loss_ratio, 0.0, epsilon = 1e-6);
    }
}
