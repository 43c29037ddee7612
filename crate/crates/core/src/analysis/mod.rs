//! Transient and stationary analysis of an assembled system: environment
//! law, mean queue contents, their time integrals, stability, and weighted
//! performance metrics.

pub mod metrics;

use ndarray::{s, Array1};
use serde::Serialize;

use crate::assembly::AssembledSystem;
use crate::error::{Error, Result};
use crate::model::{InitialCondition, NetworkModel};
use crate::numerics::{expm, solve_linear, spectral_abscissa};

/// Snapshot of the analytic state at one time point.
#[derive(Debug, Clone)]
pub struct TransientState {
    pub t: f64,
    /// pi(t), length I.
    pub env_dist: Array1<f64>,
    /// Mbar(t), length J, environment-major.
    pub mean: Array1<f64>,
    /// Integral of Mbar over [0, t], length J.
    pub integrated_mean: Option<Array1<f64>>,
}

/// Stability verdict from the spectral abscissa of the drift matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityVerdict {
    pub omega: f64,
    pub stable: bool,
    /// |omega| < 1e-7: conditioning of the stationary solve degrades and
    /// threshold searches should treat the model as unstable.
    pub near_margin: bool,
}

const MARGIN: f64 = 1e-7;

/// Transient environment distribution `pi(t) = exp(a_env^T t) pi(0)`.
pub fn env_distribution(
    sys: &AssembledSystem,
    pi0: &Array1<f64>,
    t: f64,
) -> Result<Array1<f64>> {
    Ok(expm(&sys.a_env.t().to_owned(), t)?.dot(pi0))
}

/// Time integral of the environment distribution over [0, t], computed from
/// the top-right corner of the exponential of [[0, I], [0, a_env^T]].
pub fn integrated_env_distribution(
    sys: &AssembledSystem,
    pi0: &Array1<f64>,
    t: f64,
) -> Result<Array1<f64>> {
    let i_dim = sys.n_env;
    let mut block = ndarray::Array2::zeros((2 * i_dim, 2 * i_dim));
    block
        .slice_mut(s![..i_dim, i_dim..])
        .assign(&ndarray::Array2::eye(i_dim));
    block
        .slice_mut(s![i_dim.., i_dim..])
        .assign(&sys.a_env.t());
    let e = expm(&block, t)?;
    let corner = e.slice(s![..i_dim, i_dim..]).to_owned();
    Ok(corner.dot(pi0))
}

/// Transient mean vector `Mbar(t)`: the homogeneous part is a plain matrix
/// exponential; the convolution with the environment law is read off the
/// top-right J x I corner of `exp(c t)`.
pub fn transient_mean(
    sys: &AssembledSystem,
    init: &InitialCondition,
    t: f64,
) -> Result<Array1<f64>> {
    let (pi0, mbar0) = init.resolve(sys.n_queues, sys.n_env)?;
    let j = sys.j_dim();
    let homogeneous = expm(&sys.ma, t)?.dot(&mbar0);
    let e_c = expm(&sys.c, t)?;
    let corner = e_c.slice(s![..j, j..]).to_owned();
    Ok(homogeneous + corner.dot(&pi0))
}

/// Integral of the mean vector over [0, t], via the top-right corners of
/// `exp(c1 t)` (initial-value part) and `exp(c2 t)` (convolution part).
pub fn integrated_mean(
    sys: &AssembledSystem,
    init: &InitialCondition,
    t: f64,
) -> Result<Array1<f64>> {
    let (pi0, mbar0) = init.resolve(sys.n_queues, sys.n_env)?;
    let j = sys.j_dim();
    let jp = j + sys.n_env;

    let e_c1 = expm(&sys.c1, t)?;
    let first = e_c1.slice(s![..j, j..]).to_owned().dot(&mbar0);

    let e_c2 = expm(&sys.c2, t)?;
    let second = e_c2
        .slice(s![..j, (2 * jp - sys.n_env)..])
        .to_owned()
        .dot(&pi0);

    Ok(first + second)
}

/// Bundle pi(t), Mbar(t) and optionally the integrated mean at one time.
pub fn transient_state(
    sys: &AssembledSystem,
    init: &InitialCondition,
    t: f64,
    with_integrated: bool,
) -> Result<TransientState> {
    let (pi0, _) = init.resolve(sys.n_queues, sys.n_env)?;
    Ok(TransientState {
        t,
        env_dist: env_distribution(sys, &pi0, t)?,
        mean: transient_mean(sys, init, t)?,
        integrated_mean: if with_integrated {
            Some(integrated_mean(sys, init, t)?)
        } else {
            None
        },
    })
}

/// Stability of the mean dynamics: the system is ergodic when the spectral
/// abscissa of the drift matrix is negative.
pub fn stability(sys: &AssembledSystem) -> Result<StabilityVerdict> {
    let omega = spectral_abscissa(&sys.ma)?;
    Ok(StabilityVerdict {
        omega,
        stable: omega < 0.0,
        near_margin: omega.abs() < MARGIN,
    })
}

/// Stationary environment distribution: solve `a_env^T pi = 0` with the last
/// equation replaced by the normalization `sum pi = 1`.
pub fn stationary_env_distribution(sys: &AssembledSystem) -> Result<Array1<f64>> {
    let i_dim = sys.n_env;
    let mut system = sys.a_env.t().to_owned();
    for j in 0..i_dim {
        system[[i_dim - 1, j]] = 1.0;
    }
    let mut rhs = Array1::zeros(i_dim);
    rhs[i_dim - 1] = 1.0;
    solve_linear(&system, &rhs)
}

/// Stationary (pi, Mbar). Refuses on an unstable or marginally stable drift
/// matrix: the balance equation only characterizes the stationary mean when
/// the system is ergodic.
pub fn stationary_mean(sys: &AssembledSystem) -> Result<(Array1<f64>, Array1<f64>)> {
    let verdict = stability(sys)?;
    if verdict.omega >= 0.0 {
        return Err(Error::UnstableSystem {
            omega: verdict.omega,
        });
    }
    let pi = stationary_env_distribution(sys)?;
    let rhs = -sys.l.dot(&pi);
    let mbar = solve_linear(&sys.ma, &rhs)?;
    Ok((pi, mbar))
}

/// Weighted terminal metric `v(T) = <rho, Mbar(T)>`, `rho` of length J.
pub fn metric_v(
    sys: &AssembledSystem,
    init: &InitialCondition,
    rho: &Array1<f64>,
    t: f64,
) -> Result<f64> {
    let mean = transient_mean(sys, init, t)?;
    Ok(rho.dot(&mean))
}

/// Weighted cumulative metric `w(T) = <rho, integral of Mbar over [0, T]>`.
pub fn metric_w(
    sys: &AssembledSystem,
    init: &InitialCondition,
    rho: &Array1<f64>,
    t: f64,
) -> Result<f64> {
    let integrated = integrated_mean(sys, init, t)?;
    Ok(rho.dot(&integrated))
}

/// JSON-friendly labeled snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledState {
    pub t: f64,
    pub pi: Vec<LabeledValue>,
    pub mean: Vec<LabeledCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrated_mean: Option<Vec<LabeledCell>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledValue {
    pub env: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledCell {
    pub env: String,
    pub queue: String,
    pub value: f64,
}

impl TransientState {
    pub fn labeled(&self, model: &NetworkModel) -> LabeledState {
        let n = model.n_queues;
        let label_cells = |v: &Array1<f64>| {
            (0..model.n_env)
                .flat_map(|i| {
                    (0..n).map(move |q| (i, q))
                })
                .map(|(i, q)| LabeledCell {
                    env: model.env_label(i),
                    queue: model.queue_label(q),
                    value: v[i * n + q],
                })
                .collect::<Vec<_>>()
        };
        LabeledState {
            t: self.t,
            pi: (0..model.n_env)
                .map(|i| LabeledValue {
                    env: model.env_label(i),
                    value: self.env_dist[i],
                })
                .collect(),
            mean: label_cells(&self.mean),
            integrated_mean: self.integrated_mean.as_ref().map(label_cells),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::builders::retrial::single_retrial;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn mm_inf(lambda: f64, mu: f64) -> AssembledSystem {
        let mut dep = ndarray::Array3::zeros((1, 1, 2));
        dep[[0, 0, 0]] = mu;
        let model = NetworkModel {
            n_queues: 1,
            n_env: 1,
            arrival_rates: array![[lambda]],
            departure_rates: dep,
            transitions: vec![],
            labels: Default::default(),
        };
        assemble(&model)
    }

    #[test]
    fn env_distribution_at_zero_is_initial() {
        let sys = assemble(&single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 0.5));
        let pi0 = array![0.3, 0.7];
        let pi = env_distribution(&sys, &pi0, 0.0).unwrap();
        assert_eq!(pi, pi0);
    }

    #[test]
    fn two_state_longrun_fractions() {
        let (gu, gd) = (0.1, 0.5);
        let sys = assemble(&single_retrial(100.0, 2.0, 2.0, 1.0, gu, gd));
        let pi = env_distribution(&sys, &array![1.0, 0.0], 200.0).unwrap();
        let gamma = gu + gd;
        assert_abs_diff_eq!(pi[0], gd / gamma, epsilon = 1e-10);
        assert_abs_diff_eq!(pi[1], gu / gamma, epsilon = 1e-10);
    }

    #[test]
    fn symmetric_two_state_hand_solution() {
        // both rates gamma, started in state 1: pi_1(t) = (1 + e^{-2 gamma t}) / 2
        let gamma = 0.8;
        let sys = assemble(&single_retrial(1.0, 1.0, 1.0, 1.0, gamma, gamma));
        for t in [0.0, 0.3, 1.7, 6.0] {
            let pi = env_distribution(&sys, &array![1.0, 0.0], t).unwrap();
            let expected = 0.5 * (1.0 + (-2.0 * gamma * t).exp());
            assert_abs_diff_eq!(pi[0], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn integrated_env_matches_quadrature_of_env() {
        let sys = assemble(&single_retrial(1.0, 1.0, 1.0, 1.0, 0.3, 0.9));
        let pi0 = array![1.0, 0.0];
        let t = 4.0;
        let direct = integrated_env_distribution(&sys, &pi0, t).unwrap();
        // Simpson on a fine grid
        let steps = 2000;
        let h = t / steps as f64;
        let mut acc = Array1::zeros(2);
        for k in 0..=steps {
            let w = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc = acc + env_distribution(&sys, &pi0, k as f64 * h).unwrap() * (w * h / 3.0);
        }
        assert_abs_diff_eq!(direct[0], acc[0], epsilon = 1e-9);
        assert_abs_diff_eq!(direct[1], acc[1], epsilon = 1e-9);
    }

    #[test]
    fn mm_inf_transient_closed_form() {
        let (lambda, mu) = (10.0, 1.0);
        let sys = mm_inf(lambda, mu);
        let init = InitialCondition::empty(0, 1);
        for t in [0.0, 0.5, 2.0, 10.0] {
            let mean = transient_mean(&sys, &init, t).unwrap();
            let expected = lambda / mu * (1.0 - (-mu * t).exp());
            assert_abs_diff_eq!(mean[0], expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn mm_inf_integrated_closed_form() {
        let (lambda, mu) = (10.0, 1.0);
        let sys = mm_inf(lambda, mu);
        let init = InitialCondition::empty(0, 1);
        for t in [0.0, 0.5, 2.0, 10.0] {
            let integrated = integrated_mean(&sys, &init, t).unwrap();
            let expected = lambda / mu * (t - (1.0 - (-mu * t).exp()) / mu);
            assert_abs_diff_eq!(integrated[0], expected, epsilon = 1e-9);
        }
        // w with all-ones weights equals the integral itself
        let w = metric_w(&sys, &init, &array![1.0], 2.0).unwrap();
        let expected = lambda / mu * (2.0 - (1.0 - (-mu * 2.0f64).exp()) / mu);
        assert_abs_diff_eq!(w, expected, epsilon = 1e-9);
    }

    #[test]
    fn transient_at_zero_returns_initial_mean() {
        let sys = assemble(&single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 0.5));
        let init = InitialCondition::Point {
            population: vec![7, 3],
            env_state: 0,
        };
        let mean = transient_mean(&sys, &init, 0.0).unwrap();
        assert_abs_diff_eq!(mean[0], 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mean[1], 3.0, epsilon = 1e-12);
        let integ = integrated_mean(&sys, &init, 0.0).unwrap();
        for v in integ.iter() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn stationary_mean_of_mm_inf() {
        let sys = mm_inf(3.0, 2.0);
        let (pi, mbar) = stationary_mean(&sys).unwrap();
        assert_abs_diff_eq!(pi[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mbar[0], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn stationary_refuses_unstable() {
        // single queue doubling at rate alpha > mu
        let model = crate::builders::scalar_multiplicative(1.0, 1.0, 2, 1.5);
        let sys = assemble(&model);
        match stationary_mean(&sys) {
            Err(Error::UnstableSystem { omega }) => assert!(omega > 0.0),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn zero_weights_give_zero_metrics() {
        let sys = assemble(&single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 0.5));
        let init = InitialCondition::empty(0, 2);
        let rho = Array1::zeros(sys.j_dim());
        assert_eq!(metric_v(&sys, &init, &rho, 3.0).unwrap(), 0.0);
        assert_eq!(metric_w(&sys, &init, &rho, 3.0).unwrap(), 0.0);
    }
}
