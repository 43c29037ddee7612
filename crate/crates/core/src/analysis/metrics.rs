//! Cumulative performance metrics over a finite horizon: expected arrivals,
//! expected losses, and expected usage (a weighted time integral of the
//! population).
//!
//! Losses have two independent analytic routes with identical value:
//! * the counter route appends a drain-free counter queue and reads its
//!   transient mean (one larger matrix exponential);
//! * the integral route evaluates the weighted time integral of the mean
//!   with the per-state loss intensity as the weight vector.
//! The equality of both is a structural consistency check used by the tests
//! and spot-checked during experiment runs.

use ndarray::Array1;

use super::{integrated_env_distribution, integrated_mean, transient_mean};
use crate::assembly::assemble;
use crate::error::Result;
use crate::model::{augment_with_counter, CounterSpec, InitialCondition, NetworkModel};

/// Expand a per-queue weight vector to the flat environment-major layout.
pub fn tile_queue_weights(weights: &[f64], n_env: usize) -> Array1<f64> {
    let n = weights.len();
    let mut rho = Array1::zeros(n_env * n);
    for i in 0..n_env {
        for q in 0..n {
            rho[i * n + q] = weights[q];
        }
    }
    rho
}

/// Per-(environment, queue) loss intensity: the rate at which customers are
/// destroyed per present customer. Combines the counted leave-the-network
/// flows with the jump losses of all transitions out of the state.
pub fn loss_rate_vector(model: &NetworkModel, counted_departures: &[usize]) -> Array1<f64> {
    let n = model.n_queues;
    let mut rho = Array1::zeros(model.n_env * n);
    for i in 0..model.n_env {
        for q in 0..n {
            if counted_departures.contains(&q) {
                rho[i * n + q] += model.departure_rates[[i, q, 0]];
            }
        }
    }
    for tr in &model.transitions {
        let base = tr.from_env * n;
        for q in 0..n {
            rho[base + q] += tr.rate * tr.loss_weights[q] as f64;
        }
    }
    rho
}

/// Expected cumulative losses over [0, t], counter route: augment, take the
/// transient mean of the counter coordinate summed over environment states.
pub fn losses_via_counter(
    model: &NetworkModel,
    spec: &CounterSpec,
    init: &InitialCondition,
    t: f64,
) -> Result<f64> {
    let augmented = augment_with_counter(model, spec)?;
    let sys = assemble(&augmented);
    let init_aug = init.extended(model.n_queues, model.n_env, 1)?;
    let mean = transient_mean(&sys, &init_aug, t)?;
    let counter = model.n_queues; // index of the appended queue
    Ok((0..model.n_env)
        .map(|i| mean[i * augmented.n_queues + counter])
        .sum())
}

/// Expected cumulative losses over [0, t], weighted-integral route.
pub fn losses_via_integral(
    model: &NetworkModel,
    spec: &CounterSpec,
    init: &InitialCondition,
    t: f64,
) -> Result<f64> {
    let sys = assemble(model);
    let rho = loss_rate_vector(model, &spec.counted_departures);
    let integrated = integrated_mean(&sys, init, t)?;
    let mut total = rho.dot(&integrated);
    if let Some(direct) = &spec.direct_rates {
        let (pi0, _) = init.resolve(model.n_queues, model.n_env)?;
        let int_pi = integrated_env_distribution(&sys, &pi0, t)?;
        total += direct.dot(&int_pi);
    }
    Ok(total)
}

/// Expected number of arrivals over [0, t]: the time integral of the total
/// arrival rate against the environment law. `extra` adds per-state streams
/// that are not part of the model (arrivals dropped on the spot).
pub fn expected_arrivals(
    model: &NetworkModel,
    extra: Option<&Array1<f64>>,
    init: &InitialCondition,
    t: f64,
) -> Result<f64> {
    let sys = assemble(model);
    let (pi0, _) = init.resolve(model.n_queues, model.n_env)?;
    let int_pi = integrated_env_distribution(&sys, &pi0, t)?;
    let mut rates = model.total_arrival_rates();
    if let Some(e) = extra {
        rates = rates + e;
    }
    Ok(rates.dot(&int_pi))
}

/// Expected arrivals over [0, t] via the counter route: a counter queue fed
/// by fresh streams at the total arrival rate has exactly the expected
/// arrival count as its mean.
pub fn expected_arrivals_via_counter(
    model: &NetworkModel,
    extra: Option<&Array1<f64>>,
    init: &InitialCondition,
    t: f64,
) -> Result<f64> {
    let mut rates = model.total_arrival_rates();
    if let Some(e) = extra {
        rates = rates + e;
    }
    let spec = CounterSpec {
        counted_departures: vec![],
        count_jump_losses: false,
        direct_rates: Some(rates),
    };
    losses_via_counter(model, &spec, init, t)
}

/// Expected usage over [0, t]: `<rho, m>` integrated in time, with `rho`
/// given per queue.
pub fn usage_integral(
    model: &NetworkModel,
    weights_per_queue: &[f64],
    init: &InitialCondition,
    t: f64,
) -> Result<f64> {
    let sys = assemble(model);
    let rho = tile_queue_weights(weights_per_queue, model.n_env);
    let integrated = integrated_mean(&sys, init, t)?;
    Ok(rho.dot(&integrated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::retrial::single_retrial;
    use approx::assert_abs_diff_eq;

    #[test]
    fn loss_rate_vector_marks_renege_flows() {
        let model = single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let rho = loss_rate_vector(&model, &[1]);
        // retrial pool (queue 2) reneges at rate nu = 2 in both states
        assert_eq!(rho[1], 2.0);
        assert_eq!(rho[3], 2.0);
        assert_eq!(rho[0], 0.0);
        assert_eq!(rho[2], 0.0);
    }

    #[test]
    fn counter_and_integral_routes_agree_on_retrial() {
        let model = single_retrial(5.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let init = InitialCondition::empty(0, 2);
        let spec = CounterSpec {
            counted_departures: vec![1],
            count_jump_losses: true,
            direct_rates: None,
        };
        for t in [0.5, 2.0, 5.0] {
            let a = losses_via_counter(&model, &spec, &init, t).unwrap();
            let b = losses_via_integral(&model, &spec, &init, t).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn arrival_count_is_rate_times_horizon_when_total_rate_constant() {
        // retrial network: arrivals go to the station when up, to the pool
        // when down, so the total rate is lambda in every state
        let model = single_retrial(7.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let init = InitialCondition::empty(0, 2);
        let t = 3.0;
        let a = expected_arrivals(&model, None, &init, t).unwrap();
        assert_abs_diff_eq!(a, 7.0 * t, epsilon = 1e-9);
        let b = expected_arrivals_via_counter(&model, None, &init, t).unwrap();
        assert_abs_diff_eq!(b, 7.0 * t, epsilon = 1e-9);
    }
}
