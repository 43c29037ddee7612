//! Counter augmentation: append a drain-free queue that accumulates counted
//! events, so that cumulative metrics become ordinary transient means.

use ndarray::{Array1, Array2, Array3};

use super::{MultiplicativeTransition, NetworkModel};
use crate::error::{Error, Result};

/// What the appended counter queue accumulates.
#[derive(Debug, Clone, Default)]
pub struct CounterSpec {
    /// Queues whose departure-to-outside flow is redirected into the counter
    /// (each counted customer ends up in the counter instead of leaving).
    pub counted_departures: Vec<usize>,
    /// Accumulate `<loss_weights, m>` of each multiplicative jump.
    pub count_jump_losses: bool,
    /// Extra Poisson streams feeding the counter directly, one rate per
    /// environment state (e.g. arrivals that are dropped on the spot).
    pub direct_rates: Option<Array1<f64>>,
}

impl CounterSpec {
    pub fn jump_losses() -> Self {
        CounterSpec {
            counted_departures: vec![],
            count_jump_losses: true,
            direct_rates: None,
        }
    }
}

/// Append one counter coordinate to the state space.
///
/// The counter queue has no departures; every transition matrix `A` is
/// extended to `[[A, 0], [c, 1]]` so the counter picks up `<c, m>` at each
/// jump (when jump losses are counted) and is itself preserved.
pub fn augment_with_counter(model: &NetworkModel, spec: &CounterSpec) -> Result<NetworkModel> {
    let n = model.n_queues;
    let i_dim = model.n_env;
    let counter = n; // 0-based index of the new queue

    for &q in &spec.counted_departures {
        if q >= n {
            return Err(Error::InvalidInput(format!(
                "counted queue {} out of range 1..={n}",
                q + 1
            )));
        }
        let any_outflow = (0..i_dim).any(|i| model.departure_rates[[i, q, 0]] > 0.0);
        if !any_outflow {
            return Err(Error::NothingToCount { queue: q });
        }
    }
    if let Some(rates) = &spec.direct_rates {
        if rates.len() != i_dim {
            return Err(Error::InvalidInput(format!(
                "direct counter rates have length {}, expected {i_dim}",
                rates.len()
            )));
        }
        if rates.iter().any(|&r| r < 0.0 || !r.is_finite()) {
            return Err(Error::InvalidInput(
                "direct counter rates must be finite and nonnegative".into(),
            ));
        }
    }

    let mut arrivals = Array2::zeros((i_dim, n + 1));
    for i in 0..i_dim {
        for q in 0..n {
            arrivals[[i, q]] = model.arrival_rates[[i, q]];
        }
        if let Some(rates) = &spec.direct_rates {
            arrivals[[i, counter]] = rates[i];
        }
    }

    let mut departures = Array3::zeros((i_dim, n + 1, n + 2));
    for i in 0..i_dim {
        for q in 0..n {
            let redirect = spec.counted_departures.contains(&q);
            for target in 0..=n {
                let rate = model.departure_rates[[i, q, target]];
                if target == 0 && redirect {
                    departures[[i, q, counter + 1]] = rate;
                } else {
                    departures[[i, q, target]] = rate;
                }
            }
        }
        // counter queue: zero departure rates
    }

    let transitions = model
        .transitions
        .iter()
        .map(|tr| {
            let mut matrix = Array2::zeros((n + 1, n + 1));
            for r in 0..n {
                for c in 0..n {
                    matrix[[r, c]] = tr.matrix[[r, c]];
                }
            }
            if spec.count_jump_losses {
                for (c, &w) in tr.loss_weights.iter().enumerate() {
                    matrix[[counter, c]] = w;
                }
            }
            matrix[[counter, counter]] = 1;
            let loss_weights = if spec.count_jump_losses {
                vec![0; n + 1]
            } else {
                let mut w = tr.loss_weights.clone();
                w.push(0);
                w
            };
            MultiplicativeTransition {
                from_env: tr.from_env,
                to_env: tr.to_env,
                rate: tr.rate,
                matrix,
                loss_weights,
            }
        })
        .collect();

    let mut labels = model.labels.clone();
    if let Some(queues) = &mut labels.queues {
        queues.push("counter".into());
    }

    Ok(NetworkModel {
        n_queues: n + 1,
        n_env: i_dim,
        arrival_rates: arrivals,
        departure_rates: departures,
        transitions,
        labels,
    })
}

/// Loss-counter augmentation: redirect the listed queues' leave-the-network
/// flows into the counter and accumulate the per-transition loss weights.
pub fn augment_with_loss_counter(model: &NetworkModel, counted: &[usize]) -> Result<NetworkModel> {
    augment_with_counter(
        model,
        &CounterSpec {
            counted_departures: counted.to_vec(),
            count_jump_losses: true,
            direct_rates: None,
        },
    )
}
