//! Network of faulty service stations with retrial pools.
//!
//! Stations alternate between up and down. While up, a station serves as an
//! infinite-server queue; on failure its whole population moves instantly to
//! the associated retrial pool, from where customers independently retry
//! (when the station is up) or renege. Queues 1..N° are the stations,
//! N°+1..2N° the pools. Environment states enumerate the set of down
//! stations as a bitmask, all-up first.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::model::{CounterSpec, Labels, MultiplicativeTransition, NetworkModel};

#[derive(Debug, Clone)]
pub struct RetrialNetworkParams {
    /// Number of stations N°.
    pub stations: usize,
    /// Arrival rate per station.
    pub arrival_rates: Vec<f64>,
    /// N° x (N°+1) post-service routing rates; column 0 leaves the network,
    /// column n' routes to station n'. Self-routing must be zero.
    pub routing: Array2<f64>,
    /// Retrial rate per pool.
    pub retrial_rates: Vec<f64>,
    /// Renege rate per pool.
    pub renege_rates: Vec<f64>,
    /// Failure rate per station (reciprocal mean up-time).
    pub up_rates: Vec<f64>,
    /// Repair rate per station (reciprocal mean down-time).
    pub down_rates: Vec<f64>,
}

impl RetrialNetworkParams {
    fn check(&self) -> Result<()> {
        let k = self.stations;
        if k == 0 {
            return Err(Error::InvalidInput("need at least one station".into()));
        }
        if self.arrival_rates.len() != k
            || self.retrial_rates.len() != k
            || self.renege_rates.len() != k
            || self.up_rates.len() != k
            || self.down_rates.len() != k
        {
            return Err(Error::InvalidInput(
                "per-station parameter vectors must all have length N°".into(),
            ));
        }
        if self.routing.dim() != (k, k + 1) {
            return Err(Error::InvalidInput(
                "routing matrix must be N° x (N°+1)".into(),
            ));
        }
        for n in 0..k {
            if self.routing[[n, n + 1]] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "self-routing rate of station {} must be zero",
                    n + 1
                )));
            }
        }
        Ok(())
    }
}

/// Station `s` is up in environment state `i` iff bit `s` of the down-mask
/// `i` is clear.
#[inline]
fn is_up(state: usize, station: usize) -> bool {
    state & (1 << station) == 0
}

pub fn build_retrial_network(p: &RetrialNetworkParams) -> Result<NetworkModel> {
    p.check()?;
    let k = p.stations;
    let n = 2 * k;
    let i_dim = 1usize << k;

    let mut arrivals = Array2::zeros((i_dim, n));
    let mut departures = Array3::zeros((i_dim, n, n + 1));
    for i in 0..i_dim {
        for s in 0..k {
            let up = is_up(i, s);
            if up {
                arrivals[[i, s]] = p.arrival_rates[s];
            } else {
                arrivals[[i, k + s]] = p.arrival_rates[s];
            }
            // post-service routing: to the target station when it is up,
            // into its pool when it is down; leaving is unconditional
            departures[[i, s, 0]] = p.routing[[s, 0]];
            for t in 0..k {
                if t == s {
                    continue;
                }
                if is_up(i, t) {
                    departures[[i, s, t + 1]] = p.routing[[s, t + 1]];
                } else {
                    departures[[i, s, k + t + 1]] = p.routing[[s, t + 1]];
                }
            }
            // pool: retries reach the station only while it is up; reneges
            // are unconditional
            if up {
                departures[[i, k + s, s + 1]] = p.retrial_rates[s];
            }
            departures[[i, k + s, 0]] = p.renege_rates[s];
        }
    }

    let mut transitions = Vec::new();
    for i in 0..i_dim {
        for s in 0..k {
            if is_up(i, s) {
                // failure: flush station s into its pool
                let mut a = Array2::eye(n).mapv(|x: f64| x as u64);
                a[[s, s]] = 0;
                a[[k + s, s]] = 1;
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: i | (1 << s),
                    rate: p.up_rates[s],
                    matrix: a,
                    loss_weights: vec![0; n],
                });
            } else {
                // repair: population unchanged
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: i & !(1 << s),
                    rate: p.down_rates[s],
                    matrix: Array2::eye(n).mapv(|x: f64| x as u64),
                    loss_weights: vec![0; n],
                });
            }
        }
    }

    let queue_labels = (0..k)
        .map(|s| format!("station{}", s + 1))
        .chain((0..k).map(|s| format!("pool{}", s + 1)))
        .collect();
    let env_labels = (0..i_dim)
        .map(|i| {
            let down: Vec<String> = (0..k)
                .filter(|&s| !is_up(i, s))
                .map(|s| (s + 1).to_string())
                .collect();
            if down.is_empty() {
                "all-up".to_string()
            } else {
                format!("down:{}", down.join(","))
            }
        })
        .collect();

    Ok(NetworkModel {
        n_queues: n,
        n_env: i_dim,
        arrival_rates: arrivals,
        departure_rates: departures,
        transitions,
        labels: Labels {
            queues: Some(queue_labels),
            env: Some(env_labels),
        },
    })
}

/// Queue indices whose leave-the-network flow is a renege (the pools).
pub fn renege_queues(stations: usize) -> Vec<usize> {
    (stations..2 * stations).collect()
}

/// Loss accounting for a retrial network: reneges from the pools.
pub fn loss_spec(stations: usize) -> CounterSpec {
    CounterSpec {
        counted_departures: renege_queues(stations),
        count_jump_losses: true,
        direct_rates: None,
    }
}

/// The two-queue single-station system: service station plus retrial pool,
/// modulated by one up/down component.
pub fn single_retrial(
    lambda: f64,
    kappa: f64,
    nu: f64,
    mu: f64,
    gamma_up: f64,
    gamma_down: f64,
) -> NetworkModel {
    let mut routing = Array2::zeros((1, 2));
    routing[[0, 0]] = mu;
    build_retrial_network(&RetrialNetworkParams {
        stations: 1,
        arrival_rates: vec![lambda],
        routing,
        retrial_rates: vec![kappa],
        renege_rates: vec![nu],
        up_rates: vec![gamma_up],
        down_rates: vec![gamma_down],
    })
    .expect("single-station parameters are structurally valid")
}
