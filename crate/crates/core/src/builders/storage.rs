//! Storage network: files replicated across subsets of K locations, each
//! location alternating between up and down.
//!
//! Queue n holds the files currently stored at exactly the subset S(n) of
//! locations; there is one queue per nonempty subset, ordered all-locations
//! first, then by decreasing cardinality (lexicographic within a
//! cardinality), so the last K queues are the single-location subsets.
//! Environment states enumerate the up-sets in the same order, with the
//! empty up-set (everything down) last.
//!
//! When location k fails, files stored at a subset containing k drop to the
//! subset minus k; files stored at {k} alone are lost. Arrivals aimed at a
//! subset are stored on its up-part; arrivals whose entire target set is
//! down are not admitted (and not counted).

use ndarray::{Array2, Array3};

use super::subsets_by_cardinality;
use crate::error::{Error, Result};
use crate::model::{CounterSpec, Labels, MultiplicativeTransition, NetworkModel};

#[derive(Debug, Clone)]
pub struct StorageParams {
    /// Number of locations K.
    pub locations: usize,
    /// Arrival rate per target subset, length 2^K - 1, in queue order.
    pub arrival_rates: Vec<f64>,
    /// Optional copy/delete hop rates, (2^K - 1) x 2^K: column 0 deletes the
    /// file completely, column n' moves it to subset n'. A hop to subset n'
    /// is only active in environment states where all of S(n') is up.
    pub hop_rates: Option<Array2<f64>>,
    /// Failure rate per location.
    pub up_rates: Vec<f64>,
    /// Repair rate per location.
    pub down_rates: Vec<f64>,
}

impl StorageParams {
    fn check(&self) -> Result<()> {
        let k = self.locations;
        if k == 0 || k > 8 {
            return Err(Error::InvalidInput(
                "number of locations must be between 1 and 8".into(),
            ));
        }
        let n = (1usize << k) - 1;
        if self.arrival_rates.len() != n {
            return Err(Error::InvalidInput(format!(
                "arrival rates must have one entry per nonempty subset ({n})"
            )));
        }
        if let Some(h) = &self.hop_rates {
            if h.dim() != (n, n + 1) {
                return Err(Error::InvalidInput(format!(
                    "hop rates must be {n} x {}",
                    n + 1
                )));
            }
        }
        if self.up_rates.len() != k || self.down_rates.len() != k {
            return Err(Error::InvalidInput(
                "up/down rates must have one entry per location".into(),
            ));
        }
        Ok(())
    }
}

fn mask_label(mask: u32, k: usize) -> String {
    let elems: Vec<String> = (0..k)
        .filter(|&b| mask & (1 << b) != 0)
        .map(|b| (b + 1).to_string())
        .collect();
    if elems.is_empty() {
        "none".to_string()
    } else {
        elems.join("+")
    }
}

pub fn build_storage_network(p: &StorageParams) -> Result<NetworkModel> {
    p.check()?;
    let k = p.locations;
    let queue_masks = subsets_by_cardinality(k, false);
    let env_masks = subsets_by_cardinality(k, true);
    let n = queue_masks.len();
    let i_dim = env_masks.len();
    let queue_of_mask = |mask: u32| -> Option<usize> {
        if mask == 0 {
            None
        } else {
            queue_masks.iter().position(|&m| m == mask)
        }
    };

    let mut arrivals = Array2::zeros((i_dim, n));
    for (i, &up) in env_masks.iter().enumerate() {
        for (target_q, &target_mask) in queue_masks.iter().enumerate() {
            // arrivals intended for subset n' land where its up-part equals
            // this queue's subset
            let landing = target_mask & up;
            if landing != 0 {
                let land_q = queue_of_mask(landing).expect("nonempty subset has a queue");
                arrivals[[i, land_q]] += p.arrival_rates[target_q];
            }
        }
    }

    let mut departures = Array3::zeros((i_dim, n, n + 1));
    if let Some(h) = &p.hop_rates {
        for (i, &up) in env_masks.iter().enumerate() {
            for q in 0..n {
                departures[[i, q, 0]] = h[[q, 0]];
                for (target_q, &target_mask) in queue_masks.iter().enumerate() {
                    if target_q != q && target_mask & up == target_mask {
                        departures[[i, q, target_q + 1]] = h[[q, target_q + 1]];
                    }
                }
            }
        }
    }

    let mut transitions = Vec::new();
    for (i, &up) in env_masks.iter().enumerate() {
        for loc in 0..k {
            let bit = 1u32 << loc;
            if up & bit != 0 {
                // location loc goes down
                let to_mask = up & !bit;
                let j = env_masks
                    .iter()
                    .position(|&m| m == to_mask)
                    .expect("every up-set is a state");
                let mut a = Array2::zeros((n, n));
                let mut losses = vec![0u64; n];
                for (q, &subset) in queue_masks.iter().enumerate() {
                    if subset & bit == 0 {
                        a[[q, q]] = 1;
                    } else {
                        let reduced = subset & !bit;
                        match queue_of_mask(reduced) {
                            Some(dest) => a[[dest, q]] = 1,
                            None => losses[q] = 1, // single-location subset {loc}
                        }
                    }
                }
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: j,
                    rate: p.up_rates[loc],
                    matrix: a,
                    loss_weights: losses,
                });
            } else {
                // location loc is repaired; populations unchanged
                let to_mask = up | bit;
                let j = env_masks
                    .iter()
                    .position(|&m| m == to_mask)
                    .expect("every up-set is a state");
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: j,
                    rate: p.down_rates[loc],
                    matrix: Array2::eye(n).mapv(|x: f64| x as u64),
                    loss_weights: vec![0; n],
                });
            }
        }
    }

    Ok(NetworkModel {
        n_queues: n,
        n_env: i_dim,
        arrival_rates: arrivals,
        departure_rates: departures,
        transitions,
        labels: Labels {
            queues: Some(queue_masks.iter().map(|&m| mask_label(m, k)).collect()),
            env: Some(
                env_masks
                    .iter()
                    .map(|&m| format!("up:{}", mask_label(m, k)))
                    .collect(),
            ),
        },
    })
}

/// Loss accounting: single-location files destroyed by failures.
pub fn loss_spec() -> CounterSpec {
    CounterSpec::jump_losses()
}

/// Storage usage per file: the number of locations holding a copy.
pub fn usage_weights(locations: usize) -> Vec<f64> {
    subsets_by_cardinality(locations, false)
        .iter()
        .map(|m| m.count_ones() as f64)
        .collect()
}

/// 0-based queue indices of the single-location subsets, in location order.
pub fn single_location_queues(locations: usize) -> Vec<usize> {
    let masks = subsets_by_cardinality(locations, false);
    (0..locations)
        .map(|loc| {
            masks
                .iter()
                .position(|&m| m == 1 << loc)
                .expect("every singleton is a queue")
        })
        .collect()
}
