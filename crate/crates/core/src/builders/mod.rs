//! Builders that encode the application models (retrial networks, rerouting
//! networks, storage systems) as network models with multiplicative
//! transitions.

pub mod premium;
pub mod rerouting;
pub mod retrial;
pub mod storage;

pub use premium::{build_premium_storage, PremiumStorageModel, PremiumStorageParams};
pub use rerouting::{build_rerouting_network, ReroutingParams};
pub use retrial::{build_retrial_network, RetrialNetworkParams};
pub use storage::{build_storage_network, StorageParams};

use ndarray::{array, Array2, Array3};

use crate::model::{Labels, MultiplicativeTransition, NetworkModel};

/// All subsets of {0..k-1} as bitmasks, ordered by decreasing cardinality
/// and ascending mask value within a cardinality (which is lexicographic on
/// the sorted element lists). The full set comes first; the empty set, when
/// included, comes last.
pub(crate) fn subsets_by_cardinality(k: usize, include_empty: bool) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << k))
        .filter(|&m| include_empty || m != 0)
        .collect();
    masks.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
    masks
}

/// Single queue with a multiplicative self-jump `m -> factor * m` at the
/// given rate: the smallest system with a nontrivial stability condition.
pub fn scalar_multiplicative(lambda: f64, mu: f64, factor: u64, rate: f64) -> NetworkModel {
    let mut departures = Array3::zeros((1, 1, 2));
    departures[[0, 0, 0]] = mu;
    NetworkModel {
        n_queues: 1,
        n_env: 1,
        arrival_rates: array![[lambda]],
        departure_rates: departures,
        transitions: vec![MultiplicativeTransition {
            from_env: 0,
            to_env: 0,
            rate,
            matrix: Array2::from_elem((1, 1), factor),
            loss_weights: vec![0],
        }],
        labels: Labels {
            queues: Some(vec!["queue".into()]),
            env: Some(vec!["only".into()]),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_order_for_two_elements() {
        assert_eq!(subsets_by_cardinality(2, false), vec![0b11, 0b01, 0b10]);
        assert_eq!(
            subsets_by_cardinality(2, true),
            vec![0b11, 0b01, 0b10, 0b00]
        );
    }

    #[test]
    fn subset_order_for_three_elements() {
        // {123}, {12}, {13}, {23}, {1}, {2}, {3}
        assert_eq!(
            subsets_by_cardinality(3, false),
            vec![0b111, 0b011, 0b101, 0b110, 0b001, 0b010, 0b100]
        );
    }

    #[test]
    fn scalar_multiplicative_is_valid() {
        let m = scalar_multiplicative(1.0, 1.0, 2, 0.5);
        assert!(m.validate().is_empty(), "{}", m.validate());
    }
}
