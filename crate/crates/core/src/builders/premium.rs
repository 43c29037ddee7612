//! Two-location storage system with a premium/basic service split.
//!
//! Arriving files are premium with probability `premium_fraction` and basic
//! otherwise. A basic file is stored on one randomly chosen up location and
//! stays there until the location fails. A premium file starts on one up
//! location and is copied to the other at the copy rate whenever the partner
//! is up (including re-copying after a repair); a file present on both
//! locations survives a single failure by dropping to the surviving one.
//! Files are never deleted except through failures. Arrivals while both
//! locations are down are dropped and counted as lost.
//!
//! Queues: premium@A, premium@B, premium@both, basic@A, basic@B.
//! Environment states: both up, only A up, only B up, both down.

use ndarray::{array, Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::model::{CounterSpec, Labels, MultiplicativeTransition, NetworkModel};

#[derive(Debug, Clone)]
pub struct PremiumStorageParams {
    pub arrival_rate: f64,
    /// Fraction of arrivals taking premium (two-copy) service.
    pub premium_fraction: f64,
    /// Copy rate from a single location to the partner.
    pub copy_rate: f64,
    /// Failure rate of each location.
    pub gamma_up: f64,
    /// Repair rate of each location.
    pub gamma_down: f64,
}

/// The model together with its metric accounting.
#[derive(Debug, Clone)]
pub struct PremiumStorageModel {
    pub model: NetworkModel,
    /// Counter specification for cumulative losses: jump losses plus the
    /// arrivals dropped while both locations are down.
    pub loss_spec: CounterSpec,
    /// Per-state arrival streams that never enter a queue (both-down drops);
    /// added to the admitted streams when counting total arrivals.
    pub arrival_extra: Array1<f64>,
    /// Storage units occupied per file, by queue.
    pub usage_weights: Vec<f64>,
}

const PREM_A: usize = 0;
const PREM_B: usize = 1;
const PREM_BOTH: usize = 2;
const BASIC_A: usize = 3;
const BASIC_B: usize = 4;

const BOTH_UP: usize = 0;
const ONLY_A: usize = 1;
const ONLY_B: usize = 2;
const BOTH_DOWN: usize = 3;

pub fn build_premium_storage(p: &PremiumStorageParams) -> Result<PremiumStorageModel> {
    if !(0.0..=1.0).contains(&p.premium_fraction) {
        return Err(Error::InvalidInput(format!(
            "premium fraction must lie in [0, 1], got {}",
            p.premium_fraction
        )));
    }
    let lambda = p.arrival_rate;
    let prem = p.premium_fraction * lambda;
    let basic = (1.0 - p.premium_fraction) * lambda;

    let mut arrivals = Array2::zeros((4, 5));
    // both up: each class splits evenly over the two locations
    arrivals[[BOTH_UP, PREM_A]] = prem / 2.0;
    arrivals[[BOTH_UP, PREM_B]] = prem / 2.0;
    arrivals[[BOTH_UP, BASIC_A]] = basic / 2.0;
    arrivals[[BOTH_UP, BASIC_B]] = basic / 2.0;
    // one location up: everything lands there
    arrivals[[ONLY_A, PREM_A]] = prem;
    arrivals[[ONLY_A, BASIC_A]] = basic;
    arrivals[[ONLY_B, PREM_B]] = prem;
    arrivals[[ONLY_B, BASIC_B]] = basic;
    // both down: arrivals are dropped (tracked via arrival_extra)

    let mut departures = Array3::zeros((4, 5, 6));
    // copying single-location premium files to the partner location
    departures[[BOTH_UP, PREM_A, PREM_BOTH + 1]] = p.copy_rate;
    departures[[BOTH_UP, PREM_B, PREM_BOTH + 1]] = p.copy_rate;
    departures[[ONLY_A, PREM_B, PREM_BOTH + 1]] = p.copy_rate; // empty in this state
    departures[[ONLY_B, PREM_A, PREM_BOTH + 1]] = p.copy_rate; // empty in this state

    // failure of A: premium@A and basic@A are lost, premium@both drops to B
    let fail_a = array![
        [0u64, 0, 0, 0, 0],
        [0, 1, 1, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1],
    ];
    let fail_a_losses = vec![1u64, 0, 0, 1, 0];
    // failure of B, symmetric
    let fail_b = array![
        [1u64, 0, 1, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0],
    ];
    let fail_b_losses = vec![0u64, 1, 0, 0, 1];
    let eye = Array2::eye(5).mapv(|x: f64| x as u64);

    let mk = |from: usize, to: usize, rate: f64, matrix: Array2<u64>, losses: Vec<u64>| {
        MultiplicativeTransition {
            from_env: from,
            to_env: to,
            rate,
            matrix,
            loss_weights: losses,
        }
    };
    let transitions = vec![
        mk(BOTH_UP, ONLY_A, p.gamma_up, fail_b.clone(), fail_b_losses.clone()),
        mk(BOTH_UP, ONLY_B, p.gamma_up, fail_a.clone(), fail_a_losses.clone()),
        mk(ONLY_A, BOTH_DOWN, p.gamma_up, fail_a, fail_a_losses),
        mk(ONLY_B, BOTH_DOWN, p.gamma_up, fail_b, fail_b_losses),
        mk(ONLY_A, BOTH_UP, p.gamma_down, eye.clone(), vec![0; 5]),
        mk(ONLY_B, BOTH_UP, p.gamma_down, eye.clone(), vec![0; 5]),
        mk(BOTH_DOWN, ONLY_A, p.gamma_down, eye.clone(), vec![0; 5]),
        mk(BOTH_DOWN, ONLY_B, p.gamma_down, eye, vec![0; 5]),
    ];

    let model = NetworkModel {
        n_queues: 5,
        n_env: 4,
        arrival_rates: arrivals,
        departure_rates: departures,
        transitions,
        labels: Labels {
            queues: Some(vec![
                "premium@A".into(),
                "premium@B".into(),
                "premium@both".into(),
                "basic@A".into(),
                "basic@B".into(),
            ]),
            env: Some(vec![
                "both-up".into(),
                "only-A".into(),
                "only-B".into(),
                "both-down".into(),
            ]),
        },
    };

    let arrival_extra = array![0.0, 0.0, 0.0, lambda];
    let loss_spec = CounterSpec {
        counted_departures: vec![],
        count_jump_losses: true,
        direct_rates: Some(arrival_extra.clone()),
    };

    Ok(PremiumStorageModel {
        model,
        loss_spec,
        arrival_extra,
        usage_weights: vec![1.0, 1.0, 2.0, 1.0, 1.0],
    })
}
