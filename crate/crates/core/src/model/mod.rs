//! Declarative network model: a set of infinite-server queues whose arrival
//! and per-customer departure rates are modulated by a finite background
//! Markov chain, plus multiplicative transitions that replace the population
//! vector `m` by `A m` (nonnegative integer matrix `A`) while the background
//! state jumps.
//!
//! Models are immutable after validation and safe to share across workers;
//! every operation here is a pure function of its inputs.

mod augment;
mod io;
mod validate;

pub use augment::{augment_with_counter, augment_with_loss_counter, CounterSpec};
pub use io::{model_from_json, model_to_json};
pub use validate::{Severity, ValidationIssue, ValidationReport};

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};

/// Flat environment-major index of the pair (env `i`, queue `n`), both 0-based.
#[inline]
pub fn flat_index(env: usize, queue: usize, n_queues: usize) -> usize {
    env * n_queues + queue
}

/// One multiplicative transition: at `rate`, the population jumps `m -> A m`
/// and the environment moves `from_env -> to_env` (self-jumps allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeTransition {
    pub from_env: usize,
    pub to_env: usize,
    pub rate: f64,
    /// N x N, entries in the nonnegative integers.
    pub matrix: Array2<u64>,
    /// Per-queue loss accounting: a jump with population `m` destroys
    /// `<loss_weights, m>` customers. Used by metric accounting and the
    /// simulator, never by the mean dynamics themselves.
    pub loss_weights: Vec<u64>,
}

/// Optional display names, carried through to outputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub queues: Option<Vec<String>>,
    pub env: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    /// Number of queues N.
    pub n_queues: usize,
    /// Number of environment states I.
    pub n_env: usize,
    /// I x N arrival rates; `arrival_rates[[i, n]]` is the Poisson rate into
    /// queue n while the environment sits in state i.
    pub arrival_rates: Array2<f64>,
    /// I x N x (N+1) per-customer departure rates. Target index 0 means the
    /// customer leaves the network; target n'+1 routes it to queue n'.
    pub departure_rates: Array3<f64>,
    pub transitions: Vec<MultiplicativeTransition>,
    pub labels: Labels,
}

impl NetworkModel {
    /// Total arrival rate per environment state (length I).
    pub fn total_arrival_rates(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.n_env);
        for i in 0..self.n_env {
            out[i] = self.arrival_rates.row(i).sum();
        }
        out
    }

    /// Total departure rate (all targets, including leaving) per customer in
    /// queue `n` while the environment is in state `i`.
    pub fn total_departure_rate(&self, env: usize, queue: usize) -> f64 {
        (0..=self.n_queues)
            .map(|k| self.departure_rates[[env, queue, k]])
            .sum()
    }

    /// Aggregated environment generator: `a_env[[i, j]]` sums the rates of
    /// all transitions from i to j (i != j); diagonal entries make each row
    /// sum to exactly zero. Self-transitions do not move the environment and
    /// are excluded.
    pub fn aggregate_env_generator(&self) -> Array2<f64> {
        let i_dim = self.n_env;
        let mut a = Array2::zeros((i_dim, i_dim));
        for tr in &self.transitions {
            if tr.from_env != tr.to_env {
                a[[tr.from_env, tr.to_env]] += tr.rate;
            }
        }
        for i in 0..i_dim {
            let mut off = 0.0;
            for j in 0..i_dim {
                if j != i {
                    off += a[[i, j]];
                }
            }
            a[[i, i]] = -off;
        }
        a
    }

    /// Sum of all transition rates out of environment state `i`, self-jumps
    /// included.
    pub fn total_transition_rate(&self, env: usize) -> f64 {
        self.transitions
            .iter()
            .filter(|tr| tr.from_env == env)
            .map(|tr| tr.rate)
            .sum()
    }

    pub fn queue_label(&self, n: usize) -> String {
        match &self.labels.queues {
            Some(q) if n < q.len() => q[n].clone(),
            _ => format!("q{}", n + 1),
        }
    }

    pub fn env_label(&self, i: usize) -> String {
        match &self.labels.env {
            Some(e) if i < e.len() => e[i].clone(),
            _ => format!("e{}", i + 1),
        }
    }

    /// Validate and return `self`, for call chaining.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(report))
        }
    }
}

/// Initial condition of the pair (population vector, environment state).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Deterministic start: population `m0` with environment in `env_state`.
    Point { population: Vec<u64>, env_state: usize },
    /// General start: environment distribution pi(0) (length I) and the
    /// J-vector of means E[M_n(0) 1{X(0)=i}] in environment-major order.
    Distribution { env_dist: Array1<f64>, mean: Array1<f64> },
}

impl InitialCondition {
    pub fn empty(env_state: usize, n_queues: usize) -> Self {
        InitialCondition::Point {
            population: vec![0; n_queues],
            env_state,
        }
    }

    /// Resolve into (pi(0), Mbar(0)) for a model of the given dimensions.
    pub fn resolve(&self, n_queues: usize, n_env: usize) -> Result<(Array1<f64>, Array1<f64>)> {
        match self {
            InitialCondition::Point {
                population,
                env_state,
            } => {
                if population.len() != n_queues {
                    return Err(Error::InvalidInput(format!(
                        "initial population has {} entries, model has {} queues",
                        population.len(),
                        n_queues
                    )));
                }
                if *env_state >= n_env {
                    return Err(Error::InvalidInput(format!(
                        "initial environment state {} out of range 1..={}",
                        env_state + 1,
                        n_env
                    )));
                }
                let mut pi0 = Array1::zeros(n_env);
                pi0[*env_state] = 1.0;
                let mut mean = Array1::zeros(n_env * n_queues);
                for (n, &m) in population.iter().enumerate() {
                    mean[flat_index(*env_state, n, n_queues)] = m as f64;
                }
                Ok((pi0, mean))
            }
            InitialCondition::Distribution { env_dist, mean } => {
                if env_dist.len() != n_env || mean.len() != n_env * n_queues {
                    return Err(Error::InvalidInput(
                        "initial condition dimensions do not match the model".into(),
                    ));
                }
                let sum: f64 = env_dist.sum();
                if env_dist.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                    return Err(Error::InvalidInput(
                        "initial environment distribution has negative or non-finite entries"
                            .into(),
                    ));
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "initial environment distribution sums to {sum}, expected 1 within 1e-12"
                    )));
                }
                for i in 0..n_env {
                    if env_dist[i] == 0.0 {
                        for n in 0..n_queues {
                            if mean[flat_index(i, n, n_queues)] != 0.0 {
                                return Err(Error::InvalidInput(format!(
                                    "initial mean is nonzero at (env {}, queue {}) although pi({}) = 0",
                                    i + 1,
                                    n + 1,
                                    i + 1
                                )));
                            }
                        }
                    }
                }
                Ok((env_dist.clone(), mean.clone()))
            }
        }
    }

    /// Extend with extra all-zero queues (used after counter augmentation).
    pub fn extended(&self, n_queues_old: usize, n_env: usize, extra: usize) -> Result<Self> {
        match self {
            InitialCondition::Point {
                population,
                env_state,
            } => {
                let mut p = population.clone();
                p.extend(std::iter::repeat(0).take(extra));
                Ok(InitialCondition::Point {
                    population: p,
                    env_state: *env_state,
                })
            }
            InitialCondition::Distribution { env_dist, mean } => {
                let n_new = n_queues_old + extra;
                let mut new_mean = Array1::zeros(n_env * n_new);
                for i in 0..n_env {
                    for n in 0..n_queues_old {
                        new_mean[flat_index(i, n, n_new)] = mean[flat_index(i, n, n_queues_old)];
                    }
                }
                Ok(InitialCondition::Distribution {
                    env_dist: env_dist.clone(),
                    mean: new_mean,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn aggregate_generator_two_state() {
        let mut departures = Array3::zeros((2, 1, 2));
        departures[[0, 0, 0]] = 1.0;
        departures[[1, 0, 0]] = 1.0;
        let model = NetworkModel {
            n_queues: 1,
            n_env: 2,
            arrival_rates: array![[1.0], [0.0]],
            departure_rates: departures,
            transitions: vec![
                MultiplicativeTransition {
                    from_env: 0,
                    to_env: 1,
                    rate: 0.1,
                    matrix: array![[1u64]],
                    loss_weights: vec![0],
                },
                MultiplicativeTransition {
                    from_env: 1,
                    to_env: 0,
                    rate: 0.5,
                    matrix: array![[1u64]],
                    loss_weights: vec![0],
                },
            ],
            labels: Labels::default(),
        };
        let a = model.aggregate_env_generator();
        assert_eq!(a, array![[-0.1, 0.1], [0.5, -0.5]]);
    }

    #[test]
    fn self_transitions_do_not_move_environment() {
        let model = NetworkModel {
            n_queues: 1,
            n_env: 2,
            arrival_rates: Array2::zeros((2, 1)),
            departure_rates: Array3::zeros((2, 1, 2)),
            transitions: vec![MultiplicativeTransition {
                from_env: 0,
                to_env: 0,
                rate: 3.0,
                matrix: array![[2u64]],
                loss_weights: vec![0],
            }],
            labels: Labels::default(),
        };
        let a = model.aggregate_env_generator();
        assert_eq!(a, Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn generator_rows_sum_to_zero_exactly() {
        let model = crate::builders::retrial::single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 2.1496);
        let a = model.aggregate_env_generator();
        for i in 0..model.n_env {
            let s: f64 = a.row(i).sum();
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn point_initial_condition_resolves() {
        let init = InitialCondition::Point {
            population: vec![3, 0],
            env_state: 1,
        };
        let (pi0, mean) = init.resolve(2, 2).unwrap();
        assert_eq!(pi0, array![0.0, 1.0]);
        assert_eq!(mean, array![0.0, 0.0, 3.0, 0.0]);
    }

    #[test]
    fn distribution_initial_condition_rejects_inconsistency() {
        let init = InitialCondition::Distribution {
            env_dist: array![1.0, 0.0],
            mean: array![0.0, 0.0, 1.0, 0.0],
        };
        assert!(init.resolve(2, 2).is_err());
    }
}
