//! Exact continuous-time simulation of the population/environment chain by
//! the direct (next-event) method, with counted cumulative metrics.
//!
//! Replications draw from independent substreams of a counter-based stream
//! cipher generator, so results are reproducible and independent of the
//! order in which replications execute.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CounterSpec, NetworkModel};

const POPULATION_CAP: u64 = 1 << 31;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub replications: u64,
    pub horizon: f64,
    pub seed: u64,
    pub initial_population: Vec<u64>,
    pub initial_env: usize,
    /// What counts as a loss: counted renege flows, jump losses and direct
    /// drop streams, in the same terms as counter augmentation.
    pub loss: CounterSpec,
    /// Weights for the usage integral `<rho, m> dt`; `None` skips it.
    pub usage_weights: Option<Vec<f64>>,
}

impl SimulationConfig {
    pub fn new(model: &NetworkModel, replications: u64, horizon: f64, seed: u64) -> Self {
        SimulationConfig {
            replications,
            horizon,
            seed,
            initial_population: vec![0; model.n_queues],
            initial_env: 0,
            loss: CounterSpec::default(),
            usage_weights: None,
        }
    }
}

/// Point estimate with spread: 95% half-width is `1.96 sd / sqrt(R)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricEstimate {
    pub mean: f64,
    pub std_dev: f64,
    pub half_width: f64,
}

impl MetricEstimate {
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationResult {
    pub replications: u64,
    pub horizon: f64,
    /// Estimates of E[M_n(T) 1{X(T)=i}], environment-major (length J).
    pub mean_at_horizon: Vec<MetricEstimate>,
    /// Estimates of P(X(T) = i) (length I).
    pub env_occupancy: Vec<MetricEstimate>,
    /// Cumulative arrivals over [0, T].
    pub arrivals: MetricEstimate,
    /// Cumulative losses over [0, T].
    pub losses: MetricEstimate,
    /// Usage integral over [0, T] (zero when no weights were given).
    pub usage: MetricEstimate,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceEvent {
    Arrival { t: f64, queue: usize },
    Departure { t: f64, queue: usize, target: Option<usize> },
    Jump { t: f64, from_env: usize, to_env: usize, destroyed: u64 },
    DirectLoss { t: f64 },
}

struct PerReplication {
    arrivals: f64,
    losses: f64,
    usage: f64,
    final_mean: Vec<f64>,
    final_env: Vec<f64>,
}

/// Precomputed per-environment rate tables.
struct RateTables {
    arrival_total: Vec<f64>,
    direct: Vec<f64>,
    /// Per (env, queue): total per-customer departure rate.
    departure_total: Vec<Vec<f64>>,
    /// Per env: indices of transitions out of that state.
    transitions: Vec<Vec<usize>>,
    transition_total: Vec<f64>,
}

impl RateTables {
    fn build(model: &NetworkModel, loss: &CounterSpec) -> RateTables {
        let i_dim = model.n_env;
        let mut transitions = vec![vec![]; i_dim];
        for (idx, tr) in model.transitions.iter().enumerate() {
            transitions[tr.from_env].push(idx);
        }
        RateTables {
            arrival_total: (0..i_dim)
                .map(|i| model.arrival_rates.row(i).sum())
                .collect(),
            direct: (0..i_dim)
                .map(|i| loss.direct_rates.as_ref().map_or(0.0, |r| r[i]))
                .collect(),
            departure_total: (0..i_dim)
                .map(|i| {
                    (0..model.n_queues)
                        .map(|q| model.total_departure_rate(i, q))
                        .collect()
                })
                .collect(),
            transition_total: (0..i_dim)
                .map(|i| {
                    model
                        .transitions
                        .iter()
                        .filter(|t| t.from_env == i)
                        .map(|t| t.rate)
                        .sum()
                })
                .collect(),
            transitions,
        }
    }
}

fn run_replication(
    model: &NetworkModel,
    cfg: &SimulationConfig,
    tables: &RateTables,
    replication: u64,
    mut sink: Option<&mut dyn FnMut(TraceEvent)>,
) -> Result<PerReplication> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replication);

    let n = model.n_queues;
    let horizon = cfg.horizon;
    let mut m = cfg.initial_population.clone();
    let mut env = cfg.initial_env;
    let mut t = 0.0f64;
    let mut arrivals = 0.0f64;
    let mut losses = 0.0f64;
    let mut usage = 0.0f64;

    let usage_rate = |m: &[u64], weights: &Option<Vec<f64>>| -> f64 {
        match weights {
            Some(w) => m.iter().zip(w).map(|(&mi, &wi)| mi as f64 * wi).sum(),
            None => 0.0,
        }
    };

    loop {
        let pop_rate: f64 = m
            .iter()
            .enumerate()
            .map(|(q, &mq)| mq as f64 * tables.departure_total[env][q])
            .sum();
        let total = tables.arrival_total[env]
            + tables.direct[env]
            + pop_rate
            + tables.transition_total[env];
        if total <= 0.0 {
            usage += usage_rate(&m, &cfg.usage_weights) * (horizon - t);
            break;
        }
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / total;
        if t + dt >= horizon {
            usage += usage_rate(&m, &cfg.usage_weights) * (horizon - t);
            break;
        }
        usage += usage_rate(&m, &cfg.usage_weights) * dt;
        t += dt;

        let mut pick = rng.random::<f64>() * total;
        let mut chosen = false;

        // external arrivals
        for q in 0..n {
            let rate = model.arrival_rates[[env, q]];
            if pick < rate {
                m[q] += 1;
                arrivals += 1.0;
                if let Some(s) = sink.as_deref_mut() {
                    s(TraceEvent::Arrival { t, queue: q });
                }
                chosen = true;
                break;
            }
            pick -= rate;
        }
        if chosen {
            continue;
        }
        // direct drop stream: arrives and is lost on the spot
        if pick < tables.direct[env] {
            arrivals += 1.0;
            losses += 1.0;
            if let Some(s) = sink.as_deref_mut() {
                s(TraceEvent::DirectLoss { t });
            }
            continue;
        }
        pick -= tables.direct[env];
        // departures, one category per (queue, target)
        'outer: for q in 0..n {
            if m[q] == 0 {
                continue;
            }
            let mq = m[q] as f64;
            for target in 0..=n {
                let rate = mq * model.departure_rates[[env, q, target]];
                if pick < rate {
                    m[q] -= 1;
                    if target == 0 {
                        if cfg.loss.counted_departures.contains(&q) {
                            losses += 1.0;
                        }
                        if let Some(s) = sink.as_deref_mut() {
                            s(TraceEvent::Departure {
                                t,
                                queue: q,
                                target: None,
                            });
                        }
                    } else {
                        m[target - 1] += 1;
                        if let Some(s) = sink.as_deref_mut() {
                            s(TraceEvent::Departure {
                                t,
                                queue: q,
                                target: Some(target - 1),
                            });
                        }
                    }
                    chosen = true;
                    break 'outer;
                }
                pick -= rate;
            }
        }
        if chosen {
            continue;
        }
        // multiplicative transitions
        for &idx in &tables.transitions[env] {
            let tr = &model.transitions[idx];
            if pick < tr.rate {
                let destroyed: u64 = if cfg.loss.count_jump_losses {
                    tr.loss_weights
                        .iter()
                        .zip(&m)
                        .map(|(&c, &mq)| c * mq)
                        .sum()
                } else {
                    0
                };
                let mut new_m = vec![0u64; n];
                for (r, nm) in new_m.iter_mut().enumerate() {
                    let mut acc: u128 = 0;
                    for c in 0..n {
                        acc += tr.matrix[[r, c]] as u128 * m[c] as u128;
                    }
                    if acc > POPULATION_CAP as u128 {
                        return Err(Error::PopulationOverflow {
                            replication,
                            queue: r,
                        });
                    }
                    *nm = acc as u64;
                }
                if cfg.loss.count_jump_losses {
                    losses += destroyed as f64;
                }
                if let Some(s) = sink.as_deref_mut() {
                    s(TraceEvent::Jump {
                        t,
                        from_env: env,
                        to_env: tr.to_env,
                        destroyed,
                    });
                }
                m = new_m;
                env = tr.to_env;
                chosen = true;
                break;
            }
            pick -= tr.rate;
        }
        if !chosen {
            // float slack at the very end of the category walk (~1 ulp of
            // the total rate): draw the next event afresh
            continue;
        }
    }

    let mut final_mean = vec![0.0; model.n_env * n];
    for (q, &mq) in m.iter().enumerate() {
        final_mean[env * n + q] = mq as f64;
    }
    let mut final_env = vec![0.0; model.n_env];
    final_env[env] = 1.0;

    Ok(PerReplication {
        arrivals,
        losses,
        usage,
        final_mean,
        final_env,
    })
}

/// Deterministic pairwise sum.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

fn estimate(samples: &[f64]) -> MetricEstimate {
    let r = samples.len() as f64;
    let mean = pairwise_sum(samples) / r;
    let sq: Vec<f64> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = if samples.len() > 1 {
        pairwise_sum(&sq) / (r - 1.0)
    } else {
        0.0
    };
    let sd = var.sqrt();
    MetricEstimate {
        mean,
        std_dev: sd,
        half_width: 1.96 * sd / r.sqrt(),
    }
}

pub fn simulate(model: &NetworkModel, cfg: &SimulationConfig) -> Result<SimulationResult> {
    validate_config(model, cfg)?;
    let tables = RateTables::build(model, &cfg.loss);
    let reps: Vec<Result<PerReplication>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(model, cfg, &tables, rep, None))
        .collect();
    let reps: Result<Vec<PerReplication>> = reps.into_iter().collect();
    summarize(model, cfg, reps?)
}

/// Sequential variant streaming every event of every replication.
pub fn simulate_traced(
    model: &NetworkModel,
    cfg: &SimulationConfig,
    sink: &mut dyn FnMut(TraceEvent),
) -> Result<SimulationResult> {
    validate_config(model, cfg)?;
    let tables = RateTables::build(model, &cfg.loss);
    let mut reps = Vec::with_capacity(cfg.replications as usize);
    for rep in 0..cfg.replications {
        reps.push(run_replication(model, cfg, &tables, rep, Some(sink))?);
    }
    summarize(model, cfg, reps)
}

fn validate_config(model: &NetworkModel, cfg: &SimulationConfig) -> Result<()> {
    if cfg.replications == 0 {
        return Err(Error::InvalidInput("need at least one replication".into()));
    }
    if !(cfg.horizon > 0.0) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    if cfg.initial_population.len() != model.n_queues || cfg.initial_env >= model.n_env {
        return Err(Error::InvalidInput(
            "initial state does not match the model dimensions".into(),
        ));
    }
    if let Some(w) = &cfg.usage_weights {
        if w.len() != model.n_queues {
            return Err(Error::InvalidInput(
                "usage weights must have one entry per queue".into(),
            ));
        }
    }
    if let Some(d) = &cfg.loss.direct_rates {
        if d.len() != model.n_env {
            return Err(Error::InvalidInput(
                "direct loss rates must have one entry per environment state".into(),
            ));
        }
    }
    Ok(())
}

fn summarize(
    model: &NetworkModel,
    cfg: &SimulationConfig,
    reps: Vec<PerReplication>,
) -> Result<SimulationResult> {
    let j = model.n_env * model.n_queues;
    let column = |f: &dyn Fn(&PerReplication) -> f64| -> Vec<f64> {
        reps.iter().map(f).collect()
    };
    let mean_at_horizon = (0..j)
        .map(|k| estimate(&column(&|r: &PerReplication| r.final_mean[k])))
        .collect();
    let env_occupancy = (0..model.n_env)
        .map(|i| estimate(&column(&|r: &PerReplication| r.final_env[i])))
        .collect();
    Ok(SimulationResult {
        replications: cfg.replications,
        horizon: cfg.horizon,
        mean_at_horizon,
        env_occupancy,
        arrivals: estimate(&column(&|r: &PerReplication| r.arrivals)),
        losses: estimate(&column(&|r: &PerReplication| r.losses)),
        usage: estimate(&column(&|r: &PerReplication| r.usage)),
    })
}

/// Convenience: the analytic mean vector packaged like the simulator output.
pub fn mean_vector(result: &SimulationResult) -> Array1<f64> {
    Array1::from_iter(result.mean_at_horizon.iter().map(|e| e.mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::retrial::single_retrial;
    use approx::assert_abs_diff_eq;

    fn mm_inf_model(lambda: f64, mu: f64) -> NetworkModel {
        use crate::model::Labels;
        use ndarray::{array, Array3};
        let mut dep = Array3::zeros((1, 1, 2));
        dep[[0, 0, 0]] = mu;
        NetworkModel {
            n_queues: 1,
            n_env: 1,
            arrival_rates: array![[lambda]],
            departure_rates: dep,
            transitions: vec![],
            labels: Labels::default(),
        }
    }

    #[test]
    fn mm_inf_mean_within_confidence_interval() {
        let model = mm_inf_model(10.0, 1.0);
        let cfg = SimulationConfig::new(&model, 10_000, 10.0, 42);
        let result = simulate(&model, &cfg).unwrap();
        let expected = 10.0 * (1.0 - (-10.0f64).exp());
        let est = &result.mean_at_horizon[0];
        assert!(
            (est.mean - expected).abs() <= est.half_width,
            "estimate {} +/- {} misses {}",
            est.mean,
            est.half_width,
            expected
        );
    }

    #[test]
    fn reproducible_given_seed() {
        let model = single_retrial(5.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let mut cfg = SimulationConfig::new(&model, 500, 3.0, 7);
        cfg.loss = crate::builders::retrial::loss_spec(1);
        let a = simulate(&model, &cfg).unwrap();
        let b = simulate(&model, &cfg).unwrap();
        assert_eq!(a.losses.mean, b.losses.mean);
        assert_eq!(a.arrivals.mean, b.arrivals.mean);
        for (x, y) in a.mean_at_horizon.iter().zip(&b.mean_at_horizon) {
            assert_eq!(x.mean, y.mean);
        }
    }

    #[test]
    fn decoupled_environment_marginal_matches_analysis() {
        use crate::analysis::env_distribution;
        use crate::assembly::assemble;
        use ndarray::array;

        let model = single_retrial(5.0, 2.0, 2.0, 1.0, 0.3, 0.7);
        let cfg = SimulationConfig::new(&model, 20_000, 2.0, 11);
        let result = simulate(&model, &cfg).unwrap();
        let sys = assemble(&model);
        let pi = env_distribution(&sys, &array![1.0, 0.0], 2.0).unwrap();
        for i in 0..2 {
            let est = &result.env_occupancy[i];
            assert!(
                (est.mean - pi[i]).abs() <= est.half_width + 1e-9,
                "occupancy {i}: {} +/- {} misses {}",
                est.mean,
                est.half_width,
                pi[i]
            );
        }
    }

    #[test]
    fn explosive_population_is_reported() {
        let model = crate::builders::scalar_multiplicative(100.0, 0.01, 8, 50.0);
        let cfg = SimulationConfig::new(&model, 4, 100.0, 1);
        match simulate(&model, &cfg) {
            Err(Error::PopulationOverflow { .. }) => {}
            other => panic!("expected population overflow, got {other:?}"),
        }
    }

    #[test]
    fn usage_integral_accrues() {
        let model = mm_inf_model(10.0, 1.0);
        let mut cfg = SimulationConfig::new(&model, 2_000, 5.0, 3);
        cfg.usage_weights = Some(vec![2.0]);
        let result = simulate(&model, &cfg).unwrap();
        // E int 2 M(t) dt = 2 lambda/mu (T - (1 - e^{-mu T})/mu)
        let expected = 2.0 * 10.0 * (5.0 - (1.0 - (-5.0f64).exp()));
        let est = &result.usage;
        assert!(
            (est.mean - expected).abs() <= est.half_width,
            "usage {} +/- {} misses {}",
            est.mean,
            est.half_width,
            expected
        );
    }

    #[test]
    fn half_width_formula() {
        let e = estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(e.mean, 2.5, epsilon = 1e-15);
        let sd = (((1.5f64).powi(2) + 0.25 + 0.25 + 2.25) / 3.0).sqrt();
        assert_abs_diff_eq!(e.std_dev, sd, epsilon = 1e-12);
        assert_abs_diff_eq!(e.half_width, 1.96 * sd / 2.0, epsilon = 1e-12);
    }
}
