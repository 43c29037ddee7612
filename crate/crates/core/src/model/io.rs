//! JSON file format for network models.
//!
//! Environment indices in the file (`from`, `to`) are 1-based; internally
//! everything is 0-based. The departure tensor is I x N x (N+1) with target
//! index 0 meaning "leaves the network".

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use super::{Labels, MultiplicativeTransition, NetworkModel};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TransitionFile {
    from: usize,
    to: usize,
    rate: f64,
    matrix: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loss_weights: Option<Vec<u64>>,
}

#[derive(Serialize, Deserialize, Default)]
struct LabelsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    queues: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    env: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n_queues: usize,
    n_env: usize,
    arrival_rates: Vec<Vec<f64>>,
    departure_rates: Vec<Vec<Vec<f64>>>,
    transitions: Vec<TransitionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<LabelsFile>,
}

pub fn model_from_json(text: &str) -> Result<NetworkModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    let n = file.n_queues;
    let i_dim = file.n_env;

    let shape_err = |what: &str| Error::InvalidInput(format!("model file: {what}"));

    if file.arrival_rates.len() != i_dim || file.arrival_rates.iter().any(|r| r.len() != n) {
        return Err(shape_err("arrival_rates must be an I x N array"));
    }
    let mut arrivals = Array2::zeros((i_dim, n));
    for (i, row) in file.arrival_rates.iter().enumerate() {
        for (q, &v) in row.iter().enumerate() {
            arrivals[[i, q]] = v;
        }
    }

    if file.departure_rates.len() != i_dim
        || file
            .departure_rates
            .iter()
            .any(|per_env| per_env.len() != n || per_env.iter().any(|r| r.len() != n + 1))
    {
        return Err(shape_err("departure_rates must be an I x N x (N+1) array"));
    }
    let mut departures = Array3::zeros((i_dim, n, n + 1));
    for (i, per_env) in file.departure_rates.iter().enumerate() {
        for (q, row) in per_env.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                departures[[i, q, t]] = v;
            }
        }
    }

    let mut transitions = Vec::with_capacity(file.transitions.len());
    for (idx, tr) in file.transitions.iter().enumerate() {
        if tr.from == 0 || tr.from > i_dim || tr.to == 0 || tr.to > i_dim {
            return Err(shape_err(&format!(
                "transition {}: from/to must be 1-based environment indices in 1..={i_dim}",
                idx + 1
            )));
        }
        if tr.matrix.len() != n || tr.matrix.iter().any(|r| r.len() != n) {
            return Err(shape_err(&format!(
                "transition {}: matrix must be N x N",
                idx + 1
            )));
        }
        let mut matrix = Array2::zeros((n, n));
        for (r, row) in tr.matrix.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                matrix[[r, c]] = v;
            }
        }
        let loss_weights = match &tr.loss_weights {
            Some(w) => {
                if w.len() != n {
                    return Err(shape_err(&format!(
                        "transition {}: loss_weights must have length N",
                        idx + 1
                    )));
                }
                w.clone()
            }
            None => vec![0; n],
        };
        transitions.push(MultiplicativeTransition {
            from_env: tr.from - 1,
            to_env: tr.to - 1,
            rate: tr.rate,
            matrix,
            loss_weights,
        });
    }

    let labels = match file.labels {
        Some(l) => Labels {
            queues: l.queues,
            env: l.env,
        },
        None => Labels::default(),
    };

    Ok(NetworkModel {
        n_queues: n,
        n_env: i_dim,
        arrival_rates: arrivals,
        departure_rates: departures,
        transitions,
        labels,
    })
}

pub fn model_to_json(model: &NetworkModel) -> Result<String> {
    let n = model.n_queues;
    let i_dim = model.n_env;
    let file = ModelFile {
        n_queues: n,
        n_env: i_dim,
        arrival_rates: (0..i_dim)
            .map(|i| (0..n).map(|q| model.arrival_rates[[i, q]]).collect())
            .collect(),
        departure_rates: (0..i_dim)
            .map(|i| {
                (0..n)
                    .map(|q| (0..=n).map(|t| model.departure_rates[[i, q, t]]).collect())
                    .collect()
            })
            .collect(),
        transitions: model
            .transitions
            .iter()
            .map(|tr| TransitionFile {
                from: tr.from_env + 1,
                to: tr.to_env + 1,
                rate: tr.rate,
                matrix: (0..n)
                    .map(|r| (0..n).map(|c| tr.matrix[[r, c]]).collect())
                    .collect(),
                loss_weights: if tr.loss_weights.iter().all(|&w| w == 0) {
                    None
                } else {
                    Some(tr.loss_weights.clone())
                },
            })
            .collect(),
        labels: if model.labels.queues.is_none() && model.labels.env.is_none() {
            None
        } else {
            Some(LabelsFile {
                queues: model.labels.queues.clone(),
                env: model.labels.env.clone(),
            })
        },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_model() {
        let model = crate::builders::retrial::single_retrial(100.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let text = model_to_json(&model).unwrap();
        let back = model_from_json(&text).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn one_based_indices_in_file() {
        let text = r#"{
            "n_queues": 1,
            "n_env": 2,
            "arrival_rates": [[1.0], [0.0]],
            "departure_rates": [[[1.0, 0.0]], [[1.0, 0.0]]],
            "transitions": [
                {"from": 1, "to": 2, "rate": 0.1, "matrix": [[1]]},
                {"from": 2, "to": 1, "rate": 0.5, "matrix": [[1]]}
            ]
        }"#;
        let model = model_from_json(text).unwrap();
        assert_eq!(model.transitions[0].from_env, 0);
        assert_eq!(model.transitions[0].to_env, 1);
        assert_eq!(model.transitions[0].loss_weights, vec![0]);
    }

    #[test]
    fn malformed_shapes_are_rejected() {
        let text = r#"{
            "n_queues": 2,
            "n_env": 1,
            "arrival_rates": [[1.0]],
            "departure_rates": [[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]],
            "transitions": []
        }"#;
        assert!(model_from_json(text).is_err());
    }
}
