//! Origin-destination pairs with a one-link direct route and a two-link
//! backup route.
//!
//! When link n fails, clients on direct route n move to the indirect route
//! (if both of its links are up, otherwise they are lost), and clients whose
//! indirect route uses link n are lost. When link n is repaired, clients on
//! indirect route n move back to the direct route. Queues 1..N° hold the
//! direct-route clients, N°+1..2N° the indirect-route clients. Environment
//! states enumerate the set of down links as a bitmask, all-up first.
//!
//! Arrivals finding neither route available are blocked and do not enter the
//! model; cumulative loss accounting covers populations destroyed by link
//! failures.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::model::{CounterSpec, Labels, MultiplicativeTransition, NetworkModel};

#[derive(Debug, Clone)]
pub struct ReroutingParams {
    /// Number of origin-destination pairs N° (same as the number of links).
    pub pairs: usize,
    pub arrival_rates: Vec<f64>,
    pub service_rates: Vec<f64>,
    /// Indirect route of pair n: two distinct links, neither equal to n.
    pub indirect_routes: Vec<(usize, usize)>,
    pub up_rates: Vec<f64>,
    pub down_rates: Vec<f64>,
    /// Disable the backup mechanism entirely (used for cost comparisons):
    /// failures destroy the direct population and indirect routes are never
    /// used.
    pub rerouting_enabled: bool,
}

impl ReroutingParams {
    /// Symmetric ring of three pairs: the indirect route of each link is the
    /// other two links.
    pub fn ring3(
        lambda: f64,
        mu: f64,
        gamma_up: f64,
        gamma_down: f64,
        rerouting_enabled: bool,
    ) -> Self {
        ReroutingParams {
            pairs: 3,
            arrival_rates: vec![lambda; 3],
            service_rates: vec![mu; 3],
            indirect_routes: vec![(1, 2), (0, 2), (0, 1)],
            up_rates: vec![gamma_up; 3],
            down_rates: vec![gamma_down; 3],
            rerouting_enabled,
        }
    }

    fn check(&self) -> Result<()> {
        let k = self.pairs;
        if k == 0 {
            return Err(Error::InvalidInput("need at least one pair".into()));
        }
        if self.arrival_rates.len() != k
            || self.service_rates.len() != k
            || self.indirect_routes.len() != k
            || self.up_rates.len() != k
            || self.down_rates.len() != k
        {
            return Err(Error::InvalidInput(
                "per-pair parameter vectors must all have length N°".into(),
            ));
        }
        for (n, &(a, b)) in self.indirect_routes.iter().enumerate() {
            if a == b || a == n || b == n || a >= k || b >= k {
                return Err(Error::InvalidInput(format!(
                    "indirect route of pair {} must consist of two distinct other links",
                    n + 1
                )));
            }
        }
        Ok(())
    }
}

#[inline]
fn is_up(state: usize, link: usize) -> bool {
    state & (1 << link) == 0
}

pub fn build_rerouting_network(p: &ReroutingParams) -> Result<NetworkModel> {
    p.check()?;
    let k = p.pairs;
    let n = 2 * k;
    let i_dim = 1usize << k;

    let mut arrivals = Array2::zeros((i_dim, n));
    let mut departures = Array3::zeros((i_dim, n, n + 1));
    for i in 0..i_dim {
        for route in 0..k {
            let (l1, l2) = p.indirect_routes[route];
            if is_up(i, route) {
                arrivals[[i, route]] = p.arrival_rates[route];
            } else if p.rerouting_enabled && is_up(i, l1) && is_up(i, l2) {
                arrivals[[i, k + route]] = p.arrival_rates[route];
            }
            departures[[i, route, 0]] = p.service_rates[route];
            departures[[i, k + route, 0]] = p.service_rates[route];
        }
    }

    let mut transitions = Vec::new();
    for i in 0..i_dim {
        for link in 0..k {
            if is_up(i, link) {
                let mut a = Array2::eye(n).mapv(|x: f64| x as u64);
                let mut losses = vec![0u64; n];
                // direct users of the failed link relocate to their backup
                // when it is fully up (relative to the pre-jump state)
                a[[link, link]] = 0;
                let (l1, l2) = p.indirect_routes[link];
                if p.rerouting_enabled && is_up(i, l1) && is_up(i, l2) {
                    a[[k + link, link]] = 1;
                } else {
                    losses[link] = 1;
                }
                // indirect routes that ride over the failed link collapse
                for other in 0..k {
                    let (m1, m2) = p.indirect_routes[other];
                    if m1 == link || m2 == link {
                        a[[k + other, k + other]] = 0;
                        losses[k + other] = 1;
                    }
                }
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: i | (1 << link),
                    rate: p.up_rates[link],
                    matrix: a,
                    loss_weights: losses,
                });
            } else {
                // repair: indirect users of this pair move back to the
                // direct route
                let mut a = Array2::eye(n).mapv(|x: f64| x as u64);
                if p.rerouting_enabled {
                    a[[k + link, k + link]] = 0;
                    a[[link, k + link]] = 1;
                }
                transitions.push(MultiplicativeTransition {
                    from_env: i,
                    to_env: i & !(1 << link),
                    rate: p.down_rates[link],
                    matrix: a,
                    loss_weights: vec![0; n],
                });
            }
        }
    }

    let queue_labels = (0..k)
        .map(|r| format!("direct{}", r + 1))
        .chain((0..k).map(|r| format!("indirect{}", r + 1)))
        .collect();
    let env_labels = (0..i_dim)
        .map(|i| {
            let down: Vec<String> = (0..k)
                .filter(|&l| !is_up(i, l))
                .map(|l| (l + 1).to_string())
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

/// Loss accounting: populations destroyed at failure jumps.
pub fn loss_spec() -> CounterSpec {
    CounterSpec::jump_losses()
}

/// Resource usage per client: one link on a direct route, two links on an
/// indirect route.
pub fn usage_weights(pairs: usize) -> Vec<f64> {
    let mut w = vec![1.0; 2 * pairs];
    for v in w.iter_mut().skip(pairs) {
        *v = 2.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ring_failure_matrix_matches_hand_construction() {
        let p = ReroutingParams::ring3(1.0, 1.0, 0.1, 1.0, true);
        let m = build_rerouting_network(&p).unwrap();
        assert_eq!(m.n_queues, 6);
        assert_eq!(m.n_env, 8);
        assert!(m.validate().is_empty(), "{}", m.validate());

        // failure of link 1 from the all-up state: direct-1 relocates to
        // indirect-1; indirect-2 and indirect-3 (both use link 1) are lost
        let tr = m
            .transitions
            .iter()
            .find(|t| t.from_env == 0 && t.to_env == 0b001)
            .unwrap();
        assert_eq!(tr.rate, 0.1);
        let expected = array![
            [0u64, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0],
            [1, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
        ];
        assert_eq!(tr.matrix, expected);
        assert_eq!(tr.loss_weights, vec![0, 0, 0, 0, 1, 1]);
    }

    #[test]
    fn failure_without_backup_available_loses_direct_clients() {
        let p = ReroutingParams::ring3(1.0, 1.0, 0.1, 1.0, true);
        let m = build_rerouting_network(&p).unwrap();
        // link 2 already down (state 0b010); link 1 fails: backup {2,3} of
        // pair 1 is unavailable, so direct-1 clients are lost
        let tr = m
            .transitions
            .iter()
            .find(|t| t.from_env == 0b010 && t.to_env == 0b011)
            .unwrap();
        assert_eq!(tr.loss_weights[0], 1);
        let col: Vec<u64> = (0..6).map(|r| tr.matrix[[r, 0]]).collect();
        assert_eq!(col, vec![0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn repair_moves_indirect_clients_back() {
        let p = ReroutingParams::ring3(1.0, 1.0, 0.1, 1.0, true);
        let m = build_rerouting_network(&p).unwrap();
        let tr = m
            .transitions
            .iter()
            .find(|t| t.from_env == 0b001 && t.to_env == 0)
            .unwrap();
        assert_eq!(tr.matrix[[0, 3]], 1);
        assert_eq!(tr.matrix[[3, 3]], 0);
        assert_eq!(tr.matrix[[0, 0]], 1);
    }

    #[test]
    fn all_links_up_forever_means_no_losses() {
        use crate::analysis::metrics::losses_via_integral;
        use crate::model::InitialCondition;

        let mut p = ReroutingParams::ring3(2.0, 1.0, 0.0, 1.0, true);
        p.down_rates = vec![1.0; 3];
        let m = build_rerouting_network(&p).unwrap();
        let z = losses_via_integral(
            &m,
            &loss_spec(),
            &InitialCondition::empty(0, m.n_queues),
            5.0,
        )
        .unwrap();
        assert!(z.abs() < 1e-12);
    }
}
