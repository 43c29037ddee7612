//! Truncated master equation of the population/environment chain, solved by
//! uniformization.
//!
//! The lattice {0..C}^N x {1..I} is augmented with one absorbing leak state;
//! any transition leaving the cap is redirected there, so the retained
//! dynamics form a proper generator and the leaked mass is a computable
//! bound on the truncation error.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::NetworkModel;

/// Desk-scale caps: the dense lattice grows as I (C+1)^N.
const MAX_QUEUES: usize = 3;
const MAX_LEVEL: usize = 40;
const MAX_ENV: usize = 4;

#[derive(Debug, Clone)]
pub struct TruncatedDistribution {
    pub cap: usize,
    pub n_queues: usize,
    pub n_env: usize,
    /// Probability per lattice state (the leak state is tracked separately).
    probs: Vec<f64>,
    /// Mass absorbed by out-of-cap transitions.
    pub leak: f64,
    /// Leak exceeded the declared tolerance.
    pub flagged: bool,
}

impl TruncatedDistribution {
    fn stride(&self) -> usize {
        self.cap + 1
    }

    fn decode(&self, idx: usize) -> (Vec<usize>, usize) {
        let env = idx % self.n_env;
        let mut rest = idx / self.n_env;
        let mut m = vec![0usize; self.n_queues];
        for q in 0..self.n_queues {
            m[q] = rest % self.stride();
            rest /= self.stride();
        }
        (m, env)
    }

    pub fn prob(&self, m: &[u64], env: usize) -> f64 {
        let mut idx = 0usize;
        for q in (0..self.n_queues).rev() {
            idx = idx * self.stride() + m[q] as usize;
        }
        self.probs[idx * self.n_env + env]
    }

    /// Retained mass; equals 1 - leak up to the series truncation error.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// First moment as the flat environment-major J-vector, comparable with
    /// the analytic transient mean.
    pub fn first_moment(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.n_env * self.n_queues);
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (m, env) = self.decode(idx);
            for q in 0..self.n_queues {
                out[env * self.n_queues + q] += p * m[q] as f64;
            }
        }
        out
    }

    pub fn env_marginal(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.n_env);
        for (idx, &p) in self.probs.iter().enumerate() {
            out[idx % self.n_env] += p;
        }
        out
    }

    /// Marginal distribution of one queue's level.
    pub fn queue_marginal(&self, queue: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.stride()];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (m, _) = self.decode(idx);
            out[m[queue]] += p;
        }
        out
    }
}

/// Sparse generator rows in compressed form; the leak state is the last row
/// (empty, absorbing).
struct SparseGenerator {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    rate: Vec<f64>,
    diag: Vec<f64>,
    states: usize,
}

/// Solve the master equation on the truncated lattice at time `t`, starting
/// from deterministic population `m0` and environment distribution `pi0`.
pub fn truncated_distribution(
    model: &NetworkModel,
    cap: usize,
    pi0: &Array1<f64>,
    m0: &[u64],
    t: f64,
    leak_tol: f64,
) -> Result<TruncatedDistribution> {
    let n = model.n_queues;
    let i_dim = model.n_env;
    if n > MAX_QUEUES || cap > MAX_LEVEL || i_dim > MAX_ENV {
        let states = i_dim * (cap + 1).pow(n as u32);
        return Err(Error::TruncationTooLarge {
            states,
            max_queues: MAX_QUEUES,
            max_level: MAX_LEVEL,
            max_env: MAX_ENV,
        });
    }
    if m0.len() != n || m0.iter().any(|&m| m as usize > cap) {
        return Err(Error::InvalidInput(
            "initial population must lie within the cap".into(),
        ));
    }
    if pi0.len() != i_dim {
        return Err(Error::InvalidInput(
            "initial environment distribution has the wrong length".into(),
        ));
    }

    let stride = cap + 1;
    let lattice = stride.pow(n as u32);
    let states = lattice * i_dim;
    let leak = states; // index of the absorbing leak state

    let encode = |m: &[usize], env: usize| -> usize {
        let mut idx = 0usize;
        for q in (0..n).rev() {
            idx = idx * stride + m[q];
        }
        idx * i_dim + env
    };

    // assemble the sparse generator
    let mut row_ptr = Vec::with_capacity(states + 2);
    let mut col_idx: Vec<u32> = Vec::new();
    let mut rate: Vec<f64> = Vec::new();
    let mut diag = vec![0.0f64; states + 1];
    row_ptr.push(0);

    let mut m = vec![0usize; n];
    for idx in 0..states {
        let env = idx % i_dim;
        {
            let mut rest = idx / i_dim;
            for q in 0..n {
                m[q] = rest % stride;
                rest /= stride;
            }
        }
        let mut push = |to: usize, r: f64, diag_here: &mut f64| {
            if r > 0.0 {
                col_idx.push(to as u32);
                rate.push(r);
                *diag_here -= r;
            }
        };
        let mut d = 0.0f64;

        // arrivals
        for q in 0..n {
            let r = model.arrival_rates[[env, q]];
            if r > 0.0 {
                if m[q] + 1 <= cap {
                    m[q] += 1;
                    let to = encode(&m, env);
                    m[q] -= 1;
                    push(to, r, &mut d);
                } else {
                    push(leak, r, &mut d);
                }
            }
        }
        // departures
        for q in 0..n {
            if m[q] == 0 {
                continue;
            }
            let mq = m[q] as f64;
            for target in 0..=n {
                let r = mq * model.departure_rates[[env, q, target]];
                if r <= 0.0 {
                    continue;
                }
                if target == 0 {
                    m[q] -= 1;
                    let to = encode(&m, env);
                    m[q] += 1;
                    push(to, r, &mut d);
                } else {
                    let tq = target - 1;
                    if tq == q {
                        continue;
                    }
                    if m[tq] + 1 <= cap {
                        m[q] -= 1;
                        m[tq] += 1;
                        let to = encode(&m, env);
                        m[q] += 1;
                        m[tq] -= 1;
                        push(to, r, &mut d);
                    } else {
                        push(leak, r, &mut d);
                    }
                }
            }
        }
        // multiplicative transitions
        for tr in &model.transitions {
            if tr.from_env != env || tr.rate <= 0.0 {
                continue;
            }
            let mut new_m = vec![0usize; n];
            let mut fits = true;
            for (r_row, nm) in new_m.iter_mut().enumerate() {
                let mut acc = 0usize;
                for c in 0..n {
                    acc += tr.matrix[[r_row, c]] as usize * m[c];
                }
                if acc > cap {
                    fits = false;
                    break;
                }
                *nm = acc;
            }
            if fits {
                let to = encode(&new_m, tr.to_env);
                if to != idx {
                    push(to, tr.rate, &mut d);
                } // a true self-loop changes nothing and can be dropped
            } else {
                push(leak, tr.rate, &mut d);
            }
        }

        diag[idx] = d;
        row_ptr.push(col_idx.len());
    }
    row_ptr.push(col_idx.len()); // leak row: absorbing

    let generator = SparseGenerator {
        row_ptr,
        col_idx,
        rate,
        diag,
        states: states + 1,
    };

    // initial vector
    let mut p0 = vec![0.0f64; states + 1];
    let m0_usize: Vec<usize> = m0.iter().map(|&x| x as usize).collect();
    for env in 0..i_dim {
        p0[encode(&m0_usize, env)] = pi0[env];
    }

    let p_t = uniformize(&generator, p0, t, 1e-10);
    let leak_mass = p_t[leak];
    let probs = p_t[..states].to_vec();

    Ok(TruncatedDistribution {
        cap,
        n_queues: n,
        n_env: i_dim,
        probs,
        leak: leak_mass,
        flagged: leak_mass > leak_tol,
    })
}

/// `p(t) = exp(Q^T t) p(0)` via the Poisson mixture of powers of the
/// uniformized kernel, with mode-centered weights so that large `Lambda t`
/// does not underflow; the retained weights cover all but `tol` of the
/// Poisson mass.
fn uniformize(q: &SparseGenerator, p0: Vec<f64>, t: f64, tol: f64) -> Vec<f64> {
    let lambda = q.diag.iter().fold(0.0f64, |m, &d| m.max(-d));
    let a = lambda * t;
    if a == 0.0 {
        return p0;
    }

    // Poisson(a) weights, normalized over a window around the mode
    let mode = a.floor() as usize;
    let mut ks = vec![mode];
    let mut ws = vec![1.0f64];
    let mut w = 1.0;
    let mut k = mode;
    // right tail
    loop {
        k += 1;
        w *= a / k as f64;
        if w < 1e-20 {
            break;
        }
        ks.push(k);
        ws.push(w);
    }
    // left tail
    w = 1.0;
    k = mode;
    while k > 0 {
        w *= k as f64 / a;
        k -= 1;
        if w < 1e-20 {
            break;
        }
        ks.push(k);
        ws.push(w);
    }
    let total: f64 = ws.iter().sum();
    let mut weights = vec![0.0f64; ks.iter().copied().max().unwrap() + 1];
    for (k, w) in ks.iter().zip(&ws) {
        weights[*k] = w / total;
    }
    // trim the right end once the retained mass reaches 1 - tol/2, then
    // renormalize the window so the mixture conserves probability mass
    // exactly (the distribution error stays below tol)
    let mut k_hi = weights.len() - 1;
    {
        let mut cum = 0.0;
        for (k, &wk) in weights.iter().enumerate() {
            cum += wk;
            if cum >= 1.0 - tol / 2.0 {
                k_hi = k;
                break;
            }
        }
        let retained: f64 = weights[..=k_hi].iter().sum();
        for wk in &mut weights[..=k_hi] {
            *wk /= retained;
        }
    }

    let mut acc = vec![0.0f64; q.states];
    let mut v = p0;
    let mut next = vec![0.0f64; q.states];
    for step in 0..=k_hi {
        let wk = weights.get(step).copied().unwrap_or(0.0);
        if wk > 0.0 {
            for (a_i, v_i) in acc.iter_mut().zip(&v) {
                *a_i += wk * v_i;
            }
        }
        if step == k_hi {
            break;
        }
        // next = P^T v with P = I + Q / Lambda
        for (n_j, v_j) in next.iter_mut().zip(&v) {
            *n_j = *v_j;
        }
        for s in 0..q.states {
            let vs = v[s];
            if vs == 0.0 {
                continue;
            }
            next[s] += q.diag[s] / lambda * vs;
            for e in q.row_ptr[s]..q.row_ptr[s + 1] {
                next[q.col_idx[e] as usize] += q.rate[e] / lambda * vs;
            }
        }
        std::mem::swap(&mut v, &mut next);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::retrial::single_retrial;
    use crate::model::Labels;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array3};

    fn mm_inf_model(lambda: f64, mu: f64) -> NetworkModel {
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
    fn no_arrivals_mass_stays_at_origin() {
        let model = mm_inf_model(0.0, 1.0);
        let d = truncated_distribution(&model, 10, &array![1.0], &[0], 5.0, 1e-9).unwrap();
        assert_abs_diff_eq!(d.prob(&[0], 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.leak, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn stationary_mm_inf_is_poisson() {
        let (lambda, mu) = (3.0, 1.0);
        let model = mm_inf_model(lambda, mu);
        let d = truncated_distribution(&model, 30, &array![1.0], &[0], 40.0, 1e-6).unwrap();
        assert!(!d.flagged, "leak {}", d.leak);
        let marginal = d.queue_marginal(0);
        let rho: f64 = lambda / mu;
        let mut pmf = (-rho).exp();
        for (k, &p) in marginal.iter().enumerate() {
            assert_abs_diff_eq!(p, pmf, epsilon = d.leak + 1e-9);
            pmf *= rho / (k as f64 + 1.0);
        }
    }

    #[test]
    fn mass_accounting_closes() {
        let model = single_retrial(3.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let d =
            truncated_distribution(&model, 12, &array![1.0, 0.0], &[0, 0], 4.0, 1e-3).unwrap();
        assert_abs_diff_eq!(d.total_mass() + d.leak, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn first_moment_matches_analytic_mean() {
        use crate::analysis::transient_mean;
        use crate::assembly::assemble;
        use crate::model::InitialCondition;

        let model = single_retrial(3.0, 2.0, 2.0, 1.0, 0.1, 0.5);
        let t = 5.0;
        let d =
            truncated_distribution(&model, 40, &array![1.0, 0.0], &[0, 0], t, 1e-8).unwrap();
        assert!(!d.flagged, "leak {}", d.leak);
        let sys = assemble(&model);
        let mean = transient_mean(&sys, &InitialCondition::empty(0, 2), t).unwrap();
        let moment = d.first_moment();
        for k in 0..4 {
            assert_abs_diff_eq!(moment[k], mean[k], epsilon = d.leak * 40.0 + 1e-8);
        }
    }

    #[test]
    fn oversized_lattice_is_rejected() {
        let model = mm_inf_model(1.0, 1.0);
        match truncated_distribution(&model, 100, &array![1.0], &[0], 1.0, 1e-9) {
            Err(Error::TruncationTooLarge { .. }) => {}
            other => panic!("expected size guard, got {other:?}"),
        }
    }
}
