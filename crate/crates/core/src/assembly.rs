//! Assembly of the dense drift/inflow matrices governing the mean dynamics,
//! and the block-embedding matrices whose exponentials carry the convolution
//! and time-integral terms in their off-diagonal corners.
//!
//! Conventions (all indices 0-based internally):
//! * the flat state order is environment-major: (env i, queue n) -> i*N + n,
//!   so `m` is block diagonal with one N x N block per environment state;
//! * block (n, n') of each drift block holds the routing rate *into* n from
//!   n' (transposed routing index) plus the negated total outflow on the
//!   diagonal;
//! * block (i, j) of `a` is the update matrix of transitions from j to i
//!   (transposed block order). A dedicated unit test guards this convention.

use ndarray::{s, Array1, Array2};

use crate::error::Result;
use crate::model::{flat_index, NetworkModel};
use crate::numerics::expm;

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub n_queues: usize,
    pub n_env: usize,
    /// J x I arrival-inflow matrix; column i carries the arrival rates under
    /// environment state i into the corresponding block of rows.
    pub l: Array2<f64>,
    /// J x J block-diagonal routing/drain matrix.
    pub m: Array2<f64>,
    /// J x J multiplicative-update matrix (transposed block order).
    pub a: Array2<f64>,
    /// J x J drift matrix `m + a`, the generator of the mean dynamics.
    pub ma: Array2<f64>,
    /// I x I aggregated environment generator.
    pub a_env: Array2<f64>,
    /// (J+I) x (J+I) embedding [[ma, l], [0, a_env^T]]; the top-right J x I
    /// block of its exponential is the convolution term of the mean.
    pub c: Array2<f64>,
    /// 2J x 2J embedding [[0, I], [0, ma]]; the top-right block of its
    /// exponential is the time integral of exp(ma t).
    pub c1: Array2<f64>,
    /// 2(J+I) x 2(J+I) embedding [[0, I], [0, c]].
    pub c2: Array2<f64>,
}

impl AssembledSystem {
    /// Dimension J = I * N of the flat mean vector.
    pub fn j_dim(&self) -> usize {
        self.n_env * self.n_queues
    }

    #[inline]
    pub fn flat(&self, env: usize, queue: usize) -> usize {
        flat_index(env, queue, self.n_queues)
    }
}

/// Build all system matrices from a validated model. Deterministic: the same
/// model yields bit-identical matrices.
pub fn assemble(model: &NetworkModel) -> AssembledSystem {
    let n = model.n_queues;
    let i_dim = model.n_env;
    let j_dim = i_dim * n;

    let mut l = Array2::zeros((j_dim, i_dim));
    for i in 0..i_dim {
        for q in 0..n {
            l[[flat_index(i, q, n), i]] = model.arrival_rates[[i, q]];
        }
    }

    let mut m = Array2::zeros((j_dim, j_dim));
    for i in 0..i_dim {
        let base = i * n;
        for q in 0..n {
            // row q: inflow from q' (transposed routing index), outflow on
            // the diagonal
            for qp in 0..n {
                if qp != q {
                    m[[base + q, base + qp]] = model.departure_rates[[i, qp, q + 1]];
                }
            }
            m[[base + q, base + q]] = -model.total_departure_rate(i, q);
        }
    }

    let mut a = Array2::zeros((j_dim, j_dim));
    for tr in &model.transitions {
        // block (to, from) accumulates rate * A
        let row_base = tr.to_env * n;
        let col_base = tr.from_env * n;
        for r in 0..n {
            for c in 0..n {
                a[[row_base + r, col_base + c]] += tr.rate * tr.matrix[[r, c]] as f64;
            }
        }
    }
    for i in 0..i_dim {
        let total = model.total_transition_rate(i);
        let base = i * n;
        for q in 0..n {
            a[[base + q, base + q]] -= total;
        }
    }

    let ma = &m + &a;
    let a_env = model.aggregate_env_generator();

    let jp = j_dim + i_dim;
    let mut c = Array2::zeros((jp, jp));
    c.slice_mut(s![..j_dim, ..j_dim]).assign(&ma);
    c.slice_mut(s![..j_dim, j_dim..]).assign(&l);
    c.slice_mut(s![j_dim.., j_dim..]).assign(&a_env.t());

    let mut c1 = Array2::zeros((2 * j_dim, 2 * j_dim));
    c1.slice_mut(s![..j_dim, j_dim..])
        .assign(&Array2::eye(j_dim));
    c1.slice_mut(s![j_dim.., j_dim..]).assign(&ma);

    let mut c2 = Array2::zeros((2 * jp, 2 * jp));
    c2.slice_mut(s![..jp, jp..]).assign(&Array2::eye(jp));
    c2.slice_mut(s![jp.., jp..]).assign(&c);

    AssembledSystem {
        n_queues: n,
        n_env: i_dim,
        l,
        m,
        a,
        ma,
        a_env,
        c,
        c1,
        c2,
    }
}

/// Right-hand side of the mean differential equation:
/// `l * pi(t) + (m + a) * mbar`, with `pi(t) = exp(a_env^T t) pi(0)`.
///
/// This is the integration path used to cross-check the block-exponential
/// evaluation of the transient mean.
pub fn moment_ode_rhs(
    sys: &AssembledSystem,
    t: f64,
    pi0: &Array1<f64>,
    mbar: &Array1<f64>,
) -> Result<Array1<f64>> {
    let pi_t = expm(&sys.a_env.t().to_owned(), t)?.dot(pi0);
    Ok(sys.l.dot(&pi_t) + sys.ma.dot(mbar))
}
