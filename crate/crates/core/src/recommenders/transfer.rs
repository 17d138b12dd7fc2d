//! Cross-network preference transfer.
//!
//! A user's combined topical profile `a_i = eta * t_i W1 + (1 - eta) * s_i W2`
//! (tweet topics `t_i`, social topics `s_i`) is mapped into the item latent
//! space and scored against item factors `v_j`. Training minimizes
//!
//! ```text
//! sum_{(i,j) observed} (r_ij - a_i v_j^T)^2
//!   + theta * sum_j F(v_j)
//!   + lambda * (|W1|_F^2 + |W2|_F^2 + sum_j |v_j|^2)
//! F(v_j) = v_j (V^T L_j) + (V^T L_j)^T v_j^T - v_j L_jj v_j^T
//! ```
//!
//! by simultaneous gradient steps on `W1`, `W2` and `V`. The usual printed
//! form of the update rules gives `V_j <- V_j - gamma d/dW2`; that is a typo,
//! and `V` here steps along its own gradient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lda::{seeded_rng, uniform01};

#[derive(Debug, Clone, PartialEq)]
pub struct TransferParams {
    /// `K x F`, tweet-topic transfer matrix.
    pub w1: DMatrix<f64>,
    /// `K x F`, social-topic transfer matrix.
    pub w2: DMatrix<f64>,
    /// `J x F`, one row per item.
    pub v: DMatrix<f64>,
    pub eta: f64,
    pub theta_reg: f64,
    pub lambda: f64,
    /// `J x J` item graph matrix.
    pub graph: DMatrix<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserTopicVectors {
    /// `U x K`
    pub tweet_topics: DMatrix<f64>,
    /// `U x K`
    pub social_topics: DMatrix<f64>,
}

impl UserTopicVectors {
    /// Both matrices must share a shape and have rows summing to 1 within 1e-9.
    pub fn new(tweet_topics: DMatrix<f64>, social_topics: DMatrix<f64>) -> Result<Self> {
        if tweet_topics.shape() != social_topics.shape() {
            return Err(Error::DimensionMismatch(format!(
                "tweet topics {:?} vs social topics {:?}",
                tweet_topics.shape(),
                social_topics.shape()
            )));
        }
        for (name, m) in [("tweet", &tweet_topics), ("social", &social_topics)] {
            for (i, row) in m.row_iter().enumerate() {
                let s = row.sum();
                if (s - 1.0).abs() > 1e-9 || row.iter().any(|&x| x < 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "{name} topic row {i} sums to {s}"
                    )));
                }
            }
        }
        Ok(UserTopicVectors {
            tweet_topics,
            social_topics,
        })
    }

    pub fn num_users(&self) -> usize {
        self.tweet_topics.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub user: usize,
    pub item: usize,
    pub value: f64,
}

/// Observed `(user, item, rating)` triples, at most one per pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingObservations {
    entries: Vec<Rating>,
}

impl RatingObservations {
    pub fn new(entries: Vec<Rating>) -> Result<Self> {
        let mut keys: Vec<(usize, usize)> = entries.iter().map(|r| (r.user, r.item)).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!(
                "duplicate rating for user {} item {}",
                w[0].0, w[0].1
            )));
        }
        Ok(RatingObservations { entries })
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check(params: &TransferParams, users: &UserTopicVectors, obs: &RatingObservations) -> Result<()> {
    let mismatch = |m: String| Err(Error::DimensionMismatch(m));
    let k = users.tweet_topics.ncols();
    let f = params.v.ncols();
    let j = params.v.nrows();
    if params.w1.shape() != (k, f) || params.w2.shape() != (k, f) {
        return mismatch(format!(
            "W1 {:?} and W2 {:?} must both be {k}x{f}",
            params.w1.shape(),
            params.w2.shape()
        ));
    }
    if users.social_topics.shape() != users.tweet_topics.shape() {
        return mismatch("tweet and social topic matrices differ in shape".into());
    }
    if params.graph.shape() != (j, j) {
        return mismatch(format!("graph {:?} must be {j}x{j}", params.graph.shape()));
    }
    if let Some(r) = obs
        .entries()
        .iter()
        .find(|r| r.user >= users.num_users() || r.item >= j)
    {
        return mismatch(format!("rating ({}, {}) outside {}x{j}", r.user, r.item, users.num_users()));
    }
    if !(0.0..=1.0).contains(&params.eta)
        || !(params.gamma > 0.0)
        || params.lambda < 0.0
        || params.theta_reg < 0.0
    {
        return Err(Error::InvalidConfig(
            "need eta in [0,1], gamma > 0, lambda >= 0, theta_reg >= 0".into(),
        ));
    }
    Ok(())
}

/// Combined profiles `a_i` for every user (`U x F`).
fn user_profiles(params: &TransferParams, users: &UserTopicVectors) -> DMatrix<f64> {
    &users.tweet_topics * &params.w1 * params.eta
        + &users.social_topics * &params.w2 * (1.0 - params.eta)
}

fn graph_term(params: &TransferParams) -> f64 {
    // Row j of L^T V is (V^T L_j)^T.
    let lt_v = params.graph.transpose() * &params.v;
    (0..params.v.nrows())
        .map(|j| {
            let vj = params.v.row(j);
            2.0 * vj.dot(&lt_v.row(j)) - params.graph[(j, j)] * vj.norm_squared()
        })
        .sum()
}

pub fn transfer_objective(
    params: &TransferParams,
    users: &UserTopicVectors,
    obs: &RatingObservations,
) -> Result<f64> {
    check(params, users, obs)?;
    let a = user_profiles(params, users);
    let fit: f64 = obs
        .entries()
        .iter()
        .map(|r| {
            let e = r.value - a.row(r.user).dot(&params.v.row(r.item));
            e * e
        })
        .sum();
    let frob = params.w1.norm_squared() + params.w2.norm_squared() + params.v.norm_squared();
    Ok(fit + params.theta_reg * graph_term(params) + params.lambda * frob)
}

/// Gradient of [`transfer_objective`] with respect to `W1`, `W2` and `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferGradient {
    pub w1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl TransferGradient {
    pub fn max_abs(&self) -> f64 {
        [&self.w1, &self.w2, &self.v]
            .iter()
            .map(|m| m.amax())
            .fold(0.0, f64::max)
    }
}

pub fn transfer_gradient(
    params: &TransferParams,
    users: &UserTopicVectors,
    obs: &RatingObservations,
) -> Result<TransferGradient> {
    check(params, users, obs)?;
    let a = user_profiles(params, users);
    let eta = params.eta;
    // d(fit)/d(a_i) accumulated per user, and d(fit)/d(v_j) directly.
    let mut grad_a = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    let mut gv = DMatrix::<f64>::zeros(params.v.nrows(), params.v.ncols());
    for r in obs.entries() {
        let vj = params.v.row(r.item);
        let ai = a.row(r.user);
        let e = r.value - ai.dot(&vj);
        let mut ga = grad_a.row_mut(r.user);
        ga += vj * (-2.0 * e);
        let mut gvj = gv.row_mut(r.item);
        gvj += ai * (-2.0 * e);
    }
    let mut gw1 = users.tweet_topics.transpose() * &grad_a * eta;
    let mut gw2 = users.social_topics.transpose() * &grad_a * (1.0 - eta);

    // sum_j F(v_j) = 2 tr(V^T L V) - sum_j L_jj |v_j|^2
    let l = &params.graph;
    let diag = DMatrix::from_diagonal(&l.diagonal());
    let graph_grad = ((l + l.transpose()) * &params.v - &diag * &params.v) * 2.0;
    gv += graph_grad * params.theta_reg;

    let two_lambda = 2.0 * params.lambda;
    gw1 += &params.w1 * two_lambda;
    gw2 += &params.w2 * two_lambda;
    gv += &params.v * two_lambda;
    Ok(TransferGradient { w1: gw1, w2: gw2, v: gv })
}

/// One simultaneous step `X <- X - gamma dX` from the pre-step gradients.
pub fn transfer_gradient_step(
    params: &TransferParams,
    users: &UserTopicVectors,
    obs: &RatingObservations,
) -> Result<TransferParams> {
    let g = transfer_gradient(params, users, obs)?;
    Ok(apply_step(params, &g))
}

fn apply_step(params: &TransferParams, g: &TransferGradient) -> TransferParams {
    let gamma = params.gamma;
    TransferParams {
        w1: &params.w1 - &g.w1 * gamma,
        w2: &params.w2 - &g.w2 * gamma,
        v: &params.v - &g.v * gamma,
        eta: params.eta,
        theta_reg: params.theta_reg,
        lambda: params.lambda,
        graph: params.graph.clone(),
        gamma,
    }
}

/// Hyperparameters and stopping rule for [`fit_preference_transfer`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub factors: usize,
    pub eta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub theta_reg: f64,
    pub max_iterations: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tolerance: f64,
    /// Initial factors are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            factors: 10,
            eta: 0.5,
            gamma: 0.01,
            lambda: 0.01,
            theta_reg: 0.01,
            max_iterations: 500,
            tolerance: 1e-6,
            init_scale: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferFit {
    pub params: TransferParams,
    /// Objective before the first step and after every step.
    pub objective_trace: Vec<f64>,
    pub steps: usize,
}

/// Random initialization followed by [`fit_from`].
pub fn fit_preference_transfer(
    users: &UserTopicVectors,
    obs: &RatingObservations,
    graph: DMatrix<f64>,
    config: &TransferConfig,
) -> Result<TransferFit> {
    if obs.is_empty() {
        return Err(Error::InvalidConfig("preference transfer needs at least one rating".into()));
    }
    let k = users.tweet_topics.ncols();
    let j = graph.nrows();
    let f = config.factors;
    let mut rng = seeded_rng(config.seed);
    let mut init = |r: usize, c: usize| {
        DMatrix::from_fn(r, c, |_, _| (2.0 * uniform01(&mut rng) - 1.0) * config.init_scale)
    };
    let params = TransferParams {
        w1: init(k, f),
        w2: init(k, f),
        v: init(j, f),
        eta: config.eta,
        theta_reg: config.theta_reg,
        lambda: config.lambda,
        graph,
        gamma: config.gamma,
    };
    fit_from(params, users, obs, config.max_iterations, config.tolerance)
}

/// Gradient descent from `params` until the relative decrease lies in
/// `[0, tolerance)`, the gradient vanishes, or `max_iterations` steps are taken.
pub fn fit_from(
    mut params: TransferParams,
    users: &UserTopicVectors,
    obs: &RatingObservations,
    max_iterations: usize,
    tolerance: f64,
) -> Result<TransferFit> {
    let mut objective = transfer_objective(&params, users, obs)?;
    if !objective.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut trace = vec![objective];
    let mut steps = 0;
    while steps < max_iterations {
        let g = transfer_gradient(&params, users, obs)?;
        if g.max_abs() == 0.0 {
            break;
        }
        let next = apply_step(&params, &g);
        let next_objective = transfer_objective(&next, users, obs)?;
        steps += 1;
        if !next_objective.is_finite() {
            return Err(Error::Divergence { iteration: steps });
        }
        trace.push(next_objective);
        let decrease = (objective - next_objective) / objective.abs().max(f64::MIN_POSITIVE);
        params = next;
        objective = next_objective;
        // An increase is not convergence; keep going so an oversized step
        // shows up as divergence.
        if (0.0..tolerance).contains(&decrease) {
            break;
        }
    }
    Ok(TransferFit {
        params,
        objective_trace: trace,
        steps,
    })
}

/// `(eta * t_i W1 + (1 - eta) * s_i W2) V^T` for one user.
pub fn predict_preferences(
    params: &TransferParams,
    users: &UserTopicVectors,
    user: usize,
) -> Result<DVector<f64>> {
    if user >= users.num_users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: users.num_users(),
        });
    }
    check(params, users, &RatingObservations::default())?;
    let a = users.tweet_topics.row(user) * &params.w1 * params.eta
        + users.social_topics.row(user) * &params.w2 * (1.0 - params.eta);
    Ok((a * params.v.transpose()).transpose())
}

/// Laplacian `D - W` of a symmetrized k-nearest-neighbour graph whose edge
/// weights are cosine similarities between item rows.
pub fn knn_cosine_laplacian(items: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let j = items.nrows();
    let norms: Vec<f64> = items.row_iter().map(|r| r.norm()).collect();
    let cosine = |a: usize, b: usize| {
        let d = norms[a] * norms[b];
        if d == 0.0 {
            0.0
        } else {
            items.row(a).dot(&items.row(b)) / d
        }
    };
    let mut w = DMatrix::zeros(j, j);
    for a in 0..j {
        let mut others: Vec<(usize, f64)> = (0..j).filter(|&b| b != a).map(|b| (b, cosine(a, b))).collect();
        others.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        for &(b, s) in others.iter().take(k) {
            w[(a, b)] = f64::max(w[(a, b)], s);
            w[(b, a)] = f64::max(w[(b, a)], s);
        }
    }
    let degree = DVector::from_iterator(j, w.row_iter().map(|r| r.sum()));
    DMatrix::from_diagonal(&degree) - w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn users2() -> UserTopicVectors {
        UserTopicVectors::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.25, 0.75]),
        )
        .unwrap()
    }

    fn params2() -> TransferParams {
        TransferParams {
            w1: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            w2: DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 0.0]),
            v: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]),
            eta: 0.5,
            theta_reg: 0.0,
            lambda: 0.0,
            graph: DMatrix::zeros(2, 2),
            gamma: 0.01,
        }
    }

    #[test]
    fn prediction_by_hand() {
        // user 0: a = 0.5*[1,2] + 0.5*[2,0] = [1.5, 1.0]; V^T columns [1,0], [1,1].
        let p = predict_preferences(&params2(), &users2(), 0).unwrap();
        assert_eq!(p.as_slice(), &[1.5, 2.5]);
        // user 1: t W1 = [2,3], s W2 = [1.625, -0.25]; a = [1.8125, 1.375].
        let p = predict_preferences(&params2(), &users2(), 1).unwrap();
        assert_eq!(p.as_slice(), &[1.8125, 3.1875]);
        assert!(matches!(
            predict_preferences(&params2(), &users2(), 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_factors() {
        let mut p = params2();
        p.v = DMatrix::zeros(2, 2);
        assert_eq!(predict_preferences(&p, &users2(), 1).unwrap().as_slice(), &[0.0, 0.0]);
        p.w1 = DMatrix::zeros(2, 2);
        p.w2 = DMatrix::zeros(2, 2);
        let obs = RatingObservations::new(vec![
            Rating { user: 0, item: 1, value: 3.0 },
            Rating { user: 1, item: 0, value: -2.0 },
        ])
        .unwrap();
        assert_eq!(transfer_objective(&p, &users2(), &obs).unwrap(), 13.0);
    }

    #[test]
    fn isolated_frobenius_term() {
        let mut p = params2();
        p.lambda = 0.3;
        let empty = RatingObservations::default();
        let base = transfer_objective(&p, &users2(), &empty).unwrap();
        // d(w^2) for w: 2 -> 2 + delta is 4 delta + delta^2; take W1[0][1] = 0 to isolate.
        p.w1[(0, 1)] = 0.0;
        let zeroed = transfer_objective(&p, &users2(), &empty).unwrap();
        p.w1[(0, 1)] = 0.7;
        let bumped = transfer_objective(&p, &users2(), &empty).unwrap();
        assert!((bumped - zeroed - 0.3 * 0.49).abs() < 1e-12);
        assert!(base > zeroed);
    }

    #[test]
    fn stationary_point_unchanged() {
        let p = TransferParams { lambda: 0.0, theta_reg: 0.0, ..params2() };
        let next = transfer_gradient_step(&p, &users2(), &RatingObservations::default()).unwrap();
        assert_eq!(next, p);
    }

    #[test]
    fn duplicate_ratings_rejected() {
        let r = Rating { user: 0, item: 0, value: 1.0 };
        assert!(RatingObservations::new(vec![r, r]).is_err());
    }

    #[test]
    fn dimension_checks() {
        let mut p = params2();
        p.graph = DMatrix::zeros(3, 3);
        assert!(matches!(
            transfer_objective(&p, &users2(), &RatingObservations::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let obs = RatingObservations::new(vec![Rating { user: 0, item: 5, value: 1.0 }]).unwrap();
        assert!(matches!(
            transfer_objective(&params2(), &users2(), &obs),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn all_zero_start_is_converged() {
        let p = TransferParams {
            w1: DMatrix::zeros(2, 2),
            w2: DMatrix::zeros(2, 2),
            v: DMatrix::zeros(2, 2),
            ..params2()
        };
        let obs = RatingObservations::new(vec![Rating { user: 0, item: 0, value: 1.0 }]).unwrap();
        let fit = fit_from(p, &users2(), &obs, 100, 1e-6).unwrap();
        assert_eq!(fit.steps, 0);
        assert_eq!(fit.objective_trace, vec![1.0]);
    }

    #[test]
    fn large_learning_rate_diverges() {
        let obs = RatingObservations::new(vec![
            Rating { user: 0, item: 0, value: 5.0 },
            Rating { user: 1, item: 1, value: -5.0 },
        ])
        .unwrap();
        let p = TransferParams { gamma: 50.0, ..params2() };
        assert!(matches!(
            fit_from(p, &users2(), &obs, 1000, 0.0),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let items = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.9, 0.1, 0.0, 1.0, 0.1, 0.9]);
        let l = knn_cosine_laplacian(&items, 1);
        for r in l.row_iter() {
            assert!(r.sum().abs() < 1e-12);
        }
        assert_eq!(l, l.transpose());
        assert!(l[(0, 1)] < 0.0 && l[(0, 2)] == 0.0);
    }
}
