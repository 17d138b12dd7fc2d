//! Gaussian rating likelihood of a topic- and location-aware PMF model.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::transfer::RatingObservations;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TlpmfModel {
    /// `M x F` user factors.
    pub u: DMatrix<f64>,
    /// `N x F` POI factors.
    pub c: DMatrix<f64>,
    /// `M x N` topic-location relevance, entries in `[0, 1]`.
    pub tl: DMatrix<f64>,
    pub sigma2: f64,
}

impl TlpmfModel {
    pub fn new(u: DMatrix<f64>, c: DMatrix<f64>, tl: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        if u.ncols() != c.ncols() || tl.shape() != (u.nrows(), c.nrows()) {
            return Err(Error::DimensionMismatch(format!(
                "U {:?}, C {:?}, TL {:?}",
                u.shape(),
                c.shape(),
                tl.shape()
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidConfig("sigma2 must be positive".into()));
        }
        if tl.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidConfig("TL entries must lie in [0, 1]".into()));
        }
        Ok(TlpmfModel { u, c, tl, sigma2 })
    }
}

/// Default rating mean: `TL_ij * (U_i . C_j)`.
pub fn topic_location_mean(model: &TlpmfModel, i: usize, j: usize) -> f64 {
    model.tl[(i, j)] * model.u.row(i).dot(&model.c.row(j))
}

pub fn tlpmf_log_likelihood(model: &TlpmfModel, obs: &RatingObservations) -> Result<f64> {
    tlpmf_log_likelihood_with(model, obs, topic_location_mean)
}

/// Log-likelihood with a caller-supplied rating mean `f(model, i, j)`.
pub fn tlpmf_log_likelihood_with<F>(model: &TlpmfModel, obs: &RatingObservations, mean: F) -> Result<f64>
where
    F: Fn(&TlpmfModel, usize, usize) -> f64,
{
    let (m, n) = model.tl.shape();
    if let Some(r) = obs.entries().iter().find(|r| r.user >= m || r.item >= n) {
        return Err(Error::DimensionMismatch(format!(
            "rating ({}, {}) outside {m}x{n}",
            r.user, r.item
        )));
    }
    let norm = -0.5 * (2.0 * PI * model.sigma2).ln();
    Ok(obs
        .entries()
        .iter()
        .map(|r| {
            let e = r.value - mean(model, r.user, r.item);
            norm - e * e / (2.0 * model.sigma2)
        })
        .sum())
}

/// Mean squared residual under the default rating mean; the maximizer of the
/// likelihood over `sigma2`.
pub fn residual_mean_square(model: &TlpmfModel, obs: &RatingObservations) -> f64 {
    let sse: f64 = obs
        .entries()
        .iter()
        .map(|r| (r.value - topic_location_mean(model, r.user, r.item)).powi(2))
        .sum();
    sse / obs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommenders::transfer::Rating;

    fn model() -> TlpmfModel {
        TlpmfModel::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, -1.0]),
            DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 0.0, 2.0, 3.0, 0.5]),
            DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.2, 0.0, 0.8, 1.0]),
            0.7,
        )
        .unwrap()
    }

    #[test]
    fn empty_observations() {
        assert_eq!(tlpmf_log_likelihood(&model(), &RatingObservations::default()).unwrap(), 0.0);
    }

    #[test]
    fn perfect_predictions() {
        let m = model();
        let obs = RatingObservations::new(vec![
            Rating { user: 0, item: 0, value: topic_location_mean(&m, 0, 0) },
            Rating { user: 1, item: 2, value: topic_location_mean(&m, 1, 2) },
        ])
        .unwrap();
        let expected = 2.0 * (-0.5 * (2.0 * PI * 0.7).ln());
        assert_eq!(tlpmf_log_likelihood(&m, &obs).unwrap(), expected);
    }

    #[test]
    fn hand_instance() {
        // f(0,1) = 0.5 * (1*0 + 2*2) = 2; f(1,2) = 1.0 * (0.5*3 - 1*0.5) = 1.
        let m = model();
        let obs = RatingObservations::new(vec![
            Rating { user: 0, item: 1, value: 3.0 },
            Rating { user: 1, item: 2, value: -1.0 },
        ])
        .unwrap();
        let s2 = 0.7f64;
        let term = |e: f64| -0.5 * (2.0 * PI * s2).ln() - e * e / (2.0 * s2);
        let expected = term(1.0) + term(-2.0);
        assert!((tlpmf_log_likelihood(&m, &obs).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let u = DMatrix::zeros(2, 2);
        let c = DMatrix::zeros(3, 2);
        assert!(TlpmfModel::new(u.clone(), c.clone(), DMatrix::zeros(2, 3), 0.0).is_err());
        assert!(TlpmfModel::new(u.clone(), c.clone(), DMatrix::from_element(2, 3, 1.5), 1.0).is_err());
        assert!(matches!(
            TlpmfModel::new(u, c, DMatrix::zeros(3, 2), 1.0),
            Err(Error::DimensionMismatch(_))
        ));
        let obs = RatingObservations::new(vec![Rating { user: 2, item: 0, value: 1.0 }]).unwrap();
        assert!(tlpmf_log_likelihood(&model(), &obs).is_err());
    }

    #[test]
    fn pluggable_mean() {
        let obs = RatingObservations::new(vec![Rating { user: 0, item: 0, value: 0.0 }]).unwrap();
        let ll = tlpmf_log_likelihood_with(&model(), &obs, |_, _, _| 0.0).unwrap();
        assert_eq!(ll, -0.5 * (2.0 * PI * 0.7).ln());
    }
}
