//! Cold-start app scoring from the topics of an app's followers.
//!
//! `p(+|a,u) = sum_{t in T(a)} p(+|t,u) p(t|a)` with
//! `p(+|t,u) = p(+,t|u) / (p(+,t|u) + p(-,t|u))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::lda::{fold_in_batch, FoldInConfig, TopicModel};
use crate::par::Execution;

pub fn follower_conditional(p_plus_t: f64, p_minus_t: f64) -> Result<f64> {
    if !(p_plus_t >= 0.0 && p_minus_t >= 0.0 && p_plus_t.is_finite() && p_minus_t.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "joint probabilities ({p_plus_t}, {p_minus_t}) must be finite and non-negative"
        )));
    }
    if p_plus_t == 0.0 && p_minus_t == 0.0 {
        return Err(Error::UndefinedConditional);
    }
    Ok(ratio_of_sum(p_plus_t, p_plus_t, p_minus_t))
}

/// `num / (a + b)` without the rounding error of the intermediate sum: the
/// sum is carried as an unevaluated pair (TwoSum) and the quotient refined
/// by one FMA-based correction step.
fn ratio_of_sum(num: f64, a: f64, b: f64) -> f64 {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    let q = num / s;
    let rem = (-q).mul_add(s, num) - q * err;
    q + rem / (s + err)
}

/// Per-follower joints `p(+,t|u)` and `p(-,t|u)` for one user.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserLikes {
    pub joints: BTreeMap<String, (f64, f64)>,
}

impl UserLikes {
    /// Joints from topic mixtures of the user's liked and disliked material:
    /// `p(+,t|u) = theta_plus[t] * n_plus / (n_plus + n_minus)` and likewise
    /// for the minus side. `labels[t]` names the follower bound to slot `t`.
    pub fn from_mixtures(
        theta_plus: &[f64],
        theta_minus: &[f64],
        n_plus: usize,
        n_minus: usize,
        labels: &[String],
    ) -> Result<Self> {
        if theta_plus.len() != labels.len() || theta_minus.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for mixtures of length {} and {}",
                labels.len(),
                theta_plus.len(),
                theta_minus.len()
            )));
        }
        let total = (n_plus + n_minus) as f64;
        if total == 0.0 {
            return Err(Error::InvalidConfig("user has no liked or disliked items".into()));
        }
        let (wp, wm) = (n_plus as f64 / total, n_minus as f64 / total);
        let joints = labels
            .iter()
            .enumerate()
            .map(|(t, label)| (label.clone(), (theta_plus[t] * wp, theta_minus[t] * wm)))
            .collect();
        Ok(UserLikes { joints })
    }

    /// Fold in liked and disliked documents separately against `model`, average
    /// each side's topic mixtures, and weight by the document counts.
    pub fn from_documents(
        model: &TopicModel,
        liked: &[Document],
        disliked: &[Document],
        labels: &[String],
        config: &FoldInConfig,
        exec: Execution,
    ) -> Result<Self> {
        let k = model.num_topics();
        let mean_mixture = |docs: &[Document]| -> Result<Vec<f64>> {
            let thetas = fold_in_batch(model, docs, config, exec)?;
            let mut mean = vec![0.0; k];
            for theta in &thetas {
                for (m, x) in mean.iter_mut().zip(theta) {
                    *m += x / thetas.len() as f64;
                }
            }
            Ok(mean)
        };
        let plus = mean_mixture(liked)?;
        let minus = mean_mixture(disliked)?;
        Self::from_mixtures(&plus, &minus, liked.len(), disliked.len(), labels)
    }
}

/// `p(t|a)` over the followers `T(a)` of one app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppFollowerDistribution {
    pub app_id: String,
    #[serde(rename = "followers")]
    pub follower_probs: BTreeMap<String, f64>,
}

impl AppFollowerDistribution {
    pub fn new(app_id: &str, follower_probs: BTreeMap<String, f64>) -> Result<Self> {
        let d = AppFollowerDistribution {
            app_id: app_id.to_owned(),
            follower_probs,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.follower_probs.is_empty() {
            return Err(Error::EmptyFollowerSet(self.app_id.clone()));
        }
        let sum: f64 = self.follower_probs.values().sum();
        if self.follower_probs.values().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "follower probabilities of app {} sum to {sum}",
                self.app_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdStartScore {
    pub app_id: String,
    pub score: f64,
    /// Followers whose conditional is undefined for this user; their terms
    /// contribute nothing.
    pub skipped: Vec<String>,
}

pub fn coldstart_app_score(likes: &UserLikes, app: &AppFollowerDistribution) -> Result<ColdStartScore> {
    app.validate()?;
    let mut score = 0.0;
    let mut skipped = Vec::new();
    for (follower, &p_t_given_a) in &app.follower_probs {
        let conditional = likes
            .joints
            .get(follower)
            .map(|&(plus, minus)| follower_conditional(plus, minus));
        match conditional {
            Some(Ok(c)) => score += c * p_t_given_a,
            Some(Err(Error::UndefinedConditional)) | None => skipped.push(follower.clone()),
            Some(Err(e)) => return Err(e),
        }
    }
    Ok(ColdStartScore {
        app_id: app.app_id.clone(),
        // p(t|a) is only normalized to within 1e-9.
        score: score.clamp(0.0, 1.0),
        skipped,
    })
}
