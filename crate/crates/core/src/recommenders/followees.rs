//! Ranking a user's followees against the topics of a set of paper titles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};

/// Default number of top topics a single text contributes to a topic set.
pub const DEFAULT_TOPICS_PER_TEXT: usize = 3;

/// Topic indices by descending mass (ties to the lower index), first `m`.
pub fn ranked_topics(theta_row: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..theta_row.len()).collect();
    order.sort_by(|&a, &b| theta_row[b].total_cmp(&theta_row[a]).then(a.cmp(&b)));
    order.truncate(m);
    order
}

/// The `m` highest-mass topics of one distribution, ties to the lower index.
/// Returns all topics when `m >= K`.
pub fn derive_topic_set(theta_row: &[f64], m: usize) -> BTreeSet<usize> {
    ranked_topics(theta_row, m).into_iter().collect()
}

/// Union of the top-`m` topics of every row.
pub fn topic_set_union(rows: &[Vec<f64>], m: usize) -> BTreeSet<usize> {
    rows.iter().flat_map(|r| derive_topic_set(r, m)).collect()
}

fn argmax(row: &[f64]) -> Option<usize> {
    (0..row.len()).reduce(|best, k| if row[k] > row[best] { k } else { best })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolloweeProfile {
    pub followee_id: String,
    /// Number of tweets whose dominant topic is the key.
    pub tweet_topic_counts: BTreeMap<usize, u64>,
    pub tweet_count: u64,
    pub topic_set: BTreeSet<usize>,
}

impl FolloweeProfile {
    /// Build a profile from the topic distributions of a followee's tweets.
    pub fn from_tweet_topics(followee_id: &str, tweet_thetas: &[Vec<f64>], m: usize) -> Self {
        let mut counts = BTreeMap::new();
        for t in tweet_thetas.iter().filter_map(|row| argmax(row)) {
            *counts.entry(t).or_insert(0) += 1;
        }
        FolloweeProfile {
            followee_id: followee_id.to_owned(),
            tweet_topic_counts: counts,
            tweet_count: tweet_thetas.len() as u64,
            topic_set: topic_set_union(tweet_thetas, m),
        }
    }
}

/// `(sum over t in topics_p of n(t, T_f) / |T_f|) * |topics_p ∩ topics_f|`.
///
/// Everything but the final division is integer arithmetic, so the result is
/// the correctly rounded value of the exact rational score.
pub fn followee_score(topics_p: &BTreeSet<usize>, profile: &FolloweeProfile) -> f64 {
    let hits: u64 = topics_p
        .iter()
        .filter_map(|t| profile.tweet_topic_counts.get(t))
        .sum();
    let overlap = topics_p.intersection(&profile.topic_set).count() as u64;
    (hits * overlap) as f64 / profile.tweet_count as f64
}

/// Score and rank followees: descending score, ties by id.
pub fn rank_followees(
    topics_p: &BTreeSet<usize>,
    followees: &[FolloweeProfile],
    exec: Execution,
) -> Result<Vec<(String, f64)>> {
    if topics_p.is_empty() {
        return Err(Error::EmptyTopicsP);
    }
    if let Some(bad) = followees.iter().find(|f| f.tweet_count == 0) {
        return Err(Error::InvalidProfile(bad.followee_id.clone()));
    }
    let mut ranked = map_slice(exec, followees, |f| {
        (f.followee_id.clone(), followee_score(topics_p, f))
    });
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}
