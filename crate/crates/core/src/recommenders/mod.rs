//! Recommendation scorers built on topic-model outputs.

pub mod coldstart;
pub mod followees;
pub mod io;
pub mod location;
pub mod tlpmf;
pub mod transfer;

pub use coldstart::{
    coldstart_app_score, follower_conditional, AppFollowerDistribution, ColdStartScore, UserLikes,
};
pub use followees::{
    derive_topic_set, followee_score, rank_followees, ranked_topics, topic_set_union, FolloweeProfile,
    DEFAULT_TOPICS_PER_TEXT,
};
pub use location::{
    block_coefficient, initial_coefficient, initial_coefficients, pearson, pearson_block_similarity, pearson_counts,
    region_membership, UsageMatrix,
};
pub use tlpmf::{
    residual_mean_square, tlpmf_log_likelihood, tlpmf_log_likelihood_with, topic_location_mean,
    TlpmfModel,
};
pub use transfer::{
    fit_from, fit_preference_transfer, knn_cosine_laplacian, predict_preferences,
    transfer_gradient, transfer_gradient_step, transfer_objective, Rating, RatingObservations,
    TransferConfig, TransferFit, TransferGradient, TransferParams, UserTopicVectors,
};
