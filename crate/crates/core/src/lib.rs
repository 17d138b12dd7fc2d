//! Topic modeling with latent Dirichlet allocation and a family of
//! topic-driven recommendation scorers.
//!
//! - [`corpus`]: JSON-lines ingestion, tokenization, vocabulary, encoding.
//! - [`lda`]: collapsed Gibbs sampler, estimators, fold-in, exact oracle.
//! - [`recommenders`]: followee ranking, cross-network preference transfer,
//!   topic/location-aware PMF likelihood, cold-start app scoring and
//!   location-block similarity.
//! - [`analysis`]: the end-to-end experiment (topic tables, trends, tags)
//!   and model persistence behind the `ldarec` binary.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod lda;
pub mod par;
pub mod recommenders;

pub use error::{Error, Result};
