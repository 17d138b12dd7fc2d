//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! [`SamplerState`] holds the topic assignment of every token together with
//! the three count tables that make each resampling step O(K). [`TopicModel`]
//! holds the smoothed point estimates derived from those counts.
//!
//! The sampler is driven by xoshiro256** seeded through SplitMix64 (the
//! `seed_from_u64` construction). Uniform reals are `(next_u64() >> 11) *
//! 2^-53`; initial topics are `(next_u64() * K) >> 64` in 128-bit arithmetic.
//! Tokens are visited in (document, position) order. Those three facts pin the
//! whole trajectory, so a port using the same generator reproduces it exactly.

mod model;
mod oracle;
mod sampler;
mod train;

pub use model::{fold_in, fold_in_batch, perplexity, top_words, FoldInConfig, TopicModel};
pub use oracle::{exact_posterior, ExactPosterior, MAX_ORACLE_CONFIGURATIONS};
pub use sampler::SamplerState;
pub use train::{run_chains, train, Training};

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator used by every stochastic routine in the crate.
pub type ChainRng = Xoshiro256StarStar;

pub(crate) fn seeded_rng(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

#[inline]
pub(crate) fn uniform01(rng: &mut ChainRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub(crate) fn uniform_index(rng: &mut ChainRng, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Draw an index with probability proportional to `weights[i]`.
#[inline]
pub(crate) fn sample_weighted(rng: &mut ChainRng, weights: &[f64], total: f64) -> usize {
    let u = uniform01(rng) * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    /// Symmetric document-topic concentration.
    pub alpha: f64,
    /// Symmetric topic-word concentration.
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub sample_lag: usize,
    pub seed: u64,
    /// Average per-sample estimates taken every `sample_lag` sweeps after
    /// `burn_in` instead of using the final state alone.
    #[serde(default)]
    pub average_samples: bool,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 100,
            alpha: 0.01,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            sample_lag: 10,
            seed: 1,
            average_samples: false,
        }
    }
}

impl LdaConfig {
    /// Desk-scale profile: 200 sweeps, 50 of burn-in.
    pub fn quick(topics: usize, seed: u64) -> Self {
        LdaConfig {
            topics,
            iterations: 200,
            burn_in: 50,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.topics == 0 {
            return bad("topics must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive and finite");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive and finite");
        }
        if self.burn_in >= self.iterations {
            return bad("burn_in must be smaller than iterations");
        }
        if self.sample_lag == 0 {
            return bad("sample_lag must be at least 1");
        }
        Ok(())
    }
}
