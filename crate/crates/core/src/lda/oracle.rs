//! Brute-force posterior over topic assignments for tiny corpora.
//!
//! The joint `p(w, z)` of each configuration is accumulated token by token
//! from Pólya-urn predictive probabilities, which involves only ratios of
//! counts. It therefore checks the Gamma-function closed form in
//! [`SamplerState::log_likelihood`](super::SamplerState::log_likelihood)
//! along an independent route.

use std::collections::BTreeMap;

use super::LdaConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Largest number of configurations the oracle will enumerate.
pub const MAX_ORACLE_CONFIGURATIONS: usize = 1 << 18;

#[derive(Debug, Clone)]
pub struct ExactPosterior {
    /// Configurations flattened in (document, position) order.
    pub probabilities: BTreeMap<Vec<u32>, f64>,
    pub log_joint: BTreeMap<Vec<u32>, f64>,
}

impl ExactPosterior {
    pub fn probability(&self, z: &[u32]) -> f64 {
        self.probabilities.get(z).copied().unwrap_or(0.0)
    }
}

pub fn exact_posterior(corpus: &Corpus, config: &LdaConfig) -> Result<ExactPosterior> {
    config.validate()?;
    let k = config.topics;
    let tokens: Vec<(usize, usize)> = corpus
        .documents
        .iter()
        .enumerate()
        .flat_map(|(d, doc)| doc.tokens.iter().map(move |&w| (d, w as usize)))
        .collect();
    let t = tokens.len();
    let too_large = Error::InstanceTooLarge { topics: k, tokens: t };
    let n_configs = (0..t).try_fold(1usize, |acc, _| {
        acc.checked_mul(k).filter(|&n| n <= MAX_ORACLE_CONFIGURATIONS)
    });
    let n_configs = n_configs.ok_or(too_large)?;

    let v = corpus.vocab_size();
    let m = corpus.num_docs();
    let (alpha, beta) = (config.alpha, config.beta);
    let mut log_joint = BTreeMap::new();
    let mut z = vec![0u32; t];
    for index in 0..n_configs {
        let mut rest = index;
        for slot in z.iter_mut().rev() {
            *slot = (rest % k) as u32;
            rest /= k;
        }
        let mut doc_topic = vec![0usize; m * k];
        let mut doc_len = vec![0usize; m];
        let mut topic_word = vec![0usize; k * v];
        let mut topic_total = vec![0usize; k];
        let mut lp = 0.0;
        for (&(d, w), &topic) in tokens.iter().zip(&z) {
            let topic = topic as usize;
            let p_topic = (doc_topic[d * k + topic] as f64 + alpha) / (doc_len[d] as f64 + k as f64 * alpha);
            let p_word = (topic_word[topic * v + w] as f64 + beta) / (topic_total[topic] as f64 + v as f64 * beta);
            lp += p_topic.ln() + p_word.ln();
            doc_topic[d * k + topic] += 1;
            doc_len[d] += 1;
            topic_word[topic * v + w] += 1;
            topic_total[topic] += 1;
        }
        log_joint.insert(z.clone(), lp);
    }

    let max = log_joint.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = log_joint.values().map(|lp| (lp - max).exp()).sum();
    let probabilities = log_joint
        .iter()
        .map(|(z, lp)| (z.clone(), (lp - max).exp() / norm))
        .collect();
    Ok(ExactPosterior {
        probabilities,
        log_joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lda::{seeded_rng, uniform01, SamplerState};

    fn cfg(k: usize, alpha: f64, beta: f64) -> LdaConfig {
        LdaConfig {
            topics: k,
            alpha,
            beta,
            iterations: 1,
            burn_in: 0,
            sample_lag: 1,
            seed: 0,
            average_samples: false,
        }
    }

    #[test]
    fn single_topic() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1], vec![1]], 2).unwrap();
        let post = exact_posterior(&corpus, &cfg(1, 0.3, 0.2)).unwrap();
        assert_eq!(post.probabilities.len(), 1);
        assert!((post.probability(&[0, 0, 0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalized() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1, 1], vec![2]], 3).unwrap();
        let post = exact_posterior(&corpus, &cfg(3, 0.4, 0.7)).unwrap();
        assert_eq!(post.probabilities.len(), 81);
        let total: f64 = post.probabilities.values().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn label_symmetry() {
        let corpus = Corpus::from_token_ids(&[vec![0], vec![0]], 1).unwrap();
        let post = exact_posterior(&corpus, &cfg(2, 0.5, 0.5)).unwrap();
        for (z, p) in &post.probabilities {
            let swapped: Vec<u32> = z.iter().map(|t| 1 - t).collect();
            assert_eq!(*p, post.probability(&swapped));
        }
    }

    #[test]
    fn repeated_word_closed_form_and_simulation() {
        // One document "a a", K=2, V=1, alpha=beta=1. The word side is constant
        // (V=1), and under theta ~ Dir(1,1) = Uniform(0,1) the probability that
        // both tokens share a topic is E[t^2 + (1-t)^2] = 2/3.
        let corpus = Corpus::from_token_ids(&[vec![0, 0]], 1).unwrap();
        let post = exact_posterior(&corpus, &cfg(2, 1.0, 1.0)).unwrap();
        let same = post.probability(&[0, 0]) + post.probability(&[1, 1]);
        assert!((same - 2.0 / 3.0).abs() < 1e-12);

        let mut rng = seeded_rng(99);
        let n = 400_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let theta = uniform01(&mut rng);
            let z1 = uniform01(&mut rng) < theta;
            let z2 = uniform01(&mut rng) < theta;
            hits += usize::from(z1 == z2);
        }
        let sim = hits as f64 / n as f64;
        assert!((sim - same).abs() < 0.005, "simulated {sim}");
    }

    #[test]
    fn agrees_with_closed_form_log_likelihood() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1], vec![1, 2]], 3).unwrap();
        let c = cfg(2, 0.3, 0.8);
        let post = exact_posterior(&corpus, &c).unwrap();
        for (z, lp) in &post.log_joint {
            let nested = vec![z[..2].to_vec(), z[2..].to_vec()];
            let state = SamplerState::from_assignments(&corpus, &c, nested).unwrap();
            assert!((state.log_likelihood() - lp).abs() < 1e-8);
        }
    }

    #[test]
    fn refuses_large_instances() {
        let corpus = Corpus::from_token_ids(&[vec![0; 19]], 1).unwrap();
        assert!(matches!(
            exact_posterior(&corpus, &cfg(2, 1.0, 1.0)),
            Err(Error::InstanceTooLarge { .. })
        ));
        let corpus = Corpus::from_token_ids(&[vec![0; 18]], 1).unwrap();
        assert!(exact_posterior(&corpus, &cfg(2, 1.0, 1.0)).is_ok());
    }
}
