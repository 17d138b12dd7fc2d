use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{sample_weighted, seeded_rng, uniform_index, SamplerState};
use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};

/// Smoothed point estimates of the document-topic and topic-word distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    /// `M x K`, row-stochastic.
    pub theta: Vec<Vec<f64>>,
    /// `K x V`, row-stochastic.
    pub phi: Vec<Vec<f64>>,
    pub vocabulary: Vocabulary,
    /// Document-side prior, used when folding in new documents.
    pub alpha: f64,
}

impl SamplerState {
    /// `(n_dk + alpha) / (N_d + K alpha)`
    pub fn estimate_theta(&self) -> Vec<Vec<f64>> {
        let k = self.config.topics;
        let alpha = self.config.alpha;
        (0..self.num_docs())
            .map(|d| {
                let denom = self.doc_len(d) as f64 + k as f64 * alpha;
                self.doc_topic_row(d)
                    .iter()
                    .map(|&c| (c as f64 + alpha) / denom)
                    .collect()
            })
            .collect()
    }

    /// `(n_kw + beta) / (n_k + V beta)`
    pub fn estimate_phi(&self) -> Vec<Vec<f64>> {
        let k = self.config.topics;
        let v = self.vocab_size;
        let beta = self.config.beta;
        (0..k)
            .map(|t| {
                let denom = self.topic_total[t] as f64 + v as f64 * beta;
                (0..v)
                    .map(|w| (self.word_topic[w * k + t] as f64 + beta) / denom)
                    .collect()
            })
            .collect()
    }

    pub fn to_model(&self, vocabulary: &Vocabulary) -> TopicModel {
        TopicModel {
            theta: self.estimate_theta(),
            phi: self.estimate_phi(),
            vocabulary: vocabulary.clone(),
            alpha: self.config.alpha,
        }
    }
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.phi.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }
}

/// The `n` most probable words of `topic`, ties in lexicographic order.
/// `n` larger than the vocabulary returns the whole vocabulary.
pub fn top_words(model: &TopicModel, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
    let row = model.phi.get(topic).ok_or(Error::IndexOutOfRange {
        what: "topic",
        index: topic,
        len: model.num_topics(),
    })?;
    let terms = model.vocabulary.terms();
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| terms[a].cmp(&terms[b]))
    });
    Ok(order
        .into_iter()
        .take(n)
        .map(|w| (terms[w].clone(), row[w]))
        .collect())
}

/// Gibbs passes over a single unseen document with `phi` held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldInConfig {
    pub passes: usize,
    /// Passes discarded before averaging.
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        FoldInConfig {
            passes: 20,
            burn_in: 10,
            seed: 1,
        }
    }
}

/// Topic distribution of `doc` under `model`, averaged over the passes
/// after burn-in.
pub fn fold_in(model: &TopicModel, doc: &Document, config: &FoldInConfig) -> Result<Vec<f64>> {
    if doc.tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    if config.burn_in >= config.passes {
        return Err(Error::InvalidConfig("fold-in burn_in must be below passes".into()));
    }
    let k = model.num_topics();
    let v = model.vocab_size();
    if let Some(&bad) = doc.tokens.iter().find(|&&w| w as usize >= v) {
        return Err(Error::IndexOutOfRange { what: "token id", index: bad as usize, len: v });
    }
    let alpha = model.alpha;
    let mut rng = seeded_rng(config.seed);
    let mut z: Vec<usize> = doc.tokens.iter().map(|_| uniform_index(&mut rng, k)).collect();
    let mut counts = vec![0u32; k];
    for &t in &z {
        counts[t] += 1;
    }
    let mut weights = vec![0.0; k];
    let mut acc = vec![0.0; k];
    let denom = doc.tokens.len() as f64 + k as f64 * alpha;
    for pass in 0..config.passes {
        for (n, &w) in doc.tokens.iter().enumerate() {
            counts[z[n]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                weights[t] = (counts[t] as f64 + alpha) * model.phi[t][w as usize];
                total += weights[t];
            }
            z[n] = sample_weighted(&mut rng, &weights, total);
            counts[z[n]] += 1;
        }
        if pass >= config.burn_in {
            for t in 0..k {
                acc[t] += (counts[t] as f64 + alpha) / denom;
            }
        }
    }
    let samples = (config.passes - config.burn_in) as f64;
    Ok(acc.into_iter().map(|x| x / samples).collect())
}

/// Per-document seed for batch fold-in; independent of execution order.
fn doc_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Fold in every document; results are in input order.
pub fn fold_in_batch(
    model: &TopicModel,
    docs: &[Document],
    config: &FoldInConfig,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let indexed: Vec<(usize, &Document)> = docs.iter().enumerate().collect();
    map_slice(exec, &indexed, |&(i, doc)| {
        let cfg = FoldInConfig {
            seed: doc_seed(config.seed, i),
            ..*config
        };
        fold_in(model, doc, &cfg)
    })
    .into_iter()
    .collect()
}

/// `exp(-sum log p(w | theta_fold_in, phi) / tokens)` over held-out documents.
pub fn perplexity(
    model: &TopicModel,
    docs: &[Document],
    config: &FoldInConfig,
    exec: Execution,
) -> Result<f64> {
    let thetas = fold_in_batch(model, docs, config, exec)?;
    let mut log_lik = 0.0;
    let mut tokens = 0usize;
    for (doc, theta) in docs.iter().zip(&thetas) {
        for &w in &doc.tokens {
            let p: f64 = theta
                .iter()
                .zip(&model.phi)
                .map(|(th, row)| th * row[w as usize])
                .sum();
            log_lik += p.ln();
        }
        tokens += doc.tokens.len();
    }
    Ok((-log_lik / tokens as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::lda::LdaConfig;

    fn doc(tokens: Vec<u32>) -> Document {
        Document { id: "x".into(), tokens, year: 0 }
    }

    fn model_with_phi(phi: Vec<Vec<f64>>, terms: &[&str], alpha: f64) -> TopicModel {
        TopicModel {
            theta: vec![],
            phi,
            vocabulary: Vocabulary::from_terms(terms.iter().copied()).unwrap(),
            alpha,
        }
    }

    #[test]
    fn theta_hand_value() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1]], 2).unwrap();
        let c = LdaConfig { topics: 2, alpha: 0.5, beta: 0.1, iterations: 1, burn_in: 0, ..Default::default() };
        let state = SamplerState::from_assignments(&corpus, &c, vec![vec![0, 0]]).unwrap();
        let theta = state.estimate_theta();
        assert!((theta[0][0] - 2.5 / 3.0).abs() < 1e-15);
        assert!((theta[0][1] - 0.5 / 3.0).abs() < 1e-15);
        // Topic 1 is empty: uniform over the vocabulary.
        let phi = state.estimate_phi();
        assert_eq!(phi[1], vec![0.5, 0.5]);
    }

    #[test]
    fn single_topic_theta() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1], vec![1]], 2).unwrap();
        let c = LdaConfig { topics: 1, iterations: 1, burn_in: 0, ..Default::default() };
        let state = SamplerState::init(&corpus, &c).unwrap();
        assert_eq!(state.estimate_theta(), vec![vec![1.0], vec![1.0]]);
    }

    #[test]
    fn estimates_row_stochastic() {
        let corpus = Corpus::from_token_ids(&[vec![0, 1, 2, 2], vec![3, 1], vec![4, 4, 4]], 5).unwrap();
        let c = LdaConfig { topics: 4, iterations: 1, burn_in: 0, seed: 3, ..Default::default() };
        let mut state = SamplerState::init(&corpus, &c).unwrap();
        state.sweep(&corpus);
        for row in state.estimate_theta().iter().chain(&state.estimate_phi()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn top_words_ordering() {
        let m = model_with_phi(vec![vec![0.5, 0.3, 0.2]], &["a", "b", "c"], 0.1);
        let words: Vec<String> = top_words(&m, 0, 3).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(words, ["a", "b", "c"]);

        let m = model_with_phi(vec![vec![0.25; 4]], &["d", "b", "c", "a"], 0.1);
        let words: Vec<String> = top_words(&m, 0, 4).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(words, ["a", "b", "c", "d"]);
        assert!(matches!(top_words(&m, 1, 2), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(top_words(&m, 0, 10).unwrap().len(), 4);
    }

    #[test]
    fn fold_in_cases() {
        let single = model_with_phi(vec![vec![0.5, 0.5]], &["a", "b"], 0.1);
        assert_eq!(fold_in(&single, &doc(vec![0, 1]), &FoldInConfig::default()).unwrap(), vec![1.0]);
        assert!(matches!(
            fold_in(&single, &doc(vec![]), &FoldInConfig::default()),
            Err(Error::EmptyDocument)
        ));

        // Words 0..3 belong almost entirely to topic 3.
        let v = 6;
        let mut phi = vec![vec![1.0 / v as f64; v]; 5];
        phi[3] = vec![0.33, 0.33, 0.33, 0.0033, 0.0033, 0.0034];
        for (t, row) in phi.iter_mut().enumerate() {
            if t != 3 {
                *row = vec![0.001, 0.001, 0.001, 0.299, 0.349, 0.349];
            }
        }
        let m = model_with_phi(phi, &["a", "b", "c", "d", "e", "f"], 0.1);
        let theta = fold_in(&m, &doc(vec![0, 1, 2, 0, 1]), &FoldInConfig::default()).unwrap();
        let argmax = (0..5).max_by(|&a, &b| theta[a].total_cmp(&theta[b])).unwrap();
        assert_eq!(argmax, 3);
        assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let again = fold_in(&m, &doc(vec![0, 1, 2, 0, 1]), &FoldInConfig::default()).unwrap();
        assert_eq!(theta, again);
    }

    #[test]
    fn batch_independent_of_execution() {
        let m = model_with_phi(
            vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.2, 0.7]],
            &["a", "b", "c"],
            0.5,
        );
        let docs: Vec<Document> = (0..40).map(|i| doc(vec![i % 3, (i + 1) % 3, 2])).collect();
        let cfg = FoldInConfig::default();
        let seq = fold_in_batch(&m, &docs, &cfg, Execution::Sequential).unwrap();
        let par = fold_in_batch(&m, &docs, &cfg, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        let p = perplexity(&m, &docs, &cfg, Execution::Parallel).unwrap();
        assert!(p > 1.0 && p < 3.0, "{p}");
    }
}
