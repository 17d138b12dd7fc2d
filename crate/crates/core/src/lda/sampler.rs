use statrs::function::gamma::ln_gamma;

use super::{sample_weighted, seeded_rng, uniform_index, ChainRng, LdaConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Topic assignments and collapsed sufficient statistics for one chain.
///
/// `word_topic` is stored word-major (`V x K`) so the inner loop of a sweep
/// reads one contiguous row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    pub(crate) config: LdaConfig,
    pub(crate) vocab_size: usize,
    pub(crate) z: Vec<Vec<u32>>,
    pub(crate) doc_topic: Vec<u32>,
    pub(crate) word_topic: Vec<u32>,
    pub(crate) topic_total: Vec<u64>,
    pub(crate) rng: ChainRng,
    pub(crate) sweeps: usize,
}

impl SamplerState {
    /// Uniform random initial assignment from the configured seed.
    pub fn init(corpus: &Corpus, config: &LdaConfig) -> Result<Self> {
        config.validate()?;
        if corpus.documents.is_empty() {
            return Err(Error::NoDocuments);
        }
        let k = config.topics;
        let mut rng = seeded_rng(config.seed);
        let z = corpus
            .documents
            .iter()
            .map(|d| {
                d.tokens
                    .iter()
                    .map(|_| uniform_index(&mut rng, k) as u32)
                    .collect()
            })
            .collect();
        Self::assemble(corpus, config.clone(), z, rng)
    }

    /// Build a state from explicit assignments (one topic per token).
    pub fn from_assignments(corpus: &Corpus, config: &LdaConfig, z: Vec<Vec<u32>>) -> Result<Self> {
        config.validate()?;
        Self::assemble(corpus, config.clone(), z, seeded_rng(config.seed))
    }

    pub(crate) fn assemble(
        corpus: &Corpus,
        config: LdaConfig,
        z: Vec<Vec<u32>>,
        rng: ChainRng,
    ) -> Result<Self> {
        let k = config.topics;
        let v = corpus.vocab_size();
        let m = corpus.num_docs();
        if z.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} assignment rows for {} documents",
                z.len(),
                m
            )));
        }
        let mut doc_topic = vec![0u32; m * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic_total = vec![0u64; k];
        for (d, (doc, zd)) in corpus.documents.iter().zip(&z).enumerate() {
            if zd.len() != doc.tokens.len() {
                return Err(Error::DimensionMismatch(format!(
                    "document {d} has {} tokens but {} assignments",
                    doc.tokens.len(),
                    zd.len()
                )));
            }
            for (&w, &t) in doc.tokens.iter().zip(zd) {
                let t = t as usize;
                if t >= k {
                    return Err(Error::IndexOutOfRange { what: "topic", index: t, len: k });
                }
                doc_topic[d * k + t] += 1;
                word_topic[w as usize * k + t] += 1;
                topic_total[t] += 1;
            }
        }
        Ok(SamplerState {
            config,
            vocab_size: v,
            z,
            doc_topic,
            word_topic,
            topic_total,
            rng,
            sweeps: 0,
        })
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn num_topics(&self) -> usize {
        self.config.topics
    }

    pub fn num_docs(&self) -> usize {
        self.z.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    /// Number of completed sweeps.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.z[d].len()
    }

    pub fn n_dk(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.config.topics + k]
    }

    pub fn n_kw(&self, k: usize, w: usize) -> u32 {
        self.word_topic[w * self.config.topics + k]
    }

    pub fn n_k(&self, k: usize) -> u64 {
        self.topic_total[k]
    }

    pub fn doc_topic_row(&self, d: usize) -> &[u32] {
        let k = self.config.topics;
        &self.doc_topic[d * k..(d + 1) * k]
    }

    /// `p(z_dn = k | z_-dn, w)` with the token's own assignment removed.
    pub fn conditional_distribution(&self, corpus: &Corpus, d: usize, n: usize) -> Result<Vec<f64>> {
        let doc = corpus.documents.get(d).ok_or(Error::IndexOutOfRange {
            what: "document",
            index: d,
            len: corpus.num_docs(),
        })?;
        let w = *doc.tokens.get(n).ok_or(Error::IndexOutOfRange {
            what: "token",
            index: n,
            len: doc.tokens.len(),
        })? as usize;
        let k = self.config.topics;
        let current = self.z[d][n] as usize;
        let v_beta = self.vocab_size as f64 * self.config.beta;
        let mut p: Vec<f64> = (0..k)
            .map(|t| {
                let own = u32::from(t == current);
                let ndk = (self.n_dk(d, t) - own) as f64;
                let nkw = (self.n_kw(t, w) - own) as f64;
                let nk = (self.topic_total[t] - own as u64) as f64;
                (ndk + self.config.alpha) * (nkw + self.config.beta) / (nk + v_beta)
            })
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }

    /// Resample every token once, in (document, position) order.
    pub fn sweep(&mut self, corpus: &Corpus) {
        let k = self.config.topics;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let v_beta = self.vocab_size as f64 * beta;
        let mut weights = vec![0.0f64; k];
        for (d, doc) in corpus.documents.iter().enumerate() {
            let zd = &mut self.z[d];
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (n, &w) in doc.tokens.iter().enumerate() {
                let w = w as usize;
                let wt = &mut self.word_topic[w * k..(w + 1) * k];
                let old = zd[n] as usize;
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (dt[t] as f64 + alpha) * (wt[t] as f64 + beta)
                        / (self.topic_total[t] as f64 + v_beta);
                    weights[t] = p;
                    total += p;
                }
                let new = sample_weighted(&mut self.rng, &weights, total);

                zd[n] = new as u32;
                dt[new] += 1;
                wt[new] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    /// Collapsed joint `log p(w, z)` from the count tables.
    ///
    /// Per-topic and per-document terms are summed in sorted order so the
    /// value is exactly invariant under topic relabeling.
    pub fn log_likelihood(&self) -> f64 {
        let k = self.config.topics;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let v = self.vocab_size;
        let ln_g_alpha = ln_gamma(alpha);
        let ln_g_beta = ln_gamma(beta);

        let mut doc_terms = Vec::with_capacity(self.num_docs());
        let mut counts: Vec<u32> = Vec::with_capacity(k);
        for d in 0..self.num_docs() {
            counts.clear();
            counts.extend_from_slice(self.doc_topic_row(d));
            counts.sort_unstable();
            let inner: f64 = counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + alpha) - ln_g_alpha)
                .sum();
            let n_d = self.doc_len(d) as f64;
            doc_terms.push(ln_gamma(k as f64 * alpha) - ln_gamma(n_d + k as f64 * alpha) + inner);
        }

        let mut topic_terms: Vec<f64> = (0..k)
            .map(|t| {
                let inner: f64 = (0..v)
                    .map(|w| self.word_topic[w * k + t])
                    .filter(|&c| c > 0)
                    .map(|c| ln_gamma(c as f64 + beta) - ln_g_beta)
                    .sum();
                ln_gamma(v as f64 * beta) - ln_gamma(self.topic_total[t] as f64 + v as f64 * beta) + inner
            })
            .collect();
        topic_terms.sort_by(f64::total_cmp);
        doc_terms.iter().sum::<f64>() + topic_terms.iter().sum::<f64>()
    }

    /// Verify the four count identities against `corpus`.
    pub fn check_invariants(&self, corpus: &Corpus) -> Result<()> {
        let k = self.config.topics;
        let corrupt = |m: String| Err(Error::CorruptCounts(m));
        if corpus.num_docs() != self.num_docs() || corpus.vocab_size() != self.vocab_size {
            return corrupt("state shape does not match corpus".into());
        }
        let rebuilt = Self::assemble(corpus, self.config.clone(), self.z.clone(), self.rng.clone())?;
        for d in 0..self.num_docs() {
            let row: u64 = self.doc_topic_row(d).iter().map(|&c| c as u64).sum();
            if row != self.doc_len(d) as u64 {
                return corrupt(format!("document {d}: topic counts sum to {row}, length {}", self.doc_len(d)));
            }
        }
        for t in 0..k {
            let col: u64 = (0..self.vocab_size).map(|w| self.word_topic[w * k + t] as u64).sum();
            if col != self.topic_total[t] {
                return corrupt(format!("topic {t}: word counts sum to {col}, total {}", self.topic_total[t]));
            }
        }
        let tokens: u64 = self.z.iter().map(|zd| zd.len() as u64).sum();
        if self.topic_total.iter().sum::<u64>() != tokens {
            return corrupt("topic totals do not add up to the token count".into());
        }
        if rebuilt.doc_topic != self.doc_topic
            || rebuilt.word_topic != self.word_topic
            || rebuilt.topic_total != self.topic_total
        {
            return corrupt("counts disagree with topic assignments".into());
        }
        Ok(())
    }
}
