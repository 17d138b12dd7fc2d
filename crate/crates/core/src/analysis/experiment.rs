//! The end-to-end bibliographic experiment: filter records, fit a topic
//! model, and write the model, topic table, trends, tags and a manifest.
//!
//! Every artifact is a pure function of the config and the input file, so
//! two runs with the same inputs produce byte-identical output directories.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::persist::model_to_json;
use super::tags::generate_tags;
use super::trends::{topic_trends, year_span, TopicTrends};
use crate::corpus::{build_vocabulary, encode_corpus, read_records, RawRecord, TokenizerConfig};
use crate::error::{Error, Result};
use crate::lda::{top_words, train, LdaConfig, Training};
use crate::par::{map_range, Execution};

pub const MODEL_FILE: &str = "model.json";
pub const TOPICS_FILE: &str = "topics.tsv";
pub const TRENDS_FILE: &str = "trends.csv";
pub const TAGS_FILE: &str = "tags.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    /// Where artifacts go. Not part of the hash or the manifest, so runs
    /// into different directories produce identical files.
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Keep only these venues (case-insensitive); `None` keeps all.
    pub venues: Option<Vec<String>>,
    /// Inclusive year range; records outside it, or without a year, are dropped.
    pub years: Option<(i32, i32)>,
    pub lda: LdaConfig,
    pub top_words: usize,
    pub tags_per_doc: usize,
    pub min_df: usize,
    pub min_token_len: usize,
    /// Stopword file; `None` uses the built-in English list.
    pub stopwords: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            input: input.into(),
            output_dir: output_dir.into(),
            venues: None,
            years: None,
            lda: LdaConfig::default(),
            top_words: 20,
            tags_per_doc: 5,
            min_df: 2,
            min_token_len: 3,
            stopwords: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lda.validate()?;
        if let Some((lo, hi)) = self.years {
            if lo > hi {
                return Err(Error::InvalidConfig(format!("empty year range {lo}:{hi}")));
            }
        }
        if self.top_words == 0 {
            return Err(Error::InvalidConfig("top_words must be positive".into()));
        }
        if self.min_df == 0 {
            return Err(Error::InvalidConfig("min_df must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the config's JSON form.
    pub fn hash(&self) -> Result<String> {
        let json = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&json)))
    }

    fn tokenizer(&self) -> Result<TokenizerConfig> {
        let mut cfg = match &self.stopwords {
            Some(path) => TokenizerConfig::with_stopword_file(path)?,
            None => TokenizerConfig::default(),
        };
        cfg.min_len = self.min_token_len;
        Ok(cfg)
    }
}

/// Why records were left out, by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Exclusions {
    pub venue_filtered: Vec<String>,
    pub missing_year: Vec<String>,
    pub year_out_of_range: Vec<String>,
    pub no_tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records_read: usize,
    pub documents: usize,
    pub vocabulary_size: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub corpus: CorpusStats,
    pub excluded: Exclusions,
    /// Documents kept for the model but absent from the trends (no year).
    pub trends_undated: Vec<String>,
    pub trend_years: Option<(i32, i32)>,
    pub sweeps: usize,
    pub final_log_likelihood: f64,
    pub artifacts: Vec<String>,
}

pub struct ExperimentOutput {
    pub training: Training,
    pub trends: Option<TopicTrends>,
    pub manifest: Manifest,
}

/// Apply the venue and year filters, recording why each dropped record went.
pub fn filter_records(
    records: Vec<RawRecord>,
    venues: Option<&[String]>,
    years: Option<(i32, i32)>,
) -> (Vec<RawRecord>, Exclusions) {
    let mut excl = Exclusions::default();
    let kept = records
        .into_iter()
        .filter(|r| {
            if let Some(vs) = venues {
                if !vs.iter().any(|v| v.eq_ignore_ascii_case(r.venue.trim())) {
                    excl.venue_filtered.push(r.id.clone());
                    return false;
                }
            }
            if let Some((lo, hi)) = years {
                if r.year == 0 {
                    excl.missing_year.push(r.id.clone());
                    return false;
                }
                if r.year < lo || r.year > hi {
                    excl.year_out_of_range.push(r.id.clone());
                    return false;
                }
            }
            true
        })
        .collect();
    (kept, excl)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput> {
    config.validate()?;
    let tokenizer = config.tokenizer()?;
    let records = read_records(&config.input)?;
    let records_read = records.len();
    let (records, mut excluded) = filter_records(records, config.venues.as_deref(), config.years);
    if records.is_empty() {
        return Err(Error::NoDocuments);
    }
    let vocabulary = build_vocabulary(&records, &tokenizer, config.min_df)?;
    let encoded = encode_corpus(&records, &vocabulary, &tokenizer);
    excluded.no_tokens = encoded.excluded;
    let corpus = encoded.corpus;

    let training = train(&corpus, &config.lda)?;
    let model = &training.model;

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))
    };

    write(MODEL_FILE, &model_to_json(&corpus, &training.state)?)?;

    let mut topics = String::from("topic_id\trank\tterm\tprob\n");
    for k in 0..model.num_topics() {
        for (rank, (term, p)) in top_words(model, k, config.top_words)?.into_iter().enumerate() {
            writeln!(topics, "{k}\t{}\t{term}\t{p}", rank + 1).unwrap();
        }
    }
    write(TOPICS_FILE, &topics)?;

    let trend_years = config.years.or_else(|| year_span(&corpus.documents));
    let trends = match trend_years {
        Some(span) => Some(topic_trends(&corpus.documents, &model.theta, span)?),
        None => None,
    };
    let mut csv = String::from("year,topic,mass\n");
    if let Some(t) = &trends {
        for (year, row) in &t.by_year {
            for (k, mass) in row.iter().enumerate() {
                writeln!(csv, "{year},{k},{mass}").unwrap();
            }
        }
    }
    write(TRENDS_FILE, &csv)?;

    let tags = map_range(exec, corpus.num_docs(), |d| {
        generate_tags(model, &model.theta[d], config.tags_per_doc)
    });
    let mut lines = String::new();
    for (doc, tags) in corpus.documents.iter().zip(tags) {
        let line = serde_json::json!({ "doc_id": doc.id, "tags": tags? });
        lines.push_str(&line.to_string());
        lines.push('\n');
    }
    write(TAGS_FILE, &lines)?;

    let manifest = Manifest {
        config: config.clone(),
        config_hash: config.hash()?,
        corpus: CorpusStats {
            records_read,
            documents: corpus.num_docs(),
            vocabulary_size: corpus.vocab_size(),
            tokens: corpus.total_tokens(),
        },
        excluded,
        trends_undated: trends.as_ref().map(|t| t.undated.clone()).unwrap_or_else(|| {
            corpus.documents.iter().map(|d| d.id.clone()).collect()
        }),
        trend_years,
        sweeps: training.state.sweeps(),
        final_log_likelihood: training.state.log_likelihood(),
        artifacts: [MODEL_FILE, TOPICS_FILE, TRENDS_FILE, TAGS_FILE]
            .map(String::from)
            .to_vec(),
    };
    write(MANIFEST_FILE, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;

    Ok(ExperimentOutput { training, trends, manifest })
}
