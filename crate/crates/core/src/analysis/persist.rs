//! Model files: one JSON document holding the config, vocabulary, documents,
//! topic assignments and the integer count tables, so a reload is exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Vocabulary};
use crate::error::{Error, Result};
use crate::lda::{ChainRng, LdaConfig, SamplerState};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: u32,
    config: LdaConfig,
    vocabulary: Vocabulary,
    documents: Vec<Document>,
    sweeps: usize,
    assignments: Vec<Vec<u32>>,
    /// `M x K`
    n_dk: Vec<Vec<u32>>,
    /// `K x V`
    n_kw: Vec<Vec<u32>>,
    n_k: Vec<u64>,
    rng: ChainRng,
}

/// A chain together with the corpus it was fitted to.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub corpus: Corpus,
    pub state: SamplerState,
}

pub fn model_to_json(corpus: &Corpus, state: &SamplerState) -> Result<String> {
    let k = state.num_topics();
    let file = ModelFile {
        format: FORMAT_VERSION,
        config: state.config().clone(),
        vocabulary: corpus.vocabulary.clone(),
        documents: corpus.documents.clone(),
        sweeps: state.sweeps(),
        assignments: state.assignments().to_vec(),
        n_dk: (0..state.num_docs()).map(|d| state.doc_topic_row(d).to_vec()).collect(),
        n_kw: (0..k)
            .map(|t| (0..state.vocab_size()).map(|w| state.n_kw(t, w)).collect())
            .collect(),
        n_k: (0..k).map(|t| state.n_k(t)).collect(),
        rng: state.rng.clone(),
    };
    Ok(serde_json::to_string(&file)? + "\n")
}

pub fn save_model(path: &Path, corpus: &Corpus, state: &SamplerState) -> Result<()> {
    fs::write(path, model_to_json(corpus, state)?).map_err(|e| Error::io(path, e))
}

pub fn model_from_json(text: &str) -> Result<SavedModel> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value.get("format").and_then(|f| f.as_u64()).unwrap_or(0) as u32;
    if found != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value)?;
    let corpus = Corpus::new(file.documents, file.vocabulary)
        .map_err(|e| Error::CorruptCounts(e.to_string()))?;
    let mut state = SamplerState::assemble(&corpus, file.config, file.assignments, file.rng)
        .map_err(|e| Error::CorruptCounts(e.to_string()))?;
    state.sweeps = file.sweeps;

    let k = state.num_topics();
    let corrupt = |what: &str| Err(Error::CorruptCounts(format!("{what} disagree with assignments")));
    let n_dk_ok = file.n_dk.len() == state.num_docs()
        && file.n_dk.iter().enumerate().all(|(d, row)| row == state.doc_topic_row(d));
    if !n_dk_ok {
        return corrupt("n_dk");
    }
    let n_kw_ok = file.n_kw.len() == k
        && file.n_kw.iter().enumerate().all(|(t, row)| {
            row.len() == state.vocab_size() && row.iter().enumerate().all(|(w, &c)| c == state.n_kw(t, w))
        });
    if !n_kw_ok {
        return corrupt("n_kw");
    }
    if file.n_k.len() != k || (0..k).any(|t| file.n_k[t] != state.n_k(t)) {
        return corrupt("n_k");
    }
    state.check_invariants(&corpus)?;
    Ok(SavedModel { corpus, state })
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
