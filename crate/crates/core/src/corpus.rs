//! Record ingestion, tokenization, vocabulary construction and encoding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopword list shipped with the crate.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// One bibliographic record as it appears in the JSON-lines input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    /// 0 when the input has no year.
    #[serde(default, deserialize_with = "year_or_zero")]
    pub year: i32,
    #[serde(default)]
    pub venue: String,
}

fn year_or_zero<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<i32, D::Error> {
    Ok(Option::<i32>::deserialize(d)?.unwrap_or(0))
}

impl RawRecord {
    pub fn new(id: &str, title: &str, abstract_text: &str, year: i32, venue: &str) -> Self {
        RawRecord {
            id: id.to_owned(),
            title: title.to_owned(),
            abstract_text: abstract_text.to_owned(),
            year,
            venue: venue.to_owned(),
        }
    }

    /// Title and abstract form a single document.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }
}

#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub min_len: usize,
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            min_len: 3,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
        }
    }
}

impl TokenizerConfig {
    pub fn without_stopwords(min_len: usize) -> Self {
        TokenizerConfig {
            min_len,
            stopwords: HashSet::new(),
        }
    }

    pub fn with_stopword_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(TokenizerConfig {
            stopwords: parse_stopwords(&text),
            ..Default::default()
        })
    }
}

/// One term per line; blank lines and `#` comments are ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Lowercase, split on non-alphanumerics, drop short terms and stopwords.
pub fn tokenize(raw_text: &str, config: &TokenizerConfig) -> Vec<String> {
    raw_text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= config.min_len && !config.stopwords.contains(t))
        .collect()
}

/// Bijection between terms and dense ids in `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary { terms, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

impl Vocabulary {
    /// Fails if `terms` contains duplicates.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let v = Vocabulary::from(terms.into_iter().map(Into::into).collect::<Vec<_>>());
        if v.index.len() != v.terms.len() {
            return Err(Error::InvalidConfig("duplicate vocabulary term".into()));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Keep terms with document frequency `>= min_df`; ids go by descending
/// document frequency, ties in ascending lexicographic order.
pub fn build_vocabulary(
    records: &[RawRecord],
    config: &TokenizerConfig,
    min_df: usize,
) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidConfig("min_df must be at least 1".into()));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for record in records {
        let distinct: HashSet<String> = tokenize(&record.text(), config).into_iter().collect();
        for term in distinct {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, n)| *n >= min_df).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    // BTreeMap iteration is already lexicographic, so a stable sort on df suffices.
    kept.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(Vocabulary::from(
        kept.into_iter().map(|(t, _)| t).collect::<Vec<_>>(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<u32>,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
}

impl Corpus {
    /// Checks that every token id is inside the vocabulary.
    pub fn new(documents: Vec<Document>, vocabulary: Vocabulary) -> Result<Self> {
        let v = vocabulary.len();
        for doc in &documents {
            if let Some(&bad) = doc.tokens.iter().find(|&&t| t as usize >= v) {
                return Err(Error::IndexOutOfRange {
                    what: "token id",
                    index: bad as usize,
                    len: v,
                });
            }
        }
        Ok(Corpus {
            documents,
            vocabulary,
        })
    }

    /// Build a corpus straight from token id lists (ids named `w0`, `w1`, ...).
    pub fn from_token_ids(docs: &[Vec<u32>], vocab_size: usize) -> Result<Self> {
        let vocabulary = Vocabulary::from((0..vocab_size).map(|i| format!("w{i}")).collect::<Vec<_>>());
        let documents = docs
            .iter()
            .enumerate()
            .map(|(i, tokens)| Document {
                id: format!("d{i}"),
                tokens: tokens.clone(),
                year: 0,
            })
            .collect();
        Corpus::new(documents, vocabulary)
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    pub fn decode(&self, doc: &Document) -> Vec<&str> {
        doc.tokens
            .iter()
            .filter_map(|&t| self.vocabulary.term(t))
            .collect()
    }
}

/// Result of [`encode_corpus`]: the corpus plus ids of records that kept no tokens.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub corpus: Corpus,
    pub excluded: Vec<String>,
}

pub fn encode_corpus(
    records: &[RawRecord],
    vocabulary: &Vocabulary,
    config: &TokenizerConfig,
) -> Encoded {
    let mut documents = Vec::with_capacity(records.len());
    let mut excluded = Vec::new();
    for record in records {
        let tokens: Vec<u32> = tokenize(&record.text(), config)
            .iter()
            .filter_map(|t| vocabulary.id(t))
            .collect();
        if tokens.is_empty() {
            excluded.push(record.id.clone());
        } else {
            documents.push(Document {
                id: record.id.clone(),
                tokens,
                year: record.year,
            });
        }
    }
    Encoded {
        corpus: Corpus {
            documents,
            vocabulary: vocabulary.clone(),
        },
        excluded,
    }
}

/// Read a JSON-lines record file. Blank lines are skipped; ids must be unique.
pub fn read_records(path: &Path) -> Result<Vec<RawRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        let record: RawRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if !seen.insert(record.id.clone()) {
            return Err(parse_err(format!("duplicate record id {:?}", record.id)));
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, title: &str) -> RawRecord {
        RawRecord::new(id, title, "", 2015, "ISWC")
    }

    #[test]
    fn tokenize_examples() {
        let cfg = TokenizerConfig::default();
        assert!(tokenize("", &cfg).is_empty());
        assert_eq!(
            tokenize("Semantic Web, the RDF graph", &cfg),
            vec!["semantic", "web", "rdf", "graph"]
        );
        assert!(tokenize("A B C", &cfg).is_empty());
    }

    #[test]
    fn tokenize_is_idempotent() {
        let cfg = TokenizerConfig::default();
        let once = tokenize("Linked-Data QUERY processing; over the Web (2017)!", &cfg);
        let twice = tokenize(&once.join(" "), &cfg);
        assert_eq!(once, twice);
    }

    #[test]
    fn min_df_threshold() {
        let cfg = TokenizerConfig::default();
        let two = [rec("a", "topic"), rec("b", "topic model")];
        assert!(build_vocabulary(&two, &cfg, 2).unwrap().id("topic").is_some());
        let one = [rec("a", "topic"), rec("b", "other")];
        assert!(matches!(
            build_vocabulary(&one, &cfg, 2),
            Err(Error::EmptyVocabulary { .. })
        ));
    }

    #[test]
    fn ids_by_descending_df_then_lexicographic() {
        let cfg = TokenizerConfig::default();
        let records = [rec("1", "alpha beta"), rec("2", "alpha")];
        let v = build_vocabulary(&records, &cfg, 1).unwrap();
        assert_eq!(v.id("alpha"), Some(0));
        assert_eq!(v.id("beta"), Some(1));

        let records = [rec("1", "zeta gamma beta")];
        let v = build_vocabulary(&records, &cfg, 1).unwrap();
        assert_eq!(v.terms(), ["beta", "gamma", "zeta"]);
    }

    #[test]
    fn min_df_zero_rejected() {
        let r = build_vocabulary(&[rec("a", "x")], &TokenizerConfig::default(), 0);
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn encode_examples() {
        let cfg = TokenizerConfig::default();
        let vocab = Vocabulary::from_terms(["semantic", "web"]).unwrap();
        let records = [
            rec("sw", "semantic web"),
            rec("dup", "web web"),
            rec("oov", "completely unrelated"),
        ];
        let enc = encode_corpus(&records, &vocab, &cfg);
        assert_eq!(enc.corpus.documents[0].tokens, vec![0, 1]);
        assert_eq!(enc.corpus.documents[1].tokens, vec![1, 1]);
        assert_eq!(enc.excluded, vec!["oov".to_string()]);
        assert_eq!(enc.corpus.total_tokens(), 4);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let cfg = TokenizerConfig::default();
        let records = [
            rec("1", "Ontology matching for linked data"),
            rec("2", "linked data quality and ontology alignment"),
        ];
        let vocab = build_vocabulary(&records, &cfg, 1).unwrap();
        let enc = encode_corpus(&records, &vocab, &cfg);
        for (doc, record) in enc.corpus.documents.iter().zip(&records) {
            assert_eq!(enc.corpus.decode(doc), tokenize(&record.text(), &cfg));
        }
    }

    #[test]
    fn stopword_file_format() {
        let set = parse_stopwords("# comment\nThe\n\n  and  # trailing\n");
        assert_eq!(set.len(), 2);
        assert!(set.contains("the") && set.contains("and"));
    }

    #[test]
    fn missing_fields_default() {
        let r: RawRecord = serde_json::from_str(r#"{"id":"x","title":"t"}"#).unwrap();
        assert_eq!(r.year, 0);
        assert_eq!(r.abstract_text, "");
        let r: RawRecord = serde_json::from_str(r#"{"id":"x","title":"t","year":null}"#).unwrap();
        assert_eq!(r.year, 0);
    }

    #[test]
    fn out_of_range_token_rejected() {
        assert!(Corpus::from_token_ids(&[vec![0, 3]], 3).is_err());
    }
}
