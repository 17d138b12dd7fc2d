//! Short keyword tags for documents from their dominant topics.

use crate::error::Result;
use crate::lda::{top_words, TopicModel};
use crate::recommenders::{ranked_topics, DEFAULT_TOPICS_PER_TEXT};

/// Top words of the document's highest-mass topics, dominant topic first,
/// duplicates dropped, cut to `n` tags.
pub fn generate_tags(model: &TopicModel, theta_row: &[f64], n: usize) -> Result<Vec<String>> {
    let mut tags: Vec<String> = Vec::with_capacity(n);
    for topic in ranked_topics(theta_row, DEFAULT_TOPICS_PER_TEXT) {
        if tags.len() >= n {
            break;
        }
        for (term, _) in top_words(model, topic, n)? {
            if tags.len() >= n {
                break;
            }
            if !tags.contains(&term) {
                tags.push(term);
            }
        }
    }
    Ok(tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;

    fn model() -> TopicModel {
        TopicModel {
            theta: vec![],
            phi: vec![
                vec![0.5, 0.3, 0.2, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.6, 0.3, 0.1],
            ],
            vocabulary: Vocabulary::from_terms(["a", "b", "c", "x", "y", "z"]).unwrap(),
            alpha: 0.1,
        }
    }

    #[test]
    fn dominant_topic_first() {
        let m = model();
        assert_eq!(generate_tags(&m, &[0.3, 0.7], 4).unwrap(), ["x", "y", "z", "a"]);
        assert_eq!(generate_tags(&m, &[0.9, 0.1], 2).unwrap(), ["a", "b"]);
        assert_eq!(generate_tags(&m, &[0.9, 0.1], 6).unwrap(), ["a", "b", "c", "x", "y", "z"]);
        assert!(generate_tags(&m, &[0.9, 0.1], 0).unwrap().is_empty());
    }

    #[test]
    fn duplicates_dropped() {
        let mut m = model();
        m.phi[1] = vec![0.4, 0.0, 0.0, 0.6, 0.0, 0.0];
        let tags = generate_tags(&m, &[0.9, 0.1], 6).unwrap();
        let mut dedup = tags.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), tags.len());
        assert_eq!(&tags[..3], ["a", "b", "c"]);
    }
}
