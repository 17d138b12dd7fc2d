//! Per-year topic mass.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Mean topic mixture of the documents of each year in range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicTrends {
    /// year -> mean theta over that year's documents. Years without documents
    /// are absent.
    pub by_year: BTreeMap<i32, Vec<f64>>,
    /// Documents per year.
    pub doc_counts: BTreeMap<i32, usize>,
    /// Ids of documents skipped because they carry no year.
    pub undated: Vec<String>,
}

impl TopicTrends {
    /// Mass of one topic over the years, in year order.
    pub fn series(&self, topic: usize) -> Vec<(i32, f64)> {
        self.by_year.iter().map(|(&y, row)| (y, row[topic])).collect()
    }
}

/// `theta[d]` belongs to `documents[d]`. Documents with year 0 are left out
/// and listed in `undated`; years outside `years` (inclusive) are ignored.
pub fn topic_trends(
    documents: &[Document],
    theta: &[Vec<f64>],
    years: (i32, i32),
) -> Result<TopicTrends> {
    if documents.len() != theta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} documents but {} topic mixtures",
            documents.len(),
            theta.len()
        )));
    }
    let mut sums: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    let mut doc_counts: BTreeMap<i32, usize> = BTreeMap::new();
    let mut undated = Vec::new();
    for (doc, row) in documents.iter().zip(theta) {
        if doc.year == 0 {
            undated.push(doc.id.clone());
            continue;
        }
        if doc.year < years.0 || doc.year > years.1 {
            continue;
        }
        let acc = sums.entry(doc.year).or_insert_with(|| vec![0.0; row.len()]);
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x;
        }
        *doc_counts.entry(doc.year).or_default() += 1;
    }
    if sums.is_empty() {
        return Err(Error::NoDocumentsInRange(years.0, years.1));
    }
    let by_year = sums
        .into_iter()
        .map(|(y, acc)| {
            let n = doc_counts[&y] as f64;
            (y, acc.into_iter().map(|x| x / n).collect())
        })
        .collect();
    Ok(TopicTrends { by_year, doc_counts, undated })
}

/// Smallest and largest nonzero year.
pub fn year_span(documents: &[Document]) -> Option<(i32, i32)> {
    let years = documents.iter().map(|d| d.year).filter(|&y| y != 0);
    Some((years.clone().min()?, years.max()?))
}
