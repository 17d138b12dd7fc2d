//! Shared generators and distances for the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use itertools::Itertools;
use ldarec::corpus::Corpus;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
pub fn dirichlet(rng: &mut StdRng, concentration: f64, dim: usize) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).unwrap();
    loop {
        let x: Vec<f64> = (0..dim).map(|_| g.sample(rng)).collect();
        let s: f64 = x.iter().sum();
        if s > 0.0 {
            return x.into_iter().map(|v| v / s).collect();
        }
    }
}

pub fn categorical(rng: &mut StdRng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// A corpus drawn from the LDA generative process; returns it with the true
/// topic-word distributions.
pub fn lda_corpus(
    k: usize,
    v: usize,
    d: usize,
    n_d: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> (Corpus, Vec<Vec<f64>>) {
    let mut r = rng(seed);
    let phi: Vec<Vec<f64>> = (0..k).map(|_| dirichlet(&mut r, beta, v)).collect();
    let docs: Vec<Vec<u32>> = (0..d)
        .map(|_| {
            let theta = dirichlet(&mut r, alpha, k);
            (0..n_d)
                .map(|_| {
                    let t = categorical(&mut r, &theta);
                    categorical(&mut r, &phi[t]) as u32
                })
                .collect()
        })
        .collect();
    (Corpus::from_token_ids(&docs, v).unwrap(), phi)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Mean total variation under the best one-to-one matching of learned to
/// true topics (exhaustive over permutations; fine for small K).
pub fn matched_mean_tv(learned: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let k = truth.len();
    (0..k)
        .permutations(k)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| total_variation(&learned[j], &truth[i]))
                .sum::<f64>()
                / k as f64
        })
        .fold(f64::INFINITY, f64::min)
}

const THEMES: &[&[&str]] = &[
    &["ontology", "alignment", "matching", "schema", "mapping", "owl", "axioms", "reasoner"],
    &["sparql", "query", "endpoint", "federated", "optimization", "join", "triple", "store"],
    &["linked", "data", "publishing", "dataset", "vocabulary", "dbpedia", "links", "quality"],
    &["knowledge", "graph", "embedding", "completion", "entity", "relation", "link", "prediction"],
    &["search", "ranking", "retrieval", "relevance", "click", "engine", "index", "queries"],
    &["social", "network", "twitter", "users", "followers", "influence", "community", "diffusion"],
    &["recommendation", "collaborative", "filtering", "preferences", "ratings", "items", "matrix", "factorization"],
    &["crowdsourcing", "workers", "tasks", "annotation", "quality", "incentives", "agreement", "labels"],
    &["privacy", "security", "access", "control", "policy", "trust", "provenance", "attack"],
    &["stream", "reasoning", "events", "temporal", "window", "realtime", "sensor", "processing"],
    &["semantic", "annotation", "text", "extraction", "named", "entities", "disambiguation", "nlp"],
    &["web", "tables", "wikipedia", "extraction", "wrappers", "pages", "crawling", "html"],
];

const FILLER: &[&str] = &["the", "of", "and", "a", "we", "in", "for", "this", "on", "with", "is"];

/// Write a JSON-lines bibliographic corpus of `n` records. Most records fall
/// in 2013-2017 at ISWC or WWW; a few have other venues, other years, no year
/// or no usable text.
pub fn write_bibliographic_corpus(path: &Path, n: usize, seed: u64) {
    let mut r = rng(seed);
    let mut out = String::new();
    for i in 0..n {
        let primary = r.random_range(0..THEMES.len());
        let secondary = r.random_range(0..THEMES.len());
        let mut words = |count: usize| -> String {
            (0..count)
                .map(|_| {
                    let roll: f64 = r.random();
                    if roll < 0.2 {
                        FILLER[r.random_range(0..FILLER.len())]
                    } else if roll < 0.75 {
                        THEMES[primary][r.random_range(0..THEMES[primary].len())]
                    } else {
                        THEMES[secondary][r.random_range(0..THEMES[secondary].len())]
                    }
                })
                .join(" ")
        };
        let (title, abstract_text) = if i % 97 == 13 {
            ("The of and".to_string(), String::new())
        } else {
            (words(8), words(60))
        };
        let venue = match i % 23 {
            0 => "ESWC",
            _ if i % 2 == 0 => "ISWC",
            _ => "WWW",
        };
        let year = match i % 31 {
            0 => None,
            1 => Some(2011),
            _ => Some(2013 + (i % 5) as i32),
        };
        let rec = serde_json::json!({
            "id": format!("p{i:04}"),
            "title": title,
            "abstract": abstract_text,
            "year": year,
            "venue": venue,
        });
        writeln!(out, "{rec}").unwrap();
    }
    std::fs::write(path, out).unwrap();
}
