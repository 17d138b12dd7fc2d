//! Readers for the recommender input files.
//!
//! - ratings: CSV with header `user_id,item_id,rating`
//! - app followers: JSON lines `{"app_id": .., "followers": {id: prob}}`
//! - usage: CSV with header `user_id,app_id,block_id`, one launch per row

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::coldstart::AppFollowerDistribution;
use super::location::UsageMatrix;
use super::transfer::{Rating, RatingObservations};
use crate::error::{Error, Result};

/// Ratings with external ids mapped to dense indices (ids sorted ascending).
#[derive(Debug, Clone)]
pub struct RatingsFile {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub observations: RatingObservations,
}

#[derive(Deserialize)]
struct RatingRow {
    user_id: String,
    item_id: String,
    rating: f64,
}

#[derive(Deserialize)]
struct UsageRow {
    user_id: String,
    app_id: String,
    block_id: String,
}

fn csv_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, 1, e))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if found != header {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            message: format!("expected header {}, found {}", header.join(","), found.join(",")),
        });
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| csv_error(path, i + 2, e)))
        .collect()
}

fn csv_error(path: &Path, line: usize, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: e.to_string(),
    }
}

pub fn read_ratings(path: &Path) -> Result<RatingsFile> {
    let rows: Vec<RatingRow> = csv_rows(path, &["user_id", "item_id", "rating"])?;
    let index = |ids: Vec<&String>| -> BTreeMap<String, usize> {
        let mut ids: Vec<String> = ids.into_iter().cloned().collect();
        ids.sort();
        ids.dedup();
        ids.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
    };
    let users = index(rows.iter().map(|r| &r.user_id).collect());
    let items = index(rows.iter().map(|r| &r.item_id).collect());
    let observations = RatingObservations::new(
        rows.iter()
            .map(|r| Rating {
                user: users[&r.user_id],
                item: items[&r.item_id],
                value: r.rating,
            })
            .collect(),
    )?;
    Ok(RatingsFile {
        users: users.into_keys().collect(),
        items: items.into_keys().collect(),
        observations,
    })
}

pub fn read_app_followers(path: &Path) -> Result<Vec<AppFollowerDistribution>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut apps = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let app: AppFollowerDistribution = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        app.validate()?;
        apps.push(app);
    }
    Ok(apps)
}

pub fn read_usage(path: &Path) -> Result<UsageMatrix> {
    let rows: Vec<UsageRow> = csv_rows(path, &["user_id", "app_id", "block_id"])?;
    Ok(UsageMatrix::from_launches(
        rows.into_iter().map(|r| (r.user_id, r.app_id, r.block_id)),
    ))
}
