//! Location-block similarity from app-usage patterns, and region growth
//! coefficients.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Binary launch indicators `c(user, app, block)` and the derived per-block
/// influence counts `I[app, block]` (number of distinct users who launched
/// `app` in `block`).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageMatrix {
    launches: BTreeSet<(String, String, String)>,
    apps: Vec<String>,
    blocks: Vec<String>,
    /// `blocks x apps`
    influence: Vec<Vec<u32>>,
}

impl UsageMatrix {
    /// Build from `(user, app, block)` launch events; repeats collapse to one.
    pub fn from_launches<I, S>(events: I) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let launches: BTreeSet<(String, String, String)> = events
            .into_iter()
            .map(|(u, a, b)| (u.into(), a.into(), b.into()))
            .collect();
        let apps: Vec<String> = launches.iter().map(|l| l.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let blocks: Vec<String> = launches.iter().map(|l| l.2.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let app_ix: BTreeMap<&str, usize> = apps.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let block_ix: BTreeMap<&str, usize> = blocks.iter().enumerate().map(|(i, b)| (b.as_str(), i)).collect();
        let mut influence = vec![vec![0u32; apps.len()]; blocks.len()];
        for (_, app, block) in &launches {
            influence[block_ix[block.as_str()]][app_ix[app.as_str()]] += 1;
        }
        UsageMatrix {
            launches,
            apps,
            blocks,
            influence,
        }
    }

    pub fn apps(&self) -> &[String] {
        &self.apps
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn launched(&self, user: &str, app: &str, block: &str) -> bool {
        self.launches
            .contains(&(user.to_owned(), app.to_owned(), block.to_owned()))
    }

    fn block_index(&self, block: &str) -> Result<usize> {
        self.blocks
            .binary_search_by(|b| b.as_str().cmp(block))
            .map_err(|_| Error::UnknownBlock(block.to_owned()))
    }

    /// Influence counts of one block, indexed like [`apps`](Self::apps).
    pub fn block_counts(&self, block: &str) -> Result<&[u32]> {
        Ok(&self.influence[self.block_index(block)?])
    }

    pub fn influence(&self, app: &str, block: &str) -> Result<u32> {
        let counts = self.block_counts(block)?;
        Ok(self
            .apps
            .binary_search_by(|a| a.as_str().cmp(app))
            .map(|i| counts[i])
            .unwrap_or(0))
    }
}

/// Pearson correlation of two equal-length vectors. `None` when either has
/// zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of integer vectors, with the co-moments computed
/// exactly: `(n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2))`. Only the
/// final square root and division round, so exactly (anti-)proportional
/// deviations give exactly +-1.
pub fn pearson_counts(x: &[u32], y: &[u32]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson_counts: length mismatch");
    let n = x.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (a as i128, b as i128);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let cov = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx == 0 || vy == 0 {
        return None;
    }
    let denom = match vx.checked_mul(vy) {
        Some(p) => (p as f64).sqrt(),
        None => (vx as f64).sqrt() * (vy as f64).sqrt(),
    };
    Some((cov as f64 / denom).clamp(-1.0, 1.0))
}

/// Pearson similarity of two blocks' app-influence vectors.
pub fn pearson_block_similarity(usage: &UsageMatrix, l_x: &str, l_y: &str) -> Result<f64> {
    let x = usage.block_counts(l_x)?;
    let y = usage.block_counts(l_y)?;
    let degenerate = |b: &str| Error::ZeroVariance(b.to_owned());
    if pearson_counts(x, x).is_none() {
        return Err(degenerate(l_x));
    }
    if l_x == l_y {
        return Ok(1.0);
    }
    pearson_counts(x, y).ok_or_else(|| degenerate(l_y))
}

/// Starting coefficient of a block: its mean app influence.
pub fn initial_coefficient(usage: &UsageMatrix, block: &str) -> Result<f64> {
    let counts = usage.block_counts(block)?;
    Ok(counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64)
}

pub fn initial_coefficients(usage: &UsageMatrix) -> BTreeMap<String, f64> {
    usage
        .blocks()
        .iter()
        .map(|b| (b.clone(), initial_coefficient(usage, b).unwrap_or(0.0)))
        .collect()
}

/// `r_lz = (1 / s_L) * sum_{l_x in L} sim(l_x, l_z) * r_lx`.
pub fn block_coefficient(
    usage: &UsageMatrix,
    region: &[String],
    candidate: &str,
    coefficients: &BTreeMap<String, f64>,
) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut total = 0.0;
    for block in region {
        let r = coefficients
            .get(block)
            .ok_or_else(|| Error::UnknownBlock(block.clone()))?;
        total += pearson_block_similarity(usage, block, candidate)? * r;
    }
    Ok(total / region.len() as f64)
}

/// A block joins the region only when its coefficient strictly exceeds the threshold.
pub fn region_membership(r_lz: f64, r_th: f64) -> bool {
    r_lz > r_th
}
