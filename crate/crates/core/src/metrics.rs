//! Entailment decoding from a specialised space, plus rank correlation.

use crate::embedding::{cosine, VectorSpace};
use crate::error::{Error, Result};
use crate::objective::{asym_distance, DistanceVariant};

/// A scored word pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPair {
    pub left: String,
    pub right: String,
    pub score: f64,
}

/// Cosine distance, `1 - cos(u, v)`.
pub fn dcos(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine(u, v)?)
}

/// Entailment decoding score `dcos(x, y) + D_j(x, y)`.
///
/// Lower means a stronger "x is a y": a small angle and a hyponym norm below
/// the hypernym norm.
pub fn le_score(space: &VectorSpace, x: &str, y: &str, variant: DistanceVariant) -> Result<f64> {
    le_score_vectors(space.vector(x)?, space.vector(y)?, variant)
}

pub fn le_score_vectors(x: &[f64], y: &[f64], variant: DistanceVariant) -> Result<f64> {
    Ok(dcos(x, y)? + asym_distance(variant, x, y)?)
}

/// Graded entailment strength; the negated decoding score, so larger is stronger.
pub fn graded_le_strength(
    space: &VectorSpace,
    x: &str,
    y: &str,
    variant: DistanceVariant,
) -> Result<f64> {
    Ok(-le_score(space, x, y, variant)?)
}

pub fn score_pair(
    space: &VectorSpace,
    x: &str,
    y: &str,
    variant: DistanceVariant,
) -> Result<ScoredPair> {
    Ok(ScoredPair {
        left: x.to_string(),
        right: y.to_string(),
        score: le_score(space, x, y, variant)?,
    })
}

/// Average ranks (1-based); tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with tie-averaged ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Domain(
            "spearman needs at least two observations".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "spearman input contains a non-finite value".into(),
        ));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
        .ok_or_else(|| Error::Domain("zero variance in spearman input".into()))
}
