//! Evaluation protocols: hypernym directionality, LE detection (binary and
//! three-way), graded LE and similarity preservation.
//!
//! Out-of-vocabulary pairs are skipped and counted in every protocol.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::{cosine, VectorSpace};
use crate::error::{Error, Result};
use crate::metrics::{graded_le_strength, le_score, spearman};
use crate::objective::DistanceVariant;
use crate::par;

/// A true LE pair; the gold hypernym is on the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionalityPair {
    pub hyponym: String,
    pub hypernym: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectionLabel {
    Le,
    ReversedLe,
    Other,
}

impl DetectionLabel {
    /// Binary view: reversed LE counts as "other".
    pub fn is_le(self) -> bool {
        self == DetectionLabel::Le
    }

    /// Label after swapping the two words.
    pub fn swapped(self) -> Self {
        match self {
            DetectionLabel::Le => DetectionLabel::ReversedLe,
            DetectionLabel::ReversedLe => DetectionLabel::Le,
            DetectionLabel::Other => DetectionLabel::Other,
        }
    }
}

impl FromStr for DetectionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "le" => Ok(DetectionLabel::Le),
            "rle" => Ok(DetectionLabel::ReversedLe),
            "other" => Ok(DetectionLabel::Other),
            _ => Err(Error::Config(format!("unknown label `{s}`"))),
        }
    }
}

impl fmt::Display for DetectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectionLabel::Le => "le",
            DetectionLabel::ReversedLe => "rle",
            DetectionLabel::Other => "other",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionPair {
    pub left: String,
    pub right: String,
    pub label: DetectionLabel,
}

/// A pair with a human rating.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedPair {
    pub left: String,
    pub right: String,
    pub score: f64,
}

/// Rating scale of graded LE data.
pub const GRADED_LE_SCALE: (f64, f64) = (0.0, 6.0);

/// Metric value plus how many pairs were scored and skipped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub value: f64,
    pub evaluated: usize,
    pub oov: usize,
}

/// Settings of the repeated tune/test split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitProtocol {
    pub iterations: usize,
    pub tune_fraction: f64,
    pub seed: u64,
}

impl Default for SplitProtocol {
    fn default() -> Self {
        SplitProtocol {
            iterations: 1000,
            tune_fraction: 0.02,
            seed: 0,
        }
    }
}

fn data_lines<R: BufRead>(source: R, fields: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<String> = trimmed.split_whitespace().map(str::to_string).collect();
        if toks.len() != fields {
            return Err(Error::parse(
                n + 1,
                format!("expected {fields} fields, found {}", toks.len()),
            ));
        }
        out.push((n + 1, toks));
    }
    Ok(out)
}

/// `hypo hyper` per line.
pub fn parse_directionality<R: BufRead>(source: R) -> Result<Vec<DirectionalityPair>> {
    Ok(data_lines(source, 2)?
        .into_iter()
        .map(|(_, mut t)| {
            let hypernym = t.pop().unwrap();
            let hyponym = t.pop().unwrap();
            DirectionalityPair { hyponym, hypernym }
        })
        .collect())
}

/// `w1 w2 label` per line with label in {le, rle, other}.
pub fn parse_detection<R: BufRead>(source: R) -> Result<Vec<DetectionPair>> {
    data_lines(source, 3)?
        .into_iter()
        .map(|(line, mut t)| {
            let label = t
                .pop()
                .unwrap()
                .parse()
                .map_err(|e: Error| Error::parse(line, e.to_string()))?;
            let right = t.pop().unwrap();
            let left = t.pop().unwrap();
            Ok(DetectionPair { left, right, label })
        })
        .collect()
}

/// `w1 w2 score` per line. With `scale`, scores outside it are rejected.
pub fn parse_graded<R: BufRead>(source: R, scale: Option<(f64, f64)>) -> Result<Vec<GradedPair>> {
    data_lines(source, 3)?
        .into_iter()
        .map(|(line, mut t)| {
            let raw = t.pop().unwrap();
            let score: f64 = raw
                .parse()
                .map_err(|_| Error::parse(line, format!("cannot parse score `{raw}`")))?;
            if !score.is_finite() {
                return Err(Error::parse(line, "score is not finite"));
            }
            if let Some((lo, hi)) = scale {
                if !(lo..=hi).contains(&score) {
                    return Err(Error::parse(
                        line,
                        format!("score {score} outside [{lo}, {hi}]"),
                    ));
                }
            }
            let right = t.pop().unwrap();
            let left = t.pop().unwrap();
            Ok(GradedPair { left, right, score })
        })
        .collect()
}

/// Fraction of pairs whose hypernym has the strictly larger norm.
pub fn eval_directionality(
    space: &VectorSpace,
    pairs: &[DirectionalityPair],
) -> Result<EvalReport> {
    let mut correct = 0usize;
    let mut evaluated = 0usize;
    for p in pairs {
        let (Some(hypo), Some(hyper)) = (space.index_of(&p.hyponym), space.index_of(&p.hypernym))
        else {
            continue;
        };
        evaluated += 1;
        if space.norm_at(hyper) > space.norm_at(hypo) {
            correct += 1;
        }
    }
    if evaluated == 0 {
        return Err(Error::Domain(
            "no directionality pair is in the vocabulary".into(),
        ));
    }
    Ok(EvalReport {
        value: correct as f64 / evaluated as f64,
        evaluated,
        oov: pairs.len() - evaluated,
    })
}

/// Threshold maximising accuracy of "predict LE iff score < threshold".
///
/// Candidates are `-inf`, the midpoints between adjacent distinct scores and
/// `+inf`; ties go to the smallest candidate. A single-class tuning set thus
/// gets the sentinel that predicts that class everywhere.
pub fn tune_threshold(scores: &[f64], labels: &[bool]) -> f64 {
    assert_eq!(scores.len(), labels.len(), "one label per score");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut correct: i64 = labels.iter().filter(|&&l| !l).count() as i64;
    let mut best = (correct, f64::NEG_INFINITY);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let mut j = i;
        while j < order.len() && scores[order[j]] == s {
            correct += if labels[order[j]] { 1 } else { -1 };
            j += 1;
        }
        let candidate = if j < order.len() {
            s + (scores[order[j]] - s) / 2.0
        } else {
            f64::INFINITY
        };
        if correct > best.0 {
            best = (correct, candidate);
        }
        i = j;
    }
    best.1
}

fn split(n: usize, proto: &SplitProtocol, iteration: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(proto.seed);
    rng.set_stream(iteration as u64);
    let m = ((proto.tune_fraction * n as f64).ceil() as usize).clamp(1, n - 1);
    let mut is_tune = vec![false; n];
    for i in index::sample(&mut rng, n, m) {
        is_tune[i] = true;
    }
    is_tune
}

fn check_protocol(n: usize, proto: &SplitProtocol) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 evaluable pairs, found {n}"
        )));
    }
    if proto.iterations == 0 {
        return Err(Error::Config("iterations must be positive".into()));
    }
    if !(proto.tune_fraction > 0.0 && proto.tune_fraction < 1.0) {
        return Err(Error::Config("tune fraction must lie in (0, 1)".into()));
    }
    Ok(())
}

/// Mean test accuracy over repeated random tune/test splits of pre-computed
/// scores (lower score = more LE-like).
pub fn detection_accuracy(scores: &[f64], labels: &[bool], proto: &SplitProtocol) -> Result<f64> {
    check_protocol(scores.len(), proto)?;
    let accs = par::map_range(proto.iterations, |it| {
        let is_tune = split(scores.len(), proto, it);
        let (mut ts, mut tl) = (Vec::new(), Vec::new());
        for i in (0..scores.len()).filter(|&i| is_tune[i]) {
            ts.push(scores[i]);
            tl.push(labels[i]);
        }
        let thr = tune_threshold(&ts, &tl);
        let (mut hit, mut total) = (0usize, 0usize);
        for i in (0..scores.len()).filter(|&i| !is_tune[i]) {
            total += 1;
            hit += usize::from((scores[i] < thr) == labels[i]);
        }
        hit as f64 / total as f64
    });
    Ok(accs.iter().sum::<f64>() / accs.len() as f64)
}

/// Three-way prediction from the two directed scores and a threshold.
pub fn bibless_predict(forward: f64, reverse: f64, threshold: f64) -> DetectionLabel {
    if forward.min(reverse) < threshold {
        if forward <= reverse {
            DetectionLabel::Le
        } else {
            DetectionLabel::ReversedLe
        }
    } else {
        DetectionLabel::Other
    }
}

/// Three-way analogue of [`detection_accuracy`] over `(forward, reverse)` score pairs.
pub fn bibless_accuracy(
    scores: &[(f64, f64)],
    gold: &[DetectionLabel],
    proto: &SplitProtocol,
) -> Result<f64> {
    check_protocol(scores.len(), proto)?;
    let det: Vec<f64> = scores.iter().map(|&(f, r)| f.min(r)).collect();
    let binary: Vec<bool> = gold.iter().map(|&g| g != DetectionLabel::Other).collect();
    let accs = par::map_range(proto.iterations, |it| {
        let is_tune = split(scores.len(), proto, it);
        let (mut ts, mut tl) = (Vec::new(), Vec::new());
        for i in (0..scores.len()).filter(|&i| is_tune[i]) {
            ts.push(det[i]);
            tl.push(binary[i]);
        }
        let thr = tune_threshold(&ts, &tl);
        let (mut hit, mut total) = (0usize, 0usize);
        for i in (0..scores.len()).filter(|&i| !is_tune[i]) {
            total += 1;
            hit += usize::from(bibless_predict(scores[i].0, scores[i].1, thr) == gold[i]);
        }
        hit as f64 / total as f64
    });
    Ok(accs.iter().sum::<f64>() / accs.len() as f64)
}

fn in_vocab<'a, T>(
    space: &VectorSpace,
    pairs: &'a [T],
    words: impl Fn(&T) -> (&str, &str),
) -> Vec<&'a T> {
    pairs
        .iter()
        .filter(|p| {
            let (a, b) = words(p);
            space.contains(a) && space.contains(b)
        })
        .collect()
}

/// Binary LE detection (reversed LE counts as "other").
pub fn eval_detection(
    space: &VectorSpace,
    pairs: &[DetectionPair],
    variant: DistanceVariant,
    proto: &SplitProtocol,
) -> Result<EvalReport> {
    let kept = in_vocab(space, pairs, |p| (&p.left, &p.right));
    let scores = kept
        .iter()
        .map(|p| le_score(space, &p.left, &p.right, variant))
        .collect::<Result<Vec<f64>>>()?;
    let labels: Vec<bool> = kept.iter().map(|p| p.label.is_le()).collect();
    Ok(EvalReport {
        value: detection_accuracy(&scores, &labels, proto)?,
        evaluated: kept.len(),
        oov: pairs.len() - kept.len(),
    })
}

/// Three-way detection plus directionality.
pub fn eval_bibless(
    space: &VectorSpace,
    pairs: &[DetectionPair],
    variant: DistanceVariant,
    proto: &SplitProtocol,
) -> Result<EvalReport> {
    let kept = in_vocab(space, pairs, |p| (&p.left, &p.right));
    let scores = kept
        .iter()
        .map(|p| {
            Ok((
                le_score(space, &p.left, &p.right, variant)?,
                le_score(space, &p.right, &p.left, variant)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let gold: Vec<DetectionLabel> = kept.iter().map(|p| p.label).collect();
    Ok(EvalReport {
        value: bibless_accuracy(&scores, &gold, proto)?,
        evaluated: kept.len(),
        oov: pairs.len() - kept.len(),
    })
}

fn rank_eval(
    space: &VectorSpace,
    pairs: &[GradedPair],
    model: impl Fn(&GradedPair) -> Result<f64>,
) -> Result<EvalReport> {
    let kept = in_vocab(space, pairs, |p| (&p.left, &p.right));
    if kept.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 evaluable pairs, found {}",
            kept.len()
        )));
    }
    let predicted = kept
        .iter()
        .map(|p| model(p))
        .collect::<Result<Vec<f64>>>()?;
    let gold: Vec<f64> = kept.iter().map(|p| p.score).collect();
    Ok(EvalReport {
        value: spearman(&predicted, &gold)?,
        evaluated: kept.len(),
        oov: pairs.len() - kept.len(),
    })
}

/// Spearman correlation between graded LE strength and human ratings.
pub fn eval_graded(
    space: &VectorSpace,
    pairs: &[GradedPair],
    variant: DistanceVariant,
) -> Result<EvalReport> {
    rank_eval(space, pairs, |p| {
        graded_le_strength(space, &p.left, &p.right, variant)
    })
}

/// Spearman correlation between cosine similarity and human ratings.
pub fn eval_similarity(space: &VectorSpace, pairs: &[GradedPair]) -> Result<EvalReport> {
    rank_eval(space, pairs, |p| {
        cosine(space.vector(&p.left)?, space.vector(&p.right)?)
    })
}
