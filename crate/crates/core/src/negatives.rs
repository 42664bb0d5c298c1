//! In-batch pseudo-negative selection.
//!
//! The candidate pool for a batch is the set of distinct words on either side
//! of its pairs. For each pair member the negative is the pool word with the
//! highest (attract) or lowest (repel) cosine to it, excluding the pair
//! itself. Ties go to the lowest vocabulary index.

use crate::embedding::{dot, l2_norm, VectorSpace};
use crate::objective::MiniBatch;
use crate::par;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pick {
    Closest,
    Furthest,
}

/// Unit vectors for the pool, in ascending index order.
struct Pool {
    words: Vec<usize>,
    units: Vec<Vec<f64>>,
}

impl Pool {
    fn new(pairs: &[(usize, usize)], space: &VectorSpace) -> Self {
        let mut words: Vec<usize> = pairs.iter().flat_map(|&(l, r)| [l, r]).collect();
        words.sort_unstable();
        words.dedup();
        let units = words
            .iter()
            .map(|&w| {
                let row = space.row(w);
                let n = l2_norm(row);
                row.iter().map(|v| v / n).collect()
            })
            .collect();
        Pool { words, units }
    }

    fn unit(&self, w: usize) -> &[f64] {
        let pos = self.words.binary_search(&w).expect("anchor is in the pool");
        &self.units[pos]
    }

    fn select(&self, anchor: usize, partner: usize, pick: Pick) -> Option<usize> {
        let a = self.unit(anchor);
        let mut best: Option<(usize, f64)> = None;
        for (&w, u) in self.words.iter().zip(&self.units) {
            if w == anchor || w == partner {
                continue;
            }
            let c = dot(a, u);
            let better = match best {
                None => true,
                Some((_, bc)) => match pick {
                    Pick::Closest => c > bc,
                    Pick::Furthest => c < bc,
                },
            };
            if better {
                best = Some((w, c));
            }
        }
        best.map(|(w, _)| w)
    }
}

fn sample(
    pairs: &[(usize, usize)],
    space: &VectorSpace,
    pick: Pick,
) -> Vec<(Option<usize>, Option<usize>)> {
    let pool = Pool::new(pairs, space);
    par::map(pairs, |&(l, r)| {
        (pool.select(l, r, pick), pool.select(r, l, pick))
    })
}

/// Closest in-batch word to each member of every attract pair.
pub fn sample_attract_negatives(
    pairs: &[(usize, usize)],
    space: &VectorSpace,
) -> Vec<(Option<usize>, Option<usize>)> {
    sample(pairs, space, Pick::Closest)
}

/// Furthest in-batch word from each member of every repel pair.
pub fn sample_repel_negatives(
    pairs: &[(usize, usize)],
    space: &VectorSpace,
) -> Vec<(Option<usize>, Option<usize>)> {
    sample(pairs, space, Pick::Furthest)
}

/// Negatives for the attract term over entailment pairs; same rule as
/// [`sample_attract_negatives`], pooled over the entailment batch alone.
pub fn sample_le_negatives(
    pairs: &[(usize, usize)],
    space: &VectorSpace,
) -> Vec<(Option<usize>, Option<usize>)> {
    sample(pairs, space, Pick::Closest)
}

pub fn attract_batch(pairs: Vec<(usize, usize)>, space: &VectorSpace) -> MiniBatch {
    let negatives = sample_attract_negatives(&pairs, space);
    MiniBatch::new(pairs, negatives).expect("sampled negatives exclude the pair")
}

pub fn repel_batch(pairs: Vec<(usize, usize)>, space: &VectorSpace) -> MiniBatch {
    let negatives = sample_repel_negatives(&pairs, space);
    MiniBatch::new(pairs, negatives).expect("sampled negatives exclude the pair")
}

pub fn le_batch(pairs: Vec<(usize, usize)>, space: &VectorSpace) -> MiniBatch {
    let negatives = sample_le_negatives(&pairs, space);
    MiniBatch::new(pairs, negatives).expect("sampled negatives exclude the pair")
}
