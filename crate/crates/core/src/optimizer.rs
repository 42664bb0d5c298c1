//! Mini-batch AdaGrad training over the attract, repel and entailment streams.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{ConstraintSet, WordPair};
use crate::embedding::VectorSpace;
use crate::error::{Error, Result};
use crate::negatives::{attract_batch, le_batch, repel_batch};
use crate::objective::{
    evaluate, CostBreakdown, Gradients, Hyperparameters, MiniBatch, StepBatches,
};

/// Diagonal AdaGrad state over the whole vocabulary.
#[derive(Clone, Debug)]
pub struct AdaGradState {
    accum: Vec<f64>,
    dim: usize,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdaGradState {
    pub fn new(space: &VectorSpace, learning_rate: f64) -> Self {
        AdaGradState {
            accum: vec![0.0; space.len() * space.dim()],
            dim: space.dim(),
            epsilon: 1e-8,
            learning_rate,
        }
    }

    /// Accumulated squared gradients for word `w`.
    pub fn accum(&self, w: usize) -> &[f64] {
        &self.accum[w * self.dim..(w + 1) * self.dim]
    }
}

/// Apply one AdaGrad step: `G += g²; x -= lr · g / (√G + ε)` per coordinate.
///
/// All gradients are checked before anything is written, so a non-finite
/// gradient leaves both the state and the space untouched.
pub fn adagrad_update(
    state: &mut AdaGradState,
    grads: &Gradients,
    space: &mut VectorSpace,
) -> Result<()> {
    for (&w, g) in grads {
        if let Some((coord, &value)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                word: space.word(w).to_string(),
                coord,
                value,
            });
        }
    }
    let (lr, eps, d) = (state.learning_rate, state.epsilon, state.dim);
    for (&w, g) in grads {
        let acc = &mut state.accum[w * d..(w + 1) * d];
        let row = space.row_mut(w);
        for ((x, a), &gc) in row.iter_mut().zip(acc.iter_mut()).zip(g) {
            *a += gc * gc;
            if gc != 0.0 {
                *x -= lr * gc / (a.sqrt() + eps);
            }
        }
    }
    Ok(())
}

/// Summary of one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub steps: usize,
    /// Term totals summed over the epoch's steps, measured before each update.
    pub costs: CostBreakdown,
    pub mean_norm: f64,
    /// Largest `| |x| - 1 |` over the vocabulary after the epoch.
    pub max_norm_deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainingLog {
    pub const HEADER: &'static str =
        "epoch\tsteps\tattract\trepel\treg\tle_attract\tle\ttotal\tactive_attract\tactive_repel\tactive_le_attract\tmean_norm\tmax_norm_dev";

    /// Tab-separated, one line per epoch after a header line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for e in &self.epochs {
            let c = &e.costs;
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}\t{:.3e}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{:.6}\t{:.6}",
                e.epoch,
                e.steps,
                c.attract,
                c.repel,
                c.reg,
                c.le_attract,
                c.le,
                c.total(),
                c.active_attract,
                c.active_repel,
                c.active_le_attract,
                e.mean_norm,
                e.max_norm_deviation
            )?;
        }
        Ok(())
    }
}

fn to_indices(pairs: &[WordPair], space: &VectorSpace) -> Result<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|(a, b)| Ok((space.lookup(a)?, space.lookup(b)?)))
        .collect()
}

fn chunk(stream: &[(usize, usize)], size: usize, step: usize) -> Vec<(usize, usize)> {
    stream
        .chunks(size)
        .nth(step)
        .map(<[_]>::to_vec)
        .unwrap_or_default()
}

/// Specialise `space` against `constraints`.
///
/// Each epoch shuffles the three streams independently (attract, repel,
/// entailment, in that order, from one seeded generator), cuts them into
/// batches of `k1`, `k2` and `k3` and walks them in lock-step. Streams that
/// run out contribute empty batches. Every step samples negatives against the
/// current vectors, evaluates the objective and applies one AdaGrad update.
pub fn run_specialization(
    mut space: VectorSpace,
    constraints: &ConstraintSet,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<(VectorSpace, TrainingLog)> {
    hp.validate()?;
    if constraints.is_empty() {
        return Err(Error::Config("no constraints in any stream".into()));
    }
    let mut attract = to_indices(&constraints.attract, &space)?;
    let mut repel = to_indices(&constraints.repel, &space)?;
    let mut entail = to_indices(&constraints.entail, &space)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AdaGradState::new(&space, hp.learning_rate);
    let mut log = TrainingLog::default();

    let steps = [
        attract.len().div_ceil(hp.k1),
        repel.len().div_ceil(hp.k2),
        entail.len().div_ceil(hp.k3),
    ]
    .into_iter()
    .max()
    .unwrap_or(0);

    for epoch in 0..hp.epochs {
        attract.shuffle(&mut rng);
        repel.shuffle(&mut rng);
        entail.shuffle(&mut rng);

        let mut totals = CostBreakdown::default();
        for step in 0..steps {
            let le_pairs = chunk(&entail, hp.k3, step);
            let batches = StepBatches {
                attract: attract_batch(chunk(&attract, hp.k1, step), &space),
                repel: repel_batch(chunk(&repel, hp.k2, step), &space),
                entail: if hp.mode.uses_le_attract() {
                    le_batch(le_pairs, &space)
                } else {
                    MiniBatch::without_negatives(le_pairs)
                },
            };
            let (costs, grads) = evaluate(&batches, &space, hp)?;
            totals.accumulate(&costs);
            adagrad_update(&mut state, &grads, &mut space)?;
        }

        if !space.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite vector after epoch {}",
                epoch + 1
            )));
        }
        let max_norm_deviation = (0..space.len())
            .map(|i| (space.norm_at(i) - 1.0).abs())
            .fold(0.0, f64::max);
        log.epochs.push(EpochStats {
            epoch: epoch + 1,
            steps,
            costs: totals,
            mean_norm: space.mean_norm(),
            max_norm_deviation,
        });
    }
    Ok((space, log))
}
