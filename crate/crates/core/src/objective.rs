//! Cost terms of the joint similarity/entailment objective and their
//! analytic (sub)gradients.
//!
//! The objective for one step is
//!
//! ```text
//! C = Att(B_A, T_A) + Rep(B_R, T_R) + Reg(B_A ∪ B_R ∪ B_L) + Att(B_L, T_L) + LE_j(B_L)
//! ```
//!
//! where `Att`/`Rep` are margin hinges over cosine similarities against
//! in-batch negatives, `Reg` is an L2 pull towards the original vectors and
//! `LE_j` sums a norm-based asymmetric distance over hyponym→hypernym pairs.
//! [`AblationMode`] removes either of the two entailment terms.
//!
//! A missing negative (the batch had no eligible candidate) contributes a
//! cosine of zero inside its hinge, so the pair term remains active.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::embedding::{cosine, dot, l2_norm, VectorSpace};
use crate::error::{Error, Result};
use crate::par;

/// Norm-based asymmetric distance between a candidate hyponym and hypernym.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceVariant {
    /// `|x| - |y|`
    D1,
    /// `(|x| - |y|) / (|x| + |y|)`
    D2,
    /// `(|x| - |y|) / max(|x|, |y|)`
    D3,
}

impl DistanceVariant {
    pub const ALL: [DistanceVariant; 3] = [
        DistanceVariant::D1,
        DistanceVariant::D2,
        DistanceVariant::D3,
    ];

    /// Distance as a function of the two norms.
    pub fn of_norms(self, nx: f64, ny: f64) -> f64 {
        match self {
            DistanceVariant::D1 => nx - ny,
            DistanceVariant::D2 => (nx - ny) / (nx + ny),
            DistanceVariant::D3 => (nx - ny) / nx.max(ny),
        }
    }

    /// Partial derivatives with respect to `|x|` and `|y|`.
    ///
    /// D3 has matching one-sided derivatives at `|x| = |y|`, so either branch
    /// is exact there.
    pub fn norm_derivatives(self, nx: f64, ny: f64) -> (f64, f64) {
        match self {
            DistanceVariant::D1 => (1.0, -1.0),
            DistanceVariant::D2 => {
                let s = nx + ny;
                (2.0 * ny / (s * s), -2.0 * nx / (s * s))
            }
            DistanceVariant::D3 => {
                if nx >= ny {
                    (ny / (nx * nx), -1.0 / nx)
                } else {
                    (1.0 / ny, -nx / (ny * ny))
                }
            }
        }
    }
}

impl fmt::Display for DistanceVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceVariant::D1 => "d1",
            DistanceVariant::D2 => "d2",
            DistanceVariant::D3 => "d3",
        })
    }
}

impl FromStr for DistanceVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(DistanceVariant::D1),
            "d2" => Ok(DistanceVariant::D2),
            "d3" => Ok(DistanceVariant::D3),
            _ => Err(Error::Config(format!("unknown distance variant `{s}`"))),
        }
    }
}

/// Which entailment terms take part in the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AblationMode {
    /// Entailment pairs only act as attract pairs; norms are not ordered.
    SymOnly,
    /// Norms are ordered but entailment pairs are not attracted.
    AsymOnly,
    Full,
}

impl AblationMode {
    pub fn uses_le_attract(self) -> bool {
        !matches!(self, AblationMode::AsymOnly)
    }

    pub fn uses_le_distance(self) -> bool {
        !matches!(self, AblationMode::SymOnly)
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationMode::SymOnly => "sym-only",
            AblationMode::AsymOnly => "asym-only",
            AblationMode::Full => "full",
        })
    }
}

impl FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym-only" => Ok(AblationMode::SymOnly),
            "asym-only" => Ok(AblationMode::AsymOnly),
            "full" => Ok(AblationMode::Full),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparameters {
    pub delta_att: f64,
    pub delta_rep: f64,
    pub lambda_reg: f64,
    /// Attract batch size.
    pub k1: usize,
    /// Repel batch size.
    pub k2: usize,
    /// Entailment batch size.
    pub k3: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub variant: DistanceVariant,
    pub mode: AblationMode,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            delta_att: 0.6,
            delta_rep: 0.0,
            lambda_reg: 1e-9,
            k1: 128,
            k2: 128,
            k3: 128,
            epochs: 5,
            learning_rate: 0.05,
            variant: DistanceVariant::D2,
            mode: AblationMode::Full,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !self.delta_att.is_finite() || !self.delta_rep.is_finite() {
            return Err(Error::Config("margins must be finite".into()));
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return Err(Error::Config(
                "lambda_reg must be a finite value >= 0".into(),
            ));
        }
        if self.k1 == 0 || self.k2 == 0 || self.k3 == 0 {
            return Err(Error::Config("batch sizes must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }

    /// One `key=value` line per field, in a fixed order.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        vec![
            ("delta_att", self.delta_att.to_string()),
            ("delta_rep", self.delta_rep.to_string()),
            ("lambda_reg", format!("{:e}", self.lambda_reg)),
            ("k1", self.k1.to_string()),
            ("k2", self.k2.to_string()),
            ("k3", self.k3.to_string()),
            ("epochs", self.epochs.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("variant", self.variant.to_string()),
            ("mode", self.mode.to_string()),
        ]
    }
}

/// A slice of constraint pairs (by word index) with their negative examples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiniBatch {
    pairs: Vec<(usize, usize)>,
    negatives: Vec<(Option<usize>, Option<usize>)>,
}

impl MiniBatch {
    pub fn new(
        pairs: Vec<(usize, usize)>,
        negatives: Vec<(Option<usize>, Option<usize>)>,
    ) -> Result<Self> {
        if pairs.len() != negatives.len() {
            return Err(Error::Domain(format!(
                "{} pairs but {} negative entries",
                pairs.len(),
                negatives.len()
            )));
        }
        for (&(l, r), &(tl, tr)) in pairs.iter().zip(&negatives) {
            if tl.is_some_and(|t| t == l || t == r) || tr.is_some_and(|t| t == l || t == r) {
                return Err(Error::Domain(format!(
                    "negative coincides with a member of pair ({l}, {r})"
                )));
            }
        }
        Ok(MiniBatch { pairs, negatives })
    }

    /// A batch whose negatives are all absent.
    pub fn without_negatives(pairs: Vec<(usize, usize)>) -> Self {
        let negatives = vec![(None, None); pairs.len()];
        MiniBatch { pairs, negatives }
    }

    pub fn empty() -> Self {
        MiniBatch::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn negatives(&self) -> &[(Option<usize>, Option<usize>)] {
        &self.negatives
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The three batches of one optimisation step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepBatches {
    pub attract: MiniBatch,
    pub repel: MiniBatch,
    pub entail: MiniBatch,
}

impl StepBatches {
    /// Distinct words of all pairs in the step, ascending.
    pub fn words(&self) -> Vec<usize> {
        let mut words: Vec<usize> = [&self.attract, &self.repel, &self.entail]
            .iter()
            .flat_map(|b| b.pairs.iter().flat_map(|&(l, r)| [l, r]))
            .collect();
        words.sort_unstable();
        words.dedup();
        words
    }
}

/// Per-term values of the objective for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostBreakdown {
    pub attract: f64,
    pub repel: f64,
    pub reg: f64,
    /// Attract term over the entailment batch.
    pub le_attract: f64,
    /// Asymmetric distance term over the entailment batch.
    pub le: f64,
    pub active_attract: usize,
    pub active_repel: usize,
    pub active_le_attract: usize,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.attract + self.repel + self.reg + self.le_attract + self.le
    }

    pub fn accumulate(&mut self, other: &CostBreakdown) {
        self.attract += other.attract;
        self.repel += other.repel;
        self.reg += other.reg;
        self.le_attract += other.le_attract;
        self.le += other.le;
        self.active_attract += other.active_attract;
        self.active_repel += other.active_repel;
        self.active_le_attract += other.active_le_attract;
    }
}

/// Gradient vectors keyed by word index.
pub type Gradients = BTreeMap<usize, Vec<f64>>;

/// `max(0, x)`
pub fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

/// Asymmetric distance between two vectors.
pub fn asym_distance(variant: DistanceVariant, x: &[f64], y: &[f64]) -> Result<f64> {
    let nx = l2_norm(x);
    let ny = l2_norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::Domain(
            "asymmetric distance of a zero-norm vector".into(),
        ));
    }
    Ok(variant.of_norms(nx, ny))
}

/// Attract term over a batch.
pub fn attract_cost(batch: &MiniBatch, space: &VectorSpace, delta_att: f64) -> Result<f64> {
    Ok(sum_pairs(batch, space, |ctx, i| ctx.attract(i, delta_att, false))?.0)
}

/// Repel term over a batch.
pub fn repel_cost(batch: &MiniBatch, space: &VectorSpace, delta_rep: f64) -> Result<f64> {
    Ok(sum_pairs(batch, space, |ctx, i| ctx.repel(i, delta_rep, false))?.0)
}

/// Entailment term: sum of `D_j(hyponym, hypernym)` over the batch.
/// Negative when hypernym norms already dominate.
pub fn le_cost(batch: &MiniBatch, space: &VectorSpace, variant: DistanceVariant) -> Result<f64> {
    Ok(sum_pairs(batch, space, |ctx, i| ctx.le(i, variant, false))?.0)
}

/// Regulariser over the distinct words in `words`.
pub fn reg_cost(words: &[usize], space: &VectorSpace, lambda_reg: f64) -> f64 {
    let mut distinct = words.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .iter()
        .map(|&w| lambda_reg * displacement(space, w))
        .sum()
}

fn displacement(space: &VectorSpace, w: usize) -> f64 {
    space
        .row(w)
        .iter()
        .zip(space.original_row(w))
        .map(|(x, o)| (x - o) * (x - o))
        .sum::<f64>()
        .sqrt()
}

/// Every term of the objective for one step.
pub fn cost_terms(
    batches: &StepBatches,
    space: &VectorSpace,
    hp: &Hyperparameters,
) -> Result<CostBreakdown> {
    Ok(evaluate_inner(batches, space, hp, false)?.0)
}

pub fn total_cost(batches: &StepBatches, space: &VectorSpace, hp: &Hyperparameters) -> Result<f64> {
    Ok(cost_terms(batches, space, hp)?.total())
}

/// Subgradient of [`total_cost`] for every word appearing in the step,
/// negatives included.
pub fn gradients(
    batches: &StepBatches,
    space: &VectorSpace,
    hp: &Hyperparameters,
) -> Result<Gradients> {
    Ok(evaluate_inner(batches, space, hp, true)?.1)
}

/// Cost breakdown and gradients in one pass.
pub fn evaluate(
    batches: &StepBatches,
    space: &VectorSpace,
    hp: &Hyperparameters,
) -> Result<(CostBreakdown, Gradients)> {
    evaluate_inner(batches, space, hp, true)
}

fn evaluate_inner(
    batches: &StepBatches,
    space: &VectorSpace,
    hp: &Hyperparameters,
    want_grad: bool,
) -> Result<(CostBreakdown, Gradients)> {
    let mut costs = CostBreakdown::default();
    let mut grads = Gradients::new();

    let (c, n, g) = sum_pairs(&batches.attract, space, |ctx, i| {
        ctx.attract(i, hp.delta_att, want_grad)
    })?;
    costs.attract = c;
    costs.active_attract = n;
    merge(&mut grads, g);

    let (c, n, g) = sum_pairs(&batches.repel, space, |ctx, i| {
        ctx.repel(i, hp.delta_rep, want_grad)
    })?;
    costs.repel = c;
    costs.active_repel = n;
    merge(&mut grads, g);

    if hp.mode.uses_le_attract() {
        let (c, n, g) = sum_pairs(&batches.entail, space, |ctx, i| {
            ctx.attract(i, hp.delta_att, want_grad)
        })?;
        costs.le_attract = c;
        costs.active_le_attract = n;
        merge(&mut grads, g);
    }

    if hp.mode.uses_le_distance() {
        let (c, _, g) = sum_pairs(&batches.entail, space, |ctx, i| {
            ctx.le(i, hp.variant, want_grad)
        })?;
        costs.le = c;
        merge(&mut grads, g);
    }

    let d = space.dim();
    for w in batches.words() {
        let dist = displacement(space, w);
        costs.reg += hp.lambda_reg * dist;
        if want_grad {
            let g = grads.entry(w).or_insert_with(|| vec![0.0; d]);
            if dist > 0.0 {
                let scale = hp.lambda_reg / dist;
                for ((gc, x), o) in g.iter_mut().zip(space.row(w)).zip(space.original_row(w)) {
                    *gc += scale * (x - o);
                }
            }
        }
    }

    Ok((costs, grads))
}

fn merge(into: &mut Gradients, contributions: Vec<Contribution>) {
    for (w, g) in contributions {
        match into.get_mut(&w) {
            Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b),
            None => {
                into.insert(w, g);
            }
        }
    }
}

type Contribution = (usize, Vec<f64>);

/// Result of evaluating one pair: cost, number of active hinges, gradient pieces.
#[derive(Default)]
struct PairEval {
    cost: f64,
    active: usize,
    grads: Vec<Contribution>,
}

impl PairEval {
    fn add(&mut self, w: usize, scale: f64, v: &[f64]) {
        let slot = match self.grads.iter().position(|(i, _)| *i == w) {
            Some(p) => p,
            None => {
                self.grads.push((w, vec![0.0; v.len()]));
                self.grads.len() - 1
            }
        };
        for (a, b) in self.grads[slot].1.iter_mut().zip(v) {
            *a += scale * b;
        }
    }
}

/// Cosine with both partial gradients.
struct CosGrad {
    value: f64,
    du: Vec<f64>,
    dv: Vec<f64>,
}

fn cos_grad(u: &[f64], v: &[f64], want_grad: bool) -> Result<CosGrad> {
    let value = cosine(u, v)?;
    if !want_grad {
        return Ok(CosGrad {
            value,
            du: Vec::new(),
            dv: Vec::new(),
        });
    }
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    let c = dot(u, v) / (nu * nv);
    let inv = 1.0 / (nu * nv);
    let du = u
        .iter()
        .zip(v)
        .map(|(a, b)| b * inv - c * a / (nu * nu))
        .collect();
    let dv = u
        .iter()
        .zip(v)
        .map(|(a, b)| a * inv - c * b / (nv * nv))
        .collect();
    Ok(CosGrad { value, du, dv })
}

struct PairCtx<'a> {
    batch: &'a MiniBatch,
    space: &'a VectorSpace,
}

impl PairCtx<'_> {
    fn negative_cos(
        &self,
        anchor: usize,
        neg: Option<usize>,
        want_grad: bool,
    ) -> Result<Option<CosGrad>> {
        neg.map(|t| cos_grad(self.space.row(anchor), self.space.row(t), want_grad))
            .transpose()
    }

    fn attract(&self, i: usize, delta: f64, want_grad: bool) -> Result<PairEval> {
        let (l, r) = self.batch.pairs[i];
        let (tl, tr) = self.batch.negatives[i];
        let pair = cos_grad(self.space.row(l), self.space.row(r), want_grad)?;
        let mut out = PairEval::default();
        for (anchor, partner, neg, neg_cos) in [
            (l, r, tl, self.negative_cos(l, tl, want_grad)?),
            (r, l, tr, self.negative_cos(r, tr, want_grad)?),
        ] {
            let arg = delta + neg_cos.as_ref().map_or(0.0, |c| c.value) - pair.value;
            if arg <= 0.0 {
                continue;
            }
            out.cost += arg;
            out.active += 1;
            if want_grad {
                if let (Some(t), Some(nc)) = (neg, &neg_cos) {
                    out.add(anchor, 1.0, &nc.du);
                    out.add(t, 1.0, &nc.dv);
                }
                let (d_anchor, d_partner) = if anchor == l {
                    (&pair.du, &pair.dv)
                } else {
                    (&pair.dv, &pair.du)
                };
                out.add(anchor, -1.0, d_anchor);
                out.add(partner, -1.0, d_partner);
            }
        }
        Ok(out)
    }

    fn repel(&self, i: usize, delta: f64, want_grad: bool) -> Result<PairEval> {
        let (l, r) = self.batch.pairs[i];
        let (tl, tr) = self.batch.negatives[i];
        let pair = cos_grad(self.space.row(l), self.space.row(r), want_grad)?;
        let mut out = PairEval::default();
        for (anchor, neg, neg_cos) in [
            (l, tl, self.negative_cos(l, tl, want_grad)?),
            (r, tr, self.negative_cos(r, tr, want_grad)?),
        ] {
            let arg = delta + pair.value - neg_cos.as_ref().map_or(0.0, |c| c.value);
            if arg <= 0.0 {
                continue;
            }
            out.cost += arg;
            out.active += 1;
            if want_grad {
                out.add(l, 1.0, &pair.du);
                out.add(r, 1.0, &pair.dv);
                if let (Some(t), Some(nc)) = (neg, &neg_cos) {
                    out.add(anchor, -1.0, &nc.du);
                    out.add(t, -1.0, &nc.dv);
                }
            }
        }
        Ok(out)
    }

    fn le(&self, i: usize, variant: DistanceVariant, want_grad: bool) -> Result<PairEval> {
        let (x, y) = self.batch.pairs[i];
        let (vx, vy) = (self.space.row(x), self.space.row(y));
        let (nx, ny) = (l2_norm(vx), l2_norm(vy));
        if nx == 0.0 || ny == 0.0 {
            return Err(Error::Domain(
                "asymmetric distance of a zero-norm vector".into(),
            ));
        }
        let mut out = PairEval {
            cost: variant.of_norms(nx, ny),
            ..PairEval::default()
        };
        if want_grad {
            let (dx, dy) = variant.norm_derivatives(nx, ny);
            out.add(x, dx / nx, vx);
            out.add(y, dy / ny, vy);
        }
        Ok(out)
    }
}

/// Evaluate every pair of a batch (in parallel when enabled) and reduce the
/// results in pair order.
fn sum_pairs<F>(
    batch: &MiniBatch,
    space: &VectorSpace,
    eval: F,
) -> Result<(f64, usize, Vec<Contribution>)>
where
    F: Fn(&PairCtx<'_>, usize) -> Result<PairEval> + Sync + Send,
{
    let ctx = PairCtx { batch, space };
    let per_pair = par::map_range(batch.len(), |i| eval(&ctx, i));
    let mut cost = 0.0;
    let mut active = 0;
    let mut grads = Vec::new();
    for pe in per_pair {
        let pe = pe?;
        cost += pe.cost;
        active += pe.active;
        grads.extend(pe.grads);
    }
    Ok((cost, active, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: &[&[f64]]) -> VectorSpace {
        VectorSpace::from_rows(
            rows.iter()
                .enumerate()
                .map(|(i, r)| (format!("w{i}"), r.to_vec())),
            false,
        )
        .unwrap()
        .0
    }

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge(-2.0), 0.0);
        assert_eq!(hinge(0.0), 0.0);
        assert_eq!(hinge(0.6), 0.6);
    }

    #[test]
    fn defaults_match_published_setup() {
        let hp = Hyperparameters::default();
        assert_eq!(hp.delta_att, 0.6);
        assert_eq!(hp.delta_rep, 0.0);
        assert_eq!(hp.lambda_reg, 1e-9);
        assert_eq!((hp.k1, hp.k2, hp.k3), (128, 128, 128));
        assert_eq!(hp.epochs, 5);
        assert_eq!(hp.learning_rate, 0.05);
        hp.validate().unwrap();
        assert!(Hyperparameters { k2: 0, ..hp }.validate().is_err());
        assert!(Hyperparameters {
            lambda_reg: -1.0,
            ..hp
        }
        .validate()
        .is_err());
    }

    #[test]
    fn attract_cost_examples() {
        // w0 = w1, negatives orthogonal to both
        let s = space(&[
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]);
        let b = MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap();
        assert_eq!(attract_cost(&b, &s, 0.6).unwrap(), 0.0);

        let s = space(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0],
        ]);
        let b = MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap();
        assert!((attract_cost(&b, &s, 0.6).unwrap() - 1.2).abs() < 1e-15);
        // absent negatives count as zero cosine
        let b = MiniBatch::without_negatives(vec![(0, 1)]);
        assert!((attract_cost(&b, &s, 0.6).unwrap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn repel_cost_examples() {
        let s = space(&[&[1.0, 0.0], &[-1.0, 0.0], &[2.0, 0.0], &[-3.0, 0.0]]);
        // cos(l,r) = -1, cos(l,tl) = 1, cos(r,tr) = 1
        let b = MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap();
        assert_eq!(repel_cost(&b, &s, 0.0).unwrap(), 0.0);

        let s = space(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        let b = MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap();
        assert_eq!(repel_cost(&b, &s, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn reg_cost_examples() {
        let mut s = space(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(reg_cost(&[0, 1], &s, 1e-9), 0.0);
        s.row_mut(1)[0] = 2.0;
        // duplicates count once
        assert!((reg_cost(&[1, 1, 0], &s, 1e-9) - 2e-9).abs() < 1e-24);
    }

    #[test]
    fn distance_examples() {
        let x = [2.0, 0.0];
        let y = [0.0, 1.0];
        assert_eq!(asym_distance(DistanceVariant::D1, &x, &y).unwrap(), 1.0);
        assert!((asym_distance(DistanceVariant::D2, &x, &y).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(asym_distance(DistanceVariant::D3, &x, &y).unwrap(), 0.5);
        for v in DistanceVariant::ALL {
            assert_eq!(asym_distance(v, &x, &x).unwrap(), 0.0);
        }
        assert!(asym_distance(DistanceVariant::D2, &[0.0, 0.0], &y).is_err());
    }

    #[test]
    fn le_cost_examples() {
        let s = space(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 1.0]]);
        let b = MiniBatch::without_negatives(vec![(0, 1)]);
        assert!((le_cost(&b, &s, DistanceVariant::D2).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let b = MiniBatch::without_negatives(vec![(0, 2), (2, 0)]);
        for v in DistanceVariant::ALL {
            assert_eq!(le_cost(&b, &s, v).unwrap(), 0.0);
        }
    }

    #[test]
    fn minibatch_rejects_bad_negatives() {
        assert!(MiniBatch::new(vec![(0, 1)], vec![]).is_err());
        assert!(MiniBatch::new(vec![(0, 1)], vec![(Some(1), None)]).is_err());
        assert!(MiniBatch::new(vec![(0, 1)], vec![(None, Some(1))]).is_err());
        assert!(MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).is_ok());
    }

    #[test]
    fn empty_repel_contributes_nothing() {
        let s = space(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let batches = StepBatches {
            attract: MiniBatch::without_negatives(vec![(0, 1)]),
            ..StepBatches::default()
        };
        let c = cost_terms(&batches, &s, &Hyperparameters::default()).unwrap();
        assert_eq!(c.repel, 0.0);
        assert_eq!(c.active_repel, 0);
    }

    #[test]
    fn satisfied_margins_leave_only_le() {
        // every pair identical in direction; negatives orthogonal
        let s = space(&[
            &[1.0, 0.0, 0.0],
            &[2.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]);
        let batches = StepBatches {
            attract: MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap(),
            repel: MiniBatch::empty(),
            entail: MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap(),
        };
        let hp = Hyperparameters::default();
        let c = cost_terms(&batches, &s, &hp).unwrap();
        assert_eq!(c.attract + c.repel + c.reg + c.le_attract, 0.0);
        assert!((c.total() - (1.0 - 2.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn inactive_sym_only_gradients_vanish() {
        let s = space(&[
            &[1.0, 0.0, 0.0],
            &[2.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]);
        let batches = StepBatches {
            attract: MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap(),
            repel: MiniBatch::empty(),
            entail: MiniBatch::new(vec![(0, 1)], vec![(Some(2), Some(3))]).unwrap(),
        };
        let hp = Hyperparameters {
            mode: AblationMode::SymOnly,
            ..Hyperparameters::default()
        };
        let g = gradients(&batches, &s, &hp).unwrap();
        assert!(g.values().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn d1_gradient_is_unit_direction() {
        let s = space(&[&[3.0, 4.0], &[0.0, 2.0]]);
        let batches = StepBatches {
            entail: MiniBatch::without_negatives(vec![(0, 1)]),
            ..StepBatches::default()
        };
        let hp = Hyperparameters {
            variant: DistanceVariant::D1,
            mode: AblationMode::AsymOnly,
            ..Hyperparameters::default()
        };
        let g = gradients(&batches, &s, &hp).unwrap();
        for (got, want) in g[&0].iter().zip([0.6, 0.8]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(g[&1], vec![0.0, -1.0]);
    }

    #[test]
    fn mode_drops_terms() {
        let s = space(&[&[1.0, 0.2], &[0.1, 2.0], &[0.5, -1.0]]);
        let batches = StepBatches {
            entail: MiniBatch::without_negatives(vec![(0, 1)]),
            ..StepBatches::default()
        };
        let mut hp = Hyperparameters::default();
        let full = cost_terms(&batches, &s, &hp).unwrap();
        assert!(full.le != 0.0 && full.le_attract > 0.0);
        hp.mode = AblationMode::SymOnly;
        let sym = cost_terms(&batches, &s, &hp).unwrap();
        assert_eq!((sym.le, sym.le_attract), (0.0, full.le_attract));
        hp.mode = AblationMode::AsymOnly;
        let asym = cost_terms(&batches, &s, &hp).unwrap();
        assert_eq!((asym.le, asym.le_attract), (full.le, 0.0));
    }

    #[test]
    fn parse_names() {
        assert_eq!(
            "d3".parse::<DistanceVariant>().unwrap(),
            DistanceVariant::D3
        );
        assert_eq!(
            "asym-only".parse::<AblationMode>().unwrap(),
            AblationMode::AsymOnly
        );
        assert!("d4".parse::<DistanceVariant>().is_err());
        assert!("both".parse::<AblationMode>().is_err());
    }
}
