//! Synthetic is-a hierarchies with random starting vectors, for tests,
//! benchmarks and sanity runs without external data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constraints::WordPair;
use crate::embedding::VectorSpace;
use crate::eval::{DetectionLabel, DetectionPair, DirectionalityPair, GradedPair};

/// A rooted tree of concepts. Node 0 is the root; names encode the path
/// from the root (`t`, `t.0`, `t.0.3`, ...).
#[derive(Clone, Debug)]
pub struct Taxonomy {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl Taxonomy {
    /// Balanced tree with `levels` levels (root included) and the given branching.
    pub fn balanced(branching: usize, levels: usize) -> Self {
        let mut tax = Taxonomy {
            names: vec!["t".to_string()],
            parent: vec![None],
            depth: vec![0],
        };
        let mut frontier = vec![0];
        for level in 1..levels {
            let mut next = Vec::new();
            for &p in &frontier {
                for b in 0..branching {
                    let id = tax.names.len();
                    tax.names.push(format!("{}.{b}", tax.names[p]));
                    tax.parent.push(Some(p));
                    tax.depth.push(level);
                    next.push(id);
                }
            }
            frontier = next;
        }
        tax
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Distance from the root.
    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Proper ancestors of `node`, nearest first.
    pub fn ancestors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        self.ancestors(node).contains(&ancestor)
    }

    /// `(child, parent)` edges.
    pub fn direct_edges(&self) -> Vec<WordPair> {
        (0..self.len())
            .filter_map(|n| self.parent[n].map(|p| (self.names[n].clone(), self.names[p].clone())))
            .collect()
    }

    /// `(node, ancestor)` pairs over all ancestors.
    pub fn closure_pairs(&self) -> Vec<WordPair> {
        self.closure_nodes()
            .into_iter()
            .map(|(n, a)| (self.names[n].clone(), self.names[a].clone()))
            .collect()
    }

    fn closure_nodes(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|n| self.ancestors(n).into_iter().map(move |a| (n, a)))
            .collect()
    }

    /// Random unit vectors (isotropic Gaussian, normalised) for every node.
    pub fn random_space(&self, dim: usize, seed: u64) -> VectorSpace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = self.names.iter().map(|name| {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            (name.clone(), v)
        });
        VectorSpace::from_rows(rows.collect::<Vec<_>>(), true)
            .expect("gaussian rows are nonzero")
            .0
    }

    /// Up to `count` distinct random `(x, y)` with `y` not an ancestor of `x`.
    pub fn non_ancestor_pairs(&self, count: usize, seed: u64) -> Vec<WordPair> {
        let mut all: Vec<(usize, usize)> = (0..self.len())
            .flat_map(|x| (0..self.len()).map(move |y| (x, y)))
            .filter(|&(x, y)| x != y && !self.is_ancestor(y, x))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(count);
        all.into_iter()
            .map(|(x, y)| (self.names[x].clone(), self.names[y].clone()))
            .collect()
    }

    pub fn directionality_pairs(&self) -> Vec<DirectionalityPair> {
        self.closure_pairs()
            .into_iter()
            .map(|(hyponym, hypernym)| DirectionalityPair { hyponym, hypernym })
            .collect()
    }

    /// Closure pairs labelled LE plus `negatives` random non-ancestor pairs
    /// labelled by their actual relation (`rle` when reversed, else `other`).
    pub fn detection_pairs(&self, negatives: usize, seed: u64) -> Vec<DetectionPair> {
        let mut out: Vec<DetectionPair> = self
            .closure_pairs()
            .into_iter()
            .map(|(left, right)| DetectionPair {
                left,
                right,
                label: DetectionLabel::Le,
            })
            .collect();
        for (left, right) in self.non_ancestor_pairs(negatives, seed) {
            let (x, y) = (self.index(&left), self.index(&right));
            let label = if self.is_ancestor(x, y) {
                DetectionLabel::ReversedLe
            } else {
                DetectionLabel::Other
            };
            out.push(DetectionPair { left, right, label });
        }
        out
    }

    /// Closure pairs labelled LE, balanced against negatives drawn in equal
    /// shares (`per_kind` each, fewer if a class runs short) from reversed
    /// pairs, co-hyponyms sharing a parent, and unrelated pairs.
    pub fn stratified_detection_pairs(&self, per_kind: usize, seed: u64) -> Vec<DetectionPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = |x: usize, y: usize, label| DetectionPair {
            left: self.names[x].clone(),
            right: self.names[y].clone(),
            label,
        };
        let positives = self.closure_nodes();
        let mut out: Vec<DetectionPair> = positives
            .iter()
            .map(|&(n, a)| pair(n, a, DetectionLabel::Le))
            .collect();
        let mut reversed: Vec<(usize, usize)> = positives.iter().map(|&(n, a)| (a, n)).collect();
        let mut siblings = Vec::new();
        let mut unrelated = Vec::new();
        for x in 0..self.len() {
            for y in 0..self.len() {
                if x == y || self.is_ancestor(y, x) || self.is_ancestor(x, y) {
                    continue;
                }
                if self.parent[x] == self.parent[y] {
                    siblings.push((x, y));
                } else {
                    unrelated.push((x, y));
                }
            }
        }
        for (class, label) in [
            (&mut reversed, DetectionLabel::ReversedLe),
            (&mut siblings, DetectionLabel::Other),
            (&mut unrelated, DetectionLabel::Other),
        ] {
            class.shuffle(&mut rng);
            out.extend(class.iter().take(per_kind).map(|&(x, y)| pair(x, y, label)));
        }
        out
    }

    /// Every ordered pair on an ancestor path: `(node, ancestor)` rated by
    /// their depth difference, and the reversed pair rated 0.
    pub fn graded_pairs(&self) -> Vec<GradedPair> {
        let mut out = Vec::new();
        for (n, a) in self.closure_nodes() {
            let gap = (self.depth[n] - self.depth[a]) as f64;
            out.push(GradedPair {
                left: self.names[n].clone(),
                right: self.names[a].clone(),
                score: gap,
            });
            out.push(GradedPair {
                left: self.names[a].clone(),
                right: self.names[n].clone(),
                score: 0.0,
            });
        }
        out
    }

    fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .expect("node name")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::transitive_closure;

    #[test]
    fn balanced_shape() {
        let t = Taxonomy::balanced(4, 3);
        assert_eq!(t.len(), 21);
        assert_eq!(t.direct_edges().len(), 20);
        assert_eq!(t.closure_pairs().len(), 16 * 2 + 4);
        assert_eq!(t.max_depth(), 2);
        assert_eq!(t.ancestors(5), vec![1, 0]);
    }

    #[test]
    fn closure_agrees_with_ingest() {
        let t = Taxonomy::balanced(3, 4);
        let mut a = transitive_closure(&t.direct_edges()).unwrap();
        let mut b = t.closure_pairs();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn negatives_are_not_ancestors() {
        let t = Taxonomy::balanced(4, 3);
        let closure = t.closure_pairs();
        let neg = t.non_ancestor_pairs(50, 3);
        assert_eq!(neg.len(), 50);
        assert!(neg.iter().all(|p| !closure.contains(p) && p.0 != p.1));
    }

    #[test]
    fn stratified_classes_are_balanced() {
        let t = Taxonomy::balanced(4, 3);
        let pairs = t.stratified_detection_pairs(12, 9);
        assert_eq!(pairs.len(), 72);
        let count = |l| pairs.iter().filter(|p| p.label == l).count();
        assert_eq!(count(DetectionLabel::Le), 36);
        assert_eq!(count(DetectionLabel::ReversedLe), 12);
        assert_eq!(count(DetectionLabel::Other), 24);
        for p in &pairs {
            let (x, y) = (t.index(&p.left), t.index(&p.right));
            assert_eq!(p.label == DetectionLabel::Le, t.is_ancestor(y, x));
            assert_eq!(p.label == DetectionLabel::ReversedLe, t.is_ancestor(x, y));
        }
        let siblings = pairs
            .iter()
            .filter(|p| {
                p.label == DetectionLabel::Other
                    && t.parent[t.index(&p.left)] == t.parent[t.index(&p.right)]
            })
            .count();
        assert_eq!(siblings, 12);
    }

    #[test]
    fn random_space_is_unit() {
        let s = Taxonomy::balanced(2, 3).random_space(8, 1);
        assert_eq!(s.len(), 7);
        assert!((0..7).all(|i| (s.norm_at(i) - 1.0).abs() < 1e-12));
    }
}
