//! Synonym, antonym and hyponym→hypernym constraint files.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use crate::embedding::VectorSpace;
use crate::error::{Error, Result};

/// A pair of words. For entailment pairs the order is (hyponym, hypernym).
pub type WordPair = (String, String);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Attract,
    Repel,
    Entail,
}

impl ConstraintKind {
    /// Whether (x, y) and (y, x) denote the same constraint.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, ConstraintKind::Entail)
    }
}

/// Pairs read from one constraint file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedPairs {
    pub pairs: Vec<WordPair>,
    pub duplicates: usize,
    pub self_pairs: usize,
}

fn pair_key(kind: ConstraintKind, a: &str, b: &str) -> (String, String) {
    if kind.is_symmetric() && b < a {
        (b.to_string(), a.to_string())
    } else {
        (a.to_string(), b.to_string())
    }
}

/// Read one pair per line. `#` starts a comment line; blank lines are skipped.
///
/// Self-pairs are dropped and duplicates removed (for attract and repel the
/// pair is unordered, so `a b` and `b a` are the same constraint). Input
/// order is otherwise kept.
pub fn parse_pairs<R: BufRead>(source: R, kind: ConstraintKind) -> Result<ParsedPairs> {
    let mut out = ParsedPairs::default();
    let mut seen = HashSet::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                n + 1,
                format!("expected two tokens, found {}", fields.len()),
            ));
        }
        let (a, b) = (fields[0], fields[1]);
        if a == b {
            out.self_pairs += 1;
            continue;
        }
        if !seen.insert(pair_key(kind, a, b)) {
            out.duplicates += 1;
            continue;
        }
        out.pairs.push((a.to_string(), b.to_string()));
    }
    Ok(out)
}

/// Keep the pairs whose words both carry the same part-of-speech suffix
/// (`word#pos`) drawn from `allowed`.
pub fn filter_pos(pairs: &[WordPair], allowed: &[&str]) -> Vec<WordPair> {
    fn pos(w: &str) -> Option<&str> {
        w.rsplit_once('#').map(|(_, p)| p)
    }
    pairs
        .iter()
        .filter(|(a, b)| match (pos(a), pos(b)) {
            (Some(pa), Some(pb)) => pa == pb && allowed.contains(&pa),
            _ => false,
        })
        .cloned()
        .collect()
}

/// Keep exactly the pairs whose two words are in the space's vocabulary.
/// Returns the kept pairs and the number dropped.
pub fn filter_to_vocab(pairs: &[WordPair], space: &VectorSpace) -> (Vec<WordPair>, usize) {
    let kept: Vec<WordPair> = pairs
        .iter()
        .filter(|(a, b)| space.contains(a) && space.contains(b))
        .cloned()
        .collect();
    let dropped = pairs.len() - kept.len();
    (kept, dropped)
}

/// Expand direct hyponym→hypernym edges to every (x, z) with z reachable from x.
///
/// Sources are emitted in order of first appearance, and each source's
/// ancestors in order of first appearance too, so the output is deterministic.
pub fn transitive_closure(direct: &[WordPair]) -> Result<Vec<WordPair>> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<&str> = Vec::new();
    for (a, b) in direct {
        for w in [a.as_str(), b.as_str()] {
            if !ids.contains_key(w) {
                ids.insert(w, names.len());
                names.push(w);
            }
        }
    }
    let n = names.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in direct {
        if a == b {
            return Err(Error::Cycle(a.clone()));
        }
        let (ia, ib) = (ids[a.as_str()], ids[b.as_str()]);
        if !adj[ia].contains(&ib) {
            adj[ia].push(ib);
        }
    }

    if let Some(node) = find_cycle(&adj) {
        return Err(Error::Cycle(names[node].to_string()));
    }

    let mut out = Vec::new();
    let mut mark = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut reached = Vec::new();
    for src in 0..n {
        reached.clear();
        stack.clear();
        stack.extend(adj[src].iter().copied());
        while let Some(v) = stack.pop() {
            if mark[v] == src {
                continue;
            }
            mark[v] = src;
            reached.push(v);
            stack.extend(adj[v].iter().copied());
        }
        reached.sort_unstable();
        out.extend(
            reached
                .iter()
                .map(|&v| (names[src].to_string(), names[v].to_string())),
        );
    }
    Ok(out)
}

/// Iterative three-colour DFS; returns a node lying on a cycle, if any.
fn find_cycle(adj: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour = vec![Colour::White; adj.len()];
    for root in 0..adj.len() {
        if colour[root] != Colour::White {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = Colour::Grey;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&child) = adj[node].get(*next) {
                *next += 1;
                match colour[child] {
                    Colour::Grey => return Some(child),
                    Colour::White => {
                        colour[child] = Colour::Grey;
                        stack.push((child, 0));
                    }
                    Colour::Black => {}
                }
            } else {
                colour[node] = Colour::Black;
                stack.pop();
            }
        }
    }
    None
}

/// The three constraint streams fed to the optimiser.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub attract: Vec<WordPair>,
    pub repel: Vec<WordPair>,
    pub entail: Vec<WordPair>,
}

impl ConstraintSet {
    /// Validate and assemble a constraint set.
    ///
    /// Fails on self-pairs, on a pair present in both attract and repel, and
    /// on any cycle among the entailment pairs (including `(x,y)`+`(y,x)`).
    pub fn new(
        attract: Vec<WordPair>,
        repel: Vec<WordPair>,
        entail: Vec<WordPair>,
    ) -> Result<Self> {
        for (a, b) in attract.iter().chain(&repel).chain(&entail) {
            if a == b {
                return Err(Error::Domain(format!("self-pair ({a}, {a})")));
            }
        }
        let attract_keys: HashSet<(String, String)> = attract
            .iter()
            .map(|(a, b)| pair_key(ConstraintKind::Attract, a, b))
            .collect();
        if let Some((a, b)) = repel
            .iter()
            .find(|(a, b)| attract_keys.contains(&pair_key(ConstraintKind::Repel, a, b)))
        {
            return Err(Error::Conflict(a.clone(), b.clone()));
        }
        transitive_closure(&entail)?;
        Ok(ConstraintSet {
            attract,
            repel,
            entail,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.attract.is_empty() && self.repel.is_empty() && self.entail.is_empty()
    }

    /// Drop every pair with an out-of-vocabulary word.
    /// Returns the filtered set and the number of pairs dropped per stream.
    pub fn filter_to_vocab(&self, space: &VectorSpace) -> (ConstraintSet, [usize; 3]) {
        let (attract, da) = filter_to_vocab(&self.attract, space);
        let (repel, dr) = filter_to_vocab(&self.repel, space);
        let (entail, de) = filter_to_vocab(&self.entail, space);
        (
            ConstraintSet {
                attract,
                repel,
                entail,
            },
            [da, dr, de],
        )
    }
}
