//! Word vector storage, text I/O and the basic vector primitives.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A vocabulary-indexed matrix of word vectors.
///
/// Alongside the vectors being specialised, the space keeps a frozen copy of
/// the vectors as they were loaded. The copy backs the regularisation term
/// and is never handed out mutably.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    current: Vec<f64>,
    original: Vec<f64>,
    dim: usize,
}

/// Bookkeeping produced while building a space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    /// Rows whose word had already been seen; the first occurrence wins.
    pub duplicates: usize,
    /// Whether a `|V| d` header line was skipped.
    pub header_skipped: bool,
}

impl VectorSpace {
    /// Build a space from in-memory rows.
    ///
    /// Applies the same rules as [`load_embeddings`]: duplicates keep their
    /// first row, zero or non-finite rows are rejected, and `normalize` scales
    /// every row to unit length before the original snapshot is taken.
    pub fn from_rows<I, S>(rows: I, normalize: bool) -> Result<(Self, LoadStats)>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut builder = Builder::new(normalize);
        for (i, (word, row)) in rows.into_iter().enumerate() {
            builder.push(i + 1, word.into(), row)?;
        }
        builder.finish()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Like [`index_of`](Self::index_of) but failing with a lookup error.
    pub fn lookup(&self, word: &str) -> Result<usize> {
        self.index_of(word)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, idx: usize) -> &[f64] {
        &self.current[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn row_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.current[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn original_row(&self, idx: usize) -> &[f64] {
        &self.original[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Vector for a word.
    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        Ok(self.row(self.lookup(word)?))
    }

    /// L2 norm of the current vector for `word`.
    pub fn norm(&self, word: &str) -> Result<f64> {
        Ok(l2_norm(self.vector(word)?))
    }

    /// L2 norm of the current row `idx`.
    pub fn norm_at(&self, idx: usize) -> f64 {
        l2_norm(self.row(idx))
    }

    /// Mean L2 norm over all rows.
    pub fn mean_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (0..self.len()).map(|i| self.norm_at(i)).sum::<f64>() / self.len() as f64
    }

    /// True if every current component is finite.
    pub fn is_finite(&self) -> bool {
        self.current.iter().all(|v| v.is_finite())
    }

    /// Flat row-major view of the current matrix.
    pub fn as_slice(&self) -> &[f64] {
        &self.current
    }
}

struct Builder {
    normalize: bool,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    dim: Option<usize>,
    stats: LoadStats,
}

impl Builder {
    fn new(normalize: bool) -> Self {
        Builder {
            normalize,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            dim: None,
            stats: LoadStats::default(),
        }
    }

    fn push(&mut self, line: usize, word: String, mut row: Vec<f64>) -> Result<()> {
        if row.is_empty() {
            return Err(Error::parse(line, format!("`{word}` has no components")));
        }
        match self.dim {
            None => self.dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::parse(
                    line,
                    format!("expected {d} components, found {}", row.len()),
                ))
            }
            Some(_) => {}
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::parse(
                line,
                format!("component {c} of `{word}` is not finite"),
            ));
        }
        let norm = l2_norm(&row);
        if norm == 0.0 {
            return Err(Error::ZeroVector { line, word });
        }
        if self.index.contains_key(&word) {
            self.stats.duplicates += 1;
            return Ok(());
        }
        if self.normalize {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(&row);
        Ok(())
    }

    fn finish(self) -> Result<(VectorSpace, LoadStats)> {
        let dim = self
            .dim
            .ok_or_else(|| Error::Domain("embedding source contains no vectors".into()))?;
        let space = VectorSpace {
            words: self.words,
            index: self.index,
            original: self.data.clone(),
            current: self.data,
            dim,
        };
        Ok((space, self.stats))
    }
}

/// Read a space from the plain-text `word v1 … vd` format.
///
/// Blank lines are ignored. A first line holding exactly two integers is
/// taken as a `|V| d` header and skipped.
pub fn load_embeddings<R: BufRead>(source: R, normalize: bool) -> Result<(VectorSpace, LoadStats)> {
    let mut builder = Builder::new(normalize);
    let mut first = true;
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if first {
            first = false;
            if rest.len() == 1 && word.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok()
            {
                builder.stats.header_skipped = true;
                continue;
            }
        }
        let row = rest
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("cannot parse `{f}` as a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        builder.push(lineno, word.to_string(), row)?;
    }
    builder.finish()
}

/// Write the current vectors in the same text format [`load_embeddings`] reads.
///
/// `precision` fixes the number of fractional digits; `None` writes the
/// shortest representation that parses back to the identical `f64`.
pub fn save_embeddings<W: Write>(
    space: &VectorSpace,
    mut sink: W,
    precision: Option<usize>,
) -> Result<()> {
    let mut line = String::new();
    for (i, word) in space.words().iter().enumerate() {
        line.clear();
        line.push_str(word);
        for v in space.row(i) {
            line.push(' ');
            match precision {
                Some(p) => line.push_str(&format!("{v:.p$}")),
                None => line.push_str(&format!("{v}")),
            }
        }
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()?;
    Ok(())
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn l2_norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Domain("cosine of a zero-norm vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}
