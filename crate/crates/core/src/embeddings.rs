//! Static word vectors in the word2vec text format, with exact cosine k-NN.
//!
//! Vectors are kept twice: the raw values as stored in the file, and a
//! unit-normalized copy used for neighbor search. Tokens are normalized with
//! the same rule as taxonomy lemmas.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::taxonomy::Synset;
use crate::text::{normalize, subtokens};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("empty vector file")]
    Empty,
    #[error("line 1: malformed header {0:?}, expected \"<count> <dim>\"")]
    Header(String),
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-numeric or non-finite value {value:?}")]
    Value { line: usize, value: String },
    #[error("line {line}: invalid UTF-8")]
    Encoding { line: usize },
    #[error("vector dimensions differ: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Dense vector of embedding-space coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVector(Vec<f64>);

impl WordVector {
    /// Returns `None` if any entry is NaN or infinite.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        values.iter().all(|v| v.is_finite()).then_some(WordVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> WordVector {
        WordVector(self.0.iter().map(|v| v * factor).collect())
    }

    /// Component-wise mean; `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a WordVector>) -> Option<WordVector> {
        let mut iter = vectors.into_iter();
        let mut sum = iter.next()?.0.clone();
        let mut count = 1usize;
        for v in iter {
            for (acc, x) in sum.iter_mut().zip(&v.0) {
                *acc += x;
            }
            count += 1;
        }
        if count > 1 {
            let n = count as f64;
            sum.iter_mut().for_each(|x| *x /= n);
        }
        Some(WordVector(sum))
    }
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &WordVector, v: &WordVector) -> Result<f64, EmbeddingError> {
    if u.dim() != v.dim() {
        return Err(EmbeddingError::Mismatch(u.dim(), v.dim()));
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.0.iter().zip(&v.0) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EmbeddingStore {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    raw: Vec<f32>,
    // unit-length rows; rows of zero vectors stay zero and are never searched
    unit: Vec<f32>,
    nonzero: Vec<bool>,
}

impl EmbeddingStore {
    pub fn load(path: impl AsRef<Path>, limit: Option<usize>) -> Result<Self, EmbeddingError> {
        let file = File::open(path.as_ref())?;
        Self::from_reader(BufReader::new(file), limit)
    }

    /// Parse the text format. `limit` keeps only the first `limit` vector lines.
    pub fn from_reader(mut reader: impl BufRead, limit: Option<usize>) -> Result<Self, EmbeddingError> {
        let mut line = String::new();
        let read_line = |reader: &mut dyn BufRead, line: &mut String, line_no: usize| {
            line.clear();
            reader.read_line(line).map_err(|e| match e.kind() {
                io::ErrorKind::InvalidData => EmbeddingError::Encoding { line: line_no },
                _ => EmbeddingError::Io(e),
            })
        };

        if read_line(&mut reader, &mut line, 1)? == 0 {
            return Err(EmbeddingError::Empty);
        }
        let header: Vec<&str> = line.split_whitespace().collect();
        let (declared, dim) = match header.as_slice() {
            [count, dim] => match (count.parse::<usize>(), dim.parse::<usize>()) {
                (Ok(c), Ok(d)) if d > 0 => (c, d),
                _ => return Err(EmbeddingError::Header(line.trim_end().to_owned())),
            },
            _ => return Err(EmbeddingError::Header(line.trim_end().to_owned())),
        };

        let mut store = EmbeddingStore { dim, ..Default::default() };
        let cap = limit.unwrap_or(declared).min(declared).min(1 << 20);
        store.tokens.reserve(cap);
        store.raw.reserve(cap.saturating_mul(dim).min(1 << 26));

        let mut line_no = 1;
        let mut taken = 0usize;
        let mut row = Vec::with_capacity(dim);
        while limit.is_none_or(|l| taken < l) {
            line_no += 1;
            if read_line(&mut reader, &mut line, line_no)? == 0 {
                break;
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.trim().is_empty() {
                continue;
            }
            let mut fields = trimmed.split(' ').filter(|f| !f.is_empty());
            let token = fields.next().unwrap_or_default();
            row.clear();
            for field in fields {
                let value: f32 =
                    field.parse().map_err(|_| EmbeddingError::Value { line: line_no, value: field.to_owned() })?;
                if !value.is_finite() {
                    return Err(EmbeddingError::Value { line: line_no, value: field.to_owned() });
                }
                row.push(value);
            }
            if row.len() != dim {
                return Err(EmbeddingError::Dimension { line: line_no, expected: dim, found: row.len() });
            }
            taken += 1;
            store.push(normalize(token), &row, line_no);
        }
        if store.tokens.len() != declared && limit.is_none() {
            log::warn!("header declares {declared} vectors, file holds {}", store.tokens.len());
        }
        Ok(store)
    }

    /// Build a store from in-memory vectors (first occurrence of a token wins).
    pub fn from_vectors<S: AsRef<str>>(dim: usize, entries: impl IntoIterator<Item = (S, Vec<f32>)>) -> Self {
        let mut store = EmbeddingStore { dim, ..Default::default() };
        for (i, (token, values)) in entries.into_iter().enumerate() {
            assert_eq!(values.len(), dim, "vector for {:?} has wrong dimension", token.as_ref());
            store.push(normalize(token.as_ref()), &values, i + 1);
        }
        store
    }

    fn push(&mut self, token: String, values: &[f32], line_no: usize) {
        if self.index.contains_key(&token) {
            log::warn!("line {line_no}: duplicate token {token:?} ignored");
            return;
        }
        let norm = values.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.raw.extend_from_slice(values);
        if norm > 0.0 {
            self.unit.extend(values.iter().map(|&v| (f64::from(v) / norm) as f32));
        } else {
            self.unit.extend(std::iter::repeat_n(0.0f32, values.len()));
        }
        self.nonzero.push(norm > 0.0);
    }

    /// Writes the store in the text format it is read from (normalized tokens, raw values).
    pub fn write_text(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{} {}", self.tokens.len(), self.dim)?;
        for (i, token) in self.tokens.iter().enumerate() {
            out.write_all(token.as_bytes())?;
            for v in &self.raw[i * self.dim..(i + 1) * self.dim] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Stored tokens in file order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(&normalize(token))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.raw[i * self.dim..(i + 1) * self.dim]
    }

    fn unit_row(&self, i: usize) -> &[f32] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }

    /// Unit-length copy of a stored token's vector, if it has nonzero norm.
    pub fn unit_vector(&self, token: &str) -> Option<WordVector> {
        let &i = self.index.get(&normalize(token))?;
        self.nonzero[i].then(|| WordVector(self.unit_row(i).iter().map(|&v| f64::from(v)).collect()))
    }

    fn exact(&self, key: &str) -> Option<WordVector> {
        let &i = self.index.get(key)?;
        Some(WordVector(self.row(i).iter().map(|&v| f64::from(v)).collect()))
    }

    /// Vector for a word: the exact normalized token, else the mean of its known
    /// underscore/hyphen parts, else `None`.
    pub fn word_vector(&self, word: &str) -> Option<WordVector> {
        let key = normalize(word);
        if let Some(v) = self.exact(&key) {
            return Some(v);
        }
        let parts: Vec<&str> = subtokens(&key).collect();
        if parts.len() < 2 {
            return None;
        }
        let known: Vec<WordVector> = parts.iter().filter_map(|p| self.exact(p)).collect();
        WordVector::mean(&known)
    }

    /// Mean of the resolvable lemma vectors of a synset.
    pub fn synset_vector(&self, synset: &Synset) -> Option<WordVector> {
        let known: Vec<WordVector> = synset.lemmas.iter().filter_map(|l| self.word_vector(l)).collect();
        WordVector::mean(&known)
    }

    /// The `k` tokens most cosine-similar to `query`, best first, ties broken by
    /// token order. Zero vectors and `exclude`d tokens (normalized) are skipped.
    pub fn nearest_neighbors(&self, query: &WordVector, k: usize, exclude: &HashSet<String>) -> Vec<Neighbor> {
        let qnorm = query.norm();
        if k == 0 || qnorm == 0.0 || query.dim() != self.dim {
            return Vec::new();
        }
        let q: Vec<f64> = query.values().iter().map(|v| v / qnorm).collect();

        // min-heap of the best k seen so far
        let mut heap: BinaryHeap<Candidate<'_>> = BinaryHeap::with_capacity(k + 1);
        for (i, token) in self.tokens.iter().enumerate() {
            if !self.nonzero[i] || exclude.contains(token) {
                continue;
            }
            let sim: f64 = self.unit_row(i).iter().zip(&q).map(|(&a, b)| f64::from(a) * b).sum();
            let cand = Candidate { similarity: sim, token };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(worst) = heap.peek() {
                if cand.cmp(worst) == Ordering::Less {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        heap.into_sorted_vec()
            .into_iter()
            .map(|c| Neighbor { token: c.token.clone(), similarity: c.similarity.clamp(-1.0, 1.0) })
            .collect()
    }
}

// Ordered so that "smaller" means a better neighbor.
struct Candidate<'a> {
    similarity: f64,
    token: &'a String,
}

impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.similarity.total_cmp(&self.similarity).then_with(|| self.token.cmp(other.token))
    }
}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}
