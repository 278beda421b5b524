//! Wordnet-style taxonomy graph: synsets, hypernym edges and a lemma index.
//!
//! A taxonomy is read from JSON Lines, one synset per line:
//!
//! ```text
//! {"id":"bird.n.01","pos":"n","lemmas":["bird"],"hypernyms":["animal.n.01"]}
//! ```
//!
//! Loading validates the whole graph (unique ids, no dangling or self-loop
//! edges, no cycles) and the result is immutable afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize;

static EMPTY: BTreeSet<SynsetId> = BTreeSet::new();

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unsupported part of speech {pos:?}")]
    UnsupportedPos { line: usize, pos: String },
    #[error("line {line}: duplicate synset id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("synset {from:?} lists undeclared hypernym {to:?}")]
    DanglingEdge { from: String, to: String },
    #[error("synset {0:?} lists itself as a hypernym")]
    SelfLoop(String),
    #[error("hypernym cycle detected through synset {0:?}")]
    Cycle(String),
    #[error("unknown synset id {0:?}")]
    UnknownSynset(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Opaque synset identifier such as `dancer.n.01` or a numeric id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SynsetId(String);

impl SynsetId {
    pub fn new(id: impl Into<String>) -> Self {
        SynsetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SynsetId {
    fn from(s: &str) -> Self {
        SynsetId(s.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "n")]
    Noun,
    #[serde(rename = "v")]
    Verb,
}

impl Pos {
    pub const ALL: [Pos; 2] = [Pos::Noun, Pos::Verb];

    /// Single-letter tag used in the file formats.
    pub fn tag(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pos::Noun => "nouns",
            Pos::Verb => "verbs",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" | "noun" | "nouns" => Ok(Pos::Noun),
            "v" | "verb" | "verbs" => Ok(Pos::Verb),
            other => Err(format!("unsupported part of speech {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    pub pos: Pos,
    /// Surface forms as written in the source, capitalization preserved.
    pub lemmas: Vec<String>,
    /// Normalized forms, parallel to `lemmas`.
    pub normalized: Vec<String>,
}

/// One line of the interchange format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynsetRecord {
    pub id: String,
    pub pos: String,
    pub lemmas: Vec<String>,
    #[serde(default)]
    pub hypernyms: Vec<String>,
}

impl SynsetRecord {
    pub fn new(id: &str, pos: Pos, lemmas: &[&str], hypernyms: &[&str]) -> Self {
        SynsetRecord {
            id: id.to_owned(),
            pos: pos.tag().to_owned(),
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            hypernyms: hypernyms.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Gold hypernyms partitioned into taxonomy-connected components.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldComponents {
    components: Vec<BTreeSet<SynsetId>>,
}

impl GoldComponents {
    /// Components must be non-empty and pairwise disjoint; they are re-sorted by smallest member.
    pub fn from_sets(mut components: Vec<BTreeSet<SynsetId>>) -> Self {
        components.retain(|c| !c.is_empty());
        components.sort_by(|a, b| a.first().cmp(&b.first()));
        GoldComponents { components }
    }

    pub fn components(&self) -> &[BTreeSet<SynsetId>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Index of the component that holds `id`.
    pub fn component_of(&self, id: &SynsetId) -> Option<usize> {
        self.components.iter().position(|c| c.contains(id))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Taxonomy {
    synsets: BTreeMap<SynsetId, Synset>,
    hypernyms: BTreeMap<SynsetId, BTreeSet<SynsetId>>,
    with_hyponyms: HashSet<SynsetId>,
    lemma_index: BTreeMap<Pos, HashMap<String, BTreeSet<SynsetId>>>,
}

impl Taxonomy {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let file = File::open(path.as_ref())?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, TaxonomyError> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| match e.kind() {
                io::ErrorKind::InvalidData => {
                    TaxonomyError::Malformed { line: line_no, message: "invalid UTF-8".into() }
                }
                _ => TaxonomyError::Io(e),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SynsetRecord = serde_json::from_str(&line)
                .map_err(|e| TaxonomyError::Malformed { line: line_no, message: e.to_string() })?;
            records.push((line_no, record));
        }
        Self::build(records)
    }

    /// Build from in-memory records; error line numbers are 1-based record positions.
    pub fn from_records(records: impl IntoIterator<Item = SynsetRecord>) -> Result<Self, TaxonomyError> {
        Self::build(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect())
    }

    fn build(records: Vec<(usize, SynsetRecord)>) -> Result<Self, TaxonomyError> {
        let mut synsets = BTreeMap::new();
        let mut hypernyms = BTreeMap::new();
        for (line, record) in records {
            if record.id.is_empty() {
                return Err(TaxonomyError::Malformed { line, message: "empty synset id".into() });
            }
            let pos: Pos =
                record.pos.parse().map_err(|_| TaxonomyError::UnsupportedPos { line, pos: record.pos.clone() })?;
            if record.lemmas.is_empty() {
                return Err(TaxonomyError::Malformed {
                    line,
                    message: format!("synset {:?} has no lemmas", record.id),
                });
            }
            let mut normalized = Vec::with_capacity(record.lemmas.len());
            for lemma in &record.lemmas {
                let norm = normalize(lemma);
                if norm.is_empty() {
                    return Err(TaxonomyError::Malformed {
                        line,
                        message: format!("synset {:?} has an empty lemma", record.id),
                    });
                }
                normalized.push(norm);
            }
            let id = SynsetId(record.id);
            let parents: BTreeSet<SynsetId> = record.hypernyms.into_iter().map(SynsetId).collect();
            if parents.contains(&id) {
                return Err(TaxonomyError::SelfLoop(id.0));
            }
            if synsets.contains_key(&id) {
                return Err(TaxonomyError::DuplicateId { line, id: id.0 });
            }
            hypernyms.insert(id.clone(), parents);
            synsets.insert(id.clone(), Synset { id, pos, lemmas: record.lemmas, normalized });
        }

        let mut with_hyponyms = HashSet::new();
        for (child, parents) in &hypernyms {
            for parent in parents {
                if !synsets.contains_key(parent) {
                    return Err(TaxonomyError::DanglingEdge { from: child.0.clone(), to: parent.0.clone() });
                }
                with_hyponyms.insert(parent.clone());
            }
        }

        if let Some(id) = find_cycle(&hypernyms) {
            return Err(TaxonomyError::Cycle(id.0.clone()));
        }

        let mut lemma_index: BTreeMap<Pos, HashMap<String, BTreeSet<SynsetId>>> = BTreeMap::new();
        for synset in synsets.values() {
            for norm in &synset.normalized {
                lemma_index.entry(synset.pos).or_default().entry(norm.clone()).or_default().insert(synset.id.clone());
            }
        }

        Ok(Taxonomy { synsets, hypernyms, with_hyponyms, lemma_index })
    }

    /// Write the interchange format, one synset per line in id order.
    pub fn write_jsonl(&self, mut out: impl Write) -> io::Result<()> {
        for synset in self.synsets.values() {
            let record = SynsetRecord {
                id: synset.id.0.clone(),
                pos: synset.pos.tag().to_owned(),
                lemmas: synset.lemmas.clone(),
                hypernyms: self.hypernyms[&synset.id].iter().map(|h| h.0.clone()).collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.hypernyms.values().map(BTreeSet::len).sum()
    }

    pub fn get(&self, id: &SynsetId) -> Option<&Synset> {
        self.synsets.get(id)
    }

    pub fn contains(&self, id: &SynsetId) -> bool {
        self.synsets.contains_key(id)
    }

    /// All synsets in id order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    pub fn synsets_with_pos(&self, pos: Pos) -> impl Iterator<Item = &Synset> {
        self.synsets.values().filter(move |s| s.pos == pos)
    }

    pub fn direct_hypernyms(&self, id: &SynsetId) -> Result<&BTreeSet<SynsetId>, TaxonomyError> {
        self.hypernyms.get(id).ok_or_else(|| TaxonomyError::UnknownSynset(id.0.clone()))
    }

    /// Hypernyms of each direct hypernym of `id`.
    pub fn second_order_hypernyms(&self, id: &SynsetId) -> Result<BTreeSet<SynsetId>, TaxonomyError> {
        let mut out = BTreeSet::new();
        for parent in self.direct_hypernyms(id)? {
            out.extend(self.hypernyms[parent].iter().cloned());
        }
        Ok(out)
    }

    /// Direct and second-order hypernyms together.
    pub fn gold_hypernyms(&self, id: &SynsetId) -> Result<BTreeSet<SynsetId>, TaxonomyError> {
        let mut out = self.second_order_hypernyms(id)?;
        out.extend(self.direct_hypernyms(id)?.iter().cloned());
        Ok(out)
    }

    /// Synsets of `pos` containing `word` after normalization.
    pub fn synsets_of_lemma(&self, word: &str, pos: Pos) -> &BTreeSet<SynsetId> {
        self.synsets_of_normalized(&normalize(word), pos)
    }

    /// Like [`Taxonomy::synsets_of_lemma`] for an already normalized key.
    pub fn synsets_of_normalized(&self, key: &str, pos: Pos) -> &BTreeSet<SynsetId> {
        self.lemma_index.get(&pos).and_then(|index| index.get(key)).unwrap_or(&EMPTY)
    }

    pub fn contains_lemma(&self, word: &str, pos: Pos) -> bool {
        !self.synsets_of_lemma(word, pos).is_empty()
    }

    /// Distinct normalized lemmas of `pos`, sorted.
    pub fn lemmas(&self, pos: Pos) -> Vec<&str> {
        let mut out: Vec<&str> =
            self.lemma_index.get(&pos).map(|index| index.keys().map(String::as_str).collect()).unwrap_or_default();
        out.sort_unstable();
        out
    }

    pub fn lemma_count(&self, pos: Pos) -> usize {
        self.lemma_index.get(&pos).map_or(0, HashMap::len)
    }

    /// True when some synset lists `id` as a hypernym.
    pub fn has_hyponyms(&self, id: &SynsetId) -> bool {
        self.with_hyponyms.contains(id)
    }

    /// Synsets of `pos` with no hyponyms.
    pub fn leaf_synsets(&self, pos: Pos) -> BTreeSet<SynsetId> {
        self.synsets_with_pos(pos).filter(|s| !self.with_hyponyms.contains(&s.id)).map(|s| s.id.clone()).collect()
    }

    /// Partition `gold` into components of the undirected graph induced on it by
    /// direct hypernym edges.
    pub fn connected_components(&self, gold: &BTreeSet<SynsetId>) -> Result<GoldComponents, TaxonomyError> {
        let members: Vec<&SynsetId> = gold.iter().collect();
        let position: HashMap<&SynsetId, usize> = members.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut sets = DisjointSets::new(members.len());
        for (i, id) in members.iter().enumerate() {
            for parent in self.direct_hypernyms(id)? {
                if let Some(&j) = position.get(parent) {
                    sets.union(i, j);
                }
            }
        }
        let mut grouped: BTreeMap<usize, BTreeSet<SynsetId>> = BTreeMap::new();
        for (i, id) in members.iter().enumerate() {
            grouped.entry(sets.find(i)).or_default().insert((*id).clone());
        }
        Ok(GoldComponents::from_sets(grouped.into_values().collect()))
    }
}

/// Returns a synset that lies on a hypernym cycle, if any.
fn find_cycle(edges: &BTreeMap<SynsetId, BTreeSet<SynsetId>>) -> Option<&SynsetId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&SynsetId, Mark> = HashMap::with_capacity(edges.len());
    for root in edges.keys() {
        if marks.contains_key(root) {
            continue;
        }
        marks.insert(root, Mark::Open);
        let mut stack = vec![(root, edges[root].iter())];
        while let Some((node, children)) = stack.last_mut() {
            match children.next() {
                Some(next) => match marks.get(next) {
                    Some(Mark::Open) => return Some(next),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(next, Mark::Open);
                        stack.push((next, edges[next].iter()));
                    }
                },
                None => {
                    marks.insert(*node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}

// union by size, path halving
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}
