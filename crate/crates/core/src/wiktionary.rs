//! Preprocessed Wiktionary entries and the per-candidate dictionary features.
//!
//! Input is JSON Lines with one entry per line:
//!
//! ```text
//! {"word":"duck","hypernyms":["bird"],"synonyms":[],"definition":"a waterfowl"}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diachronic::OrphanEntry;
use crate::embeddings::{cosine, EmbeddingStore};
use crate::taxonomy::{Synset, Taxonomy};
use crate::text::{normalize, subtokens, text_tokens};

#[derive(Debug, Error)]
pub enum WiktionaryError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiktionaryEntry {
    pub word: String,
    #[serde(default)]
    pub hypernyms: Vec<String>,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub definition: String,
}

/// Entry with its lists normalized for matching.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct IndexedEntry {
    entry: WiktionaryEntry,
    hypernyms: BTreeSet<String>,
    synonyms: BTreeSet<String>,
    definition_tokens: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WiktionaryStore {
    entries: BTreeMap<String, IndexedEntry>,
}

/// The four dictionary features for one (word, candidate) pair.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WikiFeatures {
    pub in_hypernyms: f64,
    pub in_synonyms: f64,
    pub in_definition: f64,
    pub avg_cos_to_wiki_hypernyms: f64,
}

impl WikiFeatures {
    pub fn to_array(self) -> [f64; 4] {
        [self.in_hypernyms, self.in_synonyms, self.in_definition, self.avg_cos_to_wiki_hypernyms]
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl WiktionaryStore {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, WiktionaryError> {
        let file = File::open(path.as_ref())?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, WiktionaryError> {
        let mut store = WiktionaryStore::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| match e.kind() {
                io::ErrorKind::InvalidData => {
                    WiktionaryError::Malformed { line: line_no, message: "invalid UTF-8".into() }
                }
                _ => WiktionaryError::Io(e),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: WiktionaryEntry = serde_json::from_str(&line)
                .map_err(|e| WiktionaryError::Malformed { line: line_no, message: e.to_string() })?;
            if normalize(&entry.word).is_empty() {
                return Err(WiktionaryError::Malformed { line: line_no, message: "empty word".into() });
            }
            store.insert(entry);
        }
        Ok(store)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = WiktionaryEntry>) -> Self {
        let mut store = WiktionaryStore::default();
        for entry in entries {
            store.insert(entry);
        }
        store
    }

    /// Adds an entry; a repeated word merges lists (set union) and appends the definition.
    pub fn insert(&mut self, entry: WiktionaryEntry) {
        let key = normalize(&entry.word);
        let slot = self.entries.entry(key).or_insert_with(|| IndexedEntry {
            entry: WiktionaryEntry { word: entry.word.clone(), ..Default::default() },
            ..Default::default()
        });
        for h in entry.hypernyms {
            if slot.hypernyms.insert(normalize(&h)) {
                slot.entry.hypernyms.push(h);
            }
        }
        for s in entry.synonyms {
            if slot.synonyms.insert(normalize(&s)) {
                slot.entry.synonyms.push(s);
            }
        }
        if !entry.definition.is_empty() {
            if !slot.entry.definition.is_empty() {
                slot.entry.definition.push(' ');
            }
            slot.entry.definition.push_str(&entry.definition);
            slot.definition_tokens = text_tokens(&slot.entry.definition);
        }
        slot.hypernyms.remove("");
        slot.synonyms.remove("");
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&WiktionaryEntry> {
        self.entries.get(&normalize(word)).map(|e| &e.entry)
    }

    /// Dictionary features of `candidate` as a hypernym of `word`.
    pub fn features(&self, embeddings: &EmbeddingStore, word: &str, candidate: &Synset) -> WikiFeatures {
        let Some(entry) = self.entries.get(&normalize(word)) else {
            return WikiFeatures::default();
        };
        let lemmas = &candidate.normalized;
        let in_hypernyms = lemmas.iter().any(|l| entry.hypernyms.contains(l));
        let in_synonyms = lemmas.iter().any(|l| entry.synonyms.contains(l));
        let in_definition = lemmas.iter().any(|l| mentions(&entry.definition_tokens, l));

        let mut avg_cos = 0.0;
        if let Some(cand_vec) = embeddings.synset_vector(candidate) {
            let sims: Vec<f64> = entry
                .entry
                .hypernyms
                .iter()
                .filter_map(|h| embeddings.word_vector(h))
                .filter_map(|hv| cosine(&cand_vec, &hv).ok())
                .collect();
            if !sims.is_empty() {
                avg_cos = sims.iter().sum::<f64>() / sims.len() as f64;
            }
        }
        WikiFeatures {
            in_hypernyms: flag(in_hypernyms),
            in_synonyms: flag(in_synonyms),
            in_definition: flag(in_definition),
            avg_cos_to_wiki_hypernyms: avg_cos,
        }
    }

    /// Share of dataset words found in the store, and with a gold hypernym lemma
    /// in each of the three fields.
    pub fn coverage(&self, dataset: &[OrphanEntry], taxonomy: &Taxonomy) -> CoverageReport {
        let mut counts = [0usize; 4];
        for orphan in dataset {
            let Some(entry) = self.entries.get(&normalize(&orphan.word)) else {
                continue;
            };
            counts[0] += 1;
            let gold_lemmas: BTreeSet<&str> = orphan
                .gold
                .iter()
                .filter_map(|id| taxonomy.get(id))
                .flat_map(|s| s.normalized.iter().map(String::as_str))
                .collect();
            if gold_lemmas.iter().any(|l| entry.hypernyms.contains(*l)) {
                counts[1] += 1;
            }
            if gold_lemmas.iter().any(|l| entry.synonyms.contains(*l)) {
                counts[2] += 1;
            }
            if gold_lemmas.iter().any(|l| mentions(&entry.definition_tokens, l)) {
                counts[3] += 1;
            }
        }
        let pct = |c: usize| if dataset.is_empty() { 0.0 } else { 100.0 * c as f64 / dataset.len() as f64 };
        CoverageReport {
            orphans: dataset.len(),
            present: pct(counts[0]),
            hypernyms: pct(counts[1]),
            synonyms: pct(counts[2]),
            definition: pct(counts[3]),
        }
    }
}

/// Whole-token match of a normalized lemma inside tokenized text.
fn mentions(tokens: &[String], lemma: &str) -> bool {
    let needle: Vec<String> = subtokens(lemma).flat_map(text_tokens).collect();
    !needle.is_empty() && tokens.windows(needle.len()).any(|w| w == needle.as_slice())
}

/// Percentages (0–100) of dataset orphans.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub orphans: usize,
    pub present: f64,
    pub hypernyms: f64,
    pub synonyms: f64,
    pub definition: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Pos, SynsetId};

    fn synset(lemmas: &[&str]) -> Synset {
        Synset {
            id: SynsetId::from("cand"),
            pos: Pos::Noun,
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            normalized: lemmas.iter().map(|s| normalize(s)).collect(),
        }
    }

    fn entry(word: &str, hypernyms: &[&str], synonyms: &[&str], definition: &str) -> WiktionaryEntry {
        WiktionaryEntry {
            word: word.into(),
            hypernyms: hypernyms.iter().map(|s| s.to_string()).collect(),
            synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
            definition: definition.into(),
        }
    }

    fn coverage_fixture() -> (Taxonomy, Vec<OrphanEntry>) {
        use crate::taxonomy::SynsetRecord;
        let taxonomy = Taxonomy::from_records([
            SynsetRecord::new("bird", Pos::Noun, &["bird"], &[]),
            SynsetRecord::new("fowl", Pos::Noun, &["wild fowl"], &[]),
        ])
        .unwrap();
        let orphan = |word: &str, gold: &[&str]| OrphanEntry {
            word: word.into(),
            pos: Pos::Noun,
            gold: gold.iter().map(|g| SynsetId::from(*g)).collect(),
        };
        let dataset = vec![
            orphan("duck", &["bird"]),
            orphan("teal", &["bird", "fowl"]),
            orphan("gadwall", &["fowl"]),
            orphan("smew", &["bird"]),
        ];
        (taxonomy, dataset)
    }

    #[test]
    fn coverage_percentages() {
        let (taxonomy, dataset) = coverage_fixture();
        let store = WiktionaryStore::from_entries([
            entry("duck", &["bird"], &[], "a swimming bird"),
            entry("teal", &[], &["wild fowl"], "a small duck"),
            entry("Gadwall", &[], &[], "a grey wild fowl of lakes"),
        ]);
        let report = store.coverage(&dataset, &taxonomy);
        assert_eq!(report.orphans, 4);
        assert_eq!(report.present, 75.0);
        assert_eq!(report.hypernyms, 25.0);
        assert_eq!(report.synonyms, 25.0);
        assert_eq!(report.definition, 50.0);
    }

    #[test]
    fn coverage_of_empty_inputs() {
        let (taxonomy, dataset) = coverage_fixture();
        let empty = WiktionaryStore::default().coverage(&dataset, &taxonomy);
        assert_eq!((empty.present, empty.hypernyms, empty.definition), (0.0, 0.0, 0.0));
        let half = WiktionaryStore::from_entries([entry("duck", &[], &[], "")]).coverage(&dataset[..2], &taxonomy);
        assert_eq!(half.present, 50.0);
        assert_eq!(WiktionaryStore::default().coverage(&[], &taxonomy).present, 0.0);
    }

    #[test]
    fn loads_jsonl() {
        let text = r#"{"word":"duck","hypernyms":["bird"],"synonyms":[],"definition":"a waterfowl"}"#;
        let store = WiktionaryStore::from_reader(text.as_bytes()).unwrap();
        assert_eq!(store.len(), 1);
        assert!(WiktionaryStore::from_reader("".as_bytes()).unwrap().is_empty());
        let err = WiktionaryStore::from_reader("\n{oops\n".as_bytes()).unwrap_err();
        assert!(matches!(err, WiktionaryError::Malformed { line: 2, .. }));
    }

    #[test]
    fn duplicate_words_merge() {
        let text = "{\"word\":\"duck\",\"hypernyms\":[\"bird\"],\"definition\":\"a waterfowl\"}\n\
                    {\"word\":\"Duck\",\"hypernyms\":[\"bird\",\"fowl\"],\"synonyms\":[\"drake\"],\"definition\":\"a cricket score of zero\"}\n";
        let store = WiktionaryStore::from_reader(text.as_bytes()).unwrap();
        assert_eq!(store.len(), 1);
        let e = store.get("duck").unwrap();
        assert_eq!(e.hypernyms, ["bird", "fowl"]);
        assert_eq!(e.synonyms, ["drake"]);
        assert_eq!(e.definition, "a waterfowl a cricket score of zero");
    }

    #[test]
    fn binary_features() {
        let emb = EmbeddingStore::default();
        let store = WiktionaryStore::from_entries([entry(
            "duck",
            &["Bird"],
            &["drake"],
            "A waterfowl of the family Anatidae; see CATEGORY.",
        )]);
        let f = store.features(&emb, "duck", &synset(&["bird"]));
        assert_eq!((f.in_hypernyms, f.in_synonyms, f.in_definition), (1.0, 0.0, 0.0));
        let f = store.features(&emb, "duck", &synset(&["waterfowl"]));
        assert_eq!((f.in_hypernyms, f.in_definition), (0.0, 1.0));
        let f = store.features(&emb, "Duck", &synset(&["drake", "other"]));
        assert_eq!(f.in_synonyms, 1.0);
        // whole tokens only
        assert_eq!(store.features(&emb, "duck", &synset(&["cat"])).in_definition, 0.0);
        assert_eq!(store.features(&emb, "duck", &synset(&["category"])).in_definition, 1.0);
        assert_eq!(store.features(&emb, "duck", &synset(&["the family"])).in_definition, 1.0);
        assert_eq!(store.features(&emb, "duck", &synset(&["family the"])).in_definition, 0.0);
    }

    #[test]
    fn missing_word_gives_zeros() {
        let store = WiktionaryStore::default();
        let f = store.features(&EmbeddingStore::default(), "duck", &synset(&["bird"]));
        assert_eq!(f, WikiFeatures::default());
        assert_eq!(f.to_array(), [0.0; 4]);
    }

    #[test]
    fn average_cosine_skips_unknown_hypernyms() {
        let emb = EmbeddingStore::from_vectors(
            2,
            [("bird", vec![1.0, 0.0]), ("animal", vec![0.0, 1.0]), ("fowl", vec![1.0, 1.0])],
        );
        let store = WiktionaryStore::from_entries([entry("duck", &["animal", "fowl", "unknownword"], &[], "")]);
        let f = store.features(&emb, "duck", &synset(&["bird"]));
        let expected = (0.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;
        assert!((f.avg_cos_to_wiki_hypernyms - expected).abs() < 1e-12);
        // no resolvable hypernym
        let store = WiktionaryStore::from_entries([entry("duck", &["unknownword"], &[], "")]);
        assert_eq!(store.features(&emb, "duck", &synset(&["bird"])).avg_cos_to_wiki_hypernyms, 0.0);
    }
}
