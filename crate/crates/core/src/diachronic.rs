//! Orphan-word datasets from two taxonomy releases, and labeled training pairs
//! from a single release.
//!
//! An orphan is a lemma present in the newer release but not in the older one.
//! Its gold set is the union of direct and second-order hypernyms of its
//! synsets in the newer release. The entry is kept only if every direct
//! hypernym already exists in the older release; second-order hypernyms
//! missing from the older release are dropped from the gold set.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::embeddings::EmbeddingStore;
use crate::ranking::{FeatureVector, Ranker, RankingError, DEFAULT_K};
use crate::taxonomy::{Pos, SynsetId, Taxonomy};
use crate::text::{is_multiword, letter_count, looks_like_named_entity};
use crate::wiktionary::WiktionaryStore;

#[derive(Debug, Error)]
pub enum DiachronicError {
    #[error("negatives_per_positive must be at least 1")]
    NoNegatives,
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrphanEntry {
    /// Surface form from the newer release.
    pub word: String,
    pub pos: Pos,
    pub gold: BTreeSet<SynsetId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DatasetRestrictions {
    /// Minimum number of letters.
    pub min_length: usize,
    pub exclude_named_entities: bool,
    pub exclude_multiword: bool,
}

impl Default for DatasetRestrictions {
    fn default() -> Self {
        DatasetRestrictions { min_length: 4, exclude_named_entities: true, exclude_multiword: false }
    }
}

impl DatasetRestrictions {
    /// Keeps every orphan.
    pub fn unrestricted() -> Self {
        DatasetRestrictions { min_length: 0, exclude_named_entities: false, exclude_multiword: false }
    }

    pub fn admits(&self, word: &str) -> bool {
        letter_count(word) >= self.min_length
            && !(self.exclude_named_entities && looks_like_named_entity(word))
            && !(self.exclude_multiword && is_multiword(word))
    }
}

/// First surface form of `key` among the given synsets.
fn surface_form(taxonomy: &Taxonomy, ids: &BTreeSet<SynsetId>, key: &str) -> Option<String> {
    ids.iter()
        .filter_map(|id| taxonomy.get(id))
        .flat_map(|s| s.lemmas.iter().zip(&s.normalized))
        .find(|(_, norm)| norm.as_str() == key)
        .map(|(surface, _)| surface.clone())
}

/// Gold entry for a lemma new in `new`, or `None` if a direct hypernym is missing from `old`.
fn orphan_gold(old: &Taxonomy, new: &Taxonomy, synsets: &BTreeSet<SynsetId>) -> Option<BTreeSet<SynsetId>> {
    let mut direct = BTreeSet::new();
    for id in synsets {
        direct.extend(new.direct_hypernyms(id).ok()?.iter().cloned());
    }
    if direct.is_empty() || !direct.iter().all(|h| old.contains(h)) {
        return None;
    }
    let mut gold = direct.clone();
    for h in &direct {
        gold.extend(new.direct_hypernyms(h).ok()?.iter().filter(|g| old.contains(g)).cloned());
    }
    Some(gold)
}

/// Orphans of `pos` sorted by word.
pub fn build_dataset(old: &Taxonomy, new: &Taxonomy, pos: Pos, restrictions: &DatasetRestrictions) -> Vec<OrphanEntry> {
    let mut out: Vec<OrphanEntry> =
        unrestricted_orphans(old, new, pos).into_iter().filter(|e| restrictions.admits(&e.word)).collect();
    out.sort_by(|a, b| a.word.cmp(&b.word));
    out
}

fn unrestricted_orphans(old: &Taxonomy, new: &Taxonomy, pos: Pos) -> Vec<OrphanEntry> {
    new.lemmas(pos)
        .into_iter()
        .filter(|key| old.synsets_of_normalized(key, pos).is_empty())
        .filter_map(|key| {
            let synsets = new.synsets_of_normalized(key, pos);
            let gold = orphan_gold(old, new, synsets)?;
            let word = surface_form(new, synsets, key)?;
            Some(OrphanEntry { word, pos, gold })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VersionStatistics {
    pub synsets: BTreeMap<String, usize>,
    pub lemmas: BTreeMap<String, usize>,
}

impl VersionStatistics {
    fn of(t: &Taxonomy) -> Self {
        VersionStatistics {
            synsets: Pos::ALL.iter().map(|&p| (p.name().to_owned(), t.synsets_with_pos(p).count())).collect(),
            lemmas: Pos::ALL.iter().map(|&p| (p.name().to_owned(), t.lemma_count(p))).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DatasetStatistics {
    pub old: VersionStatistics,
    pub new: VersionStatistics,
    /// Lemmas present only in the newer release.
    pub new_lemmas: BTreeMap<String, usize>,
    /// Orphans whose direct hypernyms all exist in the older release.
    pub dataset_size: BTreeMap<String, usize>,
}

impl DatasetStatistics {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "", "synsets.n", "synsets.v", "lemmas.n", "lemmas.v", "new.n", "new.v"
        ));
        let row = |name: &str, v: &VersionStatistics, newn: Option<(usize, usize)>| {
            let (a, b) = newn.map_or(("-".to_string(), "-".to_string()), |(n, v)| (n.to_string(), v.to_string()));
            format!(
                "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
                name, v.synsets["nouns"], v.synsets["verbs"], v.lemmas["nouns"], v.lemmas["verbs"], a, b
            )
        };
        out.push_str(&row("old", &self.old, None));
        out.push_str(&row("new", &self.new, Some((self.new_lemmas["nouns"], self.new_lemmas["verbs"]))));
        out.push_str(&format!("dataset: {} nouns, {} verbs\n", self.dataset_size["nouns"], self.dataset_size["verbs"]));
        out
    }
}

pub fn dataset_statistics(old: &Taxonomy, new: &Taxonomy) -> DatasetStatistics {
    let mut new_lemmas = BTreeMap::new();
    let mut dataset_size = BTreeMap::new();
    for pos in Pos::ALL {
        let count = new.lemmas(pos).into_iter().filter(|key| old.synsets_of_normalized(key, pos).is_empty()).count();
        new_lemmas.insert(pos.name().to_owned(), count);
        dataset_size.insert(pos.name().to_owned(), unrestricted_orphans(old, new, pos).len());
    }
    DatasetStatistics { old: VersionStatistics::of(old), new: VersionStatistics::of(new), new_lemmas, dataset_size }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    pub word: String,
    pub candidate: SynsetId,
    pub label: bool,
    pub features: Option<FeatureVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairOptions {
    pub negatives_per_positive: usize,
    pub seed: u64,
    /// Neighbor count for the candidate pool that supplies negatives.
    pub k: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { negatives_per_positive: 1, seed: 0, k: DEFAULT_K }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingSet {
    pub pairs: Vec<TrainingPair>,
    pub positives: usize,
    pub negatives: usize,
    /// Leaf lemmas skipped because they have no vector.
    pub skipped_oov: usize,
    /// Negatives drawn uniformly because the candidate pool ran out.
    pub fallback_negatives: usize,
}

struct WordPairs {
    pairs: Vec<TrainingPair>,
    positives: usize,
    negatives: usize,
    oov: bool,
    fallback: usize,
}

/// Labeled (word, candidate) pairs from the lemmas of leaf synsets of `pos`.
///
/// Positives are each lemma's direct and second-order hypernyms. Negatives are
/// drawn from the lemma's own extended candidate pool minus every hypernym of
/// every sense of the lemma, topped up with uniformly drawn synsets of `pos`
/// when the pool runs out. When `wiktionary` is given, features are attached.
pub fn build_training_pairs(
    old: &Taxonomy,
    store: &EmbeddingStore,
    pos: Pos,
    options: &PairOptions,
    wiktionary: Option<&WiktionaryStore>,
) -> Result<TrainingSet, DiachronicError> {
    if options.negatives_per_positive == 0 {
        return Err(DiachronicError::NoNegatives);
    }
    let leaves = old.leaf_synsets(pos);
    let mut words: BTreeMap<&str, BTreeSet<&SynsetId>> = BTreeMap::new();
    for id in &leaves {
        let synset = old.get(id).expect("leaf ids come from the taxonomy");
        for norm in &synset.normalized {
            words.entry(norm.as_str()).or_default().insert(&synset.id);
        }
    }
    let universe: Vec<&SynsetId> = old.synsets_with_pos(pos).map(|s| &s.id).collect();
    let ranker = Ranker::new(old, store, pos).with_k(options.k);
    let words: Vec<(&str, BTreeSet<&SynsetId>)> = words.into_iter().collect();

    let per_word: Vec<WordPairs> = words
        .par_iter()
        .enumerate()
        .map(|(index, (key, leaf_ids))| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(index as u64);
            pairs_for_word(old, &ranker, key, leaf_ids, &universe, options, wiktionary, &mut rng)
        })
        .collect::<Result<_, _>>()?;

    let mut set = TrainingSet::default();
    for w in per_word {
        set.positives += w.positives;
        set.negatives += w.negatives;
        set.fallback_negatives += w.fallback;
        set.skipped_oov += usize::from(w.oov);
        set.pairs.extend(w.pairs);
    }
    Ok(set)
}

#[allow(clippy::too_many_arguments)]
fn pairs_for_word(
    old: &Taxonomy,
    ranker: &Ranker<'_>,
    key: &str,
    leaf_ids: &BTreeSet<&SynsetId>,
    universe: &[&SynsetId],
    options: &PairOptions,
    wiktionary: Option<&WiktionaryStore>,
    rng: &mut ChaCha8Rng,
) -> Result<WordPairs, DiachronicError> {
    let mut out = WordPairs { pairs: Vec::new(), positives: 0, negatives: 0, oov: false, fallback: 0 };
    let ids: BTreeSet<SynsetId> = leaf_ids.iter().map(|id| (*id).clone()).collect();
    let word = surface_form(old, &ids, key).unwrap_or_else(|| key.to_owned());

    let mut positives = BTreeSet::new();
    for id in leaf_ids {
        positives.extend(old.gold_hypernyms(id).expect("known id"));
    }
    if positives.is_empty() {
        return Ok(out);
    }
    if ranker.embeddings.word_vector(&word).is_none() {
        out.oov = true;
        return Ok(out);
    }
    // hypernyms of any sense of the word are never negatives
    let mut excluded = positives.clone();
    for id in old.synsets_of_normalized(key, ranker.pos) {
        excluded.extend(old.gold_hypernyms(id).expect("known id"));
    }

    let pool = ranker.candidates_extended(&word)?;
    let mut from_pool: Vec<&SynsetId> = pool.entries().keys().filter(|id| !excluded.contains(*id)).collect();
    from_pool.shuffle(rng);
    let needed = positives.len() * options.negatives_per_positive;
    let mut negatives: Vec<SynsetId> = from_pool.into_iter().take(needed).cloned().collect();

    if negatives.len() < needed && !universe.is_empty() {
        let mut chosen: BTreeSet<SynsetId> = negatives.iter().cloned().collect();
        let mut attempts = 0;
        while negatives.len() < needed && attempts < 64 * needed {
            attempts += 1;
            let pick = universe[rng.gen_range(0..universe.len())];
            if !excluded.contains(pick) && chosen.insert(pick.clone()) {
                negatives.push(pick.clone());
                out.fallback += 1;
            }
        }
        if negatives.len() < needed {
            log::debug!("{word:?}: only {} of {needed} negatives available", negatives.len());
        }
    }

    let features =
        |candidate: &SynsetId| wiktionary.map(|wiki| ranker.assemble_features(&word, candidate, &pool, wiki));
    out.positives = positives.len();
    out.negatives = negatives.len();
    for candidate in positives {
        out.pairs.push(TrainingPair { features: features(&candidate), word: word.clone(), candidate, label: true });
    }
    for candidate in negatives {
        out.pairs.push(TrainingPair { features: features(&candidate), word: word.clone(), candidate, label: false });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::SynsetRecord;

    fn ids(list: &[&str]) -> BTreeSet<SynsetId> {
        list.iter().map(|s| SynsetId::from(*s)).collect()
    }

    fn toy_old() -> Vec<SynsetRecord> {
        vec![
            SynsetRecord::new("animal", Pos::Noun, &["animal"], &[]),
            SynsetRecord::new("bird", Pos::Noun, &["bird"], &["animal"]),
        ]
    }

    fn toy_pair() -> (Taxonomy, Taxonomy) {
        let old = Taxonomy::from_records(toy_old()).unwrap();
        let mut new = toy_old();
        new.push(SynsetRecord::new("duck", Pos::Noun, &["duck"], &["bird"]));
        (old, Taxonomy::from_records(new).unwrap())
    }

    #[test]
    fn toy_dataset() {
        let (old, new) = toy_pair();
        let got = build_dataset(&old, &new, Pos::Noun, &DatasetRestrictions::unrestricted());
        assert_eq!(got, vec![OrphanEntry { word: "duck".into(), pos: Pos::Noun, gold: ids(&["bird", "animal"]) }]);
        assert!(build_dataset(&old, &new, Pos::Verb, &DatasetRestrictions::unrestricted()).is_empty());
        assert!(build_dataset(&old, &old, Pos::Noun, &DatasetRestrictions::unrestricted()).is_empty());
    }

    #[test]
    fn new_hypernym_disqualifies() {
        let old = Taxonomy::from_records(toy_old()).unwrap();
        let mut new = toy_old();
        new.push(SynsetRecord::new("fowl", Pos::Noun, &["fowl"], &["bird"]));
        new.push(SynsetRecord::new("duck", Pos::Noun, &["duck"], &["fowl"]));
        let new = Taxonomy::from_records(new).unwrap();
        let got = build_dataset(&old, &new, Pos::Noun, &DatasetRestrictions::unrestricted());
        // "fowl" qualifies; "duck" hangs under the new synset "fowl"
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].word, "fowl");
    }

    #[test]
    fn second_order_missing_from_old_is_dropped() {
        let old = Taxonomy::from_records([SynsetRecord::new("bird", Pos::Noun, &["bird"], &[])]).unwrap();
        let new = Taxonomy::from_records([
            SynsetRecord::new("animal", Pos::Noun, &["animal"], &[]),
            SynsetRecord::new("bird", Pos::Noun, &["bird"], &["animal"]),
            SynsetRecord::new("duck", Pos::Noun, &["duck"], &["bird"]),
        ])
        .unwrap();
        let got = build_dataset(&old, &new, Pos::Noun, &DatasetRestrictions::unrestricted());
        let duck = got.iter().find(|e| e.word == "duck").unwrap();
        assert_eq!(duck.gold, ids(&["bird"]));
    }

    #[test]
    fn restrictions() {
        let old = Taxonomy::from_records(toy_old()).unwrap();
        let mut new = toy_old();
        new.push(SynsetRecord::new("ooh", Pos::Noun, &["ooh"], &["bird"]));
        new.push(SynsetRecord::new("cind", Pos::Noun, &["Cinderella"], &["bird"]));
        new.push(SynsetRecord::new("gc", Pos::Noun, &["go cheap"], &["bird"]));
        let new = Taxonomy::from_records(new).unwrap();
        let words = |r: DatasetRestrictions| -> Vec<String> {
            build_dataset(&old, &new, Pos::Noun, &r).into_iter().map(|e| e.word).collect()
        };
        let none = DatasetRestrictions::unrestricted();
        assert_eq!(words(none), ["Cinderella", "go cheap", "ooh"]);
        assert_eq!(words(DatasetRestrictions { min_length: 4, ..none }), ["Cinderella", "go cheap"]);
        assert_eq!(words(DatasetRestrictions { exclude_named_entities: true, ..none }), ["go cheap", "ooh"]);
        assert_eq!(words(DatasetRestrictions { exclude_multiword: true, ..none }), ["Cinderella", "ooh"]);
        assert_eq!(words(DatasetRestrictions::default()), ["go cheap"]);
    }

    #[test]
    fn statistics() {
        let (old, new) = toy_pair();
        let stats = dataset_statistics(&old, &new);
        assert_eq!(stats.new_lemmas["nouns"], 1);
        assert_eq!(stats.dataset_size["nouns"], 1);
        assert_eq!(stats.dataset_size["verbs"], 0);
        assert_eq!(stats.old.synsets["nouns"], 2);
        assert_eq!(stats.new.synsets["nouns"], 3);
        assert_eq!(stats.new.lemmas["nouns"], 3);
        let same = dataset_statistics(&old, &old);
        assert!(same.new_lemmas.values().chain(same.dataset_size.values()).all(|&c| c == 0));
        assert!(stats.to_table().contains("dataset: 1 nouns, 0 verbs"));
    }

    fn training_fixture() -> (Taxonomy, EmbeddingStore) {
        let t = Taxonomy::from_records([
            SynsetRecord::new("A", Pos::Noun, &["a"], &[]),
            SynsetRecord::new("B", Pos::Noun, &["b"], &["A"]),
            SynsetRecord::new("C", Pos::Noun, &["c"], &["B"]),
            SynsetRecord::new("Q", Pos::Noun, &["q"], &[]),
            SynsetRecord::new("R", Pos::Noun, &["r"], &["Q"]),
            SynsetRecord::new("S", Pos::Noun, &["s"], &["Q"]),
            SynsetRecord::new("T", Pos::Noun, &["t"], &["S"]),
        ])
        .unwrap();
        let e = EmbeddingStore::from_vectors(
            2,
            [
                ("a", vec![1.0, 0.0]),
                ("b", vec![0.9, 0.2]),
                ("c", vec![0.8, 0.4]),
                ("q", vec![0.0, 1.0]),
                ("r", vec![0.2, 0.9]),
                ("s", vec![0.4, 0.8]),
                ("t", vec![0.6, 0.7]),
            ],
        );
        (t, e)
    }

    #[test]
    fn positives_are_gold_hypernyms_of_leaves() {
        let (t, e) = training_fixture();
        let set = build_training_pairs(&t, &e, Pos::Noun, &PairOptions::default(), None).unwrap();
        let c_pos: BTreeSet<&str> =
            set.pairs.iter().filter(|p| p.word == "c" && p.label).map(|p| p.candidate.as_str()).collect();
        assert_eq!(c_pos, ["A", "B"].into());
        assert_eq!(set.positives, set.negatives);
        assert_eq!(set.pairs.len(), set.positives + set.negatives);
    }

    #[test]
    fn negatives_avoid_gold_and_duplicates() {
        let (t, e) = training_fixture();
        let opts = PairOptions { negatives_per_positive: 2, ..Default::default() };
        let set = build_training_pairs(&t, &e, Pos::Noun, &opts, None).unwrap();
        let mut seen = BTreeSet::new();
        for p in &set.pairs {
            assert!(seen.insert((p.word.clone(), p.candidate.clone())), "duplicate {p:?}");
        }
        for p in set.pairs.iter().filter(|p| !p.label) {
            let key = crate::text::normalize(&p.word);
            for s in t.synsets_of_normalized(&key, Pos::Noun) {
                assert!(!t.gold_hypernyms(s).unwrap().contains(&p.candidate));
            }
        }
    }

    #[test]
    fn seeded_pairs_are_reproducible() {
        let (t, e) = training_fixture();
        let opts = PairOptions { seed: 7, ..Default::default() };
        let a = build_training_pairs(&t, &e, Pos::Noun, &opts, None).unwrap();
        let b = build_training_pairs(&t, &e, Pos::Noun, &opts, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oov_lemmas_are_tallied() {
        let (t, _) = training_fixture();
        let e = EmbeddingStore::from_vectors(2, [("a", vec![1.0, 0.0]), ("b", vec![0.9, 0.2])]);
        let set = build_training_pairs(&t, &e, Pos::Noun, &PairOptions::default(), None).unwrap();
        // leaves: C, R, T
        assert_eq!(set.skipped_oov, 3);
        assert!(set.pairs.is_empty());
    }

    #[test]
    fn zero_negatives_rejected() {
        let (t, e) = training_fixture();
        let opts = PairOptions { negatives_per_positive: 0, ..Default::default() };
        assert!(matches!(build_training_pairs(&t, &e, Pos::Noun, &opts, None), Err(DiachronicError::NoNegatives)));
    }

    #[test]
    fn features_attached_on_request() {
        let (t, e) = training_fixture();
        let set = build_training_pairs(&t, &e, Pos::Noun, &PairOptions::default(), Some(&WiktionaryStore::default()))
            .unwrap();
        assert!(set.pairs.iter().all(|p| p.features.is_some()));
    }
}
