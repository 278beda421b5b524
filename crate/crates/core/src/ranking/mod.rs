//! Hypernym candidate generation and ranking for orphan words.
//!
//! Candidates come from the orphan's nearest neighbors in embedding space:
//! each neighbor is looked up in the taxonomy, and the hypernyms of its
//! synsets become candidates. Three rankings are available:
//!
//! * baseline: candidates in the order of the neighbor that produced them;
//! * weighted similarity: the extended pool (plus second-order hypernyms) is
//!   scored with `n * cos(orphan, candidate)`, where `n` counts how often the
//!   candidate was generated;
//! * model: a logistic regression over Wiktionary features and the
//!   weighted-similarity score.

mod logreg;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::embeddings::{cosine, EmbeddingStore, WordVector};
use crate::taxonomy::{Pos, SynsetId, Taxonomy, TaxonomyError};
use crate::text::normalize;
use crate::wiktionary::WiktionaryStore;

pub use logreg::{train_lr, FeatureVector, LrModel, ModelError, Objective, TrainError, TrainOptions, TrainReport};

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Error)]
pub enum RankingError {
    #[error("no vector for {0:?}")]
    OutOfVocabulary(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

/// A ranked hypernym hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCandidate {
    pub synset: SynsetId,
    pub score: f64,
    /// Multiplicity in the merged candidate list.
    pub occurrences: usize,
    /// Cosine between the orphan vector and the synset vector (0 if unresolvable).
    pub similarity: f64,
    /// Neighbor tokens that generated the candidate, in neighbor rank order.
    pub provenance: Vec<String>,
    pub features: Option<FeatureVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolEntry {
    pub occurrences: usize,
    /// Rank of the nearest neighbor that produced this candidate first.
    pub first_rank: usize,
    /// True when reached as a direct hypernym of a neighbor's synset.
    pub first_order: bool,
    pub provenance: Vec<String>,
}

impl PoolEntry {
    fn record(&mut self, rank: usize, sources: &[String]) {
        self.occurrences += 1;
        self.first_rank = self.first_rank.min(rank);
        for s in sources {
            if !self.provenance.contains(s) {
                self.provenance.push(s.clone());
            }
        }
    }
}

/// Merged candidate multiset for one orphan word.
#[derive(Clone, Debug)]
pub struct CandidatePool {
    orphan: WordVector,
    entries: BTreeMap<SynsetId, PoolEntry>,
}

impl CandidatePool {
    pub fn orphan_vector(&self) -> &WordVector {
        &self.orphan
    }

    pub fn entries(&self) -> &BTreeMap<SynsetId, PoolEntry> {
        &self.entries
    }

    pub fn get(&self, id: &SynsetId) -> Option<&PoolEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &SynsetId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Occurrence count, 0 for synsets outside the pool.
    pub fn occurrences(&self, id: &SynsetId) -> usize {
        self.entries.get(id).map_or(0, |e| e.occurrences)
    }
}

/// Candidate generation and ranking over shared, read-only resources.
#[derive(Clone, Copy)]
pub struct Ranker<'a> {
    pub taxonomy: &'a Taxonomy,
    pub embeddings: &'a EmbeddingStore,
    pub pos: Pos,
    pub k: usize,
}

impl<'a> Ranker<'a> {
    pub fn new(taxonomy: &'a Taxonomy, embeddings: &'a EmbeddingStore, pos: Pos) -> Self {
        Ranker { taxonomy, embeddings, pos, k: DEFAULT_K }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn orphan_vector(&self, word: &str) -> Result<WordVector, RankingError> {
        self.embeddings.word_vector(word).ok_or_else(|| RankingError::OutOfVocabulary(word.to_owned()))
    }

    /// Cosine between a vector and a synset's averaged lemma vector; 0 when unresolvable.
    pub fn synset_similarity(&self, v: &WordVector, id: &SynsetId) -> f64 {
        self.taxonomy
            .get(id)
            .and_then(|s| self.embeddings.synset_vector(s))
            .and_then(|sv| cosine(v, &sv).ok())
            .unwrap_or(0.0)
    }

    /// The hypernym itself plus every synset of the ranker's pos sharing a lemma with it.
    fn associated(&self, hypernym: &SynsetId) -> BTreeSet<&'a SynsetId> {
        let taxonomy = self.taxonomy;
        let mut out = BTreeSet::new();
        if let Some(synset) = taxonomy.get(hypernym) {
            out.insert(&synset.id);
            for lemma in &synset.normalized {
                out.extend(taxonomy.synsets_of_normalized(lemma, self.pos));
            }
        }
        out
    }

    /// First-order candidates with multiplicities, keyed by synset.
    fn first_order(&self, word: &str) -> Result<CandidatePool, RankingError> {
        let orphan = self.orphan_vector(word)?;
        let exclude: HashSet<String> = [normalize(word)].into();
        let neighbors = self.embeddings.nearest_neighbors(&orphan, self.k, &exclude);
        let mut entries: BTreeMap<SynsetId, PoolEntry> = BTreeMap::new();
        for (rank, neighbor) in neighbors.iter().enumerate() {
            let source = std::slice::from_ref(&neighbor.token);
            for synset in self.taxonomy.synsets_of_normalized(&neighbor.token, self.pos) {
                for hypernym in self.taxonomy.direct_hypernyms(synset)? {
                    for cand in self.associated(hypernym) {
                        entries
                            .entry(cand.clone())
                            .or_insert_with(|| PoolEntry {
                                occurrences: 0,
                                first_rank: rank,
                                first_order: true,
                                provenance: Vec::new(),
                            })
                            .record(rank, source);
                    }
                }
            }
        }
        Ok(CandidatePool { orphan, entries })
    }

    /// Candidates ordered by the rank of the neighbor that produced them, then by
    /// similarity to the orphan; at most `k`.
    pub fn candidates_baseline(&self, word: &str) -> Result<Vec<ScoredCandidate>, RankingError> {
        let pool = self.first_order(word)?;
        let mut ranked: Vec<ScoredCandidate> = pool
            .entries
            .iter()
            .map(|(id, e)| {
                let similarity = self.synset_similarity(&pool.orphan, id);
                ScoredCandidate {
                    synset: id.clone(),
                    score: similarity,
                    occurrences: e.occurrences,
                    similarity,
                    provenance: e.provenance.clone(),
                    features: None,
                }
            })
            .collect();
        ranked.sort_by(|a, b| {
            let ra = pool.entries[&a.synset].first_rank;
            let rb = pool.entries[&b.synset].first_rank;
            ra.cmp(&rb).then_with(|| b.similarity.total_cmp(&a.similarity)).then_with(|| a.synset.cmp(&b.synset))
        });
        ranked.truncate(self.k);
        if ranked.is_empty() {
            log::debug!("no in-taxonomy candidates for {word:?}");
        }
        Ok(ranked)
    }

    /// First-order pool extended with the hypernyms of every distinct first-order candidate.
    pub fn candidates_extended(&self, word: &str) -> Result<CandidatePool, RankingError> {
        let mut pool = self.first_order(word)?;
        let first: Vec<(SynsetId, usize, Vec<String>)> =
            pool.entries.iter().map(|(id, e)| (id.clone(), e.first_rank, e.provenance.clone())).collect();
        for (id, rank, provenance) in first {
            for parent in self.taxonomy.direct_hypernyms(&id)? {
                pool.entries
                    .entry(parent.clone())
                    .or_insert_with(|| PoolEntry {
                        occurrences: 0,
                        first_rank: rank,
                        first_order: false,
                        provenance: Vec::new(),
                    })
                    .record(rank, &provenance);
            }
        }
        Ok(pool)
    }

    /// Scores every pool member with `n * cos(orphan, synset)` and keeps the top `k`.
    pub fn rank_by_score(&self, pool: &CandidatePool) -> Vec<ScoredCandidate> {
        let mut ranked: Vec<ScoredCandidate> = pool
            .entries
            .iter()
            .map(|(id, e)| {
                let similarity = self.synset_similarity(&pool.orphan, id);
                ScoredCandidate {
                    synset: id.clone(),
                    score: e.occurrences as f64 * similarity,
                    occurrences: e.occurrences,
                    similarity,
                    provenance: e.provenance.clone(),
                    features: None,
                }
            })
            .collect();
        sort_by_score(&mut ranked);
        ranked.truncate(self.k);
        ranked
    }

    /// Feature vector `(in_hypernyms, in_synonyms, in_definition, avg_cos, n * sim)`.
    ///
    /// A candidate outside the pool has `n = 0`, so its last feature is 0.
    pub fn assemble_features(
        &self,
        word: &str,
        candidate: &SynsetId,
        pool: &CandidatePool,
        wiktionary: &WiktionaryStore,
    ) -> FeatureVector {
        let wiki = match self.taxonomy.get(candidate) {
            Some(synset) => wiktionary.features(self.embeddings, word, synset).to_array(),
            None => [0.0; 4],
        };
        let score = pool.occurrences(candidate) as f64 * self.synset_similarity(&pool.orphan, candidate);
        FeatureVector([wiki[0], wiki[1], wiki[2], wiki[3], score])
    }

    /// Ranks the extended pool by model probability; ties by synset id.
    pub fn rank_with_model(
        &self,
        word: &str,
        model: &LrModel,
        wiktionary: &WiktionaryStore,
    ) -> Result<Vec<ScoredCandidate>, RankingError> {
        let pool = self.candidates_extended(word)?;
        let mut scored: Vec<(f64, ScoredCandidate)> = pool
            .entries
            .iter()
            .map(|(id, e)| {
                let features = self.assemble_features(word, id, &pool, wiktionary);
                let logit = model.logit(&features);
                let candidate = ScoredCandidate {
                    synset: id.clone(),
                    score: model.predict(&features),
                    occurrences: e.occurrences,
                    similarity: self.synset_similarity(&pool.orphan, id),
                    provenance: e.provenance.clone(),
                    features: Some(features),
                };
                (logit, candidate)
            })
            .collect();
        // the logit keeps its order where the probability saturates
        scored.sort_by(|(la, a), (lb, b)| lb.total_cmp(la).then_with(|| a.synset.cmp(&b.synset)));
        Ok(scored.into_iter().take(self.k).map(|(_, c)| c).collect())
    }
}

fn sort_by_score(ranked: &mut [ScoredCandidate]) {
    ranked.sort_by(|a, b| match b.score.total_cmp(&a.score) {
        Ordering::Equal => a.synset.cmp(&b.synset),
        other => other,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::SynsetRecord;
    use crate::wiktionary::WiktionaryEntry;

    // S1 -> H1, S2 -> {H1, H2}, H1 -> G; neighbors of "orphan" are w1 then w2.
    fn toy() -> (Taxonomy, EmbeddingStore) {
        let taxonomy = Taxonomy::from_records([
            SynsetRecord::new("G", Pos::Noun, &["g"], &[]),
            SynsetRecord::new("H1", Pos::Noun, &["h1"], &["G"]),
            SynsetRecord::new("H2", Pos::Noun, &["h2"], &[]),
            SynsetRecord::new("S1", Pos::Noun, &["w1"], &["H1"]),
            SynsetRecord::new("S2", Pos::Noun, &["w2"], &["H1", "H2"]),
            SynsetRecord::new("X", Pos::Noun, &["x"], &[]),
        ])
        .unwrap();
        let embeddings = EmbeddingStore::from_vectors(
            3,
            [
                ("orphan", vec![1.0, 0.0, 0.0]),
                ("w1", vec![1.0, 0.1, 0.0]),
                ("w2", vec![1.0, 0.3, 0.0]),
                ("h1", vec![0.6, 0.6, 0.3]),
                ("h2", vec![0.5, 1.0, 0.0]),
                ("g", vec![0.2, 0.2, 1.0]),
                ("x", vec![-1.0, 0.0, 0.0]),
            ],
        );
        (taxonomy, embeddings)
    }

    fn ids(cands: &[ScoredCandidate]) -> Vec<&str> {
        cands.iter().map(|c| c.synset.as_str()).collect()
    }

    #[test]
    fn baseline_toy_trace() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(2);
        let got = r.candidates_baseline("orphan").unwrap();
        assert_eq!(ids(&got), ["H1", "H2"]);
        assert_eq!(got[0].provenance, ["w1", "w2"]);
        assert_eq!(got[1].provenance, ["w2"]);
    }

    #[test]
    fn baseline_k1_uses_nearest_neighbor_only() {
        let (t, e) = toy();
        let got = Ranker::new(&t, &e, Pos::Noun).with_k(1).candidates_baseline("orphan").unwrap();
        assert_eq!(ids(&got), ["H1"]);
    }

    #[test]
    fn baseline_without_taxonomy_neighbors_is_empty() {
        let (t, _) = toy();
        let e = EmbeddingStore::from_vectors(2, [("orphan", vec![1.0, 0.0]), ("stranger", vec![1.0, 0.1])]);
        assert!(Ranker::new(&t, &e, Pos::Noun).candidates_baseline("orphan").unwrap().is_empty());
    }

    #[test]
    fn oov_orphan_is_an_error() {
        let (t, e) = toy();
        assert!(matches!(
            Ranker::new(&t, &e, Pos::Noun).candidates_baseline("nothing"),
            Err(RankingError::OutOfVocabulary(_))
        ));
    }

    #[test]
    fn extended_pool_counts() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(2);
        let pool = r.candidates_extended("orphan").unwrap();
        assert_eq!(pool.occurrences(&"H1".into()), 2);
        assert_eq!(pool.occurrences(&"H2".into()), 1);
        assert_eq!(pool.occurrences(&"G".into()), 1);
        assert!(!pool.get(&"G".into()).unwrap().first_order);
        assert_eq!(pool.len(), 3);
    }

    #[test]
    fn lemma_sharing_broadens_candidates() {
        let t = Taxonomy::from_records([
            SynsetRecord::new("bird.n.01", Pos::Noun, &["bird"], &[]),
            SynsetRecord::new("bird.n.02", Pos::Noun, &["bird", "fowl"], &[]),
            SynsetRecord::new("robin.n.01", Pos::Noun, &["robin"], &["bird.n.01"]),
        ])
        .unwrap();
        let e = EmbeddingStore::from_vectors(2, [("sparrow", vec![1.0, 0.0]), ("robin", vec![1.0, 0.1])]);
        let got = Ranker::new(&t, &e, Pos::Noun).candidates_baseline("sparrow").unwrap();
        assert_eq!(ids(&got), ["bird.n.01", "bird.n.02"]);
    }

    #[test]
    fn weighted_score_ranking() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(10);
        let pool = r.candidates_extended("orphan").unwrap();
        let ranked = r.rank_by_score(&pool);
        for c in &ranked {
            let expected = c.occurrences as f64 * r.synset_similarity(pool.orphan_vector(), &c.synset);
            assert!((c.score - expected).abs() < 1e-12);
        }
        // H1: n=2, high similarity, beats the rest
        assert_eq!(ranked[0].synset.as_str(), "H1");
        assert!(ranked.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn frequency_beats_similarity_when_product_is_larger() {
        // (n=1, sim=0.9) vs (n=2, sim=0.5)
        let mut v = [
            ScoredCandidate {
                synset: "a".into(),
                score: 0.9,
                occurrences: 1,
                similarity: 0.9,
                provenance: vec![],
                features: None,
            },
            ScoredCandidate {
                synset: "b".into(),
                score: 1.0,
                occurrences: 2,
                similarity: 0.5,
                provenance: vec![],
                features: None,
            },
        ];
        sort_by_score(&mut v);
        assert_eq!(v[0].synset.as_str(), "b");
    }

    #[test]
    fn features_with_empty_store() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(2);
        let pool = r.candidates_extended("orphan").unwrap();
        let h1: SynsetId = "H1".into();
        let f = r.assemble_features("orphan", &h1, &pool, &WiktionaryStore::default());
        let score = 2.0 * r.synset_similarity(pool.orphan_vector(), &h1);
        assert_eq!(f.0, [0.0, 0.0, 0.0, 0.0, score]);
        // outside the pool
        let f = r.assemble_features("orphan", &"X".into(), &pool, &WiktionaryStore::default());
        assert_eq!(f.0[4], 0.0);
    }

    #[test]
    fn features_with_wiktionary_hit() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(2);
        let pool = r.candidates_extended("orphan").unwrap();
        let wiki = WiktionaryStore::from_entries([WiktionaryEntry {
            word: "orphan".into(),
            hypernyms: vec!["h1".into()],
            ..Default::default()
        }]);
        let f = r.assemble_features("orphan", &"H1".into(), &pool, &wiki);
        assert_eq!(f.0[0], 1.0);
        assert!((f.0[3] - 1.0).abs() < 1e-12);
        assert_eq!(f, r.assemble_features("orphan", &"H1".into(), &pool, &wiki));
    }

    #[test]
    fn score_only_model_reproduces_weighted_ranking() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(10);
        let model = LrModel::from_parts([0.0, 0.0, 0.0, 0.0, 1.0], 0.0, 0.0, [0.0; 5], [1.0; 5]).unwrap();
        let by_model = r.rank_with_model("orphan", &model, &WiktionaryStore::default()).unwrap();
        let by_score = r.rank_by_score(&r.candidates_extended("orphan").unwrap());
        assert_eq!(ids(&by_model), ids(&by_score));
    }

    #[test]
    fn wiki_feature_lifts_gold_candidate() {
        let (t, e) = toy();
        let r = Ranker::new(&t, &e, Pos::Noun).with_k(10);
        let by_score = r.rank_by_score(&r.candidates_extended("orphan").unwrap());
        assert_eq!(by_score[0].synset.as_str(), "H1");
        let wiki = WiktionaryStore::from_entries([WiktionaryEntry {
            word: "orphan".into(),
            hypernyms: vec!["h2".into()],
            ..Default::default()
        }]);
        let model = LrModel::from_parts([10.0, 0.0, 0.0, 0.0, 1.0], -5.0, 0.0, [0.0; 5], [1.0; 5]).unwrap();
        let ranked = r.rank_with_model("orphan", &model, &wiki).unwrap();
        assert_eq!(ranked[0].synset.as_str(), "H2");
        let h2 = by_score.iter().find(|c| c.synset.as_str() == "H2").unwrap();
        let expected = 1.0 / (1.0 + (-(10.0 + h2.score - 5.0f64)).exp());
        assert!((ranked[0].score - expected).abs() < 1e-12);
    }
}
