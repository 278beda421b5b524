//! Taxonomy enrichment toolkit.
//!
//! Builds orphan-word datasets by diffing two releases of a wordnet-style
//! taxonomy, predicts hypernym synsets for orphan words from static word
//! embeddings (optionally re-ranked with Wiktionary features and a logistic
//! regression model), and scores predictions with connected-component MAP.

pub mod config;
pub mod diachronic;
pub mod embeddings;
pub mod eval;
pub mod formats;
pub mod ranking;
pub mod synthetic;
pub mod taxonomy;
pub mod text;
pub mod wiktionary;

pub use diachronic::{
    build_dataset, build_training_pairs, dataset_statistics, DatasetRestrictions, DatasetStatistics, OrphanEntry,
    PairOptions, TrainingPair, TrainingSet,
};
pub use embeddings::{cosine, EmbeddingError, EmbeddingStore, Neighbor, WordVector};
pub use eval::{average_precision, classify_word, map_score, precision_at_k, GroupLabel, WordResult};
pub use ranking::{
    train_lr, CandidatePool, FeatureVector, LrModel, Ranker, RankingError, ScoredCandidate, TrainOptions,
};
pub use taxonomy::{GoldComponents, Pos, Synset, SynsetId, SynsetRecord, Taxonomy, TaxonomyError};
pub use wiktionary::{WikiFeatures, WiktionaryEntry, WiktionaryStore};
