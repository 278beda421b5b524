//! The checked-in fuzz seeds must stay valid inputs.

use std::fs;
use std::path::PathBuf;

use taxenrich::{config, formats, EmbeddingStore, LrModel, Taxonomy, WiktionaryStore};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.sort();
    out
}

#[test]
fn every_seed_parses() {
    for (p, b) in seeds("taxonomy_jsonl") {
        Taxonomy::from_reader(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("embeddings_text") {
        EmbeddingStore::from_reader(b.as_slice(), None).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("wiktionary_jsonl") {
        WiktionaryStore::from_reader(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("dataset_tsv") {
        formats::read_dataset(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("predictions_tsv") {
        formats::read_predictions(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("pairs_tsv") {
        formats::read_pairs(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("judgements_tsv") {
        formats::read_judgements(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("model_text") {
        LrModel::from_reader(b.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, b) in seeds("config_text") {
        config::parse_config(std::str::from_utf8(&b).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
