//! Subcommand implementations.
//!
//! Inputs are loaded and validated before anything is written, so an input
//! error never leaves partial output behind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use taxenrich::diachronic::{build_dataset as build_orphans, build_training_pairs, dataset_statistics, PairOptions};
use taxenrich::eval::{group_breakdown, precision_at_k_labels, sense_distribution};
use taxenrich::formats::{
    read_dataset, read_judgements, read_predictions, write_dataset, write_pairs, write_predictions,
};
use taxenrich::ranking::{train_lr, RankingError, ScoredCandidate, TrainOptions};
use taxenrich::{
    classify_word, map_score, EmbeddingStore, GoldComponents, LrModel, OrphanEntry, Ranker, SynsetId, Taxonomy,
    WiktionaryStore, WordResult,
};

use crate::output::{json_bytes, sidecar, write_atomic};
use crate::settings::{existing, required, Method, Settings};

/// Exit code 2 for `Input`, 1 for `Runtime`.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

trait InputResult<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputResult<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    Taxonomy::load(path).with_context(|| format!("loading taxonomy {}", path.display()))
}

fn load_embeddings(path: &Path, limit: Option<usize>) -> Result<EmbeddingStore> {
    EmbeddingStore::load(path, limit).with_context(|| format!("loading embeddings {}", path.display()))
}

fn load_wiktionary(path: &Path) -> Result<WiktionaryStore> {
    WiktionaryStore::load(path).with_context(|| format!("loading wiktionary {}", path.display()))
}

fn load_dataset(path: &Path) -> Result<Vec<OrphanEntry>> {
    let file = File::open(path).with_context(|| format!("opening dataset {}", path.display()))?;
    read_dataset(BufReader::new(file)).with_context(|| format!("reading dataset {}", path.display()))
}

pub fn build_dataset(s: &Settings) -> Result<(), Failure> {
    let old_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let new_path = existing(&s.new_taxonomy, "new_taxonomy").input()?;
    let out = required(&s.dataset, "dataset").input()?;
    let old = load_taxonomy(old_path).input()?;
    let new = load_taxonomy(new_path).input()?;

    let restrictions = s.restrictions();
    let entries = build_orphans(&old, &new, s.pos(), &restrictions);
    let stats = dataset_statistics(&old, &new);

    let mut tsv = Vec::new();
    write_dataset(&mut tsv, &entries).context("formatting dataset")?;
    let report = json!({
        "pos": s.pos().tag(),
        "restrictions": restrictions,
        "orphans": entries.len(),
        "statistics": stats,
    });
    let stats_path = s.stats.clone().unwrap_or_else(|| sidecar(out, ".stats.json"));
    write_atomic(out, &tsv)?;
    write_atomic(&stats_path, &json_bytes(&report)?)?;
    print!("{}", stats.to_table());
    println!("wrote {} orphans to {}", entries.len(), out.display());
    Ok(())
}

pub fn train(s: &Settings) -> Result<(), Failure> {
    let tax_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let emb_path = existing(&s.embeddings, "embeddings").input()?;
    let wiki_path = match &s.wiktionary {
        Some(_) => Some(existing(&s.wiktionary, "wiktionary").input()?),
        None => None,
    };
    let model_path = required(&s.model, "model").input()?;
    let k = s.k().input()?;
    let defaults = TrainOptions::default();
    let options = TrainOptions {
        l2_lambda: s.l2_lambda.unwrap_or(defaults.l2_lambda),
        max_iters: s.max_iters.unwrap_or(defaults.max_iters),
        tol: s.tol.unwrap_or(defaults.tol),
    };
    let pair_options = PairOptions {
        negatives_per_positive: s.negatives_per_positive.unwrap_or(PairOptions::default().negatives_per_positive),
        seed: s.seed(),
        k,
    };

    let taxonomy = load_taxonomy(tax_path).input()?;
    let embeddings = load_embeddings(emb_path, s.embeddings_limit).input()?;
    let wiktionary = match wiki_path {
        Some(p) => load_wiktionary(p).input()?,
        None => WiktionaryStore::default(),
    };

    let set = build_training_pairs(&taxonomy, &embeddings, s.pos(), &pair_options, Some(&wiktionary))
        .map_err(|e| Failure::Input(e.into()))?;
    let examples: Vec<_> = set.pairs.iter().map(|p| (p.features.expect("features requested"), p.label)).collect();
    let (model, report) = train_lr(&examples, &options).context("training failed")?;

    if let Some(pairs_path) = &s.pairs {
        let mut tsv = Vec::new();
        write_pairs(&mut tsv, &set.pairs).context("formatting pairs")?;
        write_atomic(pairs_path, &tsv)?;
    }
    write_atomic(model_path, model.to_text().as_bytes())?;

    println!("positives\t{}", set.positives);
    println!("negatives\t{}", set.negatives);
    println!("fallback_negatives\t{}", set.fallback_negatives);
    println!("skipped_oov\t{}", set.skipped_oov);
    println!("iterations\t{}", report.iterations);
    println!("converged\t{}", report.converged);
    println!("final_loss\t{}", report.final_loss);
    println!("gradient_norm\t{}", report.gradient_norm);
    Ok(())
}

struct WordPrediction {
    ranked: Vec<ScoredCandidate>,
    oov: bool,
}

pub fn predict(s: &Settings, explain: bool) -> Result<(), Failure> {
    let method = s.method.ok_or_else(|| anyhow!("missing required setting `method` (flag --method)")).input()?;
    let tax_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let emb_path = existing(&s.embeddings, "embeddings").input()?;
    let data_path = existing(&s.dataset, "dataset").input()?;
    let out = required(&s.predictions, "predictions").input()?;
    let k = s.k().input()?;
    let wiki_model = if method == Method::RankingWiki {
        let wiki = existing(&s.wiktionary, "wiktionary").input()?;
        let model = existing(&s.model, "model").input()?;
        Some((wiki, model))
    } else {
        None
    };

    let taxonomy = load_taxonomy(tax_path).input()?;
    let embeddings = load_embeddings(emb_path, s.embeddings_limit).input()?;
    let dataset = load_dataset(data_path).input()?;
    let wiki_model = match wiki_model {
        Some((w, m)) => {
            let model = LrModel::load(m).with_context(|| format!("loading model {}", m.display())).input()?;
            Some((load_wiktionary(w).input()?, model))
        }
        None => None,
    };

    let results: Vec<WordPrediction> = dataset
        .par_iter()
        .map(|entry| {
            let ranker = Ranker::new(&taxonomy, &embeddings, entry.pos).with_k(k);
            let ranked = match (method, &wiki_model) {
                (Method::Baseline, _) => ranker.candidates_baseline(&entry.word),
                (Method::Ranking, _) => ranker.candidates_extended(&entry.word).map(|pool| ranker.rank_by_score(&pool)),
                (Method::RankingWiki, Some((wiki, model))) => ranker.rank_with_model(&entry.word, model, wiki),
                (Method::RankingWiki, None) => unreachable!("loaded above"),
            };
            match ranked {
                Ok(ranked) => Ok(WordPrediction { ranked, oov: false }),
                Err(RankingError::OutOfVocabulary(_)) => Ok(WordPrediction { ranked: Vec::new(), oov: true }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()
        .context("ranking failed")?;

    let mut tsv = Vec::new();
    let mut oov = String::new();
    let mut explanation = String::from("word\trank\tsynset\toccurrences\tsimilarity\tneighbors\n");
    for (entry, result) in dataset.iter().zip(&results) {
        write_predictions(&mut tsv, &entry.word, &result.ranked).context("formatting predictions")?;
        if result.oov {
            writeln!(oov, "{}", entry.word).expect("string write");
        }
        for (i, c) in result.ranked.iter().enumerate() {
            writeln!(
                explanation,
                "{}\t{}\t{}\t{}\t{}\t{}",
                entry.word,
                i + 1,
                c.synset,
                c.occurrences,
                c.similarity,
                c.provenance.join(",")
            )
            .expect("string write");
        }
    }
    write_atomic(out, &tsv)?;
    write_atomic(&sidecar(out, ".oov.txt"), oov.as_bytes())?;
    if explain {
        write_atomic(&sidecar(out, ".explain.tsv"), explanation.as_bytes())?;
    }
    let oov_count = results.iter().filter(|r| r.oov).count();
    println!("predicted {} words ({} out of vocabulary) to {}", dataset.len() - oov_count, oov_count, out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    words: usize,
    k: usize,
    map: f64,
    per_group: BTreeMap<&'static str, taxenrich::eval::GroupScore>,
    histogram: BTreeMap<usize, taxenrich::eval::SenseBucket>,
    per_word_ap: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision_at_k: Option<BTreeMap<usize, f64>>,
}

pub fn eval(s: &Settings, groups: bool) -> Result<(), Failure> {
    let tax_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let data_path = existing(&s.dataset, "dataset").input()?;
    let pred_path = existing(&s.predictions, "predictions").input()?;
    let rel_path = match &s.relevance {
        Some(_) => Some(existing(&s.relevance, "relevance").input()?),
        None => None,
    };
    let k = s.k().input()?;
    let out = s.output.clone().unwrap_or_else(|| sidecar(pred_path, ".eval.json"));

    let taxonomy = load_taxonomy(tax_path).input()?;
    let dataset = load_dataset(data_path).input()?;
    let file = File::open(pred_path).with_context(|| format!("opening {}", pred_path.display())).input()?;
    let predictions = read_predictions(BufReader::new(file))
        .with_context(|| format!("reading predictions {}", pred_path.display()))
        .input()?;
    let judgements = match rel_path {
        Some(p) => {
            let file = File::open(p).with_context(|| format!("opening {}", p.display())).input()?;
            Some(read_judgements(BufReader::new(file)).with_context(|| format!("reading {}", p.display())).input()?)
        }
        None => None,
    };
    if dataset.is_empty() {
        return Err(Failure::Input(anyhow!("dataset {} is empty", data_path.display())));
    }

    let known: BTreeSet<&str> = dataset.iter().map(|e| e.word.as_str()).collect();
    for word in predictions.keys().filter(|w| !known.contains(w.as_str())) {
        log::warn!("predictions for {word:?}, which is not in the dataset, are ignored");
    }

    let mut results = Vec::with_capacity(dataset.len());
    for entry in &dataset {
        let gold: GoldComponents = taxonomy
            .connected_components(&entry.gold)
            .with_context(|| format!("gold synsets of {:?}", entry.word))
            .input()?;
        let preds: Vec<SynsetId> = predictions
            .get(&entry.word)
            .map(|list| {
                list.iter()
                    .map(|p| {
                        if !taxonomy.contains(&p.synset) {
                            log::warn!(
                                "{:?} rank {}: unknown synset {:?} scored as a miss",
                                entry.word,
                                p.rank,
                                p.synset.as_str()
                            );
                        }
                        p.synset.clone()
                    })
                    .collect()
            })
            .unwrap_or_default();
        results.push(WordResult::score(entry.word.clone(), preds, gold, k).context("scoring")?);
    }
    let map = map_score(&results).context("averaging")?;
    let labels: Vec<_> = dataset.iter().map(|e| classify_word(&e.word)).collect();
    let per_group: BTreeMap<&'static str, _> =
        group_breakdown(&results, &labels).into_iter().map(|(g, score)| (g.name(), score)).collect();
    let histogram = sense_distribution(&dataset, &taxonomy, Some(&results)).context("sense histogram")?;
    let precision = judgements.map(|judged| {
        let labeled: Vec<Vec<bool>> = results
            .iter()
            .map(|r| {
                r.predictions
                    .iter()
                    .map(|p| judged.get(&(r.word.clone(), p.clone())).copied().unwrap_or(false))
                    .collect()
            })
            .collect();
        (1..=k)
            .map(|cut| {
                let total: f64 = labeled.iter().map(|l| precision_at_k_labels(l, cut)).sum();
                (cut, total / labeled.len() as f64)
            })
            .collect::<BTreeMap<_, _>>()
    });

    let report = EvalReport {
        words: results.len(),
        k,
        map,
        per_group,
        histogram,
        per_word_ap: results.iter().map(|r| (r.word.clone(), r.ap)).collect(),
        precision_at_k: precision,
    };
    write_atomic(&out, &json_bytes(&report)?)?;

    println!("words\t{}", report.words);
    println!("MAP\t{:.4}", report.map);
    if groups {
        println!("group\tMAP\tcount\tshare");
        for (name, g) in &report.per_group {
            let map = g.map.map_or_else(|| "-".to_owned(), |m| format!("{m:.4}"));
            println!("{name}\t{map}\t{}\t{:.1}%", g.count, g.share);
        }
    }
    println!("senses\twords\tsolved");
    for (senses, b) in &report.histogram {
        println!("{senses}\t{}\t{}", b.words, b.solved.unwrap_or(0));
    }
    if let Some(p) = &report.precision_at_k {
        for (cut, value) in p {
            println!("P@{cut}\t{value:.4}");
        }
    }
    Ok(())
}

pub fn report(s: &Settings) -> Result<(), Failure> {
    let old_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let new_path = existing(&s.new_taxonomy, "new_taxonomy").input()?;
    let data_path = match &s.dataset {
        Some(_) => Some(existing(&s.dataset, "dataset").input()?),
        None => None,
    };
    let old = load_taxonomy(old_path).input()?;
    let new = load_taxonomy(new_path).input()?;
    let dataset = data_path.map(load_dataset).transpose().input()?;

    let stats = dataset_statistics(&old, &new);
    let histogram = match &dataset {
        Some(d) => Some(sense_distribution(d, &old, None).context("sense histogram").input()?),
        None => None,
    };
    if let Some(out) = &s.output {
        let report = json!({ "statistics": stats, "histogram": histogram });
        write_atomic(out, &json_bytes(&report)?)?;
    }
    print!("{}", stats.to_table());
    if let Some(h) = &histogram {
        println!("senses\twords");
        for (senses, b) in h {
            println!("{senses}\t{}", b.words);
        }
    }
    Ok(())
}

pub fn wiki_coverage(s: &Settings) -> Result<(), Failure> {
    let tax_path = existing(&s.old_taxonomy, "old_taxonomy").input()?;
    let data_path = existing(&s.dataset, "dataset").input()?;
    let wiki_path = existing(&s.wiktionary, "wiktionary").input()?;
    let taxonomy = load_taxonomy(tax_path).input()?;
    let dataset = load_dataset(data_path).input()?;
    let wiktionary = load_wiktionary(wiki_path).input()?;

    let coverage = wiktionary.coverage(&dataset, &taxonomy);
    if let Some(out) = &s.output {
        write_atomic(out, &json_bytes(&coverage)?)?;
    }
    println!("orphans\t{}", coverage.orphans);
    println!("in_wiktionary\t{:.1}%", coverage.present);
    println!("gold_in_hypernyms\t{:.1}%", coverage.hypernyms);
    println!("gold_in_synonyms\t{:.1}%", coverage.synonyms);
    println!("gold_in_definition\t{:.1}%", coverage.definition);
    Ok(())
}
