//! Connected-component MAP, Precision@k, word-group breakdowns and
//! sense-count histograms.
//!
//! Gold hypernyms of a word are partitioned into taxonomy-connected
//! components. A prediction is a hit when it falls into a component that no
//! earlier prediction has hit; later predictions in an already-hit component
//! count as misses. Average precision is normalized by the number of
//! components, so a word needs one hit per component to reach 1.0.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::diachronic::OrphanEntry;
use crate::taxonomy::{GoldComponents, SynsetId, Taxonomy, TaxonomyError};
use crate::text::{letter_count, looks_like_named_entity};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold standard has no components")]
    EmptyGold,
    #[error("no results to average")]
    NoResults,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

/// Average precision of a ranked list against gold components, scanning at most `limit` predictions.
pub fn average_precision(predictions: &[SynsetId], gold: &GoldComponents, limit: usize) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let mut hit = vec![false; gold.len()];
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, prediction) in predictions.iter().take(limit).enumerate() {
        if let Some(c) = gold.component_of(prediction) {
            if !hit[c] {
                hit[c] = true;
                hits += 1;
                sum += hits as f64 / (i + 1) as f64;
            }
        }
    }
    Ok(sum / gold.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordResult {
    pub word: String,
    pub predictions: Vec<SynsetId>,
    #[serde(skip)]
    pub gold_components: GoldComponents,
    pub ap: f64,
}

impl WordResult {
    /// Deduplicates `predictions` (first occurrence kept) and scores them.
    pub fn score(
        word: impl Into<String>,
        predictions: Vec<SynsetId>,
        gold_components: GoldComponents,
        limit: usize,
    ) -> Result<Self, EvalError> {
        let mut seen = BTreeSet::new();
        let predictions: Vec<SynsetId> = predictions.into_iter().filter(|p| seen.insert(p.clone())).collect();
        let ap = average_precision(&predictions, &gold_components, limit)?;
        Ok(WordResult { word: word.into(), predictions, gold_components, ap })
    }
}

pub fn map_score(results: &[WordResult]) -> Result<f64, EvalError> {
    if results.is_empty() {
        return Err(EvalError::NoResults);
    }
    Ok(results.iter().map(|r| r.ap).sum::<f64>() / results.len() as f64)
}

/// Share of the first `k` predictions that are relevant; missing positions count as wrong.
pub fn precision_at_k(predictions: &[SynsetId], relevant: &BTreeSet<SynsetId>, k: usize) -> f64 {
    assert!(k >= 1, "k must be positive");
    let correct = predictions.iter().take(k).filter(|p| relevant.contains(*p)).count();
    correct as f64 / k as f64
}

/// Precision@k from per-position judgements of a ranked list.
pub fn precision_at_k_labels(labels: &[bool], k: usize) -> f64 {
    assert!(k >= 1, "k must be positive");
    labels.iter().take(k).filter(|&&l| l).count() as f64 / k as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    NamedEntity,
    Short,
    Other,
}

impl GroupLabel {
    pub const ALL: [GroupLabel; 3] = [GroupLabel::NamedEntity, GroupLabel::Short, GroupLabel::Other];

    pub fn name(self) -> &'static str {
        match self {
            GroupLabel::NamedEntity => "named_entity",
            GroupLabel::Short => "short",
            GroupLabel::Other => "other",
        }
    }
}

/// Short words (fewer than 4 letters) first, then capitalized words, then the rest.
pub fn classify_word(word: &str) -> GroupLabel {
    if letter_count(word) < 4 {
        GroupLabel::Short
    } else if looks_like_named_entity(word) {
        GroupLabel::NamedEntity
    } else {
        GroupLabel::Other
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupScore {
    /// `None` when the group is empty.
    pub map: Option<f64>,
    pub count: usize,
    /// Percentage of all words.
    pub share: f64,
}

/// MAP restricted to each group; `labels` is parallel to `results`.
pub fn group_breakdown(results: &[WordResult], labels: &[GroupLabel]) -> BTreeMap<GroupLabel, GroupScore> {
    assert_eq!(results.len(), labels.len(), "one label per result");
    GroupLabel::ALL
        .iter()
        .map(|&group| {
            let aps: Vec<f64> = results.iter().zip(labels).filter(|(_, l)| **l == group).map(|(r, _)| r.ap).collect();
            let map = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
            let share = if results.is_empty() { 0.0 } else { 100.0 * aps.len() as f64 / results.len() as f64 };
            (group, GroupScore { map, count: aps.len(), share })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SenseBucket {
    pub words: usize,
    /// Words with AP > 0, when results were supplied.
    pub solved: Option<usize>,
}

/// Words bucketed by number of gold components.
///
/// `results`, when given, is matched to the dataset by word.
pub fn sense_distribution(
    dataset: &[OrphanEntry],
    taxonomy: &Taxonomy,
    results: Option<&[WordResult]>,
) -> Result<BTreeMap<usize, SenseBucket>, EvalError> {
    let ap_by_word: Option<BTreeMap<&str, f64>> =
        results.map(|rs| rs.iter().map(|r| (r.word.as_str(), r.ap)).collect());
    let mut out: BTreeMap<usize, SenseBucket> = BTreeMap::new();
    for entry in dataset {
        let components = taxonomy.connected_components(&entry.gold)?.len();
        let bucket = out.entry(components).or_default();
        bucket.words += 1;
        if let Some(aps) = &ap_by_word {
            let solved = aps.get(entry.word.as_str()).is_some_and(|&ap| ap > 0.0);
            *bucket.solved.get_or_insert(0) += usize::from(solved);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Pos, SynsetRecord};

    fn comps(sets: &[&[&str]]) -> GoldComponents {
        GoldComponents::from_sets(sets.iter().map(|s| s.iter().map(|x| SynsetId::from(*x)).collect()).collect())
    }

    fn preds(list: &[&str]) -> Vec<SynsetId> {
        list.iter().map(|s| SynsetId::from(*s)).collect()
    }

    fn result(word: &str, ap: f64) -> WordResult {
        WordResult { word: word.into(), predictions: vec![], gold_components: comps(&[&["A"]]), ap }
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&preds(&["A"]), &comps(&[&["A"]]), 10).unwrap(), 1.0);
        let ap = average_precision(&preds(&["A", "X", "C"]), &comps(&[&["A"], &["C"]]), 10).unwrap();
        assert!((ap - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(average_precision(&preds(&["B", "A"]), &comps(&[&["A", "B"]]), 10).unwrap(), 1.0);
        assert_eq!(average_precision(&[], &comps(&[&["A"]]), 10).unwrap(), 0.0);
        assert!(matches!(average_precision(&preds(&["A"]), &GoldComponents::default(), 10), Err(EvalError::EmptyGold)));
    }

    #[test]
    fn ap_respects_limit() {
        let gold = comps(&[&["A"]]);
        assert_eq!(average_precision(&preds(&["X", "A"]), &gold, 1).unwrap(), 0.0);
        assert_eq!(average_precision(&preds(&["X", "A"]), &gold, 2).unwrap(), 0.5);
    }

    #[test]
    fn duplicate_hit_counts_as_miss() {
        // second member of an already-hit component lowers precision of the later hit
        let gold = comps(&[&["A", "B"], &["C"]]);
        let ap = average_precision(&preds(&["A", "B", "C"]), &gold, 10).unwrap();
        assert!((ap - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn word_result_dedupes() {
        let r = WordResult::score("w", preds(&["A", "A", "C"]), comps(&[&["A"], &["C"]]), 10).unwrap();
        assert_eq!(r.predictions, preds(&["A", "C"]));
        assert_eq!(r.ap, 1.0);
    }

    #[test]
    fn map_examples() {
        assert_eq!(map_score(&[result("a", 1.0), result("b", 0.0)]).unwrap(), 0.5);
        assert_eq!(map_score(&[result("a", 1.0), result("b", 1.0)]).unwrap(), 1.0);
        assert!(matches!(map_score(&[]), Err(EvalError::NoResults)));
    }

    #[test]
    fn precision_examples() {
        let p = preds(&["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
        let relevant: BTreeSet<SynsetId> = preds(&["2", "4", "6", "8"]).into_iter().collect();
        assert_eq!(precision_at_k(&p, &relevant, 10), 0.4);
        assert_eq!(precision_at_k(&preds(&["2"]), &relevant, 1), 1.0);
        assert_eq!(precision_at_k(&[], &relevant, 3), 0.0);
        assert_eq!(precision_at_k(&preds(&["2"]), &relevant, 4), 0.25);
        assert_eq!(precision_at_k_labels(&[true, false, true], 2), 0.5);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_word("ooh"), GroupLabel::Short);
        assert_eq!(classify_word("Massif Central"), GroupLabel::NamedEntity);
        assert_eq!(classify_word("dancing-master"), GroupLabel::Other);
        assert_eq!(classify_word("Ra"), GroupLabel::Short);
    }

    #[test]
    fn groups() {
        let results = [result("Paris", 1.0), result("ooh", 0.0), result("duckling", 0.5)];
        let labels: Vec<GroupLabel> = results.iter().map(|r| classify_word(&r.word)).collect();
        let g = group_breakdown(&results, &labels);
        assert_eq!(g[&GroupLabel::NamedEntity].map, Some(1.0));
        assert_eq!(g[&GroupLabel::Short].map, Some(0.0));
        assert_eq!(g[&GroupLabel::Other].map, Some(0.5));
        let total: f64 = g.values().map(|s| s.share).sum();
        assert!((total - 100.0).abs() < 1e-9);

        let same = [result("duckling", 0.2), result("gosling", 0.6)];
        let g = group_breakdown(&same, &[GroupLabel::Other, GroupLabel::Other]);
        assert!((g[&GroupLabel::Other].map.unwrap() - map_score(&same).unwrap()).abs() < 1e-12);
        assert_eq!(g[&GroupLabel::Short].map, None);
        assert_eq!(g[&GroupLabel::Short].count, 0);
    }

    #[test]
    fn sense_histogram() {
        let t = Taxonomy::from_records([
            SynsetRecord::new("A", Pos::Noun, &["a"], &[]),
            SynsetRecord::new("B", Pos::Noun, &["b"], &["A"]),
            SynsetRecord::new("C", Pos::Noun, &["c"], &[]),
        ])
        .unwrap();
        let entry = |w: &str, gold: &[&str]| OrphanEntry {
            word: w.into(),
            pos: Pos::Noun,
            gold: gold.iter().map(|s| SynsetId::from(*s)).collect(),
        };
        let dataset = [entry("one", &["A", "B"]), entry("two", &["A", "C"]), entry("three", &["B"])];
        let h = sense_distribution(&dataset, &t, None).unwrap();
        assert_eq!(h[&1].words, 2);
        assert_eq!(h[&2].words, 1);
        assert_eq!(h.values().map(|b| b.words).sum::<usize>(), dataset.len());
        assert_eq!(h[&1].solved, None);

        let results = [result("one", 0.5), result("two", 0.0)];
        let h = sense_distribution(&dataset, &t, Some(&results)).unwrap();
        assert_eq!(h[&1].solved, Some(1));
        assert_eq!(h[&2].solved, Some(0));
    }
}
