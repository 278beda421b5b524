//! Tab-separated interchange files.
//!
//! | file         | columns                                        |
//! |--------------|------------------------------------------------|
//! | dataset      | `word  pos  id1,id2,...`                       |
//! | predictions  | `word  rank  synset_id  score` (rank from 1)   |
//! | pairs        | `word  candidate_id  label` (label 0 or 1)     |
//! | judgements   | `word  synset_id  label` (label 0 or 1)        |

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::diachronic::{OrphanEntry, TrainingPair};
use crate::ranking::ScoredCandidate;
use crate::taxonomy::{Pos, SynsetId};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("cannot write {0:?}: field contains a tab, newline or separator")]
    Unwritable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn malformed(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed { line, message: message.into() }
}

/// Non-blank lines split on tabs, with 1-based line numbers.
fn rows(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, Vec<String>), FormatError>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        match line {
            Err(e) if e.kind() == io::ErrorKind::InvalidData => Some(Err(malformed(line_no, "invalid UTF-8"))),
            Err(e) => Some(Err(e.into())),
            Ok(line) => {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() {
                    None
                } else {
                    Some(Ok((line_no, line.split('\t').map(str::to_owned).collect())))
                }
            }
        }
    })
}

fn expect_columns(line: usize, fields: &[String], n: usize) -> Result<(), FormatError> {
    if fields.len() != n {
        return Err(malformed(line, format!("expected {n} tab-separated columns, found {}", fields.len())));
    }
    Ok(())
}

fn check_field(value: &str, extra: &[char]) -> Result<(), FormatError> {
    if value.is_empty() || value.contains(['\t', '\n', '\r']) || value.contains(extra) {
        return Err(FormatError::Unwritable(value.to_owned()));
    }
    Ok(())
}

fn parse_label(line: usize, s: &str) -> Result<bool, FormatError> {
    match s.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(malformed(line, format!("label must be 0 or 1, found {other:?}"))),
    }
}

pub fn read_dataset(reader: impl BufRead) -> Result<Vec<OrphanEntry>, FormatError> {
    let mut out = Vec::new();
    for row in rows(reader) {
        let (line, fields) = row?;
        expect_columns(line, &fields, 3)?;
        let word = fields[0].clone();
        if word.trim().is_empty() {
            return Err(malformed(line, "empty word"));
        }
        let pos: Pos = fields[1].trim().parse().map_err(|e: String| malformed(line, e))?;
        let mut gold = BTreeSet::new();
        for id in fields[2].split(',') {
            let id = id.trim();
            if id.is_empty() {
                return Err(malformed(line, "empty synset id in gold list"));
            }
            gold.insert(SynsetId::from(id));
        }
        out.push(OrphanEntry { word, pos, gold });
    }
    Ok(out)
}

pub fn write_dataset(mut out: impl Write, entries: &[OrphanEntry]) -> Result<(), FormatError> {
    for entry in entries {
        check_field(&entry.word, &[])?;
        let mut ids = Vec::with_capacity(entry.gold.len());
        for id in &entry.gold {
            check_field(id.as_str(), &[','])?;
            ids.push(id.as_str());
        }
        writeln!(out, "{}\t{}\t{}", entry.word, entry.pos, ids.join(","))?;
    }
    Ok(())
}

/// One row of a predictions file.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub rank: usize,
    pub synset: SynsetId,
    pub score: f64,
}

/// Predictions grouped by word, each list sorted by rank.
pub fn read_predictions(reader: impl BufRead) -> Result<BTreeMap<String, Vec<Prediction>>, FormatError> {
    let mut out: BTreeMap<String, Vec<Prediction>> = BTreeMap::new();
    for row in rows(reader) {
        let (line, fields) = row?;
        expect_columns(line, &fields, 4)?;
        let rank: usize =
            fields[1].trim().parse().map_err(|_| malformed(line, format!("invalid rank {:?}", fields[1])))?;
        if rank == 0 {
            return Err(malformed(line, "ranks start at 1"));
        }
        let synset = fields[2].trim();
        if synset.is_empty() {
            return Err(malformed(line, "empty synset id"));
        }
        let score: f64 =
            fields[3].trim().parse().map_err(|_| malformed(line, format!("invalid score {:?}", fields[3])))?;
        out.entry(fields[0].clone()).or_default().push(Prediction { rank, synset: synset.into(), score });
    }
    for list in out.values_mut() {
        list.sort_by_key(|p| p.rank);
    }
    Ok(out)
}

pub fn write_predictions(mut out: impl Write, word: &str, ranked: &[ScoredCandidate]) -> Result<(), FormatError> {
    check_field(word, &[])?;
    for (i, c) in ranked.iter().enumerate() {
        check_field(c.synset.as_str(), &[])?;
        writeln!(out, "{}\t{}\t{}\t{}", word, i + 1, c.synset, c.score)?;
    }
    Ok(())
}

pub fn write_pairs(mut out: impl Write, pairs: &[TrainingPair]) -> Result<(), FormatError> {
    for p in pairs {
        check_field(&p.word, &[])?;
        check_field(p.candidate.as_str(), &[])?;
        writeln!(out, "{}\t{}\t{}", p.word, p.candidate, u8::from(p.label))?;
    }
    Ok(())
}

pub fn read_pairs(reader: impl BufRead) -> Result<Vec<TrainingPair>, FormatError> {
    read_labeled(reader).map(|rows| {
        rows.into_iter()
            .map(|(word, candidate, label)| TrainingPair { word, candidate, label, features: None })
            .collect()
    })
}

/// Relevance judgements as `(word, synset) -> relevant`.
pub fn read_judgements(reader: impl BufRead) -> Result<BTreeMap<(String, SynsetId), bool>, FormatError> {
    Ok(read_labeled(reader)?.into_iter().map(|(w, s, l)| ((w, s), l)).collect())
}

fn read_labeled(reader: impl BufRead) -> Result<Vec<(String, SynsetId, bool)>, FormatError> {
    let mut out = Vec::new();
    for row in rows(reader) {
        let (line, fields) = row?;
        expect_columns(line, &fields, 3)?;
        if fields[0].trim().is_empty() || fields[1].trim().is_empty() {
            return Err(malformed(line, "empty word or synset id"));
        }
        let label = parse_label(line, &fields[2])?;
        out.push((fields[0].clone(), SynsetId::from(fields[1].trim()), label));
    }
    Ok(out)
}
