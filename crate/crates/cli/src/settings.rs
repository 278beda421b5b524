//! Run settings merged from command-line flags, a config file and defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use taxenrich::config::parse_config;
use taxenrich::{DatasetRestrictions, Pos};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Baseline,
    Ranking,
    RankingWiki,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Method as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub old_taxonomy: Option<PathBuf>,
    pub new_taxonomy: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embeddings_limit: Option<usize>,
    pub wiktionary: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub relevance: Option<PathBuf>,
    pub method: Option<Method>,
    pub k: Option<usize>,
    pub l2_lambda: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub negatives_per_positive: Option<usize>,
    pub seed: Option<u64>,
    pub pos: Option<Pos>,
    pub restricted: Option<bool>,
    pub min_length: Option<usize>,
    pub exclude_named_entities: Option<bool>,
    pub exclude_multiword: Option<bool>,
    pub threads: Option<usize>,
}

fn parse_value<T>(key: &str, value: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    value.parse().map_err(|e| anyhow!("config key {key}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("config key {key}: expected true or false, found {other:?}"),
    }
}

macro_rules! merge_fields {
    ($hi:ident, $lo:ident, $($field:ident),* $(,)?) => {
        Settings { $($field: $hi.$field.or($lo.$field)),* }
    };
}

impl Settings {
    /// Reads a config file. Relative paths in it resolve against the file's directory.
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let map = parse_config(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_map(&map, base)
    }

    pub fn from_map(map: &BTreeMap<String, String>, base: &Path) -> Result<Settings> {
        let mut s = Settings::default();
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_relative() {
                base.join(p)
            } else {
                p
            }
        };
        for (key, value) in map {
            let v = value.as_str();
            match key.as_str() {
                "old_taxonomy" | "taxonomy" => s.old_taxonomy = Some(resolve(v)),
                "new_taxonomy" => s.new_taxonomy = Some(resolve(v)),
                "embeddings" => s.embeddings = Some(resolve(v)),
                "embeddings_limit" => s.embeddings_limit = Some(parse_value(key, v)?),
                "wiktionary" => s.wiktionary = Some(resolve(v)),
                "dataset" => s.dataset = Some(resolve(v)),
                "model" => s.model = Some(resolve(v)),
                "predictions" => s.predictions = Some(resolve(v)),
                "pairs" => s.pairs = Some(resolve(v)),
                "stats" => s.stats = Some(resolve(v)),
                "output" => s.output = Some(resolve(v)),
                "relevance" => s.relevance = Some(resolve(v)),
                "method" => s.method = Some(parse_value(key, v)?),
                "k" => s.k = Some(parse_value(key, v)?),
                "l2_lambda" => s.l2_lambda = Some(parse_value(key, v)?),
                "max_iters" => s.max_iters = Some(parse_value(key, v)?),
                "tol" => s.tol = Some(parse_value(key, v)?),
                "negatives_per_positive" => s.negatives_per_positive = Some(parse_value(key, v)?),
                "seed" => s.seed = Some(parse_value(key, v)?),
                "pos" => s.pos = Some(parse_value(key, v)?),
                "restricted" => s.restricted = Some(parse_bool(key, v)?),
                "min_length" => s.min_length = Some(parse_value(key, v)?),
                "exclude_named_entities" => s.exclude_named_entities = Some(parse_bool(key, v)?),
                "exclude_multiword" => s.exclude_multiword = Some(parse_bool(key, v)?),
                "threads" => s.threads = Some(parse_value(key, v)?),
                other => bail!("unknown config key {other:?}"),
            }
        }
        Ok(s)
    }

    /// Fields set in `self` win over `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        let hi = self;
        let lo = lower;
        merge_fields!(
            hi,
            lo,
            old_taxonomy,
            new_taxonomy,
            embeddings,
            embeddings_limit,
            wiktionary,
            dataset,
            model,
            predictions,
            pairs,
            stats,
            output,
            relevance,
            method,
            k,
            l2_lambda,
            max_iters,
            tol,
            negatives_per_positive,
            seed,
            pos,
            restricted,
            min_length,
            exclude_named_entities,
            exclude_multiword,
            threads,
        )
    }

    pub fn k(&self) -> Result<usize> {
        match self.k.unwrap_or(taxenrich::ranking::DEFAULT_K) {
            0 => bail!("k must be at least 1"),
            k => Ok(k),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn pos(&self) -> Pos {
        self.pos.unwrap_or(Pos::Noun)
    }

    pub fn restrictions(&self) -> DatasetRestrictions {
        let base = if self.restricted.unwrap_or(false) {
            DatasetRestrictions::default()
        } else {
            DatasetRestrictions::unrestricted()
        };
        DatasetRestrictions {
            min_length: self.min_length.unwrap_or(base.min_length),
            exclude_named_entities: self.exclude_named_entities.unwrap_or(base.exclude_named_entities),
            exclude_multiword: self.exclude_multiword.unwrap_or(base.exclude_multiword),
        }
    }
}

/// A required path setting.
pub fn required<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| anyhow!("missing required setting `{name}` (flag --{})", name.replace('_', "-")))
}

/// A required input path that must already exist.
pub fn existing<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
    let path = required(value, name)?;
    if !path.exists() {
        bail!("{name}: {} does not exist", path.display());
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let map = parse_config("k = 5\nseed = 3\ndataset = d.tsv\nrestricted = true\n").unwrap();
        let file = Settings::from_map(&map, Path::new("/exp")).unwrap();
        let flags = Settings { k: Some(7), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!(merged.k().unwrap(), 7);
        assert_eq!(merged.seed(), 3);
        assert_eq!(merged.dataset.as_deref(), Some(Path::new("/exp/d.tsv")));
        assert_eq!(merged.restrictions().min_length, 4);
        assert_eq!(Settings::default().k().unwrap(), 10);
        assert_eq!(Settings::default().restrictions(), DatasetRestrictions::unrestricted());
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        let map = parse_config("colour = blue\n").unwrap();
        assert!(Settings::from_map(&map, Path::new(".")).is_err());
        let map = parse_config("k = ten\n").unwrap();
        assert!(Settings::from_map(&map, Path::new(".")).is_err());
        let map = parse_config("method = ranking-wiki\n").unwrap();
        assert_eq!(Settings::from_map(&map, Path::new(".")).unwrap().method, Some(Method::RankingWiki));
        assert!(Settings { k: Some(0), ..Default::default() }.k().is_err());
    }
}
