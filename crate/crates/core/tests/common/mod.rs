#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxenrich::{Pos, SynsetId, SynsetRecord, Taxonomy};

/// Random DAG as an edge list: node `i` may have hypernyms among nodes `< i`.
#[derive(Clone, Debug)]
pub struct RandomDag {
    pub nodes: usize,
    /// `(hyponym, hypernym)` pairs.
    pub edges: Vec<(usize, usize)>,
}

pub fn id(i: usize) -> String {
    format!("s{i}")
}

pub fn sid(i: usize) -> SynsetId {
    SynsetId::new(id(i))
}

pub fn random_dag(rng: &mut ChaCha8Rng, nodes: usize, density: f64) -> RandomDag {
    let mut edges = Vec::new();
    for i in 1..nodes {
        for j in 0..i {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    RandomDag { nodes, edges }
}

impl RandomDag {
    pub fn hypernyms_of(&self, i: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|(a, _)| *a == i).map(|(_, b)| *b).collect()
    }

    pub fn records(&self, lemma: impl Fn(usize) -> String) -> Vec<SynsetRecord> {
        (0..self.nodes)
            .map(|i| {
                let hyper: Vec<String> = self.hypernyms_of(i).into_iter().map(id).collect();
                let hyper: Vec<&str> = hyper.iter().map(String::as_str).collect();
                SynsetRecord::new(&id(i), Pos::Noun, &[&lemma(i)], &hyper)
            })
            .collect()
    }

    pub fn taxonomy(&self) -> Taxonomy {
        Taxonomy::from_records(self.records(|i| format!("w{i}"))).expect("generated DAG is valid")
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_subset(rng: &mut ChaCha8Rng, nodes: usize, max: usize) -> BTreeSet<usize> {
    let mut all: Vec<usize> = (0..nodes).collect();
    all.shuffle(rng);
    let size = rng.gen_range(1..=max.min(nodes));
    all.into_iter().take(size).collect()
}
