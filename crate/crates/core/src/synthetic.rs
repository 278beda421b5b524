//! Planted-structure fixtures for tests and benchmarks.
//!
//! The taxonomy has one root `entity` and `clusters` clusters. Cluster `c` has a
//! group synset under the root, a parent synset under the group and `members`
//! leaf synsets under the parent. The newer taxonomy adds `orphans` words per
//! cluster as further children of the parent, so each orphan's gold set is
//! `{parent, group}`.
//!
//! Every word of cluster `c` gets the vector `e_c + noise`, where `e_c` is the
//! `c`-th basis vector and the noise lives in separate dimensions. Orphan
//! vectors are the centroid of their cluster's member vectors plus a much
//! smaller perturbation, so an orphan's nearest neighbors are words of its own
//! cluster.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embeddings::EmbeddingStore;
use crate::taxonomy::{Pos, SynsetRecord, Taxonomy};

const NOISE_DIMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantedConfig {
    pub clusters: usize,
    pub members: usize,
    pub orphans: usize,
    /// Half-width of the uniform noise on cluster words.
    pub noise: f32,
    /// Half-width of the uniform perturbation on orphan centroids.
    pub perturbation: f32,
    pub seed: u64,
}

impl Default for PlantedConfig {
    /// 61 synsets in 5 clusters with 4 orphans each.
    fn default() -> Self {
        PlantedConfig { clusters: 5, members: 10, orphans: 4, noise: 0.1, perturbation: 0.01, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedFixture {
    pub config: PlantedConfig,
    pub old_records: Vec<SynsetRecord>,
    pub new_records: Vec<SynsetRecord>,
    pub old: Taxonomy,
    pub new: Taxonomy,
    pub embeddings: EmbeddingStore,
    /// `(orphan word, cluster)` pairs.
    pub orphans: Vec<(String, usize)>,
}

impl PlantedFixture {
    pub fn parent_id(cluster: usize) -> String {
        format!("{}.n.01", parent_lemma(cluster))
    }

    pub fn group_id(cluster: usize) -> String {
        format!("{}.n.01", group_lemma(cluster))
    }

    /// Words of cluster `c` other than orphans: members, parent and group lemmas.
    pub fn cluster_words(&self, cluster: usize) -> Vec<String> {
        let mut out: Vec<String> = (0..self.config.members).map(|j| member_lemma(cluster, j)).collect();
        out.push(parent_lemma(cluster));
        out.push(group_lemma(cluster));
        out
    }
}

fn cluster_name(c: usize) -> String {
    const NAMES: [&str; 8] = ["amber", "birch", "cedar", "delta", "ember", "fjord", "grove", "heath"];
    match NAMES.get(c) {
        Some(name) => (*name).to_owned(),
        None => format!("cluster{c}x"),
    }
}

fn member_lemma(c: usize, j: usize) -> String {
    format!("{}member{j}", cluster_name(c))
}

fn parent_lemma(c: usize) -> String {
    format!("{}parent", cluster_name(c))
}

fn group_lemma(c: usize) -> String {
    format!("{}group", cluster_name(c))
}

fn orphan_lemma(c: usize, i: usize) -> String {
    format!("{}orphan{i}", cluster_name(c))
}

fn record(lemma: &str, hypernyms: &[String]) -> SynsetRecord {
    let hypernyms: Vec<&str> = hypernyms.iter().map(String::as_str).collect();
    SynsetRecord::new(&format!("{lemma}.n.01"), Pos::Noun, &[lemma], &hypernyms)
}

pub fn planted(config: &PlantedConfig) -> PlantedFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dim = config.clusters + NOISE_DIMS;
    let root = "entity".to_owned();
    let root_id = format!("{root}.n.01");

    let mut old_records = vec![record(&root, &[])];
    let mut vectors: Vec<(String, Vec<f32>)> = Vec::new();
    let mut root_vector = vec![0.0f32; dim];
    for slot in root_vector.iter_mut().take(config.clusters) {
        *slot = 1.0;
    }
    vectors.push((root.clone(), root_vector));

    let mut orphan_records = Vec::new();
    let mut orphans = Vec::new();
    for c in 0..config.clusters {
        let noisy = |rng: &mut ChaCha8Rng| {
            let mut v = vec![0.0f32; dim];
            v[c] = 1.0;
            for x in &mut v[config.clusters..] {
                *x = rng.gen_range(-config.noise..=config.noise);
            }
            v
        };
        let group = group_lemma(c);
        let parent = parent_lemma(c);
        old_records.push(record(&group, std::slice::from_ref(&root_id)));
        old_records.push(record(&parent, &[PlantedFixture::group_id(c)]));
        vectors.push((group, noisy(&mut rng)));
        vectors.push((parent, noisy(&mut rng)));

        let mut centroid = vec![0.0f64; dim];
        for j in 0..config.members {
            let lemma = member_lemma(c, j);
            old_records.push(record(&lemma, &[PlantedFixture::parent_id(c)]));
            let v = noisy(&mut rng);
            for (acc, x) in centroid.iter_mut().zip(&v) {
                *acc += f64::from(*x) / config.members as f64;
            }
            vectors.push((lemma, v));
        }
        for i in 0..config.orphans {
            let lemma = orphan_lemma(c, i);
            orphan_records.push(record(&lemma, &[PlantedFixture::parent_id(c)]));
            let v: Vec<f32> = centroid
                .iter()
                .map(|x| *x as f32 + rng.gen_range(-config.perturbation..=config.perturbation))
                .collect();
            vectors.push((lemma.clone(), v));
            orphans.push((lemma, c));
        }
    }

    let mut new_records = old_records.clone();
    new_records.extend(orphan_records);
    let old = Taxonomy::from_records(old_records.clone()).expect("planted taxonomy is valid");
    let new = Taxonomy::from_records(new_records.clone()).expect("planted taxonomy is valid");
    PlantedFixture {
        config: *config,
        old_records,
        new_records,
        old,
        new,
        embeddings: EmbeddingStore::from_vectors(dim, vectors),
        orphans,
    }
}
