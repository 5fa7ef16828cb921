use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::{Corpus, GoldSpan};

/// Shape of the generated corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Sentences per corpus.
    pub sentences: usize,
    pub entity_types: usize,
    /// Distinct trigger words per entity type.
    pub cues_per_type: usize,
    /// Size of the shared entity-surface pool (uninformative on its own).
    pub entity_pool: usize,
    pub filler_pool: usize,
    pub max_entity_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            sentences: 50,
            entity_types: 3,
            cues_per_type: 5,
            entity_pool: 20,
            filler_pool: 10,
            max_entity_len: 2,
            seed: 0,
        }
    }
}

/// Generate a (main, auxiliary) corpus pair from a templated grammar.
///
/// Every entity is a run of words drawn from a pool shared by all types;
/// the type is marked solely by a cue word placed immediately before the
/// span. Both corpora use the same cue and surface vocabulary — only the
/// label scheme and the sampled sentences differ — so the tasks are related
/// but not identical.
pub fn make_synthetic_corpus(spec: &SyntheticSpec) -> (Corpus, Corpus) {
    let main = generate(spec, "synthetic-main", "M", spec.seed);
    let aux = generate(spec, "synthetic-aux", "A", spec.seed.wrapping_add(0x5EED));
    (main, aux)
}

fn generate(spec: &SyntheticSpec, name: &str, label_prefix: &str, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..spec.entity_types)
        .map(|t| format!("{label_prefix}{t}"))
        .collect();
    let mut sentences = Vec::with_capacity(spec.sentences);
    let mut spans = Vec::with_capacity(spec.sentences);
    for _ in 0..spec.sentences {
        let mut tokens: Vec<String> = Vec::new();
        let mut sent_spans: Vec<GoldSpan> = Vec::new();
        let filler = |tokens: &mut Vec<String>, rng: &mut ChaCha8Rng| {
            for _ in 0..rng.gen_range(1..=2) {
                tokens.push(format!("w{}", rng.gen_range(0..spec.filler_pool)));
            }
        };
        filler(&mut tokens, &mut rng);
        for _ in 0..rng.gen_range(1..=2) {
            let t = rng.gen_range(0..spec.entity_types);
            tokens.push(format!("cue{}x{}", t, rng.gen_range(0..spec.cues_per_type)));
            let start = tokens.len();
            for _ in 0..rng.gen_range(1..=spec.max_entity_len) {
                tokens.push(format!("ent{}", rng.gen_range(0..spec.entity_pool)));
            }
            sent_spans.push(GoldSpan {
                start,
                end: tokens.len() - 1,
                label: labels[t].clone(),
            });
            filler(&mut tokens, &mut rng);
        }
        sentences.push(tokens);
        spans.push(sent_spans);
    }
    let mut label_set = labels;
    label_set.sort();
    Corpus::new(name, "train", sentences, spans, label_set).expect("generated corpus is valid")
}
