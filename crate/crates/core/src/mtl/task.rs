use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::features::{enumerate_fragments, FeatureBundle, FeatureExtractor};
use crate::io::Corpus;

/// One classification task: its entity label set and private architecture.
/// Class 0 is always NONE (the fragment is not an entity of this task);
/// entity classes follow in `labels` order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: usize,
    pub name: String,
    pub labels: Vec<String>,
    pub private_layer_sizes: Vec<usize>,
    pub sampling_weight: f64,
    pub is_main: bool,
}

impl TaskSpec {
    pub fn num_classes(&self) -> usize {
        self.labels.len() + 1
    }

    /// Class index of an entity label; NONE is class 0.
    pub fn class_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|p| p + 1)
    }

    pub fn label_of(&self, class: usize) -> Option<&str> {
        if class == 0 {
            None
        } else {
            self.labels.get(class - 1).map(String::as_str)
        }
    }
}

/// One training example: the feature bundle of a fragment and its class.
#[derive(Debug, Clone)]
pub struct PreparedSample {
    pub bundle: FeatureBundle,
    pub label: usize,
}

/// Turn a corpus into fragment-level training samples. Every fragment up to
/// the extractor's maximum length becomes one sample; its class is the label
/// of an exactly matching gold span, or NONE.
pub fn prepare_samples(
    spec: &TaskSpec,
    extractor: &FeatureExtractor,
    corpus: &Corpus,
) -> Result<Vec<PreparedSample>> {
    corpus.validate()?;
    let mut out = Vec::new();
    for (tokens, spans) in corpus.sentences.iter().zip(&corpus.spans) {
        let mut gold: HashMap<(usize, usize), usize> = HashMap::new();
        for s in spans {
            let class = spec.class_of(&s.label).ok_or_else(|| {
                Error::Input(format!(
                    "corpus label {:?} unknown to task {:?}",
                    s.label, spec.name
                ))
            })?;
            gold.insert((s.start, s.end), class);
        }
        let sent = extractor.sentence(tokens);
        let codes = extractor.sentence_codes(&sent)?;
        for frag in enumerate_fragments(sent.len(), extractor.max_fragment_len) {
            let label = gold.get(&(frag.start, frag.end)).copied().unwrap_or(0);
            out.push(PreparedSample {
                bundle: extractor.bundle(&sent, &codes, frag)?,
                label,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{CharAlphabet, Vocab};
    use crate::io::GoldSpan;

    fn toy_task() -> TaskSpec {
        TaskSpec {
            id: 0,
            name: "ner".into(),
            labels: vec!["LOC".into(), "PER".into()],
            private_layer_sizes: vec![],
            sampling_weight: 1.0,
            is_main: true,
        }
    }

    fn toy_extractor(corpus: &Corpus) -> FeatureExtractor {
        FeatureExtractor {
            cased_vocab: Vocab::from_tokens(corpus.tokens()),
            uncased_vocab: Vocab::from_tokens(corpus.tokens().map(|t| t.to_lowercase())),
            alphabet: CharAlphabet::from_text_with_ascii_floor([]),
            alpha_w: 0.5,
            alpha_c: 0.8,
            max_fragment_len: 3,
            use_char_cnn: false,
        }
    }

    #[test]
    fn class_indices_reserve_zero_for_none() {
        let t = toy_task();
        assert_eq!(t.num_classes(), 3);
        assert_eq!(t.class_of("LOC"), Some(1));
        assert_eq!(t.class_of("PER"), Some(2));
        assert_eq!(t.class_of("ORG"), None);
        assert_eq!(t.label_of(0), None);
        assert_eq!(t.label_of(2), Some("PER"));
    }

    #[test]
    fn exact_span_matches_get_the_entity_class() {
        let corpus = Corpus::new(
            "t",
            "train",
            vec![vec!["New".into(), "York".into(), "calling".into()]],
            vec![vec![GoldSpan { start: 0, end: 1, label: "LOC".into() }]],
            vec!["LOC".into(), "PER".into()],
        )
        .unwrap();
        let ex = toy_extractor(&corpus);
        let samples = prepare_samples(&toy_task(), &ex, &corpus).unwrap();
        // fragments of a 3-token sentence with max len 3: 3 + 2 + 1 = 6
        assert_eq!(samples.len(), 6);
        let positives: Vec<usize> = samples.iter().map(|s| s.label).collect();
        // (0,1) is the second fragment in (start, end) order: (0,0), (0,1), (0,2), ...
        assert_eq!(positives, vec![0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn partial_overlaps_are_none() {
        let corpus = Corpus::new(
            "t",
            "train",
            vec![vec!["New".into(), "York".into()]],
            vec![vec![GoldSpan { start: 0, end: 1, label: "LOC".into() }]],
            vec!["LOC".into()],
        )
        .unwrap();
        let ex = toy_extractor(&corpus);
        let t = TaskSpec { labels: vec!["LOC".into()], ..toy_task() };
        let samples = prepare_samples(&t, &ex, &corpus).unwrap();
        // (0,0), (0,1), (1,1): only the exact match is positive
        assert_eq!(
            samples.iter().map(|s| s.label).collect::<Vec<_>>(),
            vec![0, 1, 0]
        );
    }

    #[test]
    fn unknown_corpus_label_is_an_input_error() {
        let corpus = Corpus::new(
            "t",
            "train",
            vec![vec!["x".into()]],
            vec![vec![GoldSpan { start: 0, end: 0, label: "GPE".into() }]],
            vec!["GPE".into()],
        )
        .unwrap();
        let ex = toy_extractor(&corpus);
        assert!(prepare_samples(&toy_task(), &ex, &corpus).is_err());
    }
}
