use serde::Serialize;

use crate::mtl::TaskSpec;

/// One classified fragment: the full class distribution plus its argmax.
/// Class 0 is NONE.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredFragment {
    pub start: usize,
    pub end: usize,
    pub probs: Vec<f64>,
    pub argmax: usize,
    pub prob: f64,
}

impl ScoredFragment {
    pub fn new(start: usize, end: usize, probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9, "not a distribution");
        let (argmax, &p) = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty distribution");
        ScoredFragment { start, end, probs, argmax, prob: p }
    }

    fn len(&self) -> usize {
        self.end - self.start + 1
    }

    fn overlaps(&self, other: &ScoredFragment) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// A decoded entity: a fragment committed to a non-NONE type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
    pub confidence: f64,
}

/// Threshold-then-greedy decoding of one sentence's scored fragments:
/// drop fragments whose argmax is NONE or below `threshold`, sort by
/// probability descending (ties: longer span, then smaller start), greedily
/// accept non-overlapping fragments, and return them in sentence order.
pub fn resolve_spans(
    fragments: &[ScoredFragment],
    spec: &TaskSpec,
    threshold: f64,
) -> Vec<EntitySpan> {
    let mut survivors: Vec<&ScoredFragment> = fragments
        .iter()
        .filter(|f| f.argmax != 0 && f.prob >= threshold)
        .collect();
    survivors.sort_by(|a, b| {
        b.prob
            .partial_cmp(&a.prob)
            .unwrap()
            .then(b.len().cmp(&a.len()))
            .then(a.start.cmp(&b.start))
    });
    let mut accepted: Vec<&ScoredFragment> = Vec::new();
    for f in survivors {
        if accepted.iter().all(|a| !a.overlaps(f)) {
            accepted.push(f);
        }
    }
    accepted.sort_by_key(|f| f.start);
    debug_assert!(
        accepted.windows(2).all(|w| w[0].end < w[1].start),
        "resolver produced overlapping spans"
    );
    accepted
        .iter()
        .map(|f| EntitySpan {
            start: f.start,
            end: f.end,
            label: spec.label_of(f.argmax).expect("non-NONE argmax").to_string(),
            confidence: f.prob,
        })
        .collect()
}
