use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::io::GoldSpan;
use crate::pipeline::decode::EntitySpan;

/// Exact-match counts and derived scores for one entity type (or micro).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PrfScores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScores {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let pred = tp + fp;
        let gold = tp + fn_;
        // Empty-side conventions: a vacuous side scores 1 against an empty
        // counterpart and 0 otherwise; F1 is 0 whenever P + R is 0.
        let precision = if pred > 0 {
            tp as f64 / pred as f64
        } else if gold == 0 {
            1.0
        } else {
            0.0
        };
        let recall = if gold > 0 {
            tp as f64 / gold as f64
        } else if pred == 0 {
            1.0
        } else {
            0.0
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PrfScores { tp, fp, fn_, precision, recall, f1 }
    }
}

/// Per-type and micro-averaged exact span + type match scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_type: BTreeMap<String, PrfScores>,
    pub micro: PrfScores,
}

/// CoNLL-style scoring: a prediction is a true positive iff its (sentence,
/// start, end, type) exactly matches a gold span. Inputs are parallel
/// per-sentence lists.
pub fn span_f1(predicted: &[Vec<EntitySpan>], gold: &[Vec<GoldSpan>]) -> Result<EvalReport> {
    if predicted.len() != gold.len() {
        return Err(Error::Input(format!(
            "{} predicted sentences vs {} gold sentences",
            predicted.len(),
            gold.len()
        )));
    }
    let mut tp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fn_: BTreeMap<&str, usize> = BTreeMap::new();
    for (pred, gold) in predicted.iter().zip(gold) {
        let mut gold_set: BTreeSet<(usize, usize, &str)> = BTreeSet::new();
        for g in gold {
            if !gold_set.insert((g.start, g.end, &g.label)) {
                return Err(Error::Input(format!(
                    "duplicate gold span ({}, {}, {})",
                    g.start, g.end, g.label
                )));
            }
        }
        for p in pred {
            if gold_set.remove(&(p.start, p.end, p.label.as_str())) {
                *tp.entry(&p.label).or_default() += 1;
            } else {
                *fp.entry(&p.label).or_default() += 1;
            }
        }
        for (_, _, label) in gold_set {
            *fn_.entry(label).or_default() += 1;
        }
    }
    let types: BTreeSet<&str> = tp.keys().chain(fp.keys()).chain(fn_.keys()).copied().collect();
    let per_type: BTreeMap<String, PrfScores> = types
        .iter()
        .map(|&t| {
            let scores = PrfScores::from_counts(
                tp.get(t).copied().unwrap_or(0),
                fp.get(t).copied().unwrap_or(0),
                fn_.get(t).copied().unwrap_or(0),
            );
            (t.to_string(), scores)
        })
        .collect();
    let micro = PrfScores::from_counts(
        tp.values().sum(),
        fp.values().sum(),
        fn_.values().sum(),
    );
    Ok(EvalReport { per_type, micro })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(start: usize, end: usize, label: &str) -> EntitySpan {
        EntitySpan { start, end, label: label.into(), confidence: 1.0 }
    }

    fn gold(start: usize, end: usize, label: &str) -> GoldSpan {
        GoldSpan { start, end, label: label.into() }
    }

    #[test]
    fn two_of_four_predicted_five_gold() {
        // P = 2/4 = 0.5, R = 2/5 = 0.4, F1 = 4/9
        let predicted = vec![vec![
            span(0, 0, "PER"),
            span(2, 3, "LOC"),
            span(5, 5, "LOC"),
            span(7, 8, "PER"),
        ]];
        let g = vec![vec![
            gold(0, 0, "PER"),
            gold(2, 3, "LOC"),
            gold(4, 4, "LOC"),
            gold(6, 6, "PER"),
            gold(9, 9, "PER"),
        ]];
        let r = span_f1(&predicted, &g).unwrap();
        assert_eq!(r.micro.precision, 0.5);
        assert_eq!(r.micro.recall, 0.4);
        assert!((r.micro.f1 - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictions_score_one() {
        let predicted = vec![vec![span(0, 1, "LOC")], vec![]];
        let g = vec![vec![gold(0, 1, "LOC")], vec![]];
        let r = span_f1(&predicted, &g).unwrap();
        assert_eq!(r.micro.precision, 1.0);
        assert_eq!(r.micro.recall, 1.0);
        assert_eq!(r.micro.f1, 1.0);
    }

    #[test]
    fn empty_predictions_against_gold_score_zero() {
        let r = span_f1(&[vec![]], &[vec![gold(0, 0, "PER")]]).unwrap();
        assert_eq!(r.micro.precision, 0.0);
        assert_eq!(r.micro.recall, 0.0);
        assert_eq!(r.micro.f1, 0.0);
    }

    #[test]
    fn both_empty_is_perfect() {
        let r = span_f1(&[vec![]], &[vec![]]).unwrap();
        assert_eq!(r.micro.f1, 1.0);
    }

    #[test]
    fn type_must_match_exactly() {
        let r = span_f1(&[vec![span(0, 1, "LOC")]], &[vec![gold(0, 1, "PER")]]).unwrap();
        assert_eq!(r.micro.tp, 0);
        assert_eq!(r.per_type["LOC"].fp, 1);
        assert_eq!(r.per_type["PER"].fn_, 1);
    }

    #[test]
    fn micro_counts_are_per_type_sums() {
        let predicted = vec![vec![span(0, 0, "A"), span(2, 2, "B"), span(4, 4, "B")]];
        let g = vec![vec![gold(0, 0, "A"), gold(2, 2, "B"), gold(6, 6, "C")]];
        let r = span_f1(&predicted, &g).unwrap();
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for s in r.per_type.values() {
            tp += s.tp;
            fp += s.fp;
            fn_ += s.fn_;
        }
        assert_eq!((tp, fp, fn_), (r.micro.tp, r.micro.fp, r.micro.fn_));
    }

    #[test]
    fn duplicate_gold_span_is_an_input_error() {
        let g = vec![vec![gold(0, 0, "PER"), gold(0, 0, "PER")]];
        assert!(span_f1(&[vec![]], &g).is_err());
    }

    #[test]
    fn order_of_spans_does_not_matter() {
        let predicted = vec![vec![span(2, 3, "LOC"), span(0, 0, "PER")]];
        let flipped = vec![vec![span(0, 0, "PER"), span(2, 3, "LOC")]];
        let g = vec![vec![gold(0, 0, "PER"), gold(2, 3, "LOC"), gold(5, 5, "LOC")]];
        assert_eq!(span_f1(&predicted, &g).unwrap(), span_f1(&flipped, &g).unwrap());
    }
}
