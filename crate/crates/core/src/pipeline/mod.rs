//! From per-fragment class probabilities to non-overlapping entity spans,
//! and CoNLL-style exact-match scoring of those spans against gold.

mod classify;
mod decode;
mod eval;
mod synthetic;

pub use classify::{classify_fragments, evaluate, predictions_to_corpus};
pub use decode::{resolve_spans, EntitySpan, ScoredFragment};
pub use eval::{span_f1, EvalReport, PrfScores};
pub use synthetic::{make_synthetic_corpus, SyntheticSpec};
