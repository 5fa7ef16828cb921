use crate::error::Result;
use crate::features::{enumerate_fragments, FeatureExtractor};
use crate::io::{Corpus, GoldSpan};
use crate::mtl::{MtlNetwork, TaskSpec};
use crate::pipeline::decode::{resolve_spans, EntitySpan, ScoredFragment};
use crate::pipeline::eval::{span_f1, EvalReport};

/// Score every fragment of one sentence in evaluation mode (no dropout).
pub fn classify_fragments(
    net: &MtlNetwork,
    extractor: &FeatureExtractor,
    task: usize,
    tokens: &[String],
) -> Result<Vec<ScoredFragment>> {
    let sent = extractor.sentence(tokens);
    let codes = extractor.sentence_codes(&sent)?;
    let mut out = Vec::new();
    for frag in enumerate_fragments(sent.len(), extractor.max_fragment_len) {
        let bundle = extractor.bundle(&sent, &codes, frag)?;
        let trace = net.forward(&bundle, task, 0, None)?;
        out.push(ScoredFragment::new(frag.start, frag.end, trace.probs));
    }
    Ok(out)
}

/// Decode and score a whole corpus for one task. Returns the report and the
/// per-sentence predicted spans.
pub fn evaluate(
    net: &MtlNetwork,
    extractor: &FeatureExtractor,
    spec: &TaskSpec,
    corpus: &Corpus,
    threshold: f64,
) -> Result<(EvalReport, Vec<Vec<EntitySpan>>)> {
    let mut predictions = Vec::with_capacity(corpus.len());
    for tokens in &corpus.sentences {
        let scored = classify_fragments(net, extractor, spec.id, tokens)?;
        predictions.push(resolve_spans(&scored, spec, threshold));
    }
    let report = span_f1(&predictions, &corpus.spans)?;
    Ok((report, predictions))
}

/// Rebuild a corpus whose gold spans are the given predictions (same
/// sentences), for export in CoNLL two-column form.
pub fn predictions_to_corpus(
    source: &Corpus,
    predictions: &[Vec<EntitySpan>],
    labels: &[String],
) -> Result<Corpus> {
    let spans = predictions
        .iter()
        .map(|sent| {
            sent.iter()
                .map(|p| GoldSpan { start: p.start, end: p.end, label: p.label.clone() })
                .collect()
        })
        .collect();
    Corpus::new(
        source.name.clone(),
        format!("{}-predictions", source.split),
        source.sentences.clone(),
        spans,
        labels.to_vec(),
    )
}
