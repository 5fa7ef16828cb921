use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Gold entity span, inclusive 0-based token indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoldSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

/// A labelled corpus: tokenized sentences with per-sentence gold spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub split: String,
    pub sentences: Vec<Vec<String>>,
    pub spans: Vec<Vec<GoldSpan>>,
    pub label_set: Vec<String>,
}

impl Corpus {
    pub fn new(
        name: impl Into<String>,
        split: impl Into<String>,
        sentences: Vec<Vec<String>>,
        spans: Vec<Vec<GoldSpan>>,
        label_set: Vec<String>,
    ) -> Result<Self> {
        let c = Corpus {
            name: name.into(),
            split: split.into(),
            sentences,
            spans,
            label_set,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sentences.len() != self.spans.len() {
            return Err(Error::Input("sentence/span count mismatch".into()));
        }
        for (i, (sent, spans)) in self.sentences.iter().zip(&self.spans).enumerate() {
            for s in spans {
                if s.start > s.end || s.end >= sent.len() {
                    return Err(Error::Input(format!(
                        "span ({}, {}) outside sentence {} of {} tokens",
                        s.start,
                        s.end,
                        i,
                        sent.len()
                    )));
                }
                if !self.label_set.contains(&s.label) {
                    return Err(Error::Input(format!(
                        "span label {:?} not in the corpus label set",
                        s.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Stable content hash over a canonical serialization; platform
    /// independent.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (sent, spans) in self.sentences.iter().zip(&self.spans) {
            for t in sent {
                h.update(t.as_bytes());
                h.update([0u8]);
            }
            h.update([1u8]);
            let mut sorted: Vec<&GoldSpan> = spans.iter().collect();
            sorted.sort();
            for s in sorted {
                h.update(s.start.to_le_bytes());
                h.update(s.end.to_le_bytes());
                h.update(s.label.as_bytes());
                h.update([2u8]);
            }
        }
        for l in &self.label_set {
            h.update(l.as_bytes());
            h.update([3u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Seeded subsample of `fraction` of the sentences (at least one when the
    /// corpus is nonempty and fraction > 0), preserving original order.
    pub fn subsample(&self, fraction: f64, seed: u64) -> Result<Corpus> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Config(format!("fraction {fraction} outside [0, 1]")));
        }
        if fraction >= 1.0 {
            return Ok(self.clone());
        }
        let keep = if fraction == 0.0 {
            0
        } else {
            ((self.len() as f64 * fraction).round() as usize).max(1)
        };
        let mut indices: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        indices.truncate(keep);
        indices.sort_unstable();
        Ok(Corpus {
            name: self.name.clone(),
            split: format!("{}[{:.0}%]", self.split, fraction * 100.0),
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            spans: indices.iter().map(|&i| self.spans[i].clone()).collect(),
            label_set: self.label_set.clone(),
        })
    }

    /// All distinct tokens in sentence order (for vocabulary building).
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }
}
