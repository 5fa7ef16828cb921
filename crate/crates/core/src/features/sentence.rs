use crate::error::{Error, Result};
use crate::features::vocab::Vocab;

/// Tokenized sentence with parallel cased and uncased index sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub cased_ids: Vec<u32>,
    pub uncased_ids: Vec<u32>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, cased: &Vocab, uncased: &Vocab) -> Self {
        let cased_ids = tokens.iter().map(|t| cased.lookup(t)).collect();
        let uncased_ids = tokens
            .iter()
            .map(|t| uncased.lookup(&t.to_lowercase()))
            .collect();
        Sentence {
            tokens,
            cased_ids,
            uncased_ids,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Candidate entity span, inclusive 0-based token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fragment {
    pub start: usize,
    pub end: usize,
}

impl Fragment {
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "fragment start after end");
        Fragment { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn validate(&self, sentence_len: usize, max_fragment_len: usize) -> Result<()> {
        if self.end >= sentence_len {
            return Err(Error::Input(format!(
                "fragment ({}, {}) outside sentence of {} tokens",
                self.start, self.end, sentence_len
            )));
        }
        if self.len() > max_fragment_len {
            return Err(Error::Input(format!(
                "fragment of {} tokens exceeds max length {}",
                self.len(),
                max_fragment_len
            )));
        }
        Ok(())
    }
}

/// All spans of up to `max_fragment_len` tokens, ordered by (start, end).
pub fn enumerate_fragments(sentence_len: usize, max_fragment_len: usize) -> Vec<Fragment> {
    assert!(max_fragment_len >= 1, "max fragment length must be >= 1");
    let mut out = Vec::new();
    for start in 0..sentence_len {
        let last = (start + max_fragment_len).min(sentence_len);
        for end in start..last {
            out.push(Fragment { start, end });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_listing_small_case() {
        let frags = enumerate_fragments(3, 2);
        let expected: Vec<(usize, usize)> = vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)];
        let got: Vec<(usize, usize)> = frags.iter().map(|f| (f.start, f.end)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn single_token_sentence() {
        assert_eq!(enumerate_fragments(1, 7), vec![Fragment::new(0, 0)]);
    }

    #[test]
    fn empty_sentence_yields_no_fragments() {
        assert!(enumerate_fragments(0, 3).is_empty());
    }

    #[test]
    fn count_matches_brute_force_formula() {
        for n in 0..20 {
            for max_len in 1..10 {
                let expected: usize = (0..n).map(|i| max_len.min(n - i)).sum();
                assert_eq!(enumerate_fragments(n, max_len).len(), expected);
            }
        }
        // N=10, max_len=7 -> 49
        assert_eq!(enumerate_fragments(10, 7).len(), 49);
    }

    #[test]
    fn fragment_validation() {
        let f = Fragment::new(1, 3);
        assert!(f.validate(4, 7).is_ok());
        assert!(f.validate(3, 7).is_err());
        assert!(f.validate(4, 2).is_err());
    }
}
