use crate::error::Result;
use crate::features::sentence::{Fragment, Sentence};
use crate::features::vocab::{CharAlphabet, Vocab};
use crate::fofe::{encode, encode_prefixes, FloatFofe, SparseVec};

/// Feature slots in their fixed concatenation order. Word-context slots come
/// in including/excluding-the-fragment variants for both directions, each in
/// cased and uncased form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    FragBowCased,
    FragBowUncased,
    LeftInclCased,
    LeftExclCased,
    RightInclCased,
    RightExclCased,
    LeftInclUncased,
    LeftExclUncased,
    RightInclUncased,
    RightExclUncased,
    CharL2r,
    CharR2l,
}

impl Slot {
    pub const ALL: [Slot; 12] = [
        Slot::FragBowCased,
        Slot::FragBowUncased,
        Slot::LeftInclCased,
        Slot::LeftExclCased,
        Slot::RightInclCased,
        Slot::RightExclCased,
        Slot::LeftInclUncased,
        Slot::LeftExclUncased,
        Slot::RightInclUncased,
        Slot::RightExclUncased,
        Slot::CharL2r,
        Slot::CharR2l,
    ];

    pub fn index(self) -> usize {
        Slot::ALL.iter().position(|&s| s == self).unwrap()
    }

    /// Which index space the slot's sparse vector lives in.
    pub fn is_cased_word(self) -> bool {
        matches!(
            self,
            Slot::FragBowCased
                | Slot::LeftInclCased
                | Slot::LeftExclCased
                | Slot::RightInclCased
                | Slot::RightExclCased
        )
    }

    pub fn is_uncased_word(self) -> bool {
        matches!(
            self,
            Slot::FragBowUncased
                | Slot::LeftInclUncased
                | Slot::LeftExclUncased
                | Slot::RightInclUncased
                | Slot::RightExclUncased
        )
    }

    pub fn is_char(self) -> bool {
        matches!(self, Slot::CharL2r | Slot::CharR2l)
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::FragBowCased => "frag_bow_cased",
            Slot::FragBowUncased => "frag_bow_uncased",
            Slot::LeftInclCased => "left_fofe_incl_cased",
            Slot::LeftExclCased => "left_fofe_excl_cased",
            Slot::RightInclCased => "right_fofe_incl_cased",
            Slot::RightExclCased => "right_fofe_excl_cased",
            Slot::LeftInclUncased => "left_fofe_incl_uncased",
            Slot::LeftExclUncased => "left_fofe_excl_uncased",
            Slot::RightInclUncased => "right_fofe_incl_uncased",
            Slot::RightExclUncased => "right_fofe_excl_uncased",
            Slot::CharL2r => "char_fofe_l2r",
            Slot::CharR2l => "char_fofe_r2l",
        }
    }
}

/// Immutable per-fragment feature set: 12 sparse vectors plus, when the
/// char-CNN channel is enabled, the fragment's character index sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    codes: Vec<SparseVec>,
    char_indices: Option<Vec<u32>>,
}

impl FeatureBundle {
    pub fn slot(&self, s: Slot) -> &SparseVec {
        &self.codes[s.index()]
    }

    pub fn slots(&self) -> &[SparseVec] {
        &self.codes
    }

    pub fn char_indices(&self) -> Option<&[u32]> {
        self.char_indices.as_deref()
    }
}

/// Per-sentence FOFE caches so every fragment's context codes come out in
/// O(nonzeros) instead of re-encoding the whole sentence.
///
/// `prefix[i]` encodes `tokens[0..i]` left-to-right (`prefix[0]` is the zero
/// code); `suffix[i]` encodes `tokens[i..N]` right-to-left, so the token at
/// `i` carries weight 1 (`suffix[N]` is the zero code).
#[derive(Debug, Clone)]
pub struct SentenceCodes {
    pub cased_prefix: Vec<SparseVec>,
    pub cased_suffix: Vec<SparseVec>,
    pub uncased_prefix: Vec<SparseVec>,
    pub uncased_suffix: Vec<SparseVec>,
}

fn prefix_codes(ids: &[u32], alpha: f64, vocab_size: u32) -> Result<Vec<SparseVec>> {
    let mut out = Vec::with_capacity(ids.len() + 1);
    out.push(SparseVec::zero(vocab_size));
    for code in encode_prefixes::<f64>(ids, &alpha, vocab_size)? {
        out.push(SparseVec::from(&code));
    }
    Ok(out)
}

fn suffix_codes(ids: &[u32], alpha: f64, vocab_size: u32) -> Result<Vec<SparseVec>> {
    let reversed: Vec<u32> = ids.iter().rev().copied().collect();
    let rev_prefixes = encode_prefixes::<f64>(&reversed, &alpha, vocab_size)?;
    let n = ids.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        // tokens[i..N] reversed == reversed[0..N-i]
        out.push(SparseVec::from(&rev_prefixes[n - i - 1]));
    }
    out.push(SparseVec::zero(vocab_size));
    Ok(out)
}

/// Builds feature bundles; immutable after construction, pure thereafter.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    pub cased_vocab: Vocab,
    pub uncased_vocab: Vocab,
    pub alphabet: CharAlphabet,
    pub alpha_w: f64,
    pub alpha_c: f64,
    pub max_fragment_len: usize,
    pub use_char_cnn: bool,
}

impl FeatureExtractor {
    pub fn sentence(&self, tokens: &[String]) -> Sentence {
        Sentence::new(tokens.to_vec(), &self.cased_vocab, &self.uncased_vocab)
    }

    pub fn sentence_codes(&self, s: &Sentence) -> Result<SentenceCodes> {
        let cv = self.cased_vocab.size();
        let uv = self.uncased_vocab.size();
        Ok(SentenceCodes {
            cased_prefix: prefix_codes(&s.cased_ids, self.alpha_w, cv)?,
            cased_suffix: suffix_codes(&s.cased_ids, self.alpha_w, cv)?,
            uncased_prefix: prefix_codes(&s.uncased_ids, self.alpha_w, uv)?,
            uncased_suffix: suffix_codes(&s.uncased_ids, self.alpha_w, uv)?,
        })
    }

    pub fn bundle(
        &self,
        s: &Sentence,
        codes: &SentenceCodes,
        frag: Fragment,
    ) -> Result<FeatureBundle> {
        frag.validate(s.len(), self.max_fragment_len)?;
        let cv = self.cased_vocab.size();
        let uv = self.uncased_vocab.size();

        let bow = |ids: &[u32], dim: u32| -> Result<SparseVec> {
            SparseVec::from_entries(
                ids[frag.start..=frag.end].iter().map(|&i| (i, 1.0)),
                dim,
            )
        };

        let (l2r, r2l, char_indices) = self.char_codes(s, frag)?;

        let mut slots = Vec::with_capacity(12);
        for slot in Slot::ALL {
            slots.push(match slot {
                Slot::FragBowCased => bow(&s.cased_ids, cv)?,
                Slot::FragBowUncased => bow(&s.uncased_ids, uv)?,
                Slot::LeftInclCased => codes.cased_prefix[frag.end + 1].clone(),
                Slot::LeftExclCased => codes.cased_prefix[frag.start].clone(),
                Slot::RightInclCased => codes.cased_suffix[frag.start].clone(),
                Slot::RightExclCased => codes.cased_suffix[frag.end + 1].clone(),
                Slot::LeftInclUncased => codes.uncased_prefix[frag.end + 1].clone(),
                Slot::LeftExclUncased => codes.uncased_prefix[frag.start].clone(),
                Slot::RightInclUncased => codes.uncased_suffix[frag.start].clone(),
                Slot::RightExclUncased => codes.uncased_suffix[frag.end + 1].clone(),
                Slot::CharL2r => l2r.clone(),
                Slot::CharR2l => r2l.clone(),
            });
        }
        Ok(FeatureBundle {
            codes: slots,
            char_indices: self.use_char_cnn.then_some(char_indices),
        })
    }

    fn char_codes(&self, s: &Sentence, frag: Fragment) -> Result<(SparseVec, SparseVec, Vec<u32>)> {
        // Multi-token fragments join their tokens with a single space.
        let surface = s.tokens[frag.start..=frag.end].join(" ");
        let indices = self.alphabet.encode_str(&surface);
        let (l2r, r2l) = char_features(&indices, self.alpha_c, &self.alphabet)?;
        Ok((l2r, r2l, indices))
    }
}

/// Word-level features of one fragment, computed from scratch (the extractor
/// uses cached prefix/suffix codes that must agree with this path).
pub fn word_features(
    s: &Sentence,
    frag: Fragment,
    alpha_w: f64,
    cased_vocab: &Vocab,
    uncased_vocab: &Vocab,
) -> Result<Vec<(Slot, SparseVec)>> {
    let n = s.len();
    let mut out = Vec::new();
    for (ids, dim, slots) in [
        (
            &s.cased_ids,
            cased_vocab.size(),
            [
                Slot::FragBowCased,
                Slot::LeftInclCased,
                Slot::LeftExclCased,
                Slot::RightInclCased,
                Slot::RightExclCased,
            ],
        ),
        (
            &s.uncased_ids,
            uncased_vocab.size(),
            [
                Slot::FragBowUncased,
                Slot::LeftInclUncased,
                Slot::LeftExclUncased,
                Slot::RightInclUncased,
                Slot::RightExclUncased,
            ],
        ),
    ] {
        let fofe = |toks: &[u32], reverse: bool| -> Result<SparseVec> {
            let seq: Vec<u32> = if reverse {
                toks.iter().rev().copied().collect()
            } else {
                toks.to_vec()
            };
            Ok(SparseVec::from(&encode::<f64>(&seq, &alpha_w, dim)?))
        };
        let bow = SparseVec::from_entries(
            ids[frag.start..=frag.end].iter().map(|&i| (i, 1.0)),
            dim,
        )?;
        out.push((slots[0], bow));
        out.push((slots[1], fofe(&ids[..=frag.end], false)?));
        out.push((slots[2], fofe(&ids[..frag.start], false)?));
        out.push((slots[3], fofe(&ids[frag.start..n], true)?));
        out.push((slots[4], fofe(&ids[frag.end + 1..n], true)?));
    }
    Ok(out)
}

/// Character FOFE codes of a fragment surface: left-to-right and
/// right-to-left, unknown characters at index 0.
pub fn char_features(
    indices: &[u32],
    alpha_c: f64,
    alphabet: &CharAlphabet,
) -> Result<(SparseVec, SparseVec)> {
    let dim = alphabet.size();
    let l2r = encode::<f64>(indices, &alpha_c, dim)?;
    let reversed: Vec<u32> = indices.iter().rev().copied().collect();
    let r2l = encode::<f64>(&reversed, &alpha_c, dim)?;
    Ok((SparseVec::from(&l2r), SparseVec::from(&r2l)))
}

#[allow(unused)]
fn fofe_to_sparse(code: &FloatFofe) -> SparseVec {
    SparseVec::from(code)
}
