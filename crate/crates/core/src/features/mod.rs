//! Candidate-fragment enumeration and feature building.
//!
//! Every span of up to `max_fragment_len` tokens is a candidate entity. Its
//! feature bundle holds bag-of-words vectors for the fragment itself, FOFE
//! codes of the left and right contexts (including and excluding the
//! fragment, cased and uncased), character-level FOFE codes of the fragment
//! surface, and optionally the character index sequence for a char-CNN
//! channel. Bundles are sparse; they only become dense when projected
//! through the trainable projection matrices in [`assemble_input`].

mod assemble;
mod bundle;
mod char_cnn;
mod sentence;
mod vocab;

pub use assemble::{assemble_input, FeatureGeometry, ProjectionSet};
pub use bundle::{
    char_features, word_features, FeatureBundle, FeatureExtractor, SentenceCodes, Slot,
};
pub use char_cnn::{CharCnn, CharCnnGrads, CnnFilter, CnnFilterSpec, CnnTrace};
pub use sentence::{enumerate_fragments, Fragment, Sentence};
pub use vocab::{CharAlphabet, Vocab};
