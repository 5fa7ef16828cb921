//! Corpus, embedding and checkpoint I/O.
//!
//! The model is span-local, so BIO tags exist only at this boundary: CoNLL
//! column files are converted to gold spans on load and spans back to BIO on
//! export. Checkpoints are versioned binary containers with little-endian
//! tensors and a JSON config block.

mod checkpoint;
mod conll;
mod corpus;
mod embeddings;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use conll::{load_conll, parse_conll, spans_to_bio, write_conll, ColumnSpec};
pub use corpus::{Corpus, GoldSpan};
pub use embeddings::{
    load_embeddings, write_binary_embeddings, write_text_embeddings, EmbeddingFormat,
    EmbeddingTable,
};
