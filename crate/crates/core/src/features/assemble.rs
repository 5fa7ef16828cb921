use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::bundle::{FeatureBundle, Slot};
use crate::features::char_cnn::{CharCnn, CnnFilterSpec, CnnTrace};
use crate::fofe::project;
use crate::linalg::Matrix;

/// Sizes that pin every slot's projection and therefore the network input
/// dimension. Constant across all fragments under one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGeometry {
    pub cased_vocab_size: u32,
    pub uncased_vocab_size: u32,
    pub alphabet_size: u32,
    pub word_proj_dim: usize,
    pub char_proj_dim: usize,
    /// `None` disables the char-CNN channel.
    pub char_cnn_filters: Option<Vec<CnnFilterSpec>>,
}

impl FeatureGeometry {
    pub fn slot_rows(&self, slot: Slot) -> u32 {
        if slot.is_char() {
            self.alphabet_size
        } else if slot.is_cased_word() {
            self.cased_vocab_size
        } else {
            self.uncased_vocab_size
        }
    }

    pub fn slot_cols(&self, slot: Slot) -> usize {
        if slot.is_char() {
            self.char_proj_dim
        } else {
            self.word_proj_dim
        }
    }

    pub fn cnn_output_dim(&self) -> usize {
        self.char_cnn_filters
            .as_ref()
            .map_or(0, |fs| fs.iter().map(|f| f.count).sum())
    }

    /// Dimension of the assembled input vector: ten projected word slots,
    /// two projected character slots, plus the char-CNN outputs.
    pub fn input_dim(&self) -> usize {
        10 * self.word_proj_dim + 2 * self.char_proj_dim + self.cnn_output_dim()
    }
}

/// One projection matrix per sparse feature slot, in [`Slot::ALL`] order.
/// The word-slot matrices are the ones seeded from pre-trained embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    pub mats: Vec<Matrix>,
}

impl ProjectionSet {
    pub fn new(mats: Vec<Matrix>) -> Self {
        assert_eq!(mats.len(), Slot::ALL.len(), "one matrix per slot");
        ProjectionSet { mats }
    }

    pub fn mat(&self, slot: Slot) -> &Matrix {
        &self.mats[slot.index()]
    }
}

/// Project every sparse slot and concatenate, in slot order, followed by the
/// char-CNN outputs when that channel is enabled. Returns the dense input
/// vector and the CNN trace needed for backprop.
pub fn assemble_input(
    bundle: &FeatureBundle,
    projections: &ProjectionSet,
    char_cnn: Option<&CharCnn>,
) -> Result<(Vec<f64>, Option<CnnTrace>)> {
    let mut out = Vec::new();
    for slot in Slot::ALL {
        let projected = project(bundle.slot(slot), projections.mat(slot))?;
        out.extend_from_slice(&projected);
    }
    let trace = match (char_cnn, bundle.char_indices()) {
        (Some(cnn), Some(indices)) => {
            let (cnn_out, trace) = cnn.forward(indices)?;
            out.extend_from_slice(&cnn_out);
            Some(trace)
        }
        (Some(_), None) => {
            return Err(Error::Shape(
                "char-CNN enabled but the bundle carries no character indices".into(),
            ))
        }
        _ => None,
    };
    Ok((out, trace))
}
