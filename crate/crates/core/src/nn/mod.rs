//! Dense feedforward machinery built from scratch: layers, softmax
//! cross-entropy, inverted dropout, Glorot initialization, SGD with momentum
//! and a finite-difference gradient checker. The multi-task assembly lives in
//! [`crate::mtl`].

mod dropout;
mod gradcheck;
mod init;
mod layer;
mod optim;

pub use dropout::{apply_mask, sample_mask};
pub use gradcheck::{check_gradients, DiffFn, GradCheckReport};
pub use init::glorot_uniform;
pub use layer::{softmax, softmax_xent, Activation, DenseLayer, SoftmaxHead};
pub use optim::momentum_update;
