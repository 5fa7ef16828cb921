//! Hard parameter sharing across tasks: one shared dense stack fed by the
//! FOFE feature projections, plus a private stack and softmax head per task.
//! Each update step touches the shared parameters and exactly one task's
//! private parameters; the other tasks' tensors (and their optimizer
//! velocities) are left bit-identical.

mod network;
mod task;
mod train;

pub use network::{
    apply_update, build_network, sample_masks, Gradients, MaskSet, MtlNetwork, NetworkDiffFn,
    OptimizerState, Scope, TaskGrads, TaskStack, Trace,
};
pub use task::{prepare_samples, PreparedSample, TaskSpec};
pub use train::{
    effective_weights, fit, fit_plain, sample_task, EpochRecord, FitResult, PlainNet, TaskData,
};
