//! Fixed-size ordinally forgetting encoding.
//!
//! A sequence of vocabulary indices is folded into a single sparse vector by
//! the recursion `z_n = alpha * z_{n-1} + e_n` with `z_0 = 0`, where `e_n` is
//! the one-hot vector of the n-th token and `alpha` is a constant forgetting
//! factor in (0, 1). For `alpha <= 1/2` the mapping is injective and
//! [`decode_exact`] reconstructs the sequence; for `alpha > 1/2` uniqueness
//! holds almost everywhere and [`collision_search`] probes it empirically.
//!
//! Two arithmetic modes are supported: exact rationals (arbitrary-precision,
//! required by the decoder) and `f64` (used for feature extraction and
//! training, with tiny weights pruned).

mod alpha;
mod code;
mod collision;
mod decode;

pub use alpha::{parse_rational, Alpha};
pub use code::{
    encode, encode_prefixes, encode_reversed, project, project_code, ExactFofe, FloatFofe,
    FofeCode, FofeWeight, SparseVec, FLOAT_PRUNE_THRESHOLD,
};
pub use collision::{collision_search, CollisionReport};
pub use decode::decode_exact;
