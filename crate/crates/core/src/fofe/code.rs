use num_rational::BigRational;
use num_traits::Num;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Float-mode entries below this are dropped; `alpha^k` stops mattering long
/// before `f64` underflows.
pub const FLOAT_PRUNE_THRESHOLD: f64 = 1e-12;

/// Scalar usable as a FOFE weight: `f64` or an exact rational.
pub trait FofeWeight: Num + Clone + PartialOrd {
    /// Whether an entry is small enough to prune (float mode only).
    fn negligible(&self) -> bool {
        false
    }
}

impl FofeWeight for f64 {
    fn negligible(&self) -> bool {
        self.abs() < FLOAT_PRUNE_THRESHOLD
    }
}

impl FofeWeight for BigRational {}

/// Sparse FOFE code of a token sequence: index -> positive weight, plus the
/// forgetting factor and sequence length that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FofeCode<W> {
    weights: BTreeMap<u32, W>,
    alpha: W,
    vocab_size: u32,
    length: usize,
}

pub type FloatFofe = FofeCode<f64>;
pub type ExactFofe = FofeCode<BigRational>;

impl<W: FofeWeight> FofeCode<W> {
    /// Assemble a code from parts, e.g. when parsing one off the wire.
    pub fn from_parts(
        weights: BTreeMap<u32, W>,
        alpha: W,
        vocab_size: u32,
        length: usize,
    ) -> Result<Self> {
        check_alpha(&alpha)?;
        for (&idx, w) in &weights {
            if idx >= vocab_size {
                return Err(Error::Input(format!(
                    "index {idx} out of range for vocab of size {vocab_size}"
                )));
            }
            if *w <= W::zero() {
                return Err(Error::Input(format!("non-positive weight at index {idx}")));
            }
        }
        Ok(FofeCode {
            weights,
            alpha,
            vocab_size,
            length,
        })
    }

    pub fn weights(&self) -> &BTreeMap<u32, W> {
        &self.weights
    }

    pub fn alpha(&self) -> &W {
        &self.alpha
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn get(&self, idx: u32) -> Option<&W> {
        self.weights.get(&idx)
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// Sum of all stored weights; equals `(1 - alpha^N) / (1 - alpha)` up to
    /// float pruning.
    pub fn mass(&self) -> W {
        self.weights
            .values()
            .fold(W::zero(), |acc, w| acc + w.clone())
    }
}

fn check_alpha<W: FofeWeight>(alpha: &W) -> Result<()> {
    if !(*alpha > W::zero() && *alpha < W::one()) {
        return Err(Error::Config("forgetting factor must be in (0, 1)".into()));
    }
    Ok(())
}

fn check_tokens(tokens: &[u32], vocab_size: u32) -> Result<()> {
    if let Some(&bad) = tokens.iter().find(|&&t| t >= vocab_size) {
        return Err(Error::Input(format!(
            "token index {bad} out of range for vocab of size {vocab_size}"
        )));
    }
    Ok(())
}

fn push_token<W: FofeWeight>(weights: &mut BTreeMap<u32, W>, alpha: &W, token: u32) {
    let mut dead = Vec::new();
    for (&idx, w) in weights.iter_mut() {
        *w = w.clone() * alpha.clone();
        if w.negligible() {
            dead.push(idx);
        }
    }
    for idx in dead {
        weights.remove(&idx);
    }
    let entry = weights.entry(token).or_insert_with(W::zero);
    *entry = entry.clone() + W::one();
}

/// Encode a full sequence: `z_n = alpha * z_{n-1} + e_n`, `z_0 = 0`.
pub fn encode<W: FofeWeight>(tokens: &[u32], alpha: &W, vocab_size: u32) -> Result<FofeCode<W>> {
    check_alpha(alpha)?;
    check_tokens(tokens, vocab_size)?;
    let mut weights = BTreeMap::new();
    for &t in tokens {
        push_token(&mut weights, alpha, t);
    }
    Ok(FofeCode {
        weights,
        alpha: alpha.clone(),
        vocab_size,
        length: tokens.len(),
    })
}

/// Codes of every non-empty prefix, `[z_1 .. z_N]`, computed incrementally.
pub fn encode_prefixes<W: FofeWeight>(
    tokens: &[u32],
    alpha: &W,
    vocab_size: u32,
) -> Result<Vec<FofeCode<W>>> {
    check_alpha(alpha)?;
    check_tokens(tokens, vocab_size)?;
    let mut weights: BTreeMap<u32, W> = BTreeMap::new();
    let mut out = Vec::with_capacity(tokens.len());
    for (n, &t) in tokens.iter().enumerate() {
        push_token(&mut weights, alpha, t);
        out.push(FofeCode {
            weights: weights.clone(),
            alpha: alpha.clone(),
            vocab_size,
            length: n + 1,
        });
    }
    Ok(out)
}

/// Encode the reversed sequence (right-to-left reading).
pub fn encode_reversed<W: FofeWeight>(
    tokens: &[u32],
    alpha: &W,
    vocab_size: u32,
) -> Result<FofeCode<W>> {
    let reversed: Vec<u32> = tokens.iter().rev().copied().collect();
    encode(&reversed, alpha, vocab_size)
}

/// Plain sparse `f64` vector; FOFE codes and bag-of-words vectors both lower
/// to this for projection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    weights: BTreeMap<u32, f64>,
    dim: u32,
}

impl SparseVec {
    pub fn zero(dim: u32) -> Self {
        SparseVec {
            weights: BTreeMap::new(),
            dim,
        }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>, dim: u32) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for (idx, w) in entries {
            if idx >= dim {
                return Err(Error::Input(format!(
                    "index {idx} out of range for dimension {dim}"
                )));
            }
            if w != 0.0 {
                *weights.entry(idx).or_insert(0.0) += w;
            }
        }
        weights.retain(|_, w| *w != 0.0);
        Ok(SparseVec { weights, dim })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, idx: u32) -> f64 {
        self.weights.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().map(|(&i, &w)| (i, w))
    }

    pub fn add(&mut self, idx: u32, w: f64) {
        assert!(idx < self.dim, "index out of range");
        let e = self.weights.entry(idx).or_insert(0.0);
        *e += w;
        if *e == 0.0 {
            self.weights.remove(&idx);
        }
    }

    pub fn scaled_sum(a: f64, x: &SparseVec, y: &SparseVec) -> SparseVec {
        assert_eq!(x.dim, y.dim, "dimension mismatch");
        let mut out = y.clone();
        for (idx, w) in x.iter() {
            out.add(idx, a * w);
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim as usize];
        for (idx, w) in self.iter() {
            v[idx as usize] = w;
        }
        v
    }
}

impl From<&FloatFofe> for SparseVec {
    fn from(code: &FloatFofe) -> Self {
        SparseVec {
            weights: code.weights.clone(),
            dim: code.vocab_size,
        }
    }
}

/// `sum_j w_j * matrix.row(j)`; cost scales with the nonzeros, not the vocab.
pub fn project(vec: &SparseVec, matrix: &Matrix) -> Result<Vec<f64>> {
    if matrix.rows != vec.dim() as usize {
        return Err(Error::Shape(format!(
            "projection expects {} rows, matrix has {}",
            vec.dim(),
            matrix.rows
        )));
    }
    let mut out = vec![0.0; matrix.cols];
    for (idx, w) in vec.iter() {
        for (o, m) in out.iter_mut().zip(matrix.row(idx as usize)) {
            *o += w * m;
        }
    }
    Ok(out)
}

/// Convenience: project a float-mode FOFE code.
pub fn project_code(code: &FloatFofe, matrix: &Matrix) -> Result<Vec<f64>> {
    project(&SparseVec::from(code), matrix)
}
