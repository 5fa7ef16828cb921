use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply(&self, pre: &[f64]) -> Vec<f64> {
        match self {
            Activation::Relu => pre.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Identity => pre.to_vec(),
        }
    }

    /// In-place `g_pre = g_post * act'(pre)`.
    pub fn backprop(&self, pre: &[f64], g: &mut [f64]) {
        if let Activation::Relu = self {
            for (gi, &p) in g.iter_mut().zip(pre) {
                if p <= 0.0 {
                    *gi = 0.0;
                }
            }
        }
    }
}

/// Fully-connected layer, weight shape (out x in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Self {
        assert_eq!(weight.rows, bias.len(), "bias shape");
        DenseLayer {
            weight,
            bias,
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows
    }

    /// Returns (pre-activation, post-activation).
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "layer expects input of {}, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        let mut pre = self.weight.mul_vec(x);
        for (p, b) in pre.iter_mut().zip(&self.bias) {
            *p += b;
        }
        if !pre.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric("non-finite activation".into()));
        }
        let post = self.activation.apply(&pre);
        Ok((pre, post))
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    /// `g_post` is the gradient w.r.t. the post-activation output.
    pub fn backward(
        &self,
        x: &[f64],
        pre: &[f64],
        g_post: &[f64],
        g_weight: &mut Matrix,
        g_bias: &mut [f64],
    ) -> Vec<f64> {
        let mut g_pre = g_post.to_vec();
        self.activation.backprop(pre, &mut g_pre);
        g_weight.add_outer(&g_pre, x);
        for (gb, gp) in g_bias.iter_mut().zip(&g_pre) {
            *gb += gp;
        }
        self.weight.tr_mul_vec(&g_pre)
    }
}

/// Task output layer: affine map to logits, classified through softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxHead {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl SoftmaxHead {
    pub fn new(weight: Matrix, bias: Vec<f64>) -> Self {
        assert_eq!(weight.rows, bias.len(), "bias shape");
        assert!(weight.rows >= 2, "a softmax head needs at least 2 classes");
        SoftmaxHead { weight, bias }
    }

    pub fn class_count(&self) -> usize {
        self.weight.rows
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.weight.cols {
            return Err(Error::Shape(format!(
                "head expects input of {}, got {}",
                self.weight.cols,
                x.len()
            )));
        }
        let mut l = self.weight.mul_vec(x);
        for (li, b) in l.iter_mut().zip(&self.bias) {
            *li += b;
        }
        Ok(l)
    }
}

/// Max-shifted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// Cross-entropy loss of the true label under the softmax of `logits`.
/// Returns `(loss, probabilities)`.
pub fn softmax_xent(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(Error::Contract(format!(
            "label {label} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    let loss = log_sum - (logits[label] - max);
    Ok((loss, softmax(logits)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = DenseLayer::new(
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            vec![0.0, 0.0],
            Activation::Identity,
        );
        let (_, out) = layer.forward(&[3.0, -4.0]).unwrap();
        assert_eq!(out, vec![3.0, -4.0]);
    }

    #[test]
    fn relu_zeroes_negative_preactivations() {
        let layer = DenseLayer::new(
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
            vec![-10.0, -20.0],
            Activation::Relu,
        );
        let (_, out) = layer.forward(&[1.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn two_layer_hand_computed_forward() {
        // x = [1, 2]
        // L1 (relu): W = [[1, -1], [0, 1]], b = [0, -1] -> pre [-1, 1] -> post [0, 1]
        // L2 (identity): W = [[2, 1], [1, 0]], b = [1, 1] -> [2, 1]
        let l1 = DenseLayer::new(
            Matrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 1.0]]),
            vec![0.0, -1.0],
            Activation::Relu,
        );
        let l2 = DenseLayer::new(
            Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 0.0]]),
            vec![1.0, 1.0],
            Activation::Identity,
        );
        let (_, h) = l1.forward(&[1.0, 2.0]).unwrap();
        assert_eq!(h, vec![0.0, 1.0]);
        let (_, out) = l2.forward(&h).unwrap();
        assert_eq!(out, vec![2.0, 1.0]);
    }

    #[test]
    fn uniform_logits_loss_is_ln_k() {
        for k in 2..6 {
            let logits = vec![0.7; k];
            let (loss, probs) = softmax_xent(&logits, 0).unwrap();
            assert!((loss - (k as f64).ln()).abs() < 1e-12);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn extreme_logits_are_stable() {
        let (loss, probs) = softmax_xent(&[1000.0, 0.0], 0).unwrap();
        assert!(loss < 1e-9);
        assert!(probs.iter().all(|p| p.is_finite() && *p >= 0.0 && *p <= 1.0));
    }

    #[test]
    fn matches_naive_formula_on_moderate_logits() {
        // Independent route: unshifted softmax, safe for small logits.
        let logits = [0.3, -1.2, 2.0, 0.0, 0.7];
        for label in 0..logits.len() {
            let (loss, probs) = softmax_xent(&logits, label).unwrap();
            let sum: f64 = logits.iter().map(|l| l.exp()).sum();
            let naive: Vec<f64> = logits.iter().map(|l| l.exp() / sum).collect();
            assert!((loss - (-naive[label].ln())).abs() < 1e-12);
            for (p, n) in probs.iter().zip(&naive) {
                assert!((p - n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xent_gradient_identity() {
        // d loss / d logits == p - onehot(label)
        let logits = [0.5, -0.3, 1.1];
        let label = 2;
        let (_, p) = softmax_xent(&logits, label).unwrap();
        let eps = 1e-6;
        for j in 0..logits.len() {
            let mut up = logits;
            up[j] += eps;
            let mut dn = logits;
            dn[j] -= eps;
            let fd = (softmax_xent(&up, label).unwrap().0 - softmax_xent(&dn, label).unwrap().0)
                / (2.0 * eps);
            let analytic = p[j] - if j == label { 1.0 } else { 0.0 };
            assert!((fd - analytic).abs() < 1e-8);
        }
    }
}
