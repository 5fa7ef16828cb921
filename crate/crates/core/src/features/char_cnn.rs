use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::vocab::CHAR_PAD;
use crate::linalg::Matrix;
use crate::nn::glorot_uniform;

/// One bank of filters: `count` filters of the same `width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnnFilterSpec {
    pub width: usize,
    pub count: usize,
}

/// Filter bank weights: (count x width*emb_dim) plus a bias per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnFilter {
    pub width: usize,
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Character CNN channel: trainable character embedding, 1-D valid
/// convolutions of several widths, ReLU, max-pool over positions,
/// concatenation of all filter outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CharCnn {
    pub embedding: Matrix,
    pub filters: Vec<CnnFilter>,
}

/// Everything backward needs from a forward pass.
#[derive(Debug, Clone)]
pub struct CnnTrace {
    pub padded: Vec<u32>,
    /// Per filter bank, per output unit: (winning position, pre-activation there).
    pub argmax: Vec<Vec<(usize, f64)>>,
}

/// Gradient buffers mirroring [`CharCnn`].
#[derive(Debug, Clone)]
pub struct CharCnnGrads {
    pub embedding: Matrix,
    pub filters: Vec<(Matrix, Vec<f64>)>,
}

impl CharCnn {
    pub fn new(
        alphabet_size: u32,
        emb_dim: usize,
        specs: &[CnnFilterSpec],
        rng: &mut impl Rng,
    ) -> Self {
        let embedding = glorot_uniform(emb_dim, alphabet_size as usize, rng);
        let filters = specs
            .iter()
            .map(|s| {
                assert!(s.width >= 1 && s.count >= 1, "bad filter spec");
                CnnFilter {
                    width: s.width,
                    weight: glorot_uniform(s.width * emb_dim, s.count, rng),
                    bias: vec![0.0; s.count],
                }
            })
            .collect();
        CharCnn { embedding, filters }
    }

    pub fn emb_dim(&self) -> usize {
        self.embedding.cols
    }

    pub fn output_dim(&self) -> usize {
        self.filters.iter().map(|f| f.weight.rows).sum()
    }

    pub fn max_width(&self) -> usize {
        self.filters.iter().map(|f| f.width).max().unwrap_or(1)
    }

    pub fn zero_grads(&self) -> CharCnnGrads {
        CharCnnGrads {
            embedding: Matrix::zeros(self.embedding.rows, self.embedding.cols),
            filters: self
                .filters
                .iter()
                .map(|f| (Matrix::zeros(f.weight.rows, f.weight.cols), vec![0.0; f.weight.rows]))
                .collect(),
        }
    }

    /// Forward pass over a character index sequence; pads with the reserved
    /// pad index up to the widest filter.
    pub fn forward(&self, indices: &[u32]) -> Result<(Vec<f64>, CnnTrace)> {
        if indices.is_empty() {
            return Err(Error::Input("char CNN on an empty fragment".into()));
        }
        let mut padded = indices.to_vec();
        while padded.len() < self.max_width() {
            padded.push(CHAR_PAD);
        }
        for &i in &padded {
            if i as usize >= self.embedding.rows {
                return Err(Error::Input(format!("char index {i} outside the alphabet")));
            }
        }
        let d = self.emb_dim();
        let mut out = Vec::with_capacity(self.output_dim());
        let mut argmax = Vec::with_capacity(self.filters.len());
        for bank in &self.filters {
            let positions = padded.len() - bank.width + 1;
            let mut window = vec![0.0; bank.width * d];
            let mut best: Vec<(usize, f64)> = vec![(0, f64::NEG_INFINITY); bank.weight.rows];
            for p in 0..positions {
                for (k, &ci) in padded[p..p + bank.width].iter().enumerate() {
                    window[k * d..(k + 1) * d].copy_from_slice(self.embedding.row(ci as usize));
                }
                let mut pre = bank.weight.mul_vec(&window);
                for (v, b) in pre.iter_mut().zip(&bank.bias) {
                    *v += b;
                }
                for (u, &v) in pre.iter().enumerate() {
                    if v > best[u].1 {
                        best[u] = (p, v);
                    }
                }
            }
            for &(_, v) in &best {
                out.push(v.max(0.0));
            }
            argmax.push(best);
        }
        Ok((out, CnnTrace { padded, argmax }))
    }

    /// Accumulate gradients given the gradient of the loss w.r.t. the CNN
    /// output vector.
    pub fn backward(&self, trace: &CnnTrace, g_out: &[f64], grads: &mut CharCnnGrads) {
        assert_eq!(g_out.len(), self.output_dim(), "cnn grad shape");
        let d = self.emb_dim();
        let mut offset = 0;
        for (bi, bank) in self.filters.iter().enumerate() {
            let (gw, gb) = &mut grads.filters[bi];
            for u in 0..bank.weight.rows {
                let g = g_out[offset + u];
                let (p, pre) = trace.argmax[bi][u];
                if g == 0.0 || pre <= 0.0 {
                    continue;
                }
                gb[u] += g;
                for (k, &ci) in trace.padded[p..p + bank.width].iter().enumerate() {
                    let emb_row = self.embedding.row(ci as usize);
                    let w_row = &bank.weight.row(u)[k * d..(k + 1) * d];
                    let gw_row = &mut gw.row_mut(u)[k * d..(k + 1) * d];
                    for j in 0..d {
                        gw_row[j] += g * emb_row[j];
                    }
                    let ge_row = grads.embedding.row_mut(ci as usize);
                    for j in 0..d {
                        ge_row[j] += g * w_row[j];
                    }
                }
            }
            offset += bank.weight.rows;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_cnn(specs: &[CnnFilterSpec], seed: u64) -> CharCnn {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CharCnn::new(6, 3, specs, &mut rng)
    }

    #[test]
    fn width_one_unit_selector_is_max_over_chars() {
        let mut cnn = tiny_cnn(&[CnnFilterSpec { width: 1, count: 1 }], 0);
        // Selector of embedding coordinate 1.
        cnn.filters[0].weight = Matrix::from_rows(&[vec![0.0, 1.0, 0.0]]);
        cnn.filters[0].bias = vec![0.0];
        let indices = [2u32, 3, 4];
        let (out, _) = cnn.forward(&indices).unwrap();
        let expected = indices
            .iter()
            .map(|&i| cnn.embedding.get(i as usize, 1))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        assert_eq!(out, vec![expected]);
    }

    #[test]
    fn zero_filters_yield_zero_output() {
        let mut cnn = tiny_cnn(&[CnnFilterSpec { width: 2, count: 3 }], 1);
        for f in &mut cnn.filters {
            f.weight.fill(0.0);
            f.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        let (out, _) = cnn.forward(&[2, 3, 4]).unwrap();
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn matches_explicit_loop_oracle() {
        // 5 chars, dim 3, one width-2 filter bank.
        let cnn = tiny_cnn(&[CnnFilterSpec { width: 2, count: 2 }], 2);
        let indices = [2u32, 3, 4, 5, 2];
        let (out, _) = cnn.forward(&indices).unwrap();
        let bank = &cnn.filters[0];
        for u in 0..2 {
            let mut best = f64::NEG_INFINITY;
            for p in 0..indices.len() - 1 {
                let mut acc = bank.bias[u];
                for k in 0..2 {
                    let e = cnn.embedding.row(indices[p + k] as usize);
                    for j in 0..3 {
                        acc += bank.weight.get(u, k * 3 + j) * e[j];
                    }
                }
                best = best.max(acc);
            }
            assert!((out[u] - best.max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn short_input_is_padded() {
        let cnn = tiny_cnn(&[CnnFilterSpec { width: 4, count: 2 }], 3);
        let (out, trace) = cnn.forward(&[2]).unwrap();
        assert_eq!(trace.padded.len(), 4);
        assert_eq!(out.len(), 2);
        assert!(cnn.forward(&[]).is_err());
    }

    #[test]
    fn finite_difference_gradients() {
        let mut cnn = tiny_cnn(
            &[CnnFilterSpec { width: 1, count: 2 }, CnnFilterSpec { width: 2, count: 2 }],
            4,
        );
        let indices = [2u32, 3, 4, 2];
        // loss = sum of outputs
        let loss = |c: &CharCnn| -> f64 { c.forward(&indices).unwrap().0.iter().sum() };
        let (out, trace) = cnn.forward(&indices).unwrap();
        let mut grads = cnn.zero_grads();
        cnn.backward(&trace, &vec![1.0; out.len()], &mut grads);

        let eps = 1e-6;
        // embedding entries
        for r in 0..cnn.embedding.rows {
            for c in 0..cnn.embedding.cols {
                let orig = cnn.embedding.get(r, c);
                cnn.embedding.set(r, c, orig + eps);
                let up = loss(&cnn);
                cnn.embedding.set(r, c, orig - eps);
                let down = loss(&cnn);
                cnn.embedding.set(r, c, orig);
                let fd = (up - down) / (2.0 * eps);
                assert!(
                    (fd - grads.embedding.get(r, c)).abs() < 1e-6,
                    "emb ({r},{c}): fd {fd} bp {}",
                    grads.embedding.get(r, c)
                );
            }
        }
        // filter weights and biases
        for bi in 0..cnn.filters.len() {
            for i in 0..cnn.filters[bi].weight.data.len() {
                let orig = cnn.filters[bi].weight.data[i];
                cnn.filters[bi].weight.data[i] = orig + eps;
                let up = loss(&cnn);
                cnn.filters[bi].weight.data[i] = orig - eps;
                let down = loss(&cnn);
                cnn.filters[bi].weight.data[i] = orig;
                let fd = (up - down) / (2.0 * eps);
                assert!((fd - grads.filters[bi].0.data[i]).abs() < 1e-6);
            }
            for u in 0..cnn.filters[bi].bias.len() {
                let orig = cnn.filters[bi].bias[u];
                cnn.filters[bi].bias[u] = orig + eps;
                let up = loss(&cnn);
                cnn.filters[bi].bias[u] = orig - eps;
                let down = loss(&cnn);
                cnn.filters[bi].bias[u] = orig;
                let fd = (up - down) / (2.0 * eps);
                assert!((fd - grads.filters[bi].1[u]).abs() < 1e-6);
            }
        }
    }
}
