use rand::Rng;
use serde::Serialize;

use crate::config::{DecayMode, SamplingStrategy, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{assemble_input, CharCnn, ProjectionSet, Slot};
use crate::linalg::Matrix;
use crate::mtl::network::{
    apply_update, sample_masks, Gradients, MtlNetwork, OptimizerState,
};
use crate::mtl::task::PreparedSample;
use crate::nn::{apply_mask, momentum_update, sample_mask, softmax_xent, DenseLayer, SoftmaxHead};

/// One task's training set and its sampling weight.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub samples: Vec<PreparedSample>,
    pub weight: f64,
}

/// Per-task sampling weights under a strategy: uniform ignores set sizes,
/// proportional multiplies each task's weight by its sample count.
pub fn effective_weights(strategy: SamplingStrategy, data: &[TaskData]) -> Vec<f64> {
    match strategy {
        SamplingStrategy::Uniform => vec![1.0; data.len()],
        SamplingStrategy::Proportional => data
            .iter()
            .map(|d| d.weight * d.samples.len() as f64)
            .collect(),
    }
}

/// Draw a task index proportionally to `weights`. With a single task no
/// randomness is consumed, so a one-task run makes exactly the same stream
/// of draws as a plain single-task trainer.
pub fn sample_task(weights: &[f64], rng: &mut impl Rng) -> usize {
    assert!(!weights.is_empty(), "no tasks to sample");
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// One minibatch step: draw a task, draw `batch_size` samples with
/// replacement, fresh dropout masks per sample, mean gradient, momentum
/// update scoped to the drawn task. Returns `(task, mean loss)`.
pub fn train_step(
    net: &mut MtlNetwork,
    data: &[TaskData],
    weights: &[f64],
    cfg: &TrainConfig,
    lr: f64,
    opt: &mut OptimizerState,
    rng: &mut impl Rng,
) -> Result<(usize, f64)> {
    let task = sample_task(weights, rng);
    let samples = &data[task].samples;
    if samples.is_empty() {
        return Err(Error::Input(format!("task {task} has no training samples")));
    }
    let mut grads = Gradients::zero_like(net);
    let mut total = 0.0;
    for _ in 0..cfg.batch_size {
        let s = &samples[rng.gen_range(0..samples.len())];
        let masks = sample_masks(net, task, cfg.dropout, rng);
        let trace = net.forward(&s.bundle, task, s.label, Some(&masks))?;
        total += trace.loss;
        net.backward(&trace, &s.bundle, task, s.label, Some(&masks), &mut grads)?;
    }
    grads.scale(1.0 / cfg.batch_size as f64);
    apply_update(net, &grads, opt, lr, cfg.momentum, cfg.nesterov, task);
    Ok((task, total / cfg.batch_size as f64))
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
    /// Mean loss of the steps that drew each task (`None` if never drawn).
    pub task_losses: Vec<Option<f64>>,
    pub dev_f1: Option<f64>,
}

#[derive(Debug)]
pub struct FitResult {
    /// The parameters at the best dev score (final parameters when no dev
    /// evaluation was supplied).
    pub best: MtlNetwork,
    pub best_dev_f1: Option<f64>,
    pub best_epoch: usize,
    pub final_lr: f64,
    pub history: Vec<EpochRecord>,
    /// `(task, mean loss)` of every minibatch step, in order.
    pub step_losses: Vec<(usize, f64)>,
}

/// Full training loop. `eval` is called once per epoch and may return a dev
/// F1 score; when it does, a drop against the previous epoch multiplies the
/// learning rate by the decay factor, the best-scoring parameters are kept,
/// and `patience` epochs without a new best stop training early.
pub fn fit(
    mut net: MtlNetwork,
    data: &[TaskData],
    cfg: &TrainConfig,
    eval: &mut dyn FnMut(&MtlNetwork, usize) -> Result<Option<f64>>,
    rng: &mut impl Rng,
) -> Result<FitResult> {
    cfg.validate()?;
    if data.len() != net.task_count() {
        return Err(Error::Contract(format!(
            "{} task datasets for a {}-task network",
            data.len(),
            net.task_count()
        )));
    }
    let weights = effective_weights(cfg.sampling, data);
    let total: usize = data.iter().map(|d| d.samples.len()).sum();
    if total == 0 {
        return Err(Error::Input("no training samples".into()));
    }
    let steps = cfg
        .steps_per_epoch
        .unwrap_or_else(|| total.div_ceil(cfg.batch_size));

    let decay = match cfg.decay_mode {
        DecayMode::Step => cfg.lr_decay_factor,
        DecayMode::Anneal => cfg.lr_decay_factor.sqrt(),
    };
    let mut lr = cfg.lr;
    let mut opt = OptimizerState::zero_like(&net);
    let mut best: Option<(MtlNetwork, f64, usize)> = None;
    let mut prev_f1: Option<f64> = None;
    let mut since_best = 0usize;
    let mut history = Vec::new();
    let mut step_losses = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        let mut epoch_total = 0.0;
        let mut by_task = vec![(0.0, 0usize); data.len()];
        for _ in 0..steps {
            let (task, loss) = train_step(&mut net, data, &weights, cfg, lr, &mut opt, rng)?;
            epoch_total += loss;
            by_task[task].0 += loss;
            by_task[task].1 += 1;
            step_losses.push((task, loss));
        }
        let dev_f1 = eval(&net, epoch)?;
        history.push(EpochRecord {
            epoch,
            lr,
            mean_loss: epoch_total / steps as f64,
            task_losses: by_task
                .iter()
                .map(|&(l, n)| (n > 0).then(|| l / n as f64))
                .collect(),
            dev_f1,
        });
        if let Some(f1) = dev_f1 {
            if prev_f1.is_some_and(|p| f1 < p) {
                lr *= decay;
            }
            prev_f1 = Some(f1);
            if best.as_ref().is_none_or(|(_, b, _)| f1 > *b) {
                best = Some((net.clone(), f1, epoch));
                since_best = 0;
            } else {
                since_best += 1;
            }
            if since_best >= cfg.patience || f1 >= 1.0 {
                break;
            }
        }
    }
    let (best_net, best_f1, best_epoch) = match best {
        Some((n, f, e)) => (n, Some(f), e),
        None => (net, None, history.len()),
    };
    Ok(FitResult {
        best: best_net,
        best_dev_f1: best_f1,
        best_epoch,
        final_lr: lr,
        history,
        step_losses,
    })
}

/// A single-task feedforward network written as its own straight-line
/// implementation (no task stacks, no update scoping). It exists to verify
/// that the multi-task machinery collapses to plain training when there is
/// only one task: starting from the same initialization and seed, per-step
/// losses must match [`fit`] bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainNet {
    pub projections: ProjectionSet,
    pub char_cnn: Option<CharCnn>,
    pub layers: Vec<DenseLayer>,
    pub head: SoftmaxHead,
    word_dims: Vec<usize>,
}

impl PlainNet {
    /// Flatten a one-task network: shared and private layers become one
    /// stack.
    pub fn from_mtl(net: &MtlNetwork) -> Result<Self> {
        if net.task_count() != 1 {
            return Err(Error::Contract(format!(
                "plain network needs exactly 1 task, got {}",
                net.task_count()
            )));
        }
        let mut layers = net.shared.clone();
        layers.extend(net.tasks[0].private.iter().cloned());
        Ok(PlainNet {
            projections: net.projections.clone(),
            char_cnn: net.char_cnn.clone(),
            layers,
            head: net.tasks[0].head.clone(),
            word_dims: Slot::ALL.iter().map(|&s| net.geometry.slot_cols(s)).collect(),
        })
    }

    fn input_dim(&self) -> usize {
        self.word_dims.iter().sum::<usize>()
            + self.char_cnn.as_ref().map_or(0, CharCnn::output_dim)
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for m in &mut self.projections.mats {
            out.push(&mut m.data);
        }
        if let Some(cnn) = &mut self.char_cnn {
            out.push(&mut cnn.embedding.data);
            for f in &mut cnn.filters {
                out.push(&mut f.weight.data);
                out.push(&mut f.bias);
            }
        }
        for l in &mut self.layers {
            out.push(&mut l.weight.data);
            out.push(&mut l.bias);
        }
        out.push(&mut self.head.weight.data);
        out.push(&mut self.head.bias);
        out
    }
}

/// Train a [`PlainNet`] with the same recipe as [`fit`] (no dev evaluation)
/// and return the per-step mean losses.
pub fn fit_plain(
    net: &mut PlainNet,
    samples: &[PreparedSample],
    cfg: &TrainConfig,
    epochs: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Input("no training samples".into()));
    }
    let steps = cfg
        .steps_per_epoch
        .unwrap_or_else(|| samples.len().div_ceil(cfg.batch_size));
    let mut velocity: Vec<Vec<f64>> = net.tensors_mut().iter().map(|t| vec![0.0; t.len()]).collect();
    let mut losses = Vec::with_capacity(epochs * steps);

    for _ in 0..epochs {
        for _ in 0..steps {
            // Gradient buffers, one per tensor in the same order.
            let mut g_proj: Vec<Matrix> = net
                .projections
                .mats
                .iter()
                .map(|m| Matrix::zeros(m.rows, m.cols))
                .collect();
            let mut g_cnn = net.char_cnn.as_ref().map(CharCnn::zero_grads);
            let mut g_layers: Vec<(Matrix, Vec<f64>)> = net
                .layers
                .iter()
                .map(|l| (Matrix::zeros(l.weight.rows, l.weight.cols), vec![0.0; l.bias.len()]))
                .collect();
            let mut g_head = (
                Matrix::zeros(net.head.weight.rows, net.head.weight.cols),
                vec![0.0; net.head.bias.len()],
            );

            let mut total = 0.0;
            for _ in 0..cfg.batch_size {
                let s = &samples[rng.gen_range(0..samples.len())];
                // Mask draw order mirrors the multi-task trainer: input,
                // then every hidden layer in depth order.
                let input_mask = sample_mask(net.input_dim(), cfg.dropout, rng);
                let layer_masks: Vec<Vec<f64>> = net
                    .layers
                    .iter()
                    .map(|l| sample_mask(l.out_dim(), cfg.dropout, rng))
                    .collect();

                // forward
                let (mut x, cnn_trace) =
                    assemble_input(&s.bundle, &net.projections, net.char_cnn.as_ref())?;
                apply_mask(&mut x, &input_mask);
                let x0 = x.clone();
                let mut acts: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(net.layers.len());
                for (l, m) in net.layers.iter().zip(&layer_masks) {
                    let (pre, mut out) = l.forward(&x)?;
                    apply_mask(&mut out, m);
                    x = out.clone();
                    acts.push((pre, out));
                }
                let logits = net.head.logits(&x)?;
                let (loss, probs) = softmax_xent(&logits, s.label)?;
                total += loss;

                // backward
                let mut g: Vec<f64> = probs;
                g[s.label] -= 1.0;
                let head_in = acts.last().map(|(_, o)| o.as_slice()).unwrap_or(&x0);
                g_head.0.add_outer(&g, head_in);
                for (gb, gi) in g_head.1.iter_mut().zip(&g) {
                    *gb += gi;
                }
                g = net.head.weight.tr_mul_vec(&g);
                for i in (0..net.layers.len()).rev() {
                    apply_mask(&mut g, &layer_masks[i]);
                    let below = if i == 0 { &x0 } else { &acts[i - 1].1 };
                    let (gw, gb) = &mut g_layers[i];
                    g = net.layers[i].backward(below, &acts[i].0, &g, gw, gb);
                }
                apply_mask(&mut g, &input_mask);
                let mut offset = 0;
                for (slot, &cols) in Slot::ALL.iter().zip(&net.word_dims) {
                    let g_slot = &g[offset..offset + cols];
                    let gm = &mut g_proj[slot.index()];
                    for (j, w) in s.bundle.slot(*slot).iter() {
                        for (r, gs) in gm.row_mut(j as usize).iter_mut().zip(g_slot) {
                            *r += w * gs;
                        }
                    }
                    offset += cols;
                }
                if let (Some(cnn), Some(trace)) = (&net.char_cnn, &cnn_trace) {
                    cnn.backward(trace, &g[offset..], g_cnn.as_mut().unwrap());
                }
            }
            losses.push(total / cfg.batch_size as f64);

            // scale and update, tensor by tensor in canonical order
            let inv = 1.0 / cfg.batch_size as f64;
            let mut flat_grads: Vec<&mut [f64]> = Vec::new();
            for m in &mut g_proj {
                flat_grads.push(&mut m.data);
            }
            if let Some(cg) = &mut g_cnn {
                flat_grads.push(&mut cg.embedding.data);
                for (w, b) in &mut cg.filters {
                    flat_grads.push(&mut w.data);
                    flat_grads.push(b);
                }
            }
            for (w, b) in &mut g_layers {
                flat_grads.push(&mut w.data);
                flat_grads.push(b);
            }
            flat_grads.push(&mut g_head.0.data);
            flat_grads.push(&mut g_head.1);
            for g in &mut flat_grads {
                for v in g.iter_mut() {
                    *v *= inv;
                }
            }
            for (i, (params, vel)) in net
                .tensors_mut()
                .into_iter()
                .zip(&mut velocity)
                .enumerate()
            {
                momentum_update(params, &flat_grads[i][..], vel, cfg.lr, cfg.momentum, cfg.nesterov);
            }
        }
    }
    Ok(losses)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{CharAlphabet, FeatureExtractor, FeatureGeometry, Vocab};
    use crate::io::{Corpus, GoldSpan};
    use crate::mtl::network::build_network;
    use crate::mtl::task::{prepare_samples, TaskSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_setup() -> (FeatureExtractor, FeatureGeometry, Vec<PreparedSample>) {
        let corpus = Corpus::new(
            "toy",
            "train",
            vec![
                vec!["Anna".into(), "visits".into(), "Rome".into()],
                vec!["Rome".into(), "hosts".into(), "Anna".into()],
            ],
            vec![
                vec![
                    GoldSpan { start: 0, end: 0, label: "PER".into() },
                    GoldSpan { start: 2, end: 2, label: "LOC".into() },
                ],
                vec![
                    GoldSpan { start: 0, end: 0, label: "LOC".into() },
                    GoldSpan { start: 2, end: 2, label: "PER".into() },
                ],
            ],
            vec!["LOC".into(), "PER".into()],
        )
        .unwrap();
        let ex = FeatureExtractor {
            cased_vocab: Vocab::from_tokens(corpus.tokens()),
            uncased_vocab: Vocab::from_tokens(corpus.tokens().map(|t| t.to_lowercase())),
            alphabet: CharAlphabet::from_text_with_ascii_floor([]),
            alpha_w: 0.5,
            alpha_c: 0.8,
            max_fragment_len: 2,
            use_char_cnn: false,
        };
        let geometry = FeatureGeometry {
            cased_vocab_size: ex.cased_vocab.size(),
            uncased_vocab_size: ex.uncased_vocab.size(),
            alphabet_size: ex.alphabet.size(),
            word_proj_dim: 4,
            char_proj_dim: 2,
            char_cnn_filters: None,
        };
        let spec = TaskSpec {
            id: 0,
            name: "ner".into(),
            labels: vec!["LOC".into(), "PER".into()],
            private_layer_sizes: vec![6],
            sampling_weight: 1.0,
            is_main: true,
        };
        let samples = prepare_samples(&spec, &ex, &corpus).unwrap();
        (ex, geometry, samples)
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            lr: 0.05,
            dropout: 0.5,
            max_epochs: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn uniform_sampling_is_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = [1.0, 1.0, 1.0];
        let mut counts = [0usize; 3];
        for _ in 0..9000 {
            counts[sample_task(&w, &mut rng)] += 1;
        }
        for c in counts {
            // 3-sigma band around 3000 for p = 1/3
            let sigma = (9000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
            assert!((c as f64 - 3000.0).abs() < 3.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn proportional_sampling_tracks_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = [1.0, 3.0];
        let mut hits = 0usize;
        let n = 10_000;
        for _ in 0..n {
            if sample_task(&w, &mut rng) == 1 {
                hits += 1;
            }
        }
        let sigma = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((hits as f64 - 0.75 * n as f64).abs() < 3.0 * sigma);
    }

    #[test]
    fn single_task_consumes_no_randomness() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = a.clone();
        assert_eq!(sample_task(&[5.0], &mut a), 0);
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn effective_weights_follow_strategy() {
        let (_, _, samples) = toy_setup();
        let n = samples.len() as f64;
        let data = vec![
            TaskData { samples: samples.clone(), weight: 1.0 },
            TaskData { samples: samples[..2].to_vec(), weight: 2.0 },
        ];
        assert_eq!(effective_weights(SamplingStrategy::Uniform, &data), vec![1.0, 1.0]);
        assert_eq!(
            effective_weights(SamplingStrategy::Proportional, &data),
            vec![n, 4.0]
        );
    }

    #[test]
    fn one_task_fit_matches_plain_trainer_bit_for_bit() {
        let (_, geometry, samples) = toy_setup();
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let net = build_network(&geometry, &[8], &[(vec![6], 3)], 4, &mut rng);
        let mut plain = PlainNet::from_mtl(&net).unwrap();

        let data = vec![TaskData { samples: samples.clone(), weight: 1.0 }];
        let mut rng_mtl = ChaCha8Rng::seed_from_u64(99);
        let result = fit(net, &data, &cfg, &mut |_, _| Ok(None), &mut rng_mtl).unwrap();

        let mut rng_plain = ChaCha8Rng::seed_from_u64(99);
        let plain_losses =
            fit_plain(&mut plain, &samples, &cfg, cfg.max_epochs, &mut rng_plain).unwrap();

        assert_eq!(result.step_losses.len(), plain_losses.len());
        for ((task, a), b) in result.step_losses.iter().zip(&plain_losses) {
            assert_eq!(*task, 0);
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }

    #[test]
    fn injected_dev_scores_drive_decay_and_best_checkpoint() {
        let (_, geometry, samples) = toy_setup();
        let cfg = TrainConfig {
            max_epochs: 6,
            patience: 10,
            steps_per_epoch: Some(1),
            ..small_cfg()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = build_network(&geometry, &[8], &[(vec![], 3)], 4, &mut rng);
        let data = vec![TaskData { samples, weight: 1.0 }];

        // dev F1 goes up, drops twice, recovers below the best
        let scripted = [0.3, 0.5, 0.4, 0.2, 0.45, 0.45];
        let mut snapshots: Vec<MtlNetwork> = Vec::new();
        let result = fit(
            net,
            &data,
            &cfg,
            &mut |n, epoch| {
                snapshots.push(n.clone());
                Ok(Some(scripted[epoch - 1]))
            },
            &mut rng,
        )
        .unwrap();

        assert_eq!(result.best_epoch, 2);
        assert_eq!(result.best_dev_f1, Some(0.5));
        assert_eq!(result.best, snapshots[1], "best checkpoint is epoch 2's");
        // two drops (0.5 -> 0.4 -> 0.2) at 1/16 each
        let expected = cfg.lr * (1.0 / 16.0) * (1.0 / 16.0);
        assert!((result.final_lr - expected).abs() < 1e-15);
        // the recorded lr per epoch only changes after a drop
        let lrs: Vec<f64> = result.history.iter().map(|r| r.lr).collect();
        assert_eq!(lrs[0], cfg.lr);
        assert_eq!(lrs[1], cfg.lr);
        assert!(lrs[3] < lrs[2]);
    }

    #[test]
    fn patience_stops_training() {
        let (_, geometry, samples) = toy_setup();
        let cfg = TrainConfig {
            max_epochs: 50,
            patience: 3,
            steps_per_epoch: Some(1),
            ..small_cfg()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = build_network(&geometry, &[8], &[(vec![], 3)], 4, &mut rng);
        let data = vec![TaskData { samples, weight: 1.0 }];
        let result = fit(
            net,
            &data,
            &cfg,
            &mut |_, epoch| Ok(Some(if epoch == 1 { 0.9 } else { 0.1 })),
            &mut rng,
        )
        .unwrap();
        // epoch 1 is best; epochs 2-4 exhaust patience
        assert_eq!(result.history.len(), 4);
        assert_eq!(result.best_epoch, 1);
    }

    #[test]
    fn perfect_dev_score_stops_immediately() {
        let (_, geometry, samples) = toy_setup();
        let cfg = TrainConfig {
            max_epochs: 50,
            steps_per_epoch: Some(1),
            ..small_cfg()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = build_network(&geometry, &[8], &[(vec![], 3)], 4, &mut rng);
        let data = vec![TaskData { samples, weight: 1.0 }];
        let result = fit(net, &data, &cfg, &mut |_, _| Ok(Some(1.0)), &mut rng).unwrap();
        assert_eq!(result.history.len(), 1);
    }

    #[test]
    fn two_task_training_reduces_both_losses() {
        let (_, geometry, samples) = toy_setup();
        let cfg = TrainConfig {
            max_epochs: 30,
            batch_size: 8,
            lr: 0.05,
            dropout: 0.0,
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = build_network(&geometry, &[10], &[(vec![6], 3), (vec![6], 3)], 4, &mut rng);
        let data = vec![
            TaskData { samples: samples.clone(), weight: 1.0 },
            TaskData { samples, weight: 1.0 },
        ];
        let result = fit(net, &data, &cfg, &mut |_, _| Ok(None), &mut rng).unwrap();
        let first = result.history.first().unwrap().mean_loss;
        let last = result.history.last().unwrap().mean_loss;
        assert!(last < first * 0.5, "loss {first} -> {last}");
        for t in 0..2 {
            assert!(result.step_losses.iter().any(|&(task, _)| task == t));
        }
    }
}
