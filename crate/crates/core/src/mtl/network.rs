use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{
    assemble_input, CharCnn, CharCnnGrads, CnnTrace, FeatureBundle, FeatureGeometry, ProjectionSet,
    Slot,
};
use crate::linalg::Matrix;
use crate::mtl::task::PreparedSample;
use crate::nn::{
    apply_mask, glorot_uniform, momentum_update, sample_mask, softmax_xent, Activation, DenseLayer,
    DiffFn, SoftmaxHead,
};

/// One task's private parameters: zero or more hidden layers plus the
/// softmax output head.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskStack {
    pub private: Vec<DenseLayer>,
    pub head: SoftmaxHead,
}

/// The multi-task network. Projections, char-CNN and the shared stack are
/// updated by every task; each [`TaskStack`] only by its own.
#[derive(Debug, Clone, PartialEq)]
pub struct MtlNetwork {
    pub geometry: FeatureGeometry,
    pub projections: ProjectionSet,
    pub char_cnn: Option<CharCnn>,
    pub shared: Vec<DenseLayer>,
    pub tasks: Vec<TaskStack>,
}

/// Which tensors an update step may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Shared,
    Task(usize),
}

impl Scope {
    pub fn updated_by(self, task: usize) -> bool {
        match self {
            Scope::Shared => true,
            Scope::Task(t) => t == task,
        }
    }
}

/// Deterministic initialization. The draw order is fixed: projection
/// matrices in slot order, then the char-CNN (when enabled), then the shared
/// stack, then each task's private layers and head. All weights are Glorot
/// uniform, all biases zero.
pub fn build_network(
    geometry: &FeatureGeometry,
    shared_sizes: &[usize],
    tasks: &[(Vec<usize>, usize)],
    char_emb_dim: usize,
    rng: &mut impl Rng,
) -> MtlNetwork {
    let mats = Slot::ALL
        .iter()
        .map(|&s| glorot_uniform(geometry.slot_cols(s), geometry.slot_rows(s) as usize, rng))
        .collect();
    let char_cnn = geometry
        .char_cnn_filters
        .as_ref()
        .map(|specs| CharCnn::new(geometry.alphabet_size, char_emb_dim, specs, rng));

    fn dense<R: Rng>(sizes: &[usize], mut in_dim: usize, rng: &mut R) -> (Vec<DenseLayer>, usize) {
        let mut layers = Vec::with_capacity(sizes.len());
        for &out in sizes {
            layers.push(DenseLayer::new(
                glorot_uniform(in_dim, out, rng),
                vec![0.0; out],
                Activation::Relu,
            ));
            in_dim = out;
        }
        (layers, in_dim)
    }

    let (shared, shared_out) = dense(shared_sizes, geometry.input_dim(), rng);
    let tasks = tasks
        .iter()
        .map(|(private_sizes, classes)| {
            let (private, out) = dense(private_sizes, shared_out, rng);
            TaskStack {
                private,
                head: SoftmaxHead::new(glorot_uniform(out, *classes, rng), vec![0.0; *classes]),
            }
        })
        .collect();
    MtlNetwork {
        geometry: geometry.clone(),
        projections: ProjectionSet::new(mats),
        char_cnn,
        shared,
        tasks,
    }
}

/// Inverted-dropout masks for one sample: the network input plus every
/// hidden layer output (shared, then the given task's private layers).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSet {
    pub input: Vec<f64>,
    pub shared: Vec<Vec<f64>>,
    pub private: Vec<Vec<f64>>,
}

pub fn sample_masks(net: &MtlNetwork, task: usize, p: f64, rng: &mut impl Rng) -> MaskSet {
    MaskSet {
        input: sample_mask(net.geometry.input_dim(), p, rng),
        shared: net
            .shared
            .iter()
            .map(|l| sample_mask(l.out_dim(), p, rng))
            .collect(),
        private: net.tasks[task]
            .private
            .iter()
            .map(|l| sample_mask(l.out_dim(), p, rng))
            .collect(),
    }
}

#[derive(Debug, Clone)]
struct LayerTrace {
    pre: Vec<f64>,
    /// Post-activation output after the dropout mask; the next layer's input.
    out: Vec<f64>,
}

/// Everything one backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    x_masked: Vec<f64>,
    cnn: Option<CnnTrace>,
    shared: Vec<LayerTrace>,
    private: Vec<LayerTrace>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub loss: f64,
}

/// Gradient buffers mirroring one [`TaskStack`].
#[derive(Debug, Clone)]
pub struct TaskGrads {
    pub private: Vec<(Matrix, Vec<f64>)>,
    pub head: (Matrix, Vec<f64>),
}

/// Gradient buffers mirroring the whole network.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub projections: Vec<Matrix>,
    pub char_cnn: Option<CharCnnGrads>,
    pub shared: Vec<(Matrix, Vec<f64>)>,
    pub tasks: Vec<TaskGrads>,
}

fn zero_of(layers: &[DenseLayer]) -> Vec<(Matrix, Vec<f64>)> {
    layers
        .iter()
        .map(|l| (Matrix::zeros(l.weight.rows, l.weight.cols), vec![0.0; l.bias.len()]))
        .collect()
}

impl Gradients {
    pub fn zero_like(net: &MtlNetwork) -> Self {
        Gradients {
            projections: net
                .projections
                .mats
                .iter()
                .map(|m| Matrix::zeros(m.rows, m.cols))
                .collect(),
            char_cnn: net.char_cnn.as_ref().map(CharCnn::zero_grads),
            shared: zero_of(&net.shared),
            tasks: net
                .tasks
                .iter()
                .map(|t| TaskGrads {
                    private: zero_of(&t.private),
                    head: (
                        Matrix::zeros(t.head.weight.rows, t.head.weight.cols),
                        vec![0.0; t.head.bias.len()],
                    ),
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            for v in t {
                *v *= s;
            }
        }
    }

    /// Tensor slices in the network's canonical order.
    pub fn tensors(&self) -> Vec<(Scope, &[f64])> {
        let mut out: Vec<(Scope, &[f64])> = Vec::new();
        for m in &self.projections {
            out.push((Scope::Shared, &m.data));
        }
        if let Some(cnn) = &self.char_cnn {
            out.push((Scope::Shared, &cnn.embedding.data));
            for (w, b) in &cnn.filters {
                out.push((Scope::Shared, &w.data));
                out.push((Scope::Shared, b));
            }
        }
        for (w, b) in &self.shared {
            out.push((Scope::Shared, &w.data));
            out.push((Scope::Shared, b));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            for (w, b) in &t.private {
                out.push((Scope::Task(i), &w.data));
                out.push((Scope::Task(i), b));
            }
            out.push((Scope::Task(i), &t.head.0.data));
            out.push((Scope::Task(i), &t.head.1));
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<(Scope, &mut [f64])> {
        let mut out: Vec<(Scope, &mut [f64])> = Vec::new();
        for m in &mut self.projections {
            out.push((Scope::Shared, &mut m.data));
        }
        if let Some(cnn) = &mut self.char_cnn {
            out.push((Scope::Shared, &mut cnn.embedding.data));
            for (w, b) in &mut cnn.filters {
                out.push((Scope::Shared, &mut w.data));
                out.push((Scope::Shared, b));
            }
        }
        for (w, b) in &mut self.shared {
            out.push((Scope::Shared, &mut w.data));
            out.push((Scope::Shared, b));
        }
        for (i, t) in self.tasks.iter_mut().enumerate() {
            for (w, b) in &mut t.private {
                out.push((Scope::Task(i), &mut w.data));
                out.push((Scope::Task(i), b));
            }
            out.push((Scope::Task(i), &mut t.head.0.data));
            out.push((Scope::Task(i), &mut t.head.1));
        }
        out
    }

    /// Flat concatenation in canonical tensor order (for gradient checking).
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }
}

impl MtlNetwork {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Forward pass for one task. `masks` selects training mode (dropout
    /// applied) versus evaluation mode.
    pub fn forward(
        &self,
        bundle: &FeatureBundle,
        task: usize,
        label: usize,
        masks: Option<&MaskSet>,
    ) -> Result<Trace> {
        self.check_task(task, masks)?;
        let (mut x, cnn) = assemble_input(bundle, &self.projections, self.char_cnn.as_ref())?;
        if let Some(m) = masks {
            apply_mask(&mut x, &m.input);
        }
        let x_masked = x.clone();

        let run = |layers: &[DenseLayer],
                   layer_masks: Option<&[Vec<f64>]>,
                   mut h: Vec<f64>|
         -> Result<(Vec<LayerTrace>, Vec<f64>)> {
            let mut traces = Vec::with_capacity(layers.len());
            for (i, l) in layers.iter().enumerate() {
                let (pre, mut out) = l.forward(&h)?;
                if let Some(ms) = layer_masks {
                    apply_mask(&mut out, &ms[i]);
                }
                h = out.clone();
                traces.push(LayerTrace { pre, out });
            }
            Ok((traces, h))
        };

        let (shared, h) = run(&self.shared, masks.map(|m| m.shared.as_slice()), x)?;
        let stack = &self.tasks[task];
        let (private, h) = run(&stack.private, masks.map(|m| m.private.as_slice()), h)?;
        let logits = stack.head.logits(&h)?;
        let (loss, probs) = softmax_xent(&logits, label)?;
        Ok(Trace {
            x_masked,
            cnn,
            shared,
            private,
            logits,
            probs,
            loss,
        })
    }

    /// Accumulate the gradients of `trace.loss` into `grads`. Must be called
    /// with the same bundle, task, label and masks as the forward pass.
    pub fn backward(
        &self,
        trace: &Trace,
        bundle: &FeatureBundle,
        task: usize,
        label: usize,
        masks: Option<&MaskSet>,
        grads: &mut Gradients,
    ) -> Result<()> {
        self.check_task(task, masks)?;
        let stack = &self.tasks[task];
        let tg = &mut grads.tasks[task];

        // d loss / d logits = p - onehot(label)
        let mut g: Vec<f64> = trace.probs.clone();
        if label >= g.len() {
            return Err(Error::Contract(format!("label {label} out of range")));
        }
        g[label] -= 1.0;

        let head_in = trace
            .private
            .last()
            .map(|t| t.out.as_slice())
            .or_else(|| trace.shared.last().map(|t| t.out.as_slice()))
            .unwrap_or(&trace.x_masked);
        tg.head.0.add_outer(&g, head_in);
        for (gb, gi) in tg.head.1.iter_mut().zip(&g) {
            *gb += gi;
        }
        g = stack.head.weight.tr_mul_vec(&g);

        let back = |layers: &[DenseLayer],
                    traces: &[LayerTrace],
                    layer_masks: Option<&[Vec<f64>]>,
                    layer_grads: &mut [(Matrix, Vec<f64>)],
                    below: &[f64],
                    mut g: Vec<f64>|
         -> Vec<f64> {
            for i in (0..layers.len()).rev() {
                if let Some(ms) = layer_masks {
                    apply_mask(&mut g, &ms[i]);
                }
                let x = if i == 0 { below } else { &traces[i - 1].out };
                let (gw, gb) = &mut layer_grads[i];
                g = layers[i].backward(x, &traces[i].pre, &g, gw, gb);
            }
            g
        };

        let shared_out = trace
            .shared
            .last()
            .map(|t| t.out.as_slice())
            .unwrap_or(&trace.x_masked);
        g = back(
            &stack.private,
            &trace.private,
            masks.map(|m| m.private.as_slice()),
            &mut tg.private,
            shared_out,
            g,
        );
        g = back(
            &self.shared,
            &trace.shared,
            masks.map(|m| m.shared.as_slice()),
            &mut grads.shared,
            &trace.x_masked,
            g,
        );
        if let Some(m) = masks {
            apply_mask(&mut g, &m.input);
        }

        // Scatter the input gradient into the sparse projections:
        // d loss / d P_slot[j, :] = w_j * g_slot for every nonzero (j, w_j).
        let mut offset = 0;
        for slot in Slot::ALL {
            let cols = self.geometry.slot_cols(slot);
            let g_slot = &g[offset..offset + cols];
            let gm = &mut grads.projections[slot.index()];
            for (j, w) in bundle.slot(slot).iter() {
                let row = gm.row_mut(j as usize);
                for (r, gs) in row.iter_mut().zip(g_slot) {
                    *r += w * gs;
                }
            }
            offset += cols;
        }
        if let (Some(cnn), Some(cnn_trace)) = (&self.char_cnn, &trace.cnn) {
            cnn.backward(
                cnn_trace,
                &g[offset..],
                grads.char_cnn.as_mut().expect("cnn gradient buffers"),
            );
        }
        Ok(())
    }

    fn check_task(&self, task: usize, masks: Option<&MaskSet>) -> Result<()> {
        if task >= self.tasks.len() {
            return Err(Error::Contract(format!(
                "task {task} out of range for {} tasks",
                self.tasks.len()
            )));
        }
        if let Some(m) = masks {
            if m.shared.len() != self.shared.len()
                || m.private.len() != self.tasks[task].private.len()
            {
                return Err(Error::Contract("mask set does not fit the network".into()));
            }
        }
        Ok(())
    }

    /// Tensor slices in canonical order with their update scope.
    pub fn tensors(&self) -> Vec<(Scope, &[f64])> {
        let mut out: Vec<(Scope, &[f64])> = Vec::new();
        for m in &self.projections.mats {
            out.push((Scope::Shared, &m.data));
        }
        if let Some(cnn) = &self.char_cnn {
            out.push((Scope::Shared, &cnn.embedding.data));
            for f in &cnn.filters {
                out.push((Scope::Shared, &f.weight.data));
                out.push((Scope::Shared, &f.bias));
            }
        }
        for l in &self.shared {
            out.push((Scope::Shared, &l.weight.data));
            out.push((Scope::Shared, &l.bias));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            for l in &t.private {
                out.push((Scope::Task(i), &l.weight.data));
                out.push((Scope::Task(i), &l.bias));
            }
            out.push((Scope::Task(i), &t.head.weight.data));
            out.push((Scope::Task(i), &t.head.bias));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(Scope, &mut [f64])> {
        let mut out: Vec<(Scope, &mut [f64])> = Vec::new();
        for m in &mut self.projections.mats {
            out.push((Scope::Shared, &mut m.data));
        }
        if let Some(cnn) = &mut self.char_cnn {
            out.push((Scope::Shared, &mut cnn.embedding.data));
            for f in &mut cnn.filters {
                out.push((Scope::Shared, &mut f.weight.data));
                out.push((Scope::Shared, &mut f.bias));
            }
        }
        for l in &mut self.shared {
            out.push((Scope::Shared, &mut l.weight.data));
            out.push((Scope::Shared, &mut l.bias));
        }
        for (i, t) in self.tasks.iter_mut().enumerate() {
            for l in &mut t.private {
                out.push((Scope::Task(i), &mut l.weight.data));
                out.push((Scope::Task(i), &mut l.bias));
            }
            out.push((Scope::Task(i), &mut t.head.weight.data));
            out.push((Scope::Task(i), &mut t.head.bias));
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Per-tensor momentum velocities, aligned with the canonical tensor order.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub velocity: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn zero_like(net: &MtlNetwork) -> Self {
        OptimizerState {
            velocity: net.tensors().iter().map(|(_, t)| vec![0.0; t.len()]).collect(),
        }
    }
}

/// One momentum step for one task. Tensors private to other tasks are left
/// untouched, including their velocities, so those tasks stay bit-identical.
pub fn apply_update(
    net: &mut MtlNetwork,
    grads: &Gradients,
    opt: &mut OptimizerState,
    lr: f64,
    momentum: f64,
    nesterov: bool,
    task: usize,
) {
    let g = grads.tensors();
    for (i, (scope, params)) in net.tensors_mut().into_iter().enumerate() {
        if !scope.updated_by(task) {
            continue;
        }
        momentum_update(params, g[i].1, &mut opt.velocity[i], lr, momentum, nesterov);
    }
}

/// A fixed set of samples (with frozen masks) viewed as a scalar loss of the
/// flat parameter vector, for finite-difference gradient checking.
pub struct NetworkDiffFn {
    pub net: MtlNetwork,
    pub samples: Vec<(usize, PreparedSample, Option<MaskSet>)>,
}

impl NetworkDiffFn {
    pub fn mean_loss(&self) -> f64 {
        let mut total = 0.0;
        for (task, s, masks) in &self.samples {
            total += self
                .net
                .forward(&s.bundle, *task, s.label, masks.as_ref())
                .expect("forward in gradient check")
                .loss;
        }
        total / self.samples.len() as f64
    }

    /// Mean analytic gradient over the sample set, flattened.
    pub fn analytic_gradient(&self) -> Vec<f64> {
        let mut grads = Gradients::zero_like(&self.net);
        for (task, s, masks) in &self.samples {
            let trace = self
                .net
                .forward(&s.bundle, *task, s.label, masks.as_ref())
                .expect("forward in gradient check");
            self.net
                .backward(&trace, &s.bundle, *task, s.label, masks.as_ref(), &mut grads)
                .expect("backward in gradient check");
        }
        grads.scale(1.0 / self.samples.len() as f64);
        grads.flatten()
    }
}

impl DiffFn for NetworkDiffFn {
    fn num_params(&self) -> usize {
        self.net.num_params()
    }

    fn get_param(&self, i: usize) -> f64 {
        let mut rest = i;
        for (_, t) in self.net.tensors() {
            if rest < t.len() {
                return t[rest];
            }
            rest -= t.len();
        }
        panic!("parameter index {i} out of range");
    }

    fn set_param(&mut self, i: usize, v: f64) {
        let mut rest = i;
        for (_, t) in self.net.tensors_mut() {
            if rest < t.len() {
                t[rest] = v;
                return;
            }
            rest -= t.len();
        }
        panic!("parameter index {i} out of range");
    }

    fn loss(&mut self) -> f64 {
        self.mean_loss()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{CharAlphabet, CnnFilterSpec, FeatureExtractor, Vocab};
    use crate::io::{Corpus, GoldSpan};
    use crate::mtl::task::{prepare_samples, TaskSpec};
    use crate::nn::check_gradients;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_extractor(use_char_cnn: bool) -> FeatureExtractor {
        FeatureExtractor {
            cased_vocab: Vocab::from_tokens(["Anna", "visits", "Rome", "daily"]),
            uncased_vocab: Vocab::from_tokens(["anna", "visits", "rome", "daily"]),
            alphabet: CharAlphabet::from_chars("Annavisits Romedaily".chars()),
            alpha_w: 0.5,
            alpha_c: 0.8,
            max_fragment_len: 2,
            use_char_cnn,
        }
    }

    fn toy_geometry(ex: &FeatureExtractor, with_cnn: bool) -> FeatureGeometry {
        FeatureGeometry {
            cased_vocab_size: ex.cased_vocab.size(),
            uncased_vocab_size: ex.uncased_vocab.size(),
            alphabet_size: ex.alphabet.size(),
            word_proj_dim: 3,
            char_proj_dim: 2,
            char_cnn_filters: with_cnn.then(|| vec![CnnFilterSpec { width: 2, count: 2 }]),
        }
    }

    fn toy_corpus() -> Corpus {
        Corpus::new(
            "toy",
            "train",
            vec![vec!["Anna".into(), "visits".into(), "Rome".into(), "daily".into()]],
            vec![vec![
                GoldSpan { start: 0, end: 0, label: "PER".into() },
                GoldSpan { start: 2, end: 2, label: "LOC".into() },
            ]],
            vec!["LOC".into(), "PER".into()],
        )
        .unwrap()
    }

    fn toy_net(with_cnn: bool, seed: u64) -> (FeatureExtractor, MtlNetwork) {
        let ex = toy_extractor(with_cnn);
        let geometry = toy_geometry(&ex, with_cnn);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = build_network(&geometry, &[5], &[(vec![4], 3), (vec![], 2)], 3, &mut rng);
        (ex, net)
    }

    fn toy_samples(ex: &FeatureExtractor) -> Vec<PreparedSample> {
        let spec = TaskSpec {
            id: 0,
            name: "main".into(),
            labels: vec!["LOC".into(), "PER".into()],
            private_layer_sizes: vec![4],
            sampling_weight: 1.0,
            is_main: true,
        };
        prepare_samples(&spec, ex, &toy_corpus()).unwrap()
    }

    #[test]
    fn build_is_seed_deterministic() {
        let (_, a) = toy_net(true, 9);
        let (_, b) = toy_net(true, 9);
        assert_eq!(a, b);
        let (_, c) = toy_net(true, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn forward_shapes_and_eval_determinism() {
        let (ex, net) = toy_net(false, 0);
        let samples = toy_samples(&ex);
        let t1 = net.forward(&samples[0].bundle, 0, samples[0].label, None).unwrap();
        assert_eq!(t1.probs.len(), 3);
        assert!((t1.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let t2 = net.forward(&samples[0].bundle, 0, samples[0].label, None).unwrap();
        assert_eq!(t1.logits, t2.logits);
        // second task has its own head width
        let t3 = net.forward(&samples[0].bundle, 1, 0, None).unwrap();
        assert_eq!(t3.probs.len(), 2);
    }

    #[test]
    fn gradients_pass_finite_difference_check() {
        // Both tasks, char-CNN on, dropout masks frozen.
        let (ex, net) = toy_net(true, 3);
        let all = toy_samples(&ex);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<(usize, PreparedSample, Option<MaskSet>)> = all
            .into_iter()
            .take(4)
            .enumerate()
            .map(|(i, s)| {
                let task = i % 2;
                let label = if task == 0 { s.label } else { s.label.min(1) };
                let masks = sample_masks(&net, task, 0.5, &mut rng);
                (task, PreparedSample { label, ..s }, Some(masks))
            })
            .collect();
        let mut f = NetworkDiffFn { net, samples };
        let analytic = f.analytic_gradient();
        let report = check_gradients(&mut f, &analytic, 1e-4, 100_000, 0);
        assert!(
            report.passes(1e-4),
            "max rel err {} at param {} (bp {}, fd {})",
            report.max_rel_err,
            report.worst_param,
            report.worst_analytic,
            report.worst_numeric
        );
    }

    #[test]
    fn updates_leave_other_tasks_bit_identical() {
        let (ex, mut net) = toy_net(true, 4);
        let samples = toy_samples(&ex);
        let before = net.clone();
        let mut opt = OptimizerState::zero_like(&net);
        let mut grads = Gradients::zero_like(&net);
        let trace = net.forward(&samples[1].bundle, 0, samples[1].label, None).unwrap();
        net.backward(&trace, &samples[1].bundle, 0, samples[1].label, None, &mut grads)
            .unwrap();
        apply_update(&mut net, &grads, &mut opt, 0.1, 0.9, false, 0);

        assert_eq!(net.tasks[1], before.tasks[1], "task 1 parameters moved");
        assert_ne!(net.tasks[0].head.weight, before.tasks[0].head.weight);
        assert_ne!(net.shared[0].weight, before.shared[0].weight);
        // task 1's velocities are still exactly zero
        for (i, (scope, _)) in net.tensors().iter().enumerate() {
            if *scope == (Scope::Task(1)) {
                assert!(opt.velocity[i].iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn flat_indexing_covers_every_tensor() {
        let (_, net) = toy_net(true, 5);
        let n = net.num_params();
        let mut f = NetworkDiffFn { net, samples: vec![] };
        let v0 = f.get_param(0);
        f.set_param(0, v0 + 1.0);
        assert_eq!(f.get_param(0), v0 + 1.0);
        let vl = f.get_param(n - 1);
        f.set_param(n - 1, vl - 1.0);
        assert_eq!(f.get_param(n - 1), vl - 1.0);
        // gradient buffers enumerate in the same order with the same shapes
        let grads = Gradients::zero_like(&f.net);
        assert_eq!(grads.flatten().len(), n);
        let gt = grads.tensors();
        for (a, b) in f.net.tensors().iter().zip(&gt) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.len(), b.1.len());
        }
    }
}
