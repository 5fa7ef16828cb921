//! End-to-end orchestration: build vocabularies and the network from
//! corpora and configuration, train, evaluate, sweep auxiliary data sizes,
//! and persist the result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::config::{FeatureConfig, ModelConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{CharAlphabet, FeatureExtractor, FeatureGeometry, Slot, Vocab};
use crate::io::{load_checkpoint, save_checkpoint, Checkpoint, Corpus, EmbeddingTable};
use crate::linalg::Matrix;
use crate::mtl::{
    build_network, fit, prepare_samples, EpochRecord, FitResult, MtlNetwork, TaskData, TaskSpec,
};
use crate::pipeline::{evaluate, EntitySpan, EvalReport};

/// One task's corpora and architecture, as assembled by the caller.
#[derive(Debug, Clone)]
pub struct TaskSetup {
    pub name: String,
    pub train: Corpus,
    pub dev: Option<Corpus>,
    pub test: Option<Corpus>,
    pub private_layers: Vec<usize>,
    pub sampling_weight: f64,
    pub is_main: bool,
}

/// A trained model: the network plus everything needed to featurize and
/// decode new text.
#[derive(Debug, Clone)]
pub struct Model {
    pub network: MtlNetwork,
    pub extractor: FeatureExtractor,
    pub tasks: Vec<TaskSpec>,
    pub shared_sizes: Vec<usize>,
    pub train_config: TrainConfig,
}

impl Model {
    pub fn main_task(&self) -> &TaskSpec {
        self.tasks.iter().find(|t| t.is_main).expect("one main task")
    }

    pub fn task_by_name(&self, name: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.name == name)
    }

    /// Decode and score a corpus with one of the model's tasks.
    pub fn evaluate(
        &self,
        spec: &TaskSpec,
        corpus: &Corpus,
        threshold: f64,
    ) -> Result<(EvalReport, Vec<Vec<EntitySpan>>)> {
        evaluate(&self.network, &self.extractor, spec, corpus, threshold)
    }
}

/// Vocabularies and geometry from training corpora and optional pre-trained
/// embeddings. When an embedding table is given, its vocabulary (and
/// therefore its row order) is adopted wholesale.
pub fn build_extractor(
    corpora: &[&Corpus],
    train_cfg: &TrainConfig,
    feat_cfg: &FeatureConfig,
    cased: Option<&EmbeddingTable>,
    uncased: Option<&EmbeddingTable>,
) -> Result<(FeatureExtractor, FeatureGeometry)> {
    for table in [cased, uncased].into_iter().flatten() {
        if table.dim != feat_cfg.word_proj_dim {
            return Err(Error::Config(format!(
                "embedding dim {} does not match word projection dim {}",
                table.dim, feat_cfg.word_proj_dim
            )));
        }
    }
    let cased_vocab = match cased {
        Some(t) => t.vocab.clone(),
        None => Vocab::from_tokens(corpora.iter().flat_map(|c| c.tokens())),
    };
    let uncased_vocab = match uncased {
        Some(t) => t.vocab.clone(),
        None => Vocab::from_tokens(
            corpora.iter().flat_map(|c| c.tokens()).map(str::to_lowercase),
        ),
    };
    let text: Vec<&str> = corpora.iter().flat_map(|c| c.tokens()).collect();
    let alphabet = CharAlphabet::from_text_with_ascii_floor(text);
    let geometry = FeatureGeometry {
        cased_vocab_size: cased_vocab.size(),
        uncased_vocab_size: uncased_vocab.size(),
        alphabet_size: alphabet.size(),
        word_proj_dim: feat_cfg.word_proj_dim,
        char_proj_dim: feat_cfg.char_proj_dim,
        char_cnn_filters: feat_cfg.char_cnn.then(|| feat_cfg.char_cnn_filters.clone()),
    };
    let extractor = FeatureExtractor {
        cased_vocab,
        uncased_vocab,
        alphabet,
        alpha_w: train_cfg.alpha_w,
        alpha_c: train_cfg.alpha_c,
        max_fragment_len: train_cfg.max_fragment_len,
        use_char_cnn: feat_cfg.char_cnn,
    };
    Ok((extractor, geometry))
}

fn task_specs(setups: &[TaskSetup]) -> Result<Vec<TaskSpec>> {
    let mains = setups.iter().filter(|s| s.is_main).count();
    if mains != 1 {
        return Err(Error::Config(format!("exactly one main task required, found {mains}")));
    }
    Ok(setups
        .iter()
        .enumerate()
        .map(|(id, s)| TaskSpec {
            id,
            name: s.name.clone(),
            labels: s.train.label_set.clone(),
            private_layer_sizes: s.private_layers.clone(),
            sampling_weight: s.sampling_weight,
            is_main: s.is_main,
        })
        .collect())
}

/// Copy pre-trained embedding rows over the Glorot-initialized word
/// projections (the embedding vocabulary is the projection's row order by
/// construction in [`build_extractor`]).
fn seed_projections(
    net: &mut MtlNetwork,
    cased: Option<&EmbeddingTable>,
    uncased: Option<&EmbeddingTable>,
) {
    for slot in Slot::ALL {
        let table = if slot.is_cased_word() {
            cased
        } else if slot.is_uncased_word() {
            uncased
        } else {
            None
        };
        if let Some(t) = table {
            net.projections.mats[slot.index()] = t.matrix.clone();
        }
    }
}

/// Build an initialized but untrained model: vocabularies from the training
/// corpora (or the embedding tables), Glorot-initialized network, embedding
/// rows copied over the word projections.
pub fn build_untrained(
    setups: &[TaskSetup],
    train_cfg: &TrainConfig,
    feat_cfg: &FeatureConfig,
    model_cfg: &ModelConfig,
    cased: Option<&EmbeddingTable>,
    uncased: Option<&EmbeddingTable>,
) -> Result<Model> {
    build_parts(setups, train_cfg, feat_cfg, model_cfg, cased, uncased).map(|(m, _)| m)
}

/// Shared construction path; the returned generator has consumed exactly the
/// initialization draws, so training continues the same stream.
fn build_parts(
    setups: &[TaskSetup],
    train_cfg: &TrainConfig,
    feat_cfg: &FeatureConfig,
    model_cfg: &ModelConfig,
    cased: Option<&EmbeddingTable>,
    uncased: Option<&EmbeddingTable>,
) -> Result<(Model, ChaCha8Rng)> {
    train_cfg.validate()?;
    let tasks = task_specs(setups)?;
    let corpora: Vec<&Corpus> = setups.iter().map(|s| &s.train).collect();
    let (extractor, geometry) = build_extractor(&corpora, train_cfg, feat_cfg, cased, uncased)?;

    let arch: Vec<(Vec<usize>, usize)> = tasks
        .iter()
        .map(|t| (t.private_layer_sizes.clone(), t.num_classes()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed);
    let mut network = build_network(
        &geometry,
        &model_cfg.shared_layers,
        &arch,
        feat_cfg.char_proj_dim,
        &mut rng,
    );
    seed_projections(&mut network, cased, uncased);
    let model = Model {
        network,
        extractor,
        tasks,
        shared_sizes: model_cfg.shared_layers.clone(),
        train_config: train_cfg.clone(),
    };
    Ok((model, rng))
}

/// Train a model from scratch. The per-epoch dev evaluation runs on the
/// main task; without a main dev set there is no decay or early stopping.
pub fn train_model(
    setups: &[TaskSetup],
    train_cfg: &TrainConfig,
    feat_cfg: &FeatureConfig,
    model_cfg: &ModelConfig,
    cased: Option<&EmbeddingTable>,
    uncased: Option<&EmbeddingTable>,
) -> Result<(Model, FitResult)> {
    let (model, mut rng) =
        build_parts(setups, train_cfg, feat_cfg, model_cfg, cased, uncased)?;

    let data: Vec<TaskData> = model
        .tasks
        .iter()
        .zip(setups)
        .map(|(spec, setup)| {
            Ok(TaskData {
                samples: prepare_samples(spec, &model.extractor, &setup.train)?,
                weight: spec.sampling_weight,
            })
        })
        .collect::<Result<_>>()?;

    let main = model.main_task().clone();
    let main_dev = setups.iter().find(|s| s.is_main).and_then(|s| s.dev.clone());
    let threshold = train_cfg.threshold;
    let extractor_for_eval = model.extractor.clone();
    let mut eval = move |net: &MtlNetwork, _epoch: usize| -> Result<Option<f64>> {
        match &main_dev {
            Some(dev) => {
                let (report, _) = evaluate(net, &extractor_for_eval, &main, dev, threshold)?;
                Ok(Some(report.micro.f1))
            }
            None => Ok(None),
        }
    };
    let mut model = model;
    let result = fit(model.network, &data, train_cfg, &mut eval, &mut rng)?;
    model.network = result.best.clone();
    Ok((model, result))
}

/// One row of the auxiliary-data-size sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub main_f1: f64,
    pub main_train_hash: String,
    pub history: Vec<EpochRecord>,
}

/// Retrain at each auxiliary-train-set fraction (main task untouched) and
/// record the main task's F1 on its test set (dev set when no test set is
/// given). Fraction 0 is the single-task baseline.
pub fn sweep_aux(
    setups: &[TaskSetup],
    fractions: &[f64],
    train_cfg: &TrainConfig,
    feat_cfg: &FeatureConfig,
    model_cfg: &ModelConfig,
) -> Result<Vec<SweepRow>> {
    if !setups.iter().any(|s| !s.is_main) {
        return Err(Error::Config("the sweep needs at least one auxiliary task".into()));
    }
    let main_setup = setups
        .iter()
        .find(|s| s.is_main)
        .ok_or_else(|| Error::Config("no main task".into()))?;
    let score_corpus = main_setup
        .test
        .as_ref()
        .or(main_setup.dev.as_ref())
        .ok_or_else(|| Error::Config("the main task needs a test or dev set to sweep".into()))?;

    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let subset: Vec<TaskSetup> = setups
            .iter()
            .filter(|s| s.is_main || fraction > 0.0)
            .map(|s| {
                if s.is_main {
                    Ok(s.clone())
                } else {
                    Ok(TaskSetup {
                        train: s.train.subsample(fraction, train_cfg.seed)?,
                        ..s.clone()
                    })
                }
            })
            .collect::<Result<_>>()?;
        let (model, result) = train_model(&subset, train_cfg, feat_cfg, model_cfg, None, None)?;
        let (report, _) =
            model.evaluate(model.main_task(), score_corpus, train_cfg.threshold)?;
        rows.push(SweepRow {
            fraction,
            main_f1: report.micro.f1,
            main_train_hash: main_setup.train.hash(),
            history: result.history,
        });
    }
    Ok(rows)
}

#[derive(Serialize, Deserialize)]
struct TaskMeta {
    name: String,
    labels: Vec<String>,
    private_layer_sizes: Vec<usize>,
    sampling_weight: f64,
    is_main: bool,
}

#[derive(Serialize, Deserialize)]
struct ModelMeta {
    train_config: TrainConfig,
    geometry: FeatureGeometry,
    shared_sizes: Vec<usize>,
    use_char_cnn: bool,
    char_emb_dim: usize,
    tasks: Vec<TaskMeta>,
    cased_vocab: Vec<String>,
    uncased_vocab: Vec<String>,
    alphabet: String,
}

fn tensor_names(net: &MtlNetwork) -> Vec<String> {
    let mut names: Vec<String> = Slot::ALL.iter().map(|s| format!("proj/{}", s.name())).collect();
    if let Some(cnn) = &net.char_cnn {
        names.push("cnn/embedding".into());
        for i in 0..cnn.filters.len() {
            names.push(format!("cnn/{i}/weight"));
            names.push(format!("cnn/{i}/bias"));
        }
    }
    for i in 0..net.shared.len() {
        names.push(format!("shared/{i}/weight"));
        names.push(format!("shared/{i}/bias"));
    }
    for (i, t) in net.tasks.iter().enumerate() {
        for j in 0..t.private.len() {
            names.push(format!("task/{i}/private/{j}/weight"));
            names.push(format!("task/{i}/private/{j}/bias"));
        }
        names.push(format!("task/{i}/head/weight"));
        names.push(format!("task/{i}/head/bias"));
    }
    names
}

impl Model {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let meta = ModelMeta {
            train_config: self.train_config.clone(),
            geometry: self.network.geometry.clone(),
            shared_sizes: self.shared_sizes.clone(),
            use_char_cnn: self.extractor.use_char_cnn,
            char_emb_dim: self.network.char_cnn.as_ref().map_or(0, |c| c.emb_dim()),
            tasks: self
                .tasks
                .iter()
                .map(|t| TaskMeta {
                    name: t.name.clone(),
                    labels: t.labels.clone(),
                    private_layer_sizes: t.private_layer_sizes.clone(),
                    sampling_weight: t.sampling_weight,
                    is_main: t.is_main,
                })
                .collect(),
            cased_vocab: self.extractor.cased_vocab.tokens().to_vec(),
            uncased_vocab: self.extractor.uncased_vocab.tokens().to_vec(),
            alphabet: self.extractor.alphabet.chars().iter().collect(),
        };
        let names = tensor_names(&self.network);
        let tensors: Vec<(String, Matrix)> = names
            .into_iter()
            .zip(self.network.tensors())
            .map(|(name, (_, data))| (name, Matrix { rows: 1, cols: data.len(), data: data.to_vec() }))
            .collect();
        save_checkpoint(
            path,
            &Checkpoint {
                meta_json: serde_json::to_string(&meta).expect("meta serializes"),
                tensors,
            },
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let ckpt = load_checkpoint(path)?;
        let meta: ModelMeta = serde_json::from_str(&ckpt.meta_json)
            .map_err(|e| Error::Incompatible(format!("bad checkpoint metadata: {e}")))?;
        let tasks: Vec<TaskSpec> = meta
            .tasks
            .iter()
            .enumerate()
            .map(|(id, t)| TaskSpec {
                id,
                name: t.name.clone(),
                labels: t.labels.clone(),
                private_layer_sizes: t.private_layer_sizes.clone(),
                sampling_weight: t.sampling_weight,
                is_main: t.is_main,
            })
            .collect();
        let arch: Vec<(Vec<usize>, usize)> = tasks
            .iter()
            .map(|t| (t.private_layer_sizes.clone(), t.num_classes()))
            .collect();
        // Rebuild the architecture (any seed: every value is overwritten).
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut network = build_network(
            &meta.geometry,
            &meta.shared_sizes,
            &arch,
            meta.char_emb_dim.max(1),
            &mut rng,
        );
        let names = tensor_names(&network);
        if names.len() != ckpt.tensors.len() {
            return Err(Error::Incompatible(format!(
                "checkpoint holds {} tensors, architecture needs {}",
                ckpt.tensors.len(),
                names.len()
            )));
        }
        for ((expect, (_, dst)), (name, src)) in
            names.iter().zip(network.tensors_mut()).zip(&ckpt.tensors)
        {
            if expect != name {
                return Err(Error::Incompatible(format!(
                    "unexpected tensor {name:?} (wanted {expect:?})"
                )));
            }
            if src.data.len() != dst.len() {
                return Err(Error::Incompatible(format!(
                    "tensor {name:?} holds {} values, architecture needs {}",
                    src.data.len(),
                    dst.len()
                )));
            }
            dst.copy_from_slice(&src.data);
        }
        let extractor = FeatureExtractor {
            cased_vocab: Vocab::from_ordered_list(meta.cased_vocab),
            uncased_vocab: Vocab::from_ordered_list(meta.uncased_vocab),
            alphabet: CharAlphabet::from_ordered_list(meta.alphabet.chars().collect()),
            alpha_w: meta.train_config.alpha_w,
            alpha_c: meta.train_config.alpha_c,
            max_fragment_len: meta.train_config.max_fragment_len,
            use_char_cnn: meta.use_char_cnn,
        };
        Ok(Model {
            network,
            extractor,
            tasks,
            shared_sizes: meta.shared_sizes,
            train_config: meta.train_config,
        })
    }
}
