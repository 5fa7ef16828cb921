//! The `make-synthetic` subcommand: a self-contained main/auxiliary corpus
//! pair plus a small ready-to-train config, handy for smoke tests and for
//! trying the tool without real data.

use anyhow::Context;
use clap::Args;
use std::path::{Path, PathBuf};

use fofe_ner::config::{
    ConfigFile, DecayMode, FeatureConfig, ModelConfig, TaskFileConfig, TrainConfig,
};
use fofe_ner::io::{write_conll, Corpus};
use fofe_ner::pipeline::{make_synthetic_corpus, SyntheticSpec};

#[derive(Args)]
pub struct SynthArgs {
    /// Directory for the corpora and config (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
    /// Sentences per corpus and split
    #[arg(long, default_value_t = 50)]
    sentences: usize,
    #[arg(long, default_value_t = 3)]
    entity_types: usize,
    /// Distinct trigger words per entity type
    #[arg(long, default_value_t = 5)]
    cues_per_type: usize,
    /// Longest entity, in tokens
    #[arg(long, default_value_t = 2)]
    max_entity_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn write_corpus(dir: &Path, file: &str, corpus: &Corpus) -> anyhow::Result<PathBuf> {
    let path = dir.join(file);
    std::fs::write(&path, write_conll(corpus))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn make_synthetic(args: SynthArgs) -> anyhow::Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let spec = SyntheticSpec {
        sentences: args.sentences,
        entity_types: args.entity_types,
        cues_per_type: args.cues_per_type,
        max_entity_len: args.max_entity_len,
        seed: args.seed,
        ..SyntheticSpec::default()
    };
    // Distinct seeds per split; within a split the auxiliary corpus is
    // already offset from the main one by the generator itself.
    let mut written = Vec::new();
    for (split, offset) in [("train", 0), ("dev", 1), ("test", 2)] {
        let (main, aux) =
            make_synthetic_corpus(&SyntheticSpec { seed: args.seed + offset, ..spec.clone() });
        written.push(write_corpus(&args.out_dir, &format!("main-{split}.conll"), &main)?);
        written.push(write_corpus(&args.out_dir, &format!("aux-{split}.conll"), &aux)?);
    }

    // A config sized for the synthetic data: small projections and layers,
    // short fragments, light dropout, and the gentler annealing decay — the
    // full 1/16 step decay is far too aggressive for a tiny noisy dev set.
    let mut cfg = ConfigFile {
        train: TrainConfig {
            lr: 0.1,
            dropout: 0.2,
            batch_size: 32,
            max_epochs: 150,
            patience: 30,
            decay_mode: DecayMode::Anneal,
            max_fragment_len: args.max_entity_len + 1,
            seed: args.seed,
            ..TrainConfig::default()
        },
        features: FeatureConfig {
            word_proj_dim: 16,
            char_proj_dim: 8,
            ..FeatureConfig::default()
        },
        model: ModelConfig { shared_layers: vec![32] },
        ..ConfigFile::default()
    };
    for (key, name, main) in [("1", "main", true), ("2", "aux", false)] {
        cfg.task.insert(
            key.into(),
            TaskFileConfig {
                name: name.into(),
                main,
                train: Some(format!("{name}-train.conll").into()),
                dev: main.then(|| "main-dev.conll".into()),
                test: main.then(|| "main-test.conll".into()),
                private_layers: vec![16],
                sampling_weight: 1.0,
            },
        );
    }
    let cfg_path = args.out_dir.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml_string())?;
    written.push(cfg_path);

    for path in &written {
        println!("wrote {}", path.display());
    }
    println!(
        "try: fofe-ner train --config {} --out-dir {}",
        args.out_dir.join("config.toml").display(),
        args.out_dir.join("run").display()
    );
    Ok(())
}
