//! The `train`, `eval`, `gradcheck` and `sweep-aux` subcommands.

use anyhow::Context;
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fofe_ner::config::{ConfigFile, EmbeddingsConfig};
use fofe_ner::io::{
    load_conll, load_embeddings, write_conll, ColumnSpec, EmbeddingFormat, EmbeddingTable,
};
use fofe_ner::mtl::{prepare_samples, sample_masks, NetworkDiffFn};
use fofe_ner::nn::check_gradients;
use fofe_ner::pipeline::{predictions_to_corpus, EvalReport, PrfScores};
use fofe_ner::{Error, Model, TaskSetup};

use crate::manifest::RunManifest;

#[derive(Args)]
pub struct TrainArgs {
    /// TOML config file; corpus paths inside it resolve relative to it
    #[arg(long)]
    config: PathBuf,
    /// Directory for checkpoint, history and manifest (created if missing)
    #[arg(long)]
    out_dir: PathBuf,
    /// Drop every auxiliary task and train the main task alone
    #[arg(long)]
    single_task: bool,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Override the config epoch limit
    #[arg(long)]
    max_epochs: Option<usize>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// CoNLL corpus to score against
    #[arg(long)]
    corpus: PathBuf,
    /// Task to evaluate (default: the main task)
    #[arg(long)]
    task: Option<String>,
    /// Span decision threshold (default: the trained value)
    #[arg(long)]
    threshold: Option<f64>,
    /// Also write report.json, predictions.conll and a manifest here
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// TOML config file supplying the architecture to check
    #[arg(long)]
    config: PathBuf,
    /// Seed for synthetic data, dropout masks and parameter subsampling
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Samples per task in the checked loss
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Check at most this many parameters (seeded subsample beyond it)
    #[arg(long, default_value_t = 1500)]
    max_checked: usize,
}

#[derive(Args)]
pub struct SweepArgs {
    /// TOML config file with one main and at least one auxiliary task
    #[arg(long)]
    config: PathBuf,
    /// Directory for the table, plot data and manifest
    #[arg(long)]
    out_dir: PathBuf,
    /// Comma-separated auxiliary fractions; 0 is the single-task baseline
    #[arg(long, default_value = "0,0.2,0.4,0.6,0.8,1")]
    fractions: String,
}

fn load_config(path: &Path) -> anyhow::Result<(ConfigFile, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg = ConfigFile::from_toml_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok((cfg, dir))
}

fn resolve(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// Load the corpora for every `[task.N]` table, in key order.
fn load_setups(
    cfg: &ConfigFile,
    dir: &Path,
    single_task: bool,
    manifest: &mut RunManifest,
) -> anyhow::Result<Vec<TaskSetup>> {
    let mut setups = Vec::new();
    for task in cfg.tasks_in_order() {
        if single_task && !task.main {
            continue;
        }
        let train_path = task.train.as_ref().ok_or_else(|| {
            Error::Config(format!("task {:?} has no train corpus", task.name))
        })?;
        let mut load = |p: &PathBuf| -> anyhow::Result<_> {
            let p = resolve(dir, p);
            manifest.add_input(&p)?;
            Ok(load_conll(&p, ColumnSpec::default())?)
        };
        setups.push(TaskSetup {
            name: task.name.clone(),
            train: load(train_path)?,
            dev: task.dev.as_ref().map(&mut load).transpose()?,
            test: task.test.as_ref().map(&mut load).transpose()?,
            private_layers: task.private_layers.clone(),
            sampling_weight: task.sampling_weight,
            is_main: task.main,
        });
    }
    Ok(setups)
}

fn load_embedding_tables(
    cfg: &EmbeddingsConfig,
    dir: &Path,
    manifest: &mut RunManifest,
) -> anyhow::Result<(Option<EmbeddingTable>, Option<EmbeddingTable>)> {
    let format = |p: &Path| match cfg.format.as_deref() {
        Some("text") => Ok(EmbeddingFormat::Text),
        Some("binary") => Ok(EmbeddingFormat::Binary),
        Some(other) => Err(Error::Config(format!("unknown embedding format {other:?}"))),
        None if p.extension().is_some_and(|e| e == "bin") => Ok(EmbeddingFormat::Binary),
        None => Ok(EmbeddingFormat::Text),
    };
    let mut load = |p: &Option<PathBuf>| -> anyhow::Result<Option<EmbeddingTable>> {
        match p {
            None => Ok(None),
            Some(p) => {
                let p = resolve(dir, p);
                manifest.add_input(&p)?;
                let table = load_embeddings(&p, format(&p)?)?;
                for w in &table.warnings {
                    eprintln!("warning: {}: {w}", p.display());
                }
                Ok(Some(table))
            }
        }
    };
    Ok((load(&cfg.cased)?, load(&cfg.uncased)?))
}

pub fn train(args: TrainArgs, threads: usize) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(threads);
    manifest.add_input(&args.config)?;
    let (mut cfg, dir) = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    if let Some(lr) = args.lr {
        cfg.train.lr = lr;
    }
    if let Some(n) = args.max_epochs {
        cfg.train.max_epochs = n;
    }
    cfg.validate()?;
    manifest.seed = Some(cfg.train.seed);
    manifest.set_config(&cfg);

    let setups = load_setups(&cfg, &dir, args.single_task, &mut manifest)?;
    let (cased, uncased) = load_embedding_tables(&cfg.embeddings, &dir, &mut manifest)?;

    let (model, result) = fofe_ner::train_model(
        &setups,
        &cfg.train,
        &cfg.features,
        &cfg.model,
        cased.as_ref(),
        uncased.as_ref(),
    )?;

    std::fs::create_dir_all(&args.out_dir)?;
    let ckpt_path = args.out_dir.join("model.ckpt");
    model.save(&ckpt_path)?;
    manifest.add_output(&ckpt_path);

    let history_path = args.out_dir.join("history.jsonl");
    let mut history = String::new();
    for record in &result.history {
        writeln!(history, "{}", serde_json::to_string(record).unwrap()).unwrap();
    }
    std::fs::write(&history_path, history)?;
    manifest.add_output(&history_path);

    println!(
        "trained {} task(s), {} parameters, {} epoch(s)",
        model.tasks.len(),
        model.network.num_params(),
        result.history.len()
    );
    match result.best_dev_f1 {
        Some(f1) => println!(
            "best dev F1 {:.2}% at epoch {} (final lr {})",
            f1 * 100.0,
            result.best_epoch,
            result.final_lr
        ),
        None => println!("no dev set: kept the final epoch"),
    }
    println!("checkpoint: {}", ckpt_path.display());
    manifest.write(&args.out_dir)?;
    Ok(())
}

fn score_row(name: &str, s: &PrfScores) -> String {
    format!(
        "{name:<12} {:>8.2} {:>8.2} {:>8.2} {:>6} {:>6} {:>6}",
        s.precision * 100.0,
        s.recall * 100.0,
        s.f1 * 100.0,
        s.tp,
        s.fp,
        s.fn_
    )
}

fn print_report(report: &EvalReport) {
    println!(
        "{:<12} {:>8} {:>8} {:>8} {:>6} {:>6} {:>6}",
        "type", "P(%)", "R(%)", "F1(%)", "TP", "FP", "FN"
    );
    for (name, scores) in &report.per_type {
        println!("{}", score_row(name, scores));
    }
    println!("{}", score_row("micro", &report.micro));
}

pub fn eval(args: EvalArgs, threads: usize) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(threads);
    manifest.add_input(&args.checkpoint)?;
    manifest.add_input(&args.corpus)?;
    let model = Model::load(&args.checkpoint)?;
    let corpus = load_conll(&args.corpus, ColumnSpec::default())?;

    let task = match &args.task {
        Some(name) => model
            .task_by_name(name)
            .ok_or_else(|| Error::Input(format!("checkpoint has no task named {name:?}")))?,
        None => model.main_task(),
    };
    for label in &corpus.label_set {
        if !task.labels.contains(label) {
            return Err(Error::Incompatible(format!(
                "corpus label {label:?} unknown to task {:?} (its labels: {:?})",
                task.name, task.labels
            ))
            .into());
        }
    }

    let threshold = args.threshold.unwrap_or(model.train_config.threshold);
    let (report, predictions) = model.evaluate(task, &corpus, threshold)?;
    print_report(&report);

    if let Some(out_dir) = &args.out_dir {
        std::fs::create_dir_all(out_dir)?;
        let report_path = out_dir.join("report.json");
        std::fs::write(&report_path, serde_json::to_string_pretty(&report).unwrap())?;
        manifest.add_output(&report_path);
        let pred_path = out_dir.join("predictions.conll");
        let predicted = predictions_to_corpus(&corpus, &predictions, &task.labels)?;
        std::fs::write(&pred_path, write_conll(&predicted))?;
        manifest.add_output(&pred_path);
        manifest.write(out_dir)?;
    }
    Ok(())
}

pub fn gradcheck(args: GradcheckArgs) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(1);
    manifest.add_input(&args.config)?;
    let (cfg, _) = load_config(&args.config)?;

    // The check runs the configured architecture on small synthetic corpora;
    // the corpora named in the config are not needed.
    let spec = fofe_ner::pipeline::SyntheticSpec {
        sentences: 8,
        seed: args.seed,
        ..fofe_ner::pipeline::SyntheticSpec::default()
    };
    let (main_corpus, aux_corpus) = fofe_ner::pipeline::make_synthetic_corpus(&spec);
    let setups: Vec<TaskSetup> = cfg
        .tasks_in_order()
        .iter()
        .map(|t| TaskSetup {
            name: t.name.clone(),
            train: if t.main { main_corpus.clone() } else { aux_corpus.clone() },
            dev: None,
            test: None,
            private_layers: t.private_layers.clone(),
            sampling_weight: t.sampling_weight,
            is_main: t.main,
        })
        .collect();

    let model = fofe_ner::build_untrained(&setups, &cfg.train, &cfg.features, &cfg.model, None, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut samples = Vec::new();
    for (i, setup) in setups.iter().enumerate() {
        let prepared = prepare_samples(&model.tasks[i], &model.extractor, &setup.train)?;
        for sample in prepared.into_iter().take(args.samples.max(1)) {
            let masks = (cfg.train.dropout > 0.0)
                .then(|| sample_masks(&model.network, i, cfg.train.dropout, &mut rng));
            samples.push((i, sample, masks));
        }
    }

    let mut diff = NetworkDiffFn { net: model.network, samples };
    let analytic = diff.analytic_gradient();
    let report = check_gradients(&mut diff, &analytic, 1e-4, args.max_checked, args.seed);
    println!(
        "checked {} of {} parameters: max relative error {:.3e}",
        report.checked,
        analytic.len(),
        report.max_rel_err
    );
    if !report.passes(1e-4) {
        return Err(Error::Numeric(format!(
            "gradient check failed at parameter {}: analytic {:.6e} vs numeric {:.6e}",
            report.worst_param, report.worst_analytic, report.worst_numeric
        ))
        .into());
    }
    println!("gradient check passed (tolerance 1e-4)");
    Ok(())
}

pub fn sweep_aux(args: SweepArgs, threads: usize) -> anyhow::Result<()> {
    let mut manifest = RunManifest::new(threads);
    manifest.add_input(&args.config)?;
    let (cfg, dir) = load_config(&args.config)?;
    manifest.seed = Some(cfg.train.seed);
    manifest.set_config(&cfg);

    let fractions: Vec<f64> = args
        .fractions
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad fraction {s:?}")))
                .and_then(|f| {
                    if (0.0..=1.0).contains(&f) {
                        Ok(f)
                    } else {
                        Err(Error::Config(format!("fraction {f} outside [0, 1]")))
                    }
                })
        })
        .collect::<Result<_, _>>()?;

    let setups = load_setups(&cfg, &dir, false, &mut manifest)?;
    let rows = fofe_ner::sweep_aux(&setups, &fractions, &cfg.train, &cfg.features, &cfg.model)?;

    println!("{:<10} {:>8}", "fraction", "F1(%)");
    let mut tsv = String::from("fraction\tmain_f1\n");
    for row in &rows {
        println!("{:<10} {:>8.2}", row.fraction, row.main_f1 * 100.0);
        writeln!(tsv, "{}\t{}", row.fraction, row.main_f1).unwrap();
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let tsv_path = args.out_dir.join("sweep.tsv");
    std::fs::write(&tsv_path, tsv)?;
    manifest.add_output(&tsv_path);
    let json_path = args.out_dir.join("sweep.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&rows).unwrap())?;
    manifest.add_output(&json_path);
    manifest.write(&args.out_dir)?;
    Ok(())
}
