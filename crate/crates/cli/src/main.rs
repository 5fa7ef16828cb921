//! `fofe-ner`: codec, training, evaluation and experiment harness.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure (non-finite loss, failed gradient check).

mod codec;
mod manifest;
mod run;
mod synth;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fofe-ner",
    version,
    about = "FOFE sequence codec and multi-task span-based NER",
    long_about = "FOFE sequence codec and multi-task span-based NER.\n\n\
        Sentences are encoded with a fixed-size ordinally forgetting encoding \
        (z_n = alpha * z_{n-1} + e_n); candidate spans are classified by a \
        feedforward network trained with hard parameter sharing across tasks.\n\n\
        Config file defaults follow the published recipe: alpha_w = 0.5, \
        alpha_c = 0.8, momentum = 0.9, dropout = 0.5, lr decay factor = 1/16 \
        on dev-F1 drops."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for feature extraction (default: $FOFE_NER_THREADS, else 1)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Encode token sequences (one per line) into sparse FOFE codes
    ///
    /// Output is one line of `index:weight` pairs per input line. With a
    /// rational forgetting factor ("1/2") weights are printed exactly;
    /// with a decimal one ("0.5") they are printed as floats.
    Encode {
        /// Forgetting factor: a decimal ("0.5") or a rational ("1/2")
        #[arg(long, default_value = "1/2")]
        alpha: String,
        /// Vocabulary file, one token per line (line number = index)
        #[arg(long)]
        vocab: PathBuf,
        /// Whitespace-separated tokens; read from stdin when omitted
        text: Option<String>,
    },
    /// Decode sparse FOFE codes back into token sequences
    ///
    /// Decoding is exact and therefore requires a rational forgetting factor
    /// no greater than 1/2; above 1/2 the code is not uniquely decodable in
    /// general and the command refuses to guess.
    Decode {
        /// Forgetting factor as a rational, e.g. "1/2"
        #[arg(long, default_value = "1/2")]
        alpha: String,
        /// Vocabulary file, one token per line (line number = index)
        #[arg(long)]
        vocab: PathBuf,
        /// Lines of `index:weight` pairs; read from stdin when omitted
        code: Option<String>,
    },
    /// Train a model from a config file
    Train(run::TrainArgs),
    /// Evaluate a checkpoint on a CoNLL corpus
    Eval(run::EvalArgs),
    /// Check analytic gradients against finite differences
    Gradcheck(run::GradcheckArgs),
    /// Retrain at several auxiliary-data fractions and tabulate main-task F1
    SweepAux(run::SweepArgs),
    /// Generate a synthetic main/auxiliary corpus pair with a ready config
    MakeSynthetic(synth::SynthArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("FOFE_NER_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1);
    match dispatch(cli.command, threads) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command, threads: usize) -> anyhow::Result<()> {
    match command {
        Command::Encode { alpha, vocab, text } => codec::encode(&alpha, &vocab, text),
        Command::Decode { alpha, vocab, code } => codec::decode(&alpha, &vocab, code),
        Command::Train(args) => run::train(args, threads),
        Command::Eval(args) => run::eval(args, threads),
        Command::Gradcheck(args) => run::gradcheck(args),
        Command::SweepAux(args) => run::sweep_aux(args, threads),
        Command::MakeSynthetic(args) => synth::make_synthetic(args),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use fofe_ner::Error;
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 1,
        Some(Error::Numeric(_)) => 3,
        Some(_) => 2,
        // I/O and serialization failures outside the core error type are
        // data errors as well.
        None => 2,
    }
}
