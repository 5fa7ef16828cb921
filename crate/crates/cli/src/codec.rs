//! The `encode` / `decode` subcommands.

use anyhow::Context;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use fofe_ner::fofe::{self, decode_exact, parse_rational, Alpha, ExactFofe};
use fofe_ner::Error;

/// Codec vocabulary: line number = index, no reserved unknown slot.
struct CodecVocab {
    tokens: Vec<String>,
    index: std::collections::HashMap<String, u32>,
}

impl CodecVocab {
    fn size(&self) -> u32 {
        self.tokens.len() as u32
    }
}

fn load_vocab(path: &Path) -> anyhow::Result<CodecVocab> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading vocabulary {}", path.display()))?;
    let tokens: Vec<String> = text.lines().map(str::to_string).collect();
    if tokens.is_empty() {
        return Err(Error::Input(format!("empty vocabulary file {}", path.display())).into());
    }
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    Ok(CodecVocab { tokens, index })
}

fn read_input(arg: Option<String>) -> anyhow::Result<String> {
    match arg {
        Some(s) => Ok(s),
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            Ok(buf)
        }
    }
}

pub fn encode(alpha: &str, vocab_path: &Path, text: Option<String>) -> anyhow::Result<()> {
    let vocab = load_vocab(vocab_path)?;
    let alpha = Alpha::parse(alpha)?;
    let input = read_input(text)?;
    let mut out = String::new();
    for line in input.lines() {
        let mut indices = Vec::new();
        for token in line.split_whitespace() {
            match vocab.index.get(token) {
                Some(&i) => indices.push(i),
                None => {
                    return Err(Error::Input(format!("token {token:?} not in vocabulary")).into())
                }
            }
        }
        match &alpha {
            Alpha::Exact(r) => {
                let code = fofe::encode(&indices, r, vocab.size())?;
                let pairs: Vec<String> =
                    code.weights().iter().map(|(i, w)| format!("{i}:{w}")).collect();
                writeln!(out, "{}", pairs.join(" ")).unwrap();
            }
            Alpha::Float(v) => {
                let code = fofe::encode(&indices, v, vocab.size())?;
                let pairs: Vec<String> =
                    code.weights().iter().map(|(i, w)| format!("{i}:{w}")).collect();
                writeln!(out, "{}", pairs.join(" ")).unwrap();
            }
        }
    }
    print!("{out}");
    Ok(())
}

pub fn decode(alpha: &str, vocab_path: &Path, code: Option<String>) -> anyhow::Result<()> {
    let vocab = load_vocab(vocab_path)?;
    let alpha = parse_alpha_for_decode(alpha)?;
    let input = read_input(code)?;
    let mut out = String::new();
    for (lineno, line) in input.lines().enumerate() {
        let code = parse_code(line, &alpha, vocab.size())
            .with_context(|| format!("code on line {}", lineno + 1))?;
        let indices = decode_exact(&code)?;
        let tokens: Vec<&str> =
            indices.iter().map(|&i| vocab.tokens[i as usize].as_str()).collect();
        writeln!(out, "{}", tokens.join(" ")).unwrap();
    }
    print!("{out}");
    Ok(())
}

fn parse_alpha_for_decode(s: &str) -> anyhow::Result<BigRational> {
    let alpha = Alpha::parse(s)?;
    let r = alpha.as_exact().map_err(|_| {
        Error::Config(format!(
            "decoding needs an exact rational forgetting factor (e.g. \"1/2\"), got {s:?}"
        ))
    })?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    if r > half {
        return Err(Error::Config(format!(
            "cannot decode with forgetting factor {r} > 1/2: in that regime \
             distinct sequences can share a code, so exact reconstruction is \
             not possible in general"
        ))
        .into());
    }
    Ok(r)
}

fn parse_code(line: &str, alpha: &BigRational, vocab_size: u32) -> anyhow::Result<ExactFofe> {
    let mut weights: BTreeMap<u32, BigRational> = BTreeMap::new();
    for pair in line.split_whitespace() {
        let (idx, w) = pair
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("expected index:weight, got {pair:?}")))?;
        let idx: u32 = idx
            .parse()
            .map_err(|_| Error::Input(format!("bad index in {pair:?}")))?;
        let w = parse_rational(w)?;
        if weights.insert(idx, w).is_some() {
            return Err(Error::Input(format!("index {idx} appears twice")).into());
        }
    }
    let length = infer_length(&weights, alpha)?;
    Ok(ExactFofe::from_parts(weights, alpha.clone(), vocab_size, length)?)
}

/// Recover the sequence length from the total mass: a length-N encoding has
/// mass `sum_{k=0}^{N-1} alpha^k`, i.e. `alpha^N = 1 - M * (1 - alpha)`, and
/// powers of `alpha` are distinguishable in exact arithmetic.
fn infer_length(weights: &BTreeMap<u32, BigRational>, alpha: &BigRational) -> anyhow::Result<usize> {
    let mass: BigRational = weights.values().sum();
    let target = BigRational::one() - &mass * (BigRational::one() - alpha);
    if target <= BigRational::zero() || target > BigRational::one() {
        return Err(Error::MalformedCode(format!("impossible total mass {mass}")).into());
    }
    let mut power = BigRational::one();
    for n in 0..=MAX_DECODE_LEN {
        if power == target {
            return Ok(n);
        }
        power *= alpha;
    }
    Err(Error::MalformedCode(format!(
        "total mass {mass} matches no sequence of length <= {MAX_DECODE_LEN}"
    ))
    .into())
}

const MAX_DECODE_LEN: usize = 100_000;
