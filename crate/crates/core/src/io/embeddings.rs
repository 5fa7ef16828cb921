use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::Vocab;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

/// Pre-trained word embeddings: vocabulary (unknown token at index 0) plus a
/// row-aligned matrix. The unknown row is the columnwise mean of all loaded
/// rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub vocab: Vocab,
    pub matrix: Matrix,
    pub dim: usize,
    pub warnings: Vec<String>,
}

impl EmbeddingTable {
    fn from_pairs(pairs: Vec<(String, Vec<f64>)>, dim: usize) -> Result<Self> {
        let mut warnings = Vec::new();
        let mut tokens: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (tok, row) in pairs {
            if tokens.contains(&tok) {
                // first occurrence wins
                warnings.push(format!("duplicate token {tok:?} ignored"));
                continue;
            }
            tokens.push(tok);
            rows.push(row);
        }
        let vocab = Vocab::from_tokens(tokens.iter());
        let mut matrix = Matrix::zeros(vocab.size() as usize, dim);
        // unknown row = mean of all known rows
        if !rows.is_empty() {
            for c in 0..dim {
                let mean = rows.iter().map(|r| r[c]).sum::<f64>() / rows.len() as f64;
                matrix.set(0, c, mean);
            }
        }
        for (i, row) in rows.iter().enumerate() {
            matrix.row_mut(i + 1).copy_from_slice(row);
        }
        Ok(EmbeddingTable {
            vocab,
            matrix,
            dim,
            warnings,
        })
    }
}

/// Load a word2vec-interchange embedding file. Both formats start with a
/// `count dim` header line.
pub fn load_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingTable> {
    let file = File::open(path)?;
    match format {
        EmbeddingFormat::Text => load_text(BufReader::new(file)),
        EmbeddingFormat::Binary => load_binary(BufReader::new(file)),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let count = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse { line: 1, msg: "bad embedding count in header".into() })?;
    let dim = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse { line: 1, msg: "bad embedding dim in header".into() })?;
    if dim == 0 {
        return Err(Error::Parse { line: 1, msg: "embedding dim must be positive".into() });
    }
    Ok((count, dim))
}

fn load_text(reader: impl BufRead) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty embedding file".into() })??;
    let (count, dim) = parse_header(&header)?;
    let mut pairs = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tok = parts
            .next()
            .ok_or_else(|| Error::Parse { line: i + 2, msg: "missing token".into() })?
            .to_string();
        let row: Vec<f64> = parts
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 2,
                    msg: format!("bad float {v:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {dim} values, got {}", row.len()),
            });
        }
        pairs.push((tok, row));
    }
    if pairs.len() != count {
        return Err(Error::Parse {
            line: pairs.len() + 1,
            msg: format!("header declares {count} vectors, file holds {}", pairs.len()),
        });
    }
    EmbeddingTable::from_pairs(pairs, dim)
}

fn load_binary(mut reader: impl BufRead) -> Result<EmbeddingTable> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let header = String::from_utf8(header)
        .map_err(|_| Error::Parse { line: 1, msg: "non-UTF8 header".into() })?;
    let (count, dim) = parse_header(&header)?;
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let mut tok_bytes = Vec::new();
        loop {
            let mut b = [0u8; 1];
            if reader.read(&mut b)? == 0 {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: "truncated binary embedding file".into(),
                });
            }
            match b[0] {
                b' ' => break,
                b'\n' => continue, // leading newline from the previous record
                _ => tok_bytes.push(b[0]),
            }
        }
        let tok = String::from_utf8(tok_bytes)
            .map_err(|_| Error::Parse { line: i + 2, msg: "non-UTF8 token".into() })?;
        let mut row = Vec::with_capacity(dim);
        for _ in 0..dim {
            let v = reader.read_f32::<LittleEndian>().map_err(|_| Error::Parse {
                line: i + 2,
                msg: "truncated vector data".into(),
            })?;
            row.push(v as f64);
        }
        pairs.push((tok, row));
    }
    EmbeddingTable::from_pairs(pairs, dim)
}

/// Write the text interchange format (used by tests and `make-synthetic`).
pub fn write_text_embeddings(
    out: &mut impl Write,
    pairs: &[(String, Vec<f64>)],
    dim: usize,
) -> Result<()> {
    writeln!(out, "{} {}", pairs.len(), dim)?;
    for (tok, row) in pairs {
        write!(out, "{tok}")?;
        for v in row {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Write the word2vec binary interchange format.
pub fn write_binary_embeddings(
    out: &mut impl Write,
    pairs: &[(String, Vec<f64>)],
    dim: usize,
) -> Result<()> {
    writeln!(out, "{} {}", pairs.len(), dim)?;
    for (tok, row) in pairs {
        out.write_all(tok.as_bytes())?;
        out.write_all(b" ")?;
        for v in row {
            out.write_f32::<LittleEndian>(*v as f32)?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample_pairs() -> Vec<(String, Vec<f64>)> {
        vec![
            ("cat".into(), vec![1.0, 2.0, 3.0]),
            ("dog".into(), vec![-1.0, 0.0, 1.0]),
        ]
    }

    #[test]
    fn two_word_text_file_has_three_rows() {
        let mut buf = Vec::new();
        write_text_embeddings(&mut buf, &sample_pairs(), 3).unwrap();
        let t = load_text(Cursor::new(buf)).unwrap();
        assert_eq!(t.matrix.rows, 3); // 2 words + unknown
        assert_eq!(t.dim, 3);
        assert_eq!(t.matrix.row(t.vocab.lookup("cat") as usize), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn unknown_row_is_columnwise_mean() {
        let mut buf = Vec::new();
        write_text_embeddings(&mut buf, &sample_pairs(), 3).unwrap();
        let t = load_text(Cursor::new(buf)).unwrap();
        assert_eq!(t.matrix.row(0), &[0.0, 1.0, 2.0]);
        assert_eq!(t.vocab.lookup("bird"), 0);
    }

    #[test]
    fn binary_and_text_agree_within_f32() {
        let mut tbuf = Vec::new();
        write_text_embeddings(&mut tbuf, &sample_pairs(), 3).unwrap();
        let mut bbuf = Vec::new();
        write_binary_embeddings(&mut bbuf, &sample_pairs(), 3).unwrap();
        let text = load_text(Cursor::new(tbuf)).unwrap();
        let bin = load_binary(Cursor::new(bbuf)).unwrap();
        assert_eq!(text.vocab, bin.vocab);
        for (a, b) in text.matrix.data.iter().zip(&bin.matrix.data) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn dim_mismatch_mid_file_is_an_error() {
        let bad = "2 3\ncat 1 2 3\ndog 1 2\n";
        assert!(matches!(
            load_text(Cursor::new(bad.as_bytes().to_vec())),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn duplicate_token_first_wins_with_warning() {
        let text = "2 2\ncat 1 2\ncat 9 9\n";
        let t = load_text(Cursor::new(text.as_bytes().to_vec())).unwrap();
        assert_eq!(t.warnings.len(), 1);
        assert_eq!(t.matrix.row(t.vocab.lookup("cat") as usize), &[1.0, 2.0]);
    }

    #[test]
    fn shuffled_lines_yield_identical_lookups() {
        let a = "2 2\ncat 1 2\ndog 3 4\n";
        let b = "2 2\ndog 3 4\ncat 1 2\n";
        let ta = load_text(Cursor::new(a.as_bytes().to_vec())).unwrap();
        let tb = load_text(Cursor::new(b.as_bytes().to_vec())).unwrap();
        for tok in ["cat", "dog"] {
            assert_eq!(
                ta.matrix.row(ta.vocab.lookup(tok) as usize),
                tb.matrix.row(tb.vocab.lookup(tok) as usize)
            );
        }
    }
}
