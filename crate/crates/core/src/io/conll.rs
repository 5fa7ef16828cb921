use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::corpus::{Corpus, GoldSpan};

/// Which whitespace-separated columns hold the token and the BIO tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpec {
    pub token: usize,
    pub tag: usize,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        // token first, tag last is the common two-column layout
        ColumnSpec { token: 0, tag: 1 }
    }
}

/// Load a CoNLL-style column file: sentences separated by blank lines, BIO
/// (or BIO2) tags converted to spans. A dangling `I-X` without an open `X`
/// chunk is repaired by treating it as `B-X`.
pub fn load_conll(path: impl AsRef<Path>, columns: ColumnSpec) -> Result<Corpus> {
    let text = fs::read_to_string(&path)?;
    let name = path
        .as_ref()
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    parse_conll(&text, columns, &name, "unspecified")
}

pub fn parse_conll(text: &str, columns: ColumnSpec, name: &str, split: &str) -> Result<Corpus> {
    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut spans: Vec<Vec<GoldSpan>> = Vec::new();
    let mut label_set: Vec<String> = Vec::new();

    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<(String, Option<String>)> = Vec::new(); // (prefix, label)

    let flush = |tokens: &mut Vec<String>,
                     tags: &mut Vec<(String, Option<String>)>,
                     sentences: &mut Vec<Vec<String>>,
                     spans: &mut Vec<Vec<GoldSpan>>,
                     label_set: &mut Vec<String>| {
        if tokens.is_empty() {
            return;
        }
        let mut sent_spans = Vec::new();
        let mut open: Option<(usize, String)> = None;
        for (i, (prefix, label)) in tags.iter().enumerate() {
            let close_open = |open: &mut Option<(usize, String)>, sent_spans: &mut Vec<GoldSpan>| {
                if let Some((start, label)) = open.take() {
                    sent_spans.push(GoldSpan { start, end: i - 1, label });
                }
            };
            match (prefix.as_str(), label) {
                ("O", _) => close_open(&mut open, &mut sent_spans),
                ("B", Some(l)) => {
                    close_open(&mut open, &mut sent_spans);
                    open = Some((i, l.clone()));
                }
                ("I", Some(l)) => match &open {
                    Some((_, ol)) if ol == l => {}
                    // Dangling I- opener: repaired to B-.
                    _ => {
                        close_open(&mut open, &mut sent_spans);
                        open = Some((i, l.clone()));
                    }
                },
                _ => unreachable!("prefixes validated during parsing"),
            }
        }
        if let Some((start, label)) = open {
            sent_spans.push(GoldSpan { start, end: tokens.len() - 1, label });
        }
        for s in &sent_spans {
            if !label_set.contains(&s.label) {
                label_set.push(s.label.clone());
            }
        }
        sentences.push(std::mem::take(tokens));
        spans.push(sent_spans);
        tags.clear();
    };

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            flush(&mut tokens, &mut tags, &mut sentences, &mut spans, &mut label_set);
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let token = cols.get(columns.token).ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: format!("missing token column {}", columns.token),
        })?;
        let tag = cols.get(columns.tag).ok_or_else(|| Error::Parse {
            line: lineno + 1,
            msg: format!("missing tag column {}", columns.tag),
        })?;
        let (prefix, label) = if *tag == "O" {
            ("O".to_string(), None)
        } else if let Some((p, l)) = tag.split_once('-') {
            if p != "B" && p != "I" {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("unknown tag prefix {p:?} in {tag:?}"),
                });
            }
            (p.to_string(), Some(l.to_string()))
        } else {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("unknown tag {tag:?} (expected O, B-X or I-X)"),
            });
        };
        tokens.push(token.to_string());
        tags.push((prefix, label));
    }
    flush(&mut tokens, &mut tags, &mut sentences, &mut spans, &mut label_set);

    label_set.sort();
    Corpus::new(name, split, sentences, spans, label_set)
}

/// Render one sentence's spans as BIO tags.
pub fn spans_to_bio(sentence_len: usize, spans: &[GoldSpan]) -> Vec<String> {
    let mut tags = vec!["O".to_string(); sentence_len];
    for s in spans {
        tags[s.start] = format!("B-{}", s.label);
        for tag in tags.iter_mut().take(s.end + 1).skip(s.start + 1) {
            *tag = format!("I-{}", s.label);
        }
    }
    tags
}

/// Write a corpus back out as two-column CoNLL text.
pub fn write_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (sent, spans) in corpus.sentences.iter().zip(&corpus.spans) {
        let tags = spans_to_bio(sent.len(), spans);
        for (tok, tag) in sent.iter().zip(&tags) {
            out.push_str(tok);
            out.push(' ');
            out.push_str(tag);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_entity() {
        let c = parse_conll("John B-PER\nlives O\n", ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(c.sentences, vec![vec!["John".to_string(), "lives".to_string()]]);
        assert_eq!(
            c.spans,
            vec![vec![GoldSpan { start: 0, end: 0, label: "PER".into() }]]
        );
    }

    #[test]
    fn multi_token_entity() {
        let text = "New B-LOC\nYork I-LOC\nCity I-LOC\n";
        let c = parse_conll(text, ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(
            c.spans[0],
            vec![GoldSpan { start: 0, end: 2, label: "LOC".into() }]
        );
    }

    #[test]
    fn dangling_i_tag_repaired_to_b() {
        let text = "works O\nat O\nAcme I-ORG\nCorp I-ORG\n";
        let c = parse_conll(text, ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(
            c.spans[0],
            vec![GoldSpan { start: 2, end: 3, label: "ORG".into() }]
        );
        // and the repaired corpus round-trips
        let rendered = write_conll(&c);
        let back = parse_conll(&rendered, ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(back.spans, c.spans);
    }

    #[test]
    fn adjacent_chunks_stay_separate() {
        let text = "Paris B-LOC\nLyon B-LOC\n";
        let c = parse_conll(text, ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(c.spans[0].len(), 2);
    }

    #[test]
    fn unknown_prefix_is_a_parse_error_with_line() {
        let err = parse_conll("John E-PER\n", ColumnSpec::default(), "t", "x").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bio_roundtrip_is_identity_on_well_formed_input() {
        let text = "\
John B-PER
lives O
in O
New B-LOC
York I-LOC

Acme B-ORG
hired O
Jane B-PER
";
        let c = parse_conll(text, ColumnSpec::default(), "t", "train").unwrap();
        let back = parse_conll(&write_conll(&c), ColumnSpec::default(), "t", "train").unwrap();
        assert_eq!(back.sentences, c.sentences);
        assert_eq!(back.spans, c.spans);
    }
}
