//! Text normalization, vocabulary construction and sequence encoding.
//!
//! Documents are lowercased, split on non-alphanumeric characters, stripped
//! of stopwords and Porter-stemmed (the stemmer stands in for
//! lemmatization). The vocabulary ranks tokens by corpus frequency — more
//! frequent means smaller id, ties broken lexicographically — with id 0
//! reserved for padding. Documents encode to a fixed-length id sequence:
//! unknown tokens are dropped, the head is kept, zeros pad the tail.

pub mod porter;

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use thiserror::Error;

pub use porter::stem;

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary file line {line}: {message}")]
    MalformedVocab { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The default English stopword list (174 words), shipped with the crate.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Parse a stopword file: one token per line, lowercased, blanks skipped.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// Lowercase, split on non-alphanumeric characters, drop stopwords, stem.
pub fn normalize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !stopwords.contains(*t))
        .map(stem)
        .collect()
}

/// Frequency-ranked token ids, 1-based; id 0 is padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// Rank order: `entries[i]` holds id `i + 1`.
    entries: Vec<(String, u64)>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_entries(entries: Vec<(String, u64)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), (i + 1) as u32))
            .collect();
        Vocabulary { entries, index }
    }

    /// Number of tokens V; valid ids are `1..=V`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn frequency_of(&self, token: &str) -> Option<u64> {
        self.id_of(token).map(|id| self.entries[id as usize - 1].1)
    }

    /// Tokens in id order starting at id 1.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }
}

/// Build the vocabulary from per-document token streams.
///
/// Counting is commutative, so document order does not matter; the ranking
/// (frequency descending, token ascending) fixes the ids.
pub fn build_vocab<'a, I, S>(streams: I) -> Result<Vocabulary, TextprepError>
where
    I: IntoIterator<Item = S>,
    S: IntoIterator<Item = &'a String>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    for stream in streams {
        for token in stream {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(TextprepError::EmptyCorpus);
    }
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|(ta, fa), (tb, fb)| fb.cmp(fa).then_with(|| ta.cmp(tb)));
    Ok(Vocabulary::from_entries(entries))
}

/// Encode tokens as exactly `len` ids: unknown tokens dropped, head kept,
/// zero-padded at the end.
pub fn encode(tokens: &[String], vocab: &Vocabulary, len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = tokens
        .iter()
        .filter_map(|t| vocab.id_of(t))
        .take(len)
        .collect();
    ids.resize(len, 0);
    ids
}

pub const VOCAB_TSV_HEADER: &str = "token\tid\tfrequency";

/// Write the vocabulary as TSV `token id frequency` in id order.
pub fn write_vocab<W: Write>(mut w: W, vocab: &Vocabulary) -> Result<(), TextprepError> {
    writeln!(w, "{VOCAB_TSV_HEADER}")?;
    for (i, (token, freq)) in vocab.entries.iter().enumerate() {
        writeln!(w, "{}\t{}\t{}", token, i + 1, freq)?;
    }
    Ok(())
}

/// Read a vocabulary written by [`write_vocab`]; ids must be contiguous
/// from 1 in file order.
pub fn read_vocab<R: BufRead>(reader: R) -> Result<Vocabulary, TextprepError> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header == VOCAB_TSV_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(TextprepError::MalformedVocab {
                line: 1,
                message: format!("unexpected header {header:?}"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(TextprepError::MalformedVocab {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(TextprepError::MalformedVocab {
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let id: u32 = fields[1].parse().map_err(|e| TextprepError::MalformedVocab {
            line: line_no,
            message: format!("id: {e}"),
        })?;
        if id as usize != entries.len() + 1 {
            return Err(TextprepError::MalformedVocab {
                line: line_no,
                message: format!("id {id} out of order, expected {}", entries.len() + 1),
            });
        }
        let freq: u64 = fields[2].parse().map_err(|e| TextprepError::MalformedVocab {
            line: line_no,
            message: format!("frequency: {e}"),
        })?;
        entries.push((fields[0].to_string(), freq));
    }
    if entries.is_empty() {
        return Err(TextprepError::EmptyCorpus);
    }
    Ok(Vocabulary::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stops(words: &[&str]) -> HashSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn normalize_stems_and_filters() {
        let out = normalize("The cats RUNNING fast.", &stops(&["the"]));
        assert_eq!(out, ["cat", "run", "fast"]);
    }

    #[test]
    fn normalize_empty_and_all_stopwords() {
        assert!(normalize("", &stops(&["the"])).is_empty());
        assert!(normalize("the the the", &stops(&["the"])).is_empty());
    }

    #[test]
    fn normalize_strips_punctuation_as_separators() {
        let out = normalize("co-cited, articles; (really)", &HashSet::new());
        assert_eq!(out, ["co", "cite", "articl", "realli"]);
    }

    #[test]
    fn normalize_is_idempotent_on_its_output() {
        let stopwords = default_stopwords();
        let once = normalize("replacement of the dependent operators", &stopwords);
        let again = normalize(&once.join(" "), &stopwords);
        assert_eq!(once, again);
    }

    #[test]
    fn default_stopword_list_has_174_words() {
        assert_eq!(default_stopwords().len(), 174);
    }

    #[test]
    fn vocab_frequency_ranking() {
        let docs = [vec!["a".to_string(), "b".to_string(), "a".to_string()]];
        let vocab = build_vocab(docs.iter().map(|d| d.iter())).unwrap();
        assert_eq!(vocab.id_of("a"), Some(1));
        assert_eq!(vocab.id_of("b"), Some(2));
        assert_eq!(vocab.frequency_of("a"), Some(2));
    }

    #[test]
    fn vocab_tie_breaks_lexicographically() {
        let docs = [vec!["y".to_string(), "x".to_string()]];
        let vocab = build_vocab(docs.iter().map(|d| d.iter())).unwrap();
        assert_eq!(vocab.id_of("x"), Some(1));
        assert_eq!(vocab.id_of("y"), Some(2));
    }

    #[test]
    fn vocab_single_token_and_empty() {
        let docs = [vec!["z".to_string(), "z".to_string()]];
        let vocab = build_vocab(docs.iter().map(|d| d.iter())).unwrap();
        assert_eq!(vocab.len(), 1);
        let none: [Vec<String>; 0] = [];
        assert!(build_vocab(none.iter().map(|d| d.iter())).is_err());
    }

    #[test]
    fn vocab_is_permutation_invariant() {
        let d1 = ["a".to_string(), "b".to_string()];
        let d2 = ["b".to_string(), "c".to_string(), "b".to_string()];
        let forward = build_vocab([d1.iter(), d2.iter()]).unwrap();
        let backward = build_vocab([d2.iter(), d1.iter()]).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn encode_pads_truncates_drops() {
        let docs = [vec!["a".to_string(), "b".to_string()]];
        let vocab = build_vocab(docs.iter().map(|d| d.iter())).unwrap();
        let toks = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();

        assert_eq!(encode(&toks("a b"), &vocab, 4), [1, 2, 0, 0]);
        assert_eq!(encode(&[], &vocab, 3), [0, 0, 0]);
        // unknown tokens are dropped, not mapped
        assert_eq!(encode(&toks("a zz b"), &vocab, 4), [1, 2, 0, 0]);

        let sixty: Vec<String> = (0..60).map(|_| "a".to_string()).collect();
        let enc = encode(&sixty, &vocab, 50);
        assert_eq!(enc.len(), 50);
        assert!(enc.iter().all(|&id| id == 1));
    }

    #[test]
    fn vocab_tsv_roundtrip() {
        let docs = [vec![
            "alpha".to_string(),
            "beta".to_string(),
            "alpha".to_string(),
        ]];
        let vocab = build_vocab(docs.iter().map(|d| d.iter())).unwrap();
        let mut buf = Vec::new();
        write_vocab(&mut buf, &vocab).unwrap();
        let back = read_vocab(buf.as_slice()).unwrap();
        assert_eq!(back, vocab);
    }

    #[test]
    fn vocab_tsv_rejects_gaps() {
        let bad = format!("{VOCAB_TSV_HEADER}\nalpha\t2\t3\n");
        match read_vocab(bad.as_bytes()).unwrap_err() {
            TextprepError::MalformedVocab { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }
}
