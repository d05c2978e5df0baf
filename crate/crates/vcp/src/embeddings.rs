//! Pretrained word vectors and the frozen embedding matrix.
//!
//! Vector files are the standard text format: one `token v1 v2 ... vD` entry
//! per line, single spaces, decimal floats. The embedding matrix aligns the
//! vectors to a [`Vocabulary`](crate::textprep::Vocabulary): row `id_of(t)`
//! holds the vector of `t`, row 0 (padding) and rows for tokens without a
//! pretrained vector stay zero. The matrix is immutable after construction;
//! training never updates it.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

use crate::textprep::Vocabulary;

#[derive(Debug, Error)]
pub enum EmbeddingsError {
    #[error("vector file is empty")]
    EmptyFile,
    #[error("vector file line {line}: expected {expected} dimensions, got {got}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("vector file line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("embedding dimension {requested} does not match vector file dimension {actual}")]
    WrongDimension { requested: usize, actual: usize },
    #[error("cannot build an embedding matrix for an empty vocabulary")]
    EmptyVocabulary,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Token-to-vector map loaded from a text vector file.
#[derive(Debug, Clone)]
pub struct WordVectors {
    pub dim: usize,
    map: HashMap<String, Vec<f64>>,
    /// One note per duplicate token (last occurrence wins).
    pub warnings: Vec<String>,
}

impl WordVectors {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.map.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Load a text vector file. The dimension is inferred from the first entry
/// and enforced on every later line; duplicate tokens keep the last
/// occurrence and add a warning.
pub fn load_vectors<R: BufRead>(reader: R) -> Result<WordVectors, EmbeddingsError> {
    let mut map: HashMap<String, Vec<f64>> = HashMap::new();
    let mut warnings = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default();
        if token.is_empty() {
            return Err(EmbeddingsError::MalformedLine {
                line: line_no,
                message: "missing token".into(),
            });
        }
        let values = parts
            .map(|p| {
                p.parse::<f64>().map_err(|e| EmbeddingsError::MalformedLine {
                    line: line_no,
                    message: format!("bad float {p:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match dim {
            None => {
                if values.is_empty() {
                    return Err(EmbeddingsError::MalformedLine {
                        line: line_no,
                        message: "entry has no vector components".into(),
                    });
                }
                dim = Some(values.len());
            }
            Some(d) if values.len() != d => {
                return Err(EmbeddingsError::DimensionMismatch {
                    line: line_no,
                    expected: d,
                    got: values.len(),
                });
            }
            Some(_) => {}
        }
        if map.insert(token.to_string(), values).is_some() {
            warnings.push(format!(
                "duplicate vector for {token:?} at line {line_no}; keeping the last"
            ));
        }
    }
    match dim {
        Some(dim) => Ok(WordVectors { dim, map, warnings }),
        None => Err(EmbeddingsError::EmptyFile),
    }
}

/// Frozen `(V + 1) x D` embedding table; row 0 is the all-zero padding row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Number of rows, vocabulary size plus the padding row.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The embedding row for a token id; id 0 is the zero padding row.
    pub fn lookup(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rebuild from raw parts (checkpoint loading).
    pub fn from_raw(rows: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * dim, "embedding data shape");
        EmbeddingMatrix { rows, dim, data }
    }
}

/// Materialize the embedding matrix for a vocabulary.
///
/// Row `id_of(t)` is the pretrained vector of `t` when present, zero
/// otherwise. `dim` must match the vector file dimension.
pub fn build_matrix(
    vocab: &Vocabulary,
    vectors: &WordVectors,
    dim: usize,
) -> Result<EmbeddingMatrix, EmbeddingsError> {
    if vocab.is_empty() {
        return Err(EmbeddingsError::EmptyVocabulary);
    }
    if dim != vectors.dim {
        return Err(EmbeddingsError::WrongDimension {
            requested: dim,
            actual: vectors.dim,
        });
    }
    let rows = vocab.len() + 1;
    let mut data = vec![0.0; rows * dim];
    for (i, token) in vocab.tokens().enumerate() {
        if let Some(v) = vectors.get(token) {
            let start = (i + 1) * dim;
            data[start..start + dim].copy_from_slice(v);
        }
    }
    Ok(EmbeddingMatrix { rows, dim, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::build_vocab;

    fn vocab_of(tokens: &[&str]) -> Vocabulary {
        let doc: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        build_vocab([doc.iter()]).unwrap()
    }

    #[test]
    fn load_single_entry() {
        let v = load_vectors("cat 0.1 0.2 0.3\n".as_bytes()).unwrap();
        assert_eq!(v.dim, 3);
        assert_eq!(v.get("cat"), Some([0.1, 0.2, 0.3].as_slice()));
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        let err = load_vectors("cat 0.1 0.2 0.3\ndog 1 2 3 4\n".as_bytes()).unwrap_err();
        match err {
            EmbeddingsError::DimensionMismatch { line, expected, got } => {
                assert_eq!((line, expected, got), (2, 3, 4));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn empty_file_is_error() {
        assert!(matches!(
            load_vectors("".as_bytes()).unwrap_err(),
            EmbeddingsError::EmptyFile
        ));
    }

    #[test]
    fn duplicate_token_last_wins_with_warning() {
        let v = load_vectors("cat 1 2\ncat 3 4\n".as_bytes()).unwrap();
        assert_eq!(v.get("cat"), Some([3.0, 4.0].as_slice()));
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn matrix_placement_and_padding_row() {
        let vocab = vocab_of(&["a"]);
        let vectors = load_vectors("a 1 2 3\n".as_bytes()).unwrap();
        let m = build_matrix(&vocab, &vectors, 3).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.lookup(0), [0.0, 0.0, 0.0]);
        assert_eq!(m.lookup(1), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn missing_token_gets_zero_row() {
        let vocab = vocab_of(&["a", "b"]);
        let vectors = load_vectors("a 1 2\n".as_bytes()).unwrap();
        let m = build_matrix(&vocab, &vectors, 2).unwrap();
        let b_id = vocab.id_of("b").unwrap();
        assert_eq!(m.lookup(b_id), [0.0, 0.0]);
    }

    #[test]
    fn empty_vocab_is_error() {
        let vectors = load_vectors("a 1 2\n".as_bytes()).unwrap();
        // An empty vocabulary cannot be constructed through build_vocab, so
        // exercise the guard through the error path of build_vocab instead.
        let none: [Vec<String>; 0] = [];
        assert!(crate::textprep::build_vocab(none.iter().map(|d| d.iter())).is_err());
        let vocab = vocab_of(&["a"]);
        assert!(matches!(
            build_matrix(&vocab, &vectors, 5).unwrap_err(),
            EmbeddingsError::WrongDimension { .. }
        ));
    }
}
