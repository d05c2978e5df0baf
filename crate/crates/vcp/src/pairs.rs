//! Co-citation events, pair aggregation, dataset filtering and splitting.
//!
//! Every unordered pair of distinct link targets inside one document is a
//! co-citation event carrying the word distance between the two markers and
//! the tightest structural level containing both. Events aggregate into one
//! [`CoCitationPair`] per target pair; the dataset keeps exactly the pairs
//! cited once with distance in `[1, max_distance]`, the regression target
//! being the raw distance (CPI is carried along for dataset parity only).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{normalize_target, word_distance, LinkOccurrence};

#[derive(Debug, Error)]
pub enum PairsError {
    #[error("pairs file line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("split needs at least 3 items, got {0}")]
    TooFewItems(usize),
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    BadFractions((f64, f64, f64)),
    #[error("dataset example: {0}")]
    BadExample(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tightest structural unit containing both markers of an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProximityLevel {
    SameSentence,
    SameParagraph,
    SameSection,
    SameArticle,
}

impl ProximityLevel {
    /// Citation proximity index of the level. Halves per level so averages
    /// stay comparable across datasets using the same scheme.
    pub fn cpi(self) -> f64 {
        match self {
            ProximityLevel::SameSentence => 1.0,
            ProximityLevel::SameParagraph => 0.5,
            ProximityLevel::SameSection => 0.25,
            ProximityLevel::SameArticle => 0.125,
        }
    }
}

/// One co-citation of two distinct targets within one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoCitationEvent {
    pub source_id: String,
    /// Lexicographically smaller target.
    pub target_a: String,
    pub target_b: String,
    pub distance_words: u32,
    pub level: ProximityLevel,
}

/// All co-citation evidence for one unordered target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoCitationPair {
    pub target_a: String,
    pub target_b: String,
    /// Number of events across the corpus; equals `distances.len()`.
    pub count: usize,
    /// Per-event distances in encounter order.
    pub distances: Vec<u32>,
    /// Arithmetic mean of the per-event level CPI values.
    pub cpi: f64,
}

/// One split-ready example row: two document ids and the distance target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRow {
    pub id_a: String,
    pub id_b: String,
    pub distance: u32,
}

/// A fully encoded training example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetExample {
    pub text_a_ids: Vec<u32>,
    pub text_b_ids: Vec<u32>,
    pub distance: u32,
}

impl DatasetExample {
    /// Validates the sequence length and the `[1, 1000]` distance range.
    pub fn new(
        text_a_ids: Vec<u32>,
        text_b_ids: Vec<u32>,
        distance: u32,
        seq_len: usize,
    ) -> Result<Self, PairsError> {
        if text_a_ids.len() != seq_len || text_b_ids.len() != seq_len {
            return Err(PairsError::BadExample(format!(
                "sequence lengths {}/{} != {}",
                text_a_ids.len(),
                text_b_ids.len(),
                seq_len
            )));
        }
        if !(1..=1000).contains(&distance) {
            return Err(PairsError::BadExample(format!(
                "distance {distance} outside [1, 1000]"
            )));
        }
        Ok(DatasetExample {
            text_a_ids,
            text_b_ids,
            distance,
        })
    }
}

/// Enumerate co-citation events among one document's occurrences.
///
/// Expects the occurrences sorted by word offset (the order `parse_document`
/// emits). Pairs with identical targets are skipped, as are occurrences
/// whose target equals the normalized source title (self-links).
pub fn enumerate_events(
    occurrences: &[LinkOccurrence],
    source_title: &str,
) -> Vec<CoCitationEvent> {
    debug_assert!(occurrences
        .windows(2)
        .all(|w| w[0].word_offset <= w[1].word_offset));
    let self_target = normalize_target(source_title);
    let cited: Vec<&LinkOccurrence> = occurrences
        .iter()
        .filter(|o| o.target_title != self_target)
        .collect();
    let mut events = Vec::new();
    for i in 0..cited.len() {
        for j in i + 1..cited.len() {
            let (a, b) = (cited[i], cited[j]);
            if a.target_title == b.target_title {
                continue;
            }
            let distance = word_distance(a, b).expect("occurrences share a document") as u32;
            let level = if a.sentence_idx == b.sentence_idx {
                ProximityLevel::SameSentence
            } else if a.paragraph_idx == b.paragraph_idx {
                ProximityLevel::SameParagraph
            } else if a.section_idx == b.section_idx {
                ProximityLevel::SameSection
            } else {
                ProximityLevel::SameArticle
            };
            let (target_a, target_b) = canonical_order(&a.target_title, &b.target_title);
            events.push(CoCitationEvent {
                source_id: a.source_id.clone(),
                target_a,
                target_b,
                distance_words: distance,
                level,
            });
        }
    }
    events
}

fn canonical_order(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Aggregate events into one pair per unordered target pair.
///
/// Distances keep the encounter order of the event stream; callers that
/// want a canonical order feed events sorted by (source document id, word
/// offset). Output is sorted by target pair.
pub fn aggregate(events: impl IntoIterator<Item = CoCitationEvent>) -> Vec<CoCitationPair> {
    let mut acc: BTreeMap<(String, String), (Vec<u32>, f64)> = BTreeMap::new();
    for event in events {
        let entry = acc
            .entry((event.target_a, event.target_b))
            .or_insert_with(|| (Vec::new(), 0.0));
        entry.0.push(event.distance_words);
        entry.1 += event.level.cpi();
    }
    acc.into_iter()
        .map(|((target_a, target_b), (distances, cpi_sum))| {
            let count = distances.len();
            CoCitationPair {
                target_a,
                target_b,
                count,
                cpi: cpi_sum / count as f64,
                distances,
            }
        })
        .collect()
}

/// Keep exactly the pairs co-cited once with distance in `[1, max_distance]`.
pub fn filter_pairs(pairs: Vec<CoCitationPair>, max_distance: u32) -> Vec<CoCitationPair> {
    pairs
        .into_iter()
        .filter(|p| p.count == 1 && (1..=max_distance).contains(&p.distances[0]))
        .collect()
}

/// Train/validation/test parts of a split.
pub type SplitParts<T> = (Vec<T>, Vec<T>, Vec<T>);

/// Deterministic shuffled partition into train/validation/test.
///
/// The shuffle is a Fisher-Yates pass driven by ChaCha8 seeded from `seed`.
/// Validation and test sizes round to the nearest integer; train takes the
/// remainder, so the three parts are disjoint and exhaustive.
pub fn split_dataset<T>(
    items: Vec<T>,
    seed: u64,
    fractions: (f64, f64, f64),
) -> Result<SplitParts<T>, PairsError> {
    let (f_train, f_val, f_test) = fractions;
    let sum = f_train + f_val + f_test;
    if f_train < 0.0 || f_val < 0.0 || f_test < 0.0 || (sum - 1.0).abs() > 1e-9 {
        return Err(PairsError::BadFractions(fractions));
    }
    if items.len() < 3 {
        return Err(PairsError::TooFewItems(items.len()));
    }
    let n = items.len();
    let n_val = (n as f64 * f_val).round() as usize;
    let n_test = (n as f64 * f_test).round() as usize;
    if n_val + n_test > n {
        return Err(PairsError::BadFractions(fractions));
    }
    let n_train = n - n_val - n_test;

    let mut shuffled = items;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let mut iter = shuffled.into_iter();
    let train: Vec<T> = iter.by_ref().take(n_train).collect();
    let val: Vec<T> = iter.by_ref().take(n_val).collect();
    let test: Vec<T> = iter.collect();
    Ok((train, val, test))
}

pub const PAIRS_TSV_HEADER: &str = "target_a\ttarget_b\tcount\tdistances\tcpi";
pub const DATASET_TSV_HEADER: &str = "id_a\tid_b\tdistance";

/// Write pairs as TSV: `target_a target_b count distances cpi` with the
/// distances comma-joined.
pub fn write_pairs<W: Write>(mut w: W, pairs: &[CoCitationPair]) -> Result<(), PairsError> {
    writeln!(w, "{PAIRS_TSV_HEADER}")?;
    for p in pairs {
        let distances = p
            .distances
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            p.target_a, p.target_b, p.count, distances, p.cpi
        )?;
    }
    Ok(())
}

/// Read pairs written by [`write_pairs`]. Errors carry 1-based line numbers.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<CoCitationPair>, PairsError> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header == PAIRS_TSV_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(PairsError::MalformedRow {
                line: 1,
                message: format!("unexpected header {header:?}"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(PairsError::MalformedRow {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row = |message: String| PairsError::MalformedRow {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(row(format!("expected 5 fields, got {}", fields.len())));
        }
        let count: usize = fields[2]
            .parse()
            .map_err(|e| row(format!("count: {e}")))?;
        let distances = fields[3]
            .split(',')
            .map(|d| d.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| row(format!("distances: {e}")))?;
        if distances.len() != count {
            return Err(row(format!(
                "count {count} does not match {} distances",
                distances.len()
            )));
        }
        let cpi: f64 = fields[4].parse().map_err(|e| row(format!("cpi: {e}")))?;
        pairs.push(CoCitationPair {
            target_a: fields[0].to_string(),
            target_b: fields[1].to_string(),
            count,
            distances,
            cpi,
        });
    }
    Ok(pairs)
}

/// Write dataset rows as TSV: `id_a id_b distance`.
pub fn write_dataset_rows<W: Write>(mut w: W, rows: &[DatasetRow]) -> Result<(), PairsError> {
    writeln!(w, "{DATASET_TSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}\t{}\t{}", r.id_a, r.id_b, r.distance)?;
    }
    Ok(())
}

/// Read dataset rows written by [`write_dataset_rows`].
pub fn read_dataset_rows<R: BufRead>(reader: R) -> Result<Vec<DatasetRow>, PairsError> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header == DATASET_TSV_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(PairsError::MalformedRow {
                line: 1,
                message: format!("unexpected header {header:?}"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(PairsError::MalformedRow {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(PairsError::MalformedRow {
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let distance: u32 = fields[2].parse().map_err(|e| PairsError::MalformedRow {
            line: line_no,
            message: format!("distance: {e}"),
        })?;
        rows.push(DatasetRow {
            id_a: fields[0].to_string(),
            id_b: fields[1].to_string(),
            distance,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_document;

    fn occurrences(raw: &str) -> Vec<LinkOccurrence> {
        parse_document("doc", "Source", raw).unwrap().occurrences
    }

    #[test]
    fn single_event_same_sentence() {
        let occ = occurrences("Alpha [[B]] two three [[C]] end");
        let events = enumerate_events(&occ, "Source");
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].target_a, "B");
        assert_eq!(events[0].target_b, "C");
        assert_eq!(events[0].distance_words, 2);
        assert_eq!(events[0].level, ProximityLevel::SameSentence);
    }

    #[test]
    fn single_occurrence_no_events() {
        let occ = occurrences("only [[B]] here");
        assert!(enumerate_events(&occ, "Source").is_empty());
    }

    #[test]
    fn same_target_twice_no_events() {
        let occ = occurrences("[[B]] one two three four five six seven eight [[B]]");
        assert!(enumerate_events(&occ, "Source").is_empty());
    }

    #[test]
    fn self_links_excluded() {
        let occ = occurrences("[[Source]] mid [[B]]");
        assert!(enumerate_events(&occ, "Source").is_empty());
    }

    #[test]
    fn cpi_table_and_monotonicity() {
        assert_eq!(ProximityLevel::SameSentence.cpi(), 1.0);
        assert_eq!(ProximityLevel::SameParagraph.cpi(), 0.5);
        assert_eq!(ProximityLevel::SameSection.cpi(), 0.25);
        assert_eq!(ProximityLevel::SameArticle.cpi(), 0.125);
        assert!(ProximityLevel::SameSentence.cpi() > ProximityLevel::SameParagraph.cpi());
        assert!(ProximityLevel::SameParagraph.cpi() > ProximityLevel::SameSection.cpi());
        assert!(ProximityLevel::SameSection.cpi() > ProximityLevel::SameArticle.cpi());
    }

    fn event(a: &str, b: &str, d: u32, level: ProximityLevel) -> CoCitationEvent {
        CoCitationEvent {
            source_id: "doc".into(),
            target_a: a.into(),
            target_b: b.into(),
            distance_words: d,
            level,
        }
    }

    #[test]
    fn aggregate_two_events() {
        let pairs = aggregate([
            event("B", "C", 2, ProximityLevel::SameSentence),
            event("B", "C", 40, ProximityLevel::SameSection),
        ]);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].count, 2);
        assert_eq!(pairs[0].distances, [2, 40]);
        assert_eq!(pairs[0].cpi, 0.625);
    }

    #[test]
    fn aggregate_single_and_empty() {
        let pairs = aggregate([event("B", "C", 7, ProximityLevel::SameParagraph)]);
        assert_eq!(pairs[0].count, 1);
        assert_eq!(pairs[0].cpi, 0.5);
        assert!(aggregate(std::iter::empty()).is_empty());
    }

    fn pair(count: usize, distances: Vec<u32>) -> CoCitationPair {
        CoCitationPair {
            target_a: "A".into(),
            target_b: "B".into(),
            count,
            distances,
            cpi: 1.0,
        }
    }

    #[test]
    fn filter_boundaries() {
        assert_eq!(filter_pairs(vec![pair(1, vec![1000])], 1000).len(), 1);
        assert_eq!(filter_pairs(vec![pair(1, vec![1001])], 1000).len(), 0);
        assert_eq!(filter_pairs(vec![pair(2, vec![5, 6])], 1000).len(), 0);
        assert_eq!(filter_pairs(vec![pair(1, vec![0])], 1000).len(), 0);
        assert_eq!(filter_pairs(vec![pair(1, vec![1])], 1000).len(), 1);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<u32> = (0..100).collect();
        let (tr1, va1, te1) = split_dataset(items.clone(), 7, (0.72, 0.08, 0.20)).unwrap();
        assert_eq!((tr1.len(), va1.len(), te1.len()), (72, 8, 20));
        let (tr2, va2, te2) = split_dataset(items.clone(), 7, (0.72, 0.08, 0.20)).unwrap();
        assert_eq!((tr1.clone(), va1, te1), (tr2, va2, te2));
        let (tr3, _, _) = split_dataset(items, 8, (0.72, 0.08, 0.20)).unwrap();
        assert_eq!(tr3.len(), 72);
        assert_ne!(tr1, tr3);
    }

    #[test]
    fn split_paper_proportions() {
        // 84000 items at the 64000-train-side / 20000-test proportions with
        // validation taken as a ninth of the train side.
        let items: Vec<u32> = (0..84000).collect();
        let f_test = 20000.0 / 84000.0;
        let f_val = (64000.0 / 9.0) / 84000.0;
        let f_train = 1.0 - f_test - f_val;
        let (tr, va, te) = split_dataset(items, 1, (f_train, f_val, f_test)).unwrap();
        assert_eq!(te.len(), 20000);
        assert_eq!(tr.len() + va.len(), 64000);
    }

    #[test]
    fn split_rejects_tiny_and_bad_fractions() {
        assert!(split_dataset(vec![1, 2], 0, (0.72, 0.08, 0.20)).is_err());
        assert!(split_dataset(vec![1, 2, 3], 0, (0.5, 0.2, 0.2)).is_err());
        assert!(split_dataset(vec![1, 2, 3], 0, (-0.2, 0.6, 0.6)).is_err());
    }

    #[test]
    fn pairs_tsv_roundtrip() {
        let pairs = vec![
            CoCitationPair {
                target_a: "Alpha".into(),
                target_b: "Beta".into(),
                count: 2,
                distances: vec![2, 40],
                cpi: 0.625,
            },
            CoCitationPair {
                target_a: "Gamma delta".into(),
                target_b: "Zeta".into(),
                count: 1,
                distances: vec![7],
                cpi: 0.125,
            },
        ];
        let mut buf = Vec::new();
        write_pairs(&mut buf, &pairs).unwrap();
        let back = read_pairs(buf.as_slice()).unwrap();
        assert_eq!(back, pairs);
    }

    #[test]
    fn pairs_tsv_errors_carry_line_numbers() {
        let bad = format!("{PAIRS_TSV_HEADER}\nA\tB\tnotanumber\t3\t0.5\n");
        match read_pairs(bad.as_bytes()).unwrap_err() {
            PairsError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn pairs_tsv_header_only() {
        let only = format!("{PAIRS_TSV_HEADER}\n");
        assert!(read_pairs(only.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn dataset_rows_roundtrip() {
        let rows = vec![
            DatasetRow {
                id_a: "a".into(),
                id_b: "b".into(),
                distance: 12,
            },
            DatasetRow {
                id_a: "c".into(),
                id_b: "d".into(),
                distance: 1000,
            },
        ];
        let mut buf = Vec::new();
        write_dataset_rows(&mut buf, &rows).unwrap();
        assert_eq!(read_dataset_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn dataset_example_validation() {
        assert!(DatasetExample::new(vec![1, 2], vec![3, 4], 5, 2).is_ok());
        assert!(DatasetExample::new(vec![1], vec![3, 4], 5, 2).is_err());
        assert!(DatasetExample::new(vec![1, 2], vec![3, 4], 0, 2).is_err());
        assert!(DatasetExample::new(vec![1, 2], vec![3, 4], 1001, 2).is_err());
    }
}
