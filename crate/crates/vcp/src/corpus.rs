//! Wiki-style document parsing.
//!
//! A document is raw markup in a minimal wiki-link dialect: `[[Target]]` and
//! `[[Target|anchor text]]` markers embedded in plain text, `==`-prefixed
//! heading lines, and blank-line paragraph breaks. Parsing substitutes each
//! link marker with its anchor text, splits the result into whitespace
//! delimited words, and records one [`LinkOccurrence`] per marker with the
//! word offset of its first anchor word and the sentence/paragraph/section
//! the marker sits in.
//!
//! Word distance between two markers — the number of words strictly between
//! them — is the ground truth the rest of the pipeline trains against.

use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document {id}: unclosed link marker at byte {byte_offset}")]
    UnclosedLink { id: String, byte_offset: usize },
    #[error("document {id}: title must be non-empty")]
    EmptyTitle { id: String },
    #[error("occurrences from different documents: {a} vs {b}")]
    DifferentDocuments { a: String, b: String },
    #[error("corpus line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("duplicate document id {id} (corpus line {line})")]
    DuplicateId { id: String, line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parsed article: identity, raw markup and the substituted word stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub body: String,
    /// Whitespace-delimited words after link substitution. Never contains
    /// empty strings.
    pub words: Vec<String>,
}

/// One in-text link marker located within its source document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkOccurrence {
    pub source_id: String,
    /// Normalized link target: trimmed, internal whitespace collapsed,
    /// first letter uppercased.
    pub target_title: String,
    /// Index into the source document's `words` of the link's first anchor
    /// word, or of the next word when the anchor is empty.
    pub word_offset: usize,
    /// Number of words the anchor text contributes to the word stream.
    pub anchor_words: usize,
    pub sentence_idx: usize,
    pub paragraph_idx: usize,
    pub section_idx: usize,
}

/// Word offsets at which each sentence/paragraph/section starts.
///
/// The lists are strictly increasing; unit `i` covers word offsets
/// `starts[i]..starts[i+1]`. Indices are global over the document (a new
/// section also starts a new paragraph and sentence), so equal sentence
/// indices imply equal paragraph and section indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryTable {
    pub sentence_starts: Vec<usize>,
    pub paragraph_starts: Vec<usize>,
    pub section_starts: Vec<usize>,
}

impl BoundaryTable {
    /// The (sentence, paragraph, section) triple containing `word_offset`.
    pub fn triple_for(&self, word_offset: usize) -> (usize, usize, usize) {
        let locate = |starts: &[usize]| {
            starts
                .partition_point(|&s| s <= word_offset)
                .saturating_sub(1)
        };
        (
            locate(&self.sentence_starts),
            locate(&self.paragraph_starts),
            locate(&self.section_starts),
        )
    }
}

/// Everything `parse_document` recovers from one article.
#[derive(Debug, Clone)]
pub struct ParsedDocument {
    pub doc: Document,
    /// In marker order, which is non-decreasing in word offset.
    pub occurrences: Vec<LinkOccurrence>,
    pub boundaries: BoundaryTable,
    /// Degenerate markers (empty target) are dropped, not fatal; one note
    /// per dropped marker.
    pub warnings: Vec<String>,
}

/// Normalize a link target: trim, collapse internal whitespace runs to a
/// single space, uppercase the first character.
pub fn normalize_target(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut chars = collapsed.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Parser state shared by word emission and occurrence recording.
struct Scanner {
    words: Vec<String>,
    occurrences: Vec<LinkOccurrence>,
    boundaries: BoundaryTable,
    warnings: Vec<String>,
    current_word: String,
    // Boundary triggers take effect when the next word is emitted.
    pending_sentence: bool,
    pending_paragraph: bool,
    pending_section: bool,
    // A '.', '!' or '?' was seen; whitespace or EOF confirms the sentence end.
    sentence_armed: bool,
}

impl Scanner {
    fn new() -> Self {
        Scanner {
            words: Vec::new(),
            occurrences: Vec::new(),
            boundaries: BoundaryTable::default(),
            warnings: Vec::new(),
            current_word: String::new(),
            pending_sentence: true,
            pending_paragraph: true,
            pending_section: true,
            sentence_armed: false,
        }
    }

    /// Indices of the unit the next word will belong to, without opening it.
    /// A pending flag can only be false after at least one word opened the
    /// level, so the subtraction cannot underflow.
    fn effective_indices(&self) -> (usize, usize, usize) {
        let eff = |starts: &[usize], pending: bool| {
            if pending {
                starts.len()
            } else {
                starts.len() - 1
            }
        };
        (
            eff(&self.boundaries.sentence_starts, self.pending_sentence),
            eff(&self.boundaries.paragraph_starts, self.pending_paragraph),
            eff(&self.boundaries.section_starts, self.pending_section),
        )
    }

    fn flush_word(&mut self) {
        if self.current_word.is_empty() {
            return;
        }
        let offset = self.words.len();
        if self.pending_section {
            self.boundaries.section_starts.push(offset);
            self.pending_section = false;
        }
        if self.pending_paragraph {
            self.boundaries.paragraph_starts.push(offset);
            self.pending_paragraph = false;
        }
        if self.pending_sentence {
            self.boundaries.sentence_starts.push(offset);
            self.pending_sentence = false;
        }
        self.words.push(std::mem::take(&mut self.current_word));
    }

    /// Feed one character of prose (link markup already stripped).
    fn feed(&mut self, c: char) {
        if c.is_whitespace() {
            self.flush_word();
            if self.sentence_armed {
                self.pending_sentence = true;
                self.sentence_armed = false;
            }
        } else {
            self.current_word.push(c);
            self.sentence_armed = matches!(c, '.' | '!' | '?');
        }
    }

    fn feed_str(&mut self, text: &str) {
        for c in text.chars() {
            self.feed(c);
        }
    }

    /// Word count including any word still being assembled.
    fn words_so_far(&self) -> usize {
        self.words.len() + usize::from(!self.current_word.is_empty())
    }

    fn end_of_line(&mut self) {
        // a newline is whitespace
        self.feed(' ');
    }

    fn mark_paragraph(&mut self) {
        self.flush_word();
        self.pending_paragraph = true;
        self.pending_sentence = true;
        self.sentence_armed = false;
    }

    fn mark_section(&mut self) {
        self.mark_paragraph();
        self.pending_section = true;
    }
}

/// Parse one document in the wiki-link dialect.
///
/// Link markers are substituted by their anchor text (the target itself when
/// no `|` is present), heading lines contribute their text with the `=` runs
/// stripped, and everything else is split on whitespace. Markers must open
/// and close on one line; an unclosed `[[` is an error carrying the byte
/// offset of the opening bracket. Markers with an empty target are dropped
/// with a warning.
pub fn parse_document(id: &str, title: &str, raw: &str) -> Result<ParsedDocument, CorpusError> {
    if title.is_empty() {
        return Err(CorpusError::EmptyTitle { id: id.to_string() });
    }
    let mut scanner = Scanner::new();
    let mut line_start = 0usize;
    for segment in raw.split('\n') {
        let line = segment.strip_suffix('\r').unwrap_or(segment);
        if line.trim().is_empty() {
            scanner.mark_paragraph();
        } else if let Some(after_marker) = line.strip_prefix("==") {
            scanner.mark_section();
            let content = after_marker.trim_start_matches('=');
            let content_start = 2 + (after_marker.len() - content.len());
            let content = content.trim_end().trim_end_matches('=');
            scan_line(&mut scanner, content, id, line_start + content_start)?;
            scanner.end_of_line();
        } else {
            scan_line(&mut scanner, line, id, line_start)?;
            scanner.end_of_line();
        }
        line_start += segment.len() + 1;
    }
    scanner.flush_word();
    Ok(ParsedDocument {
        doc: Document {
            id: id.to_string(),
            title: title.to_string(),
            body: raw.to_string(),
            words: scanner.words,
        },
        occurrences: scanner.occurrences,
        boundaries: scanner.boundaries,
        warnings: scanner.warnings,
    })
}

/// Scan one line of markup, handling link markers inline.
fn scan_line(
    scanner: &mut Scanner,
    line: &str,
    id: &str,
    line_byte_start: usize,
) -> Result<(), CorpusError> {
    let bytes = line.as_bytes();
    let mut pos = 0usize;
    while pos < bytes.len() {
        if bytes[pos..].starts_with(b"[[") {
            let inner_start = pos + 2;
            let close =
                line[inner_start..]
                    .find("]]")
                    .ok_or_else(|| CorpusError::UnclosedLink {
                        id: id.to_string(),
                        byte_offset: line_byte_start + pos,
                    })?;
            let inner = &line[inner_start..inner_start + close];
            // A marker interrupts any armed sentence break: it is not whitespace.
            scanner.sentence_armed = false;
            process_link(scanner, inner, id);
            pos = inner_start + close + 2;
        } else {
            let c = line[pos..].chars().next().expect("in-bounds char");
            scanner.feed(c);
            pos += c.len_utf8();
        }
    }
    Ok(())
}

/// Substitute one link marker's anchor text and record its occurrence.
fn process_link(scanner: &mut Scanner, inner: &str, id: &str) {
    let (target_raw, anchor) = match inner.find('|') {
        Some(i) => (&inner[..i], &inner[i + 1..]),
        None => (inner, inner),
    };
    let target = normalize_target(target_raw);
    if target.is_empty() {
        scanner.warnings.push(format!(
            "document {id}: dropped link marker [[{inner}]] with empty target"
        ));
        scanner.feed_str(anchor);
        return;
    }

    let mut first_anchor_word: Option<usize> = None;
    for c in anchor.chars() {
        if !c.is_whitespace() && first_anchor_word.is_none() {
            first_anchor_word = Some(scanner.words.len());
        }
        scanner.feed(c);
    }

    let (word_offset, anchor_words, indices) = match first_anchor_word {
        Some(first) => {
            let end = scanner.words_so_far();
            // If the first anchor word has been flushed its indices are in
            // the boundary table. Otherwise it is the word still being
            // assembled, whose indices are fixed by the current pending
            // flags: nothing between recording and flushing the same word
            // can trigger another boundary.
            let indices = if first < scanner.words.len() {
                scanner.boundaries.triple_for(first)
            } else {
                scanner.effective_indices()
            };
            (first, end - first, indices)
        }
        None => (scanner.words_so_far(), 0, scanner.effective_indices()),
    };

    scanner.occurrences.push(LinkOccurrence {
        source_id: id.to_string(),
        target_title: target,
        word_offset,
        anchor_words,
        sentence_idx: indices.0,
        paragraph_idx: indices.1,
        section_idx: indices.2,
    });
}

/// Number of words strictly between two link markers of the same document.
///
/// For `a` before `b` this is `b.word_offset - (a.word_offset +
/// a.anchor_words)`, clamped at zero for adjacent or overlapping anchors.
/// Symmetric in its arguments.
pub fn word_distance(a: &LinkOccurrence, b: &LinkOccurrence) -> Result<usize, CorpusError> {
    if a.source_id != b.source_id {
        return Err(CorpusError::DifferentDocuments {
            a: a.source_id.clone(),
            b: b.source_id.clone(),
        });
    }
    let (first, second) = if a.word_offset <= b.word_offset {
        (a, b)
    } else {
        (b, a)
    };
    Ok(second
        .word_offset
        .saturating_sub(first.word_offset + first.anchor_words))
}

/// Boundary table of a raw document, without keeping the rest of the parse.
pub fn structural_indices(raw: &str) -> Result<BoundaryTable, CorpusError> {
    parse_document("boundary-probe", "probe", raw).map(|p| p.boundaries)
}

#[derive(Debug, Deserialize)]
struct CorpusLine {
    id: String,
    title: String,
    text: String,
}

/// One unparsed corpus record.
#[derive(Debug, Clone)]
pub struct RawDocument {
    pub id: String,
    pub title: String,
    pub text: String,
}

/// Read a JSON-lines corpus: one object per line with string fields `id`,
/// `title` and `text`. Duplicate ids, empty ids/titles and malformed JSON
/// are errors carrying the 1-based line number.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<RawDocument>, CorpusError> {
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CorpusLine =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        if parsed.id.is_empty() {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                message: "empty document id".into(),
            });
        }
        if parsed.title.is_empty() {
            return Err(CorpusError::MalformedLine {
                line: line_no,
                message: "empty document title".into(),
            });
        }
        if !seen.insert(parsed.id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: parsed.id,
                line: line_no,
            });
        }
        docs.push(RawDocument {
            id: parsed.id,
            title: parsed.title,
            text: parsed.text,
        });
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(raw: &str) -> ParsedDocument {
        parse_document("t", "Test Doc", raw).expect("parse")
    }

    #[test]
    fn basic_links_and_offsets() {
        let p = parse("Alpha [[B]] two three [[C]] end");
        assert_eq!(p.doc.words, ["Alpha", "B", "two", "three", "C", "end"]);
        assert_eq!(p.occurrences.len(), 2);
        assert_eq!(p.occurrences[0].target_title, "B");
        assert_eq!(p.occurrences[0].word_offset, 1);
        assert_eq!(p.occurrences[1].target_title, "C");
        assert_eq!(p.occurrences[1].word_offset, 4);
    }

    #[test]
    fn empty_input() {
        let p = parse("");
        assert!(p.doc.words.is_empty());
        assert!(p.occurrences.is_empty());
        assert!(p.boundaries.sentence_starts.is_empty());
    }

    #[test]
    fn piped_anchor_replaces_marker() {
        let p = parse("[[B|bee cee]] x");
        assert_eq!(p.doc.words, ["bee", "cee", "x"]);
        assert_eq!(p.occurrences.len(), 1);
        assert_eq!(p.occurrences[0].target_title, "B");
        assert_eq!(p.occurrences[0].word_offset, 0);
        assert_eq!(p.occurrences[0].anchor_words, 2);
    }

    #[test]
    fn word_distance_hand_counts() {
        let p = parse("Alpha [[B]] two three [[C]] end");
        let d = word_distance(&p.occurrences[0], &p.occurrences[1]).unwrap();
        assert_eq!(d, 2); // "two three"
        let d_rev = word_distance(&p.occurrences[1], &p.occurrences[0]).unwrap();
        assert_eq!(d_rev, 2);
    }

    #[test]
    fn adjacent_markers_distance_zero() {
        let p = parse("[[B]] [[C]]");
        assert_eq!(
            word_distance(&p.occurrences[0], &p.occurrences[1]).unwrap(),
            0
        );
    }

    #[test]
    fn multiword_anchor_counts_toward_distance() {
        // Anchor "the gamma c" occupies offsets 0..3; "mid" is the only word
        // strictly between it and the [[D]] marker.
        let p = parse("[[G|the gamma c]] mid [[D]]");
        assert_eq!(p.doc.words, ["the", "gamma", "c", "mid", "D"]);
        assert_eq!(p.occurrences[0].anchor_words, 3);
        assert_eq!(
            word_distance(&p.occurrences[0], &p.occurrences[1]).unwrap(),
            1
        );
    }

    #[test]
    fn markers_merge_with_adjacent_text() {
        let p = parse("pre[[A]][[B]]post rest");
        assert_eq!(p.doc.words, ["preABpost", "rest"]);
        assert_eq!(p.occurrences[0].word_offset, 0);
        assert_eq!(p.occurrences[1].word_offset, 0);
        assert_eq!(
            word_distance(&p.occurrences[0], &p.occurrences[1]).unwrap(),
            0
        );
    }

    #[test]
    fn different_documents_rejected() {
        let a = parse_document("a", "A", "[[X]]").unwrap();
        let b = parse_document("b", "B", "[[Y]]").unwrap();
        assert!(word_distance(&a.occurrences[0], &b.occurrences[0]).is_err());
    }

    #[test]
    fn unclosed_link_is_error_with_offset() {
        let err = parse_document("t", "T", "one two [[broken").unwrap_err();
        match err {
            CorpusError::UnclosedLink { byte_offset, .. } => assert_eq!(byte_offset, 8),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unclosed_link_offset_counts_previous_lines() {
        let err = parse_document("t", "T", "line one\n[[broken again").unwrap_err();
        match err {
            CorpusError::UnclosedLink { byte_offset, .. } => assert_eq!(byte_offset, 9),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_target_dropped_with_warning() {
        let p = parse("a [[]] b [[|stray anchor]] c");
        assert_eq!(p.doc.words, ["a", "b", "stray", "anchor", "c"]);
        assert!(p.occurrences.is_empty());
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn empty_anchor_link_points_at_next_word() {
        let p = parse("a [[B|]] c");
        assert_eq!(p.doc.words, ["a", "c"]);
        assert_eq!(p.occurrences[0].word_offset, 1);
        assert_eq!(p.occurrences[0].anchor_words, 0);
    }

    #[test]
    fn trailing_empty_anchor_link_offset_equals_word_count() {
        let p = parse("a b [[B|]]");
        assert_eq!(p.doc.words.len(), 2);
        assert_eq!(p.occurrences[0].word_offset, 2);
    }

    #[test]
    fn target_normalization() {
        assert_eq!(normalize_target("  foo   bar "), "Foo bar");
        assert_eq!(normalize_target("foo"), "Foo");
        assert_eq!(normalize_target("Foo"), "Foo");
        assert_eq!(normalize_target(""), "");
    }

    #[test]
    fn degenerate_text_single_units() {
        let b = structural_indices("one two three").unwrap();
        assert_eq!(b.sentence_starts, [0]);
        assert_eq!(b.paragraph_starts, [0]);
        assert_eq!(b.section_starts, [0]);
    }

    #[test]
    fn sentence_split_at_period() {
        let b = structural_indices("A. B").unwrap();
        assert_eq!(b.sentence_starts, [0, 1]);
        assert_eq!(b.paragraph_starts, [0]);
    }

    #[test]
    fn paragraph_split_at_blank_line() {
        let b = structural_indices("x\n\ny").unwrap();
        assert_eq!(b.paragraph_starts, [0, 1]);
        assert_eq!(b.sentence_starts, [0, 1]);
        assert_eq!(b.section_starts, [0]);
    }

    #[test]
    fn heading_starts_section_paragraph_sentence() {
        let p = parse("intro text\n== History ==\nbody here");
        assert_eq!(p.doc.words, ["intro", "text", "History", "body", "here"]);
        assert_eq!(p.boundaries.section_starts, [0, 2]);
        assert_eq!(p.boundaries.paragraph_starts, [0, 2]);
        // Heading text and following body share a sentence until a period.
        assert_eq!(p.boundaries.sentence_starts, [0, 2]);
    }

    #[test]
    fn occurrence_structural_indices() {
        let p = parse("[[A]] one. [[B]] two\n\n[[C]] three\n== S ==\n[[D]] four");
        let triples: Vec<_> = p
            .occurrences
            .iter()
            .map(|o| (o.sentence_idx, o.paragraph_idx, o.section_idx))
            .collect();
        assert_eq!(triples, [(0, 0, 0), (1, 0, 0), (2, 1, 0), (3, 2, 1)]);
    }

    #[test]
    fn question_and_exclamation_end_sentences() {
        let b = structural_indices("what? yes! ok").unwrap();
        assert_eq!(b.sentence_starts, [0, 1, 2]);
    }

    #[test]
    fn period_without_following_whitespace_does_not_split() {
        let b = structural_indices("v1.2 release").unwrap();
        assert_eq!(b.sentence_starts, [0]);
    }

    #[test]
    fn crlf_line_endings_keep_offsets() {
        let err = parse_document("t", "T", "ab\r\n[[x").unwrap_err();
        match err {
            CorpusError::UnclosedLink { byte_offset, .. } => assert_eq!(byte_offset, 4),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn parse_is_deterministic() {
        let raw = "Alpha [[B]] two.\n\n== H ==\nthree [[C|see]] end";
        let a = parse(raw);
        let b = parse(raw);
        assert_eq!(a.doc, b.doc);
        assert_eq!(a.occurrences, b.occurrences);
        assert_eq!(a.boundaries, b.boundaries);
    }

    #[test]
    fn read_corpus_roundtrip_and_errors() {
        let data = "{\"id\":\"a\",\"title\":\"A\",\"text\":\"body [[X]]\"}\n\
                    {\"id\":\"b\",\"title\":\"B\",\"text\":\"\"}\n";
        let docs = read_corpus(data.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "a");

        let bad = "{\"id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\nnot json\n";
        match read_corpus(bad.as_bytes()).unwrap_err() {
            CorpusError::MalformedLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }

        let dup = "{\"id\":\"a\",\"title\":\"A\",\"text\":\"x\"}\n\
                   {\"id\":\"a\",\"title\":\"A2\",\"text\":\"y\"}\n";
        match read_corpus(dup.as_bytes()).unwrap_err() {
            CorpusError::DuplicateId { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn occurrences_sorted_and_structurally_monotone() {
        let raw = "[[A]] x. [[B]] y\n\nz [[C]]\n== T ==\n[[D]] w [[E|]]";
        let p = parse(raw);
        let occ = &p.occurrences;
        for w in occ.windows(2) {
            assert!(w[0].word_offset <= w[1].word_offset);
            assert!(w[0].sentence_idx <= w[1].sentence_idx);
            assert!(w[0].paragraph_idx <= w[1].paragraph_idx);
            assert!(w[0].section_idx <= w[1].section_idx);
        }
    }
}
