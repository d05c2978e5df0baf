//! Synthetic corpus generator for desk-scale validation.
//!
//! Plants one co-cited pair per citing document at an exactly controlled
//! word distance. The distance is a deterministic function of the token
//! overlap planted between the two cited documents, plus bounded noise:
//! each pair shares `s` tokens from a small signal lexicon, both documents
//! pad with disjoint draws from a noise lexicon, and the citing document
//! puts the two link markers exactly `1000 - 62*s + noise` filler words
//! apart (clamped to `[1, 1000]`).
//!
//! A fixed block of decoy documents exercises the extraction and filter
//! edge cases: a pair cited twice, adjacent markers at distance zero, a
//! pair beyond the distance cap, a self-link, degenerate empty markers, and
//! a surviving pair whose second document is missing from the corpus.
//!
//! The generator also emits a random embedding vector per (normalized)
//! corpus token so the whole pipeline can run without pretrained vectors.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::textprep::{default_stopwords, normalize};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Number of planted co-citation pairs; each consumes one citing
    /// document and two target documents.
    pub n_pairs: usize,
    pub seed: u64,
    /// Dimension of the emitted random vectors.
    pub dim: usize,
    /// Tokens per target document.
    pub tokens_per_doc: usize,
    /// Largest plantable overlap; the distance decreases by 62 words per
    /// shared token.
    pub max_shared: usize,
    /// Half-width of the uniform distance noise.
    pub noise: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_pairs: 0,
            seed: 0,
            dim: 16,
            tokens_per_doc: 20,
            max_shared: 16,
            noise: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthDoc {
    pub id: String,
    pub title: String,
    pub text: String,
}

/// Ground truth the generator knows about one planted pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedPair {
    pub target_a: String,
    pub target_b: String,
    pub distance: u32,
    pub shared_tokens: usize,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub documents: Vec<SynthDoc>,
    pub planted: Vec<PlantedPair>,
    /// token → vector, for every normalized token of the corpus.
    pub vectors: Vec<(String, Vec<f64>)>,
}

fn signal_lexicon() -> Vec<String> {
    (0..40).map(|i| format!("sig{i:02}")).collect()
}

fn noise_lexicon() -> Vec<String> {
    (0..400).map(|i| format!("wrd{i:03}")).collect()
}

fn filler_lexicon() -> Vec<String> {
    (0..200).map(|i| format!("fil{i:03}")).collect()
}

/// Accumulates citing-document markup word by word.
struct BodyBuilder {
    lines: Vec<String>,
    current: String,
}

impl BodyBuilder {
    fn new() -> Self {
        BodyBuilder {
            lines: Vec::new(),
            current: String::new(),
        }
    }

    fn push_raw(&mut self, chunk: &str) {
        if !self.current.is_empty() {
            self.current.push(' ');
        }
        self.current.push_str(chunk);
    }

    fn end_line(&mut self) {
        if !self.current.is_empty() {
            self.lines.push(std::mem::take(&mut self.current));
        }
    }

    fn blank_line(&mut self) {
        self.end_line();
        self.lines.push(String::new());
    }

    fn heading(&mut self, word: &str) {
        self.end_line();
        self.lines.push(format!("== {word} =="));
    }

    fn finish(mut self) -> String {
        self.end_line();
        self.lines.join("\n")
    }
}

/// Emit exactly `count` filler words with structural decorations sprinkled
/// in (periods, blank lines, headings), none of which change the word count.
fn push_filler(builder: &mut BodyBuilder, filler: &[String], count: usize, rng: &mut ChaCha8Rng) {
    for _ in 0..count {
        let word = filler[rng.random_range(0..filler.len())].as_str();
        let roll: f64 = rng.random_range(0.0..1.0);
        if roll < 0.02 {
            builder.heading(word);
        } else if roll < 0.14 {
            builder.push_raw(&format!("{word}."));
        } else if roll < 0.17 {
            builder.push_raw(word);
            builder.blank_line();
        } else {
            builder.push_raw(word);
        }
    }
}

/// Generate the corpus, the planted ground truth and the token vectors.
pub fn generate(cfg: &SynthConfig) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let signal = signal_lexicon();
    let noise_pool = noise_lexicon();
    let filler = filler_lexicon();
    let mut documents = Vec::new();
    let mut planted = Vec::new();

    for k in 0..cfg.n_pairs {
        let shared_count = rng.random_range(0..=cfg.max_shared.min(cfg.tokens_per_doc));
        let jitter = rng.random_range(-cfg.noise..=cfg.noise);
        let distance = (1000i64 - 62 * shared_count as i64 + jitter).clamp(1, 1000) as u32;

        // Shared signal tokens appear in both documents; the rest is
        // disjoint noise so the realized overlap equals shared_count.
        let mut signal_shuffled = signal.clone();
        signal_shuffled.shuffle(&mut rng);
        let shared = &signal_shuffled[..shared_count];
        let private_per_doc = cfg.tokens_per_doc - shared_count;
        let mut noise_shuffled = noise_pool.clone();
        noise_shuffled.shuffle(&mut rng);
        let (noise_a, noise_b) = noise_shuffled.split_at(private_per_doc);
        let noise_b = &noise_b[..private_per_doc];

        let title_a = format!("TgtA{k:05}");
        let title_b = format!("TgtB{k:05}");
        for (title, noise_part) in [(&title_a, noise_a), (&title_b, noise_b)] {
            let mut tokens: Vec<&String> = shared.iter().chain(noise_part).collect();
            tokens.shuffle(&mut rng);
            let mut body = String::new();
            for (i, tok) in tokens.iter().enumerate() {
                if i > 0 {
                    body.push(' ');
                }
                body.push_str(tok);
                if i % 8 == 7 {
                    body.push('.');
                }
            }
            documents.push(SynthDoc {
                id: title.clone(),
                title: title.clone(),
                text: body,
            });
        }

        let mut builder = BodyBuilder::new();
        let lead = rng.random_range(0..5);
        push_filler(&mut builder, &filler, lead, &mut rng);
        if rng.random_range(0.0..1.0) < 0.2 {
            let alias_a = &filler[rng.random_range(0..filler.len())];
            let alias_b = &filler[rng.random_range(0..filler.len())];
            builder.push_raw(&format!("[[{title_a}|{alias_a} {alias_b}]]"));
        } else {
            builder.push_raw(&format!("[[{title_a}]]"));
        }
        push_filler(&mut builder, &filler, distance as usize, &mut rng);
        builder.push_raw(&format!("[[{title_b}]]"));
        let tail = rng.random_range(0..3);
        push_filler(&mut builder, &filler, tail, &mut rng);

        documents.push(SynthDoc {
            id: format!("Cite{k:05}"),
            title: format!("Cite{k:05}"),
            text: builder.finish(),
        });
        planted.push(PlantedPair {
            target_a: title_a,
            target_b: title_b,
            distance,
            shared_tokens: shared_count,
        });
    }

    if cfg.n_pairs > 0 {
        documents.extend(decoy_documents(&filler));
    }

    // One random vector per normalized corpus token, in sorted order.
    let stopwords = default_stopwords();
    let mut lexicon: BTreeSet<String> = BTreeSet::new();
    for doc in &documents {
        lexicon.extend(normalize(&doc.text, &stopwords));
        lexicon.extend(normalize(&doc.title, &stopwords));
    }
    let signal_set: BTreeSet<String> = signal.iter().cloned().collect();
    let mut vector_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_f00d);
    let vectors = lexicon
        .into_iter()
        .map(|token| {
            // Signal tokens get a mean-shifted random vector so overlap is
            // statistically visible; everything else is centered.
            let shift = if signal_set.contains(&token) { 0.35 } else { 0.0 };
            let v: Vec<f64> = (0..cfg.dim)
                .map(|_| vector_rng.random_range(-0.35..0.35) + shift)
                .collect();
            (token, v)
        })
        .collect();

    SynthOutput {
        documents,
        planted,
        vectors,
    }
}

/// Fixed documents covering the extraction and filter edge cases.
fn decoy_documents(filler: &[String]) -> Vec<SynthDoc> {
    let mut docs = Vec::new();
    let mut doc = |id: &str, text: String| {
        docs.push(SynthDoc {
            id: id.to_string(),
            title: id.to_string(),
            text,
        });
    };
    let words = |n: usize, from: usize| -> String {
        (0..n)
            .map(|i| filler[(from + i * 7) % filler.len()].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };

    // Pair cited twice: dropped by the once-cited filter.
    doc("DupX", words(4, 0));
    doc("DupY", words(4, 5));
    doc("CiteDup1", format!("[[DupX]] {} [[DupY]]", words(2, 11)));
    doc("CiteDup2", format!("[[DupX]] {} [[DupY]]", words(1, 17)));
    // Adjacent markers: distance 0, below the range floor.
    doc("AdjX", words(3, 23));
    doc("AdjY", words(3, 29));
    doc("CiteAdj", format!("{} [[AdjX]] [[AdjY]] end.", words(2, 31)));
    // Beyond the distance cap: extracted but filtered.
    doc("FarX", words(3, 37));
    doc("FarY", words(3, 41));
    doc("CiteFar", format!("[[FarX]] {} [[FarY]]", words(1001, 43)));
    // Self-link plus degenerate markers: warnings, no events.
    doc(
        "Solo",
        format!(
            "{} [[Solo|]] {} [[]] {} [[|{}]] tail.",
            words(1, 47),
            words(2, 53),
            words(1, 59),
            words(2, 61)
        ),
    );
    // Survives the filter but its second document is missing from the
    // corpus, so dataset assembly must drop it.
    doc("GhostA", words(4, 67));
    doc("CiteGhost", format!("[[GhostA]] {} [[GhostB]]", words(5, 71)));
    docs
}

/// Write the corpus as JSON lines (`id`, `title`, `text`).
pub fn write_corpus<W: Write>(mut w: W, docs: &[SynthDoc]) -> std::io::Result<()> {
    for doc in docs {
        let line = serde_json::json!({
            "id": doc.id,
            "title": doc.title,
            "text": doc.text,
        });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Write vectors in the standard text format: `token v1 ... vD`.
pub fn write_vectors<W: Write>(mut w: W, vectors: &[(String, Vec<f64>)]) -> std::io::Result<()> {
    for (token, values) in vectors {
        write!(w, "{token}")?;
        for v in values {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_document;
    use crate::pairs::{aggregate, enumerate_events};

    #[test]
    fn zero_pairs_empty_corpus() {
        let out = generate(&SynthConfig::default());
        assert!(out.documents.is_empty());
        assert!(out.planted.is_empty());
        assert!(out.vectors.is_empty());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = SynthConfig {
            n_pairs: 5,
            seed: 9,
            ..SynthConfig::default()
        };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.planted, b.planted);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn planted_distances_recovered_by_extraction() {
        let cfg = SynthConfig {
            n_pairs: 12,
            seed: 4,
            ..SynthConfig::default()
        };
        let out = generate(&cfg);
        let mut events = Vec::new();
        for doc in &out.documents {
            let parsed = parse_document(&doc.id, &doc.title, &doc.text).unwrap();
            events.extend(enumerate_events(&parsed.occurrences, &parsed.doc.title));
        }
        let pairs = aggregate(events);
        for p in &out.planted {
            let found = pairs
                .iter()
                .find(|c| c.target_a == p.target_a && c.target_b == p.target_b)
                .unwrap_or_else(|| panic!("missing pair {}/{}", p.target_a, p.target_b));
            assert_eq!(found.count, 1);
            assert_eq!(found.distances, [p.distance]);
        }
    }

    #[test]
    fn decoys_have_expected_shapes() {
        let cfg = SynthConfig {
            n_pairs: 1,
            seed: 2,
            ..SynthConfig::default()
        };
        let out = generate(&cfg);
        let mut events = Vec::new();
        for doc in &out.documents {
            let parsed = parse_document(&doc.id, &doc.title, &doc.text).unwrap();
            events.extend(enumerate_events(&parsed.occurrences, &parsed.doc.title));
        }
        let pairs = aggregate(events);
        let find = |a: &str, b: &str| pairs.iter().find(|p| p.target_a == a && p.target_b == b);

        assert_eq!(find("DupX", "DupY").unwrap().count, 2);
        assert_eq!(find("AdjX", "AdjY").unwrap().distances, [0]);
        assert_eq!(find("FarX", "FarY").unwrap().distances, [1001]);
        assert_eq!(find("GhostA", "GhostB").unwrap().count, 1);
        assert!(!pairs.iter().any(|p| p.target_a == "Solo" || p.target_b == "Solo"));
    }

    #[test]
    fn shared_tokens_really_shared() {
        let cfg = SynthConfig {
            n_pairs: 6,
            seed: 7,
            ..SynthConfig::default()
        };
        let out = generate(&cfg);
        let stopwords = crate::textprep::default_stopwords();
        for p in &out.planted {
            let text_of = |title: &str| {
                out.documents
                    .iter()
                    .find(|d| d.title == title)
                    .map(|d| normalize(&d.text, &stopwords))
                    .unwrap()
            };
            let a: BTreeSet<String> = text_of(&p.target_a).into_iter().collect();
            let b: BTreeSet<String> = text_of(&p.target_b).into_iter().collect();
            assert_eq!(a.intersection(&b).count(), p.shared_tokens);
        }
    }

    #[test]
    fn vectors_cover_the_corpus_lexicon() {
        let cfg = SynthConfig {
            n_pairs: 3,
            seed: 5,
            ..SynthConfig::default()
        };
        let out = generate(&cfg);
        let have: BTreeSet<&str> = out.vectors.iter().map(|(t, _)| t.as_str()).collect();
        let stopwords = crate::textprep::default_stopwords();
        for doc in &out.documents {
            for token in normalize(&doc.text, &stopwords) {
                assert!(have.contains(token.as_str()), "missing vector for {token}");
            }
        }
        for (_, v) in &out.vectors {
            assert_eq!(v.len(), cfg.dim);
        }
    }
}
