//! Command-line pipeline: `synth`, `extract`, `dataset`, `train`, `eval`,
//! `predict`.
//!
//! Every command accepts `--config <file>` with line-oriented `key = value`
//! entries (keys are the long flag names); explicit flags win over config
//! values, config values win over defaults. All randomness flows from one
//! 64-bit `--seed` through ChaCha8, so reruns are byte-identical.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{self, normalize_target, parse_document, CorpusError, RawDocument};
use crate::embeddings::{build_matrix, load_vectors, EmbeddingsError};
use crate::eval::{emit_report, evaluate, mean_baseline, EvalError};
use crate::pairs::{
    self, aggregate, enumerate_events, filter_pairs, split_dataset, DatasetExample, DatasetRow,
    PairsError,
};
use crate::siamese::{
    fnv1a64, load_checkpoint, save_checkpoint, train, vocab_hash_warning, SiameseError,
    SiameseModel, TrainConfig, TrainHistory,
};
use crate::synth::{self, SynthConfig};
use crate::textprep::{
    default_stopwords, encode, normalize, parse_stopwords, read_vocab, write_vocab,
    TextprepError, Vocabulary,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for CliError {}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PairsError> for CliError {
    fn from(e: PairsError) -> Self {
        match e {
            PairsError::BadFractions(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TextprepError> for CliError {
    fn from(e: TextprepError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EmbeddingsError> for CliError {
    fn from(e: EmbeddingsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SiameseError> for CliError {
    fn from(e: SiameseError) -> Self {
        match e {
            SiameseError::NonFiniteLoss { .. } => CliError::Internal(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<crate::siamese::CheckpointError> for CliError {
    fn from(e: crate::siamese::CheckpointError) -> Self {
        match e {
            // An unopenable checkpoint path is a caller mistake.
            crate::siamese::CheckpointError::Io(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vcp",
    about = "Citation-proximity extraction and Siamese LSTM distance regression",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted co-citation distances.
    Synth(SynthArgs),
    /// Parse a corpus and aggregate co-citation pairs into pairs.tsv.
    Extract(ExtractArgs),
    /// Filter pairs, build the vocabulary and encoded splits.
    Dataset(DatasetArgs),
    /// Train the Siamese model on a prepared dataset directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint against the test split and the mean baseline.
    Eval(EvalArgs),
    /// Predict the co-citation distance for two text files.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of citing documents (one planted pair each).
    #[arg(long)]
    pub n_docs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Dimension of the generated random vectors.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus JSON-lines file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Output pairs TSV (default <out-dir>/pairs.tsv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Only read the first N corpus documents.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Pretrained vector file (token v1 ... vD per line).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Stopword file, one word per line (defaults to the built-in list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_distance: Option<u32>,
    #[arg(long)]
    pub seq_len: Option<usize>,
    /// Keep a seeded random sample of N examples before splitting.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Comma-separated train,validation,test fractions.
    #[arg(long)]
    pub fractions: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory produced by `dataset`.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// history.json from training (default: next to the checkpoint).
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Report JSON path (default: next to the checkpoint).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// First document text file.
    pub text_a: Option<PathBuf>,
    /// Second document text file.
    pub text_b: Option<PathBuf>,
}

/// `key = value` config file; '#' starts a comment, '-' and '_' in keys are
/// interchangeable.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    values: HashMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "config {} line {}: expected key = value",
                        path.display(),
                        i + 1
                    ))
                })?;
                values.insert(key.trim().replace('-', "_"), value.trim().to_string());
            }
        }
        Ok(ConfigMap { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&key.replace('-', "_")).map(String::as_str)
    }
}

fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        None => Ok(default),
    }
}

fn resolve_required<T: FromStr>(flag: Option<T>, cfg: &ConfigMap, key: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        None => Err(CliError::Usage(format!("missing required --{key}"))),
    }
}

fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    cfg.get(key)
        .map(|raw| {
            raw.parse()
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}")))
        })
        .transpose()
}

fn resolve_path(flag: Option<PathBuf>, cfg: &ConfigMap, key: &str) -> Result<PathBuf, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(raw) => Ok(PathBuf::from(raw)),
        None => Err(CliError::Usage(format!("missing required --{key}"))),
    }
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ConfigMap) -> Result<PathBuf, CliError> {
    let dir = match flag {
        Some(v) => v,
        None => cfg
            .get("out-dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))
}

fn parse_fractions(raw: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "fractions must be three comma-separated numbers, got {raw:?}"
        )));
    }
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("bad fraction {s:?}: {e}")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
}

fn load_stopword_set(path: Option<&Path>) -> Result<HashSet<String>, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                CliError::Usage(format!("cannot read stopwords {}: {e}", p.display()))
            })?;
            Ok(parse_stopwords(&text))
        }
        None => Ok(default_stopwords()),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Predict(args) => cmd_predict(args),
    }
}

pub fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let n_pairs: usize = resolve_required(args.n_docs, &cfg, "n-docs")?;
    let seed: u64 = resolve(args.seed, &cfg, "seed", 0)?;
    let dim: usize = resolve(args.dim, &cfg, "dim", 16)?;
    let out_dir = resolve_out_dir(args.out_dir, &cfg)?;

    let synth_cfg = SynthConfig {
        n_pairs,
        seed,
        dim,
        ..SynthConfig::default()
    };
    let output = synth::generate(&synth_cfg);

    let corpus_path = out_dir.join("corpus.jsonl");
    let mut w = create_output(&corpus_path)?;
    synth::write_corpus(&mut w, &output.documents)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", corpus_path.display())))?;

    let vectors_path = out_dir.join("vectors.txt");
    let mut w = create_output(&vectors_path)?;
    synth::write_vectors(&mut w, &output.vectors)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Data(format!("writing {}: {e}", vectors_path.display())))?;

    println!(
        "synth: {} documents ({} planted pairs) -> {}",
        output.documents.len(),
        output.planted.len(),
        corpus_path.display()
    );
    Ok(())
}

fn read_corpus_docs(path: &Path, limit: Option<usize>) -> Result<Vec<RawDocument>, CliError> {
    let reader = open_input(path)?;
    let mut docs = corpus::read_corpus(reader)?;
    if let Some(n) = limit {
        docs.truncate(n);
    }
    Ok(docs)
}

pub fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let corpus_path = resolve_path(args.corpus, &cfg, "corpus")?;
    let limit = resolve_opt(args.limit, &cfg, "limit")?;
    let out_path = match args.out {
        Some(p) => p,
        None => match cfg.get("out") {
            Some(raw) => PathBuf::from(raw),
            None => resolve_out_dir(args.out_dir, &cfg)?.join("pairs.tsv"),
        },
    };

    let mut docs = read_corpus_docs(&corpus_path, limit)?;
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    let mut events = Vec::new();
    let mut n_occurrences = 0usize;
    for doc in &docs {
        let parsed = parse_document(&doc.id, &doc.title, &doc.text)?;
        for warning in &parsed.warnings {
            eprintln!("warning: {warning}");
        }
        n_occurrences += parsed.occurrences.len();
        events.extend(enumerate_events(&parsed.occurrences, &parsed.doc.title));
    }
    let pairs = aggregate(events);

    let mut w = create_output(&out_path)?;
    pairs::write_pairs(&mut w, &pairs)?;
    w.flush()
        .map_err(|e| CliError::Data(format!("writing {}: {e}", out_path.display())))?;
    println!(
        "extract: {} documents, {} link occurrences, {} pairs -> {}",
        docs.len(),
        n_occurrences,
        pairs.len(),
        out_path.display()
    );
    Ok(())
}

pub const ENCODED_TSV_HEADER: &str = "id\tids";

fn write_encoded(
    path: &Path,
    encoded: &BTreeMap<String, Vec<u32>>,
) -> Result<(), CliError> {
    let mut w = create_output(path)?;
    let io = |r: std::io::Result<()>| {
        r.map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))
    };
    io(writeln!(w, "{ENCODED_TSV_HEADER}"))?;
    for (id, ids) in encoded {
        let joined = ids
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        io(writeln!(w, "{id}\t{joined}"))?;
    }
    io(w.flush())
}

fn read_encoded(path: &Path) -> Result<HashMap<String, Vec<u32>>, CliError> {
    let reader = open_input(path)?;
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h == ENCODED_TSV_HEADER => {}
        _ => {
            return Err(CliError::Data(format!(
                "{}: missing `{ENCODED_TSV_HEADER}` header",
                path.display()
            )))
        }
    }
    let mut map = HashMap::new();
    for (i, line) in lines {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if line.is_empty() {
            continue;
        }
        let (id, ids_raw) = line.split_once('\t').ok_or_else(|| {
            CliError::Data(format!("{} line {}: expected 2 fields", path.display(), i + 1))
        })?;
        let ids = ids_raw
            .split(',')
            .map(|v| v.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?;
        map.insert(id.to_string(), ids);
    }
    Ok(map)
}

pub fn cmd_dataset(args: DatasetArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let pairs_path = resolve_path(args.pairs, &cfg, "pairs")?;
    let corpus_path = resolve_path(args.corpus, &cfg, "corpus")?;
    let vectors_path = resolve_path(args.vectors, &cfg, "vectors")?;
    let stopwords_path = match args.stopwords {
        Some(p) => Some(p),
        None => cfg.get("stopwords").map(PathBuf::from),
    };
    let out_dir = resolve_out_dir(args.out_dir, &cfg)?;
    let seed: u64 = resolve(args.seed, &cfg, "seed", 0)?;
    let max_distance: u32 = resolve(args.max_distance, &cfg, "max-distance", 1000)?;
    let seq_len: usize = resolve(args.seq_len, &cfg, "seq-len", 50)?;
    if seq_len == 0 {
        return Err(CliError::Usage("--seq-len must be at least 1".into()));
    }
    let fractions = match args.fractions.or_else(|| cfg.get("fractions").map(String::from)) {
        Some(raw) => parse_fractions(&raw)?,
        None => (0.72, 0.08, 0.20),
    };
    let limit = resolve_opt(args.limit, &cfg, "limit")?;

    let all_pairs = pairs::read_pairs(open_input(&pairs_path)?)?;
    let kept = filter_pairs(all_pairs, max_distance);

    let docs = read_corpus_docs(&corpus_path, None)?;
    let stopwords = load_stopword_set(stopwords_path.as_deref())?;
    let mut title_to_id: HashMap<String, String> = HashMap::new();
    for doc in &docs {
        let key = normalize_target(&doc.title);
        if let Some(existing) = title_to_id.get(&key) {
            eprintln!(
                "warning: documents {existing} and {} share normalized title {key:?}; keeping the first",
                doc.id
            );
        } else {
            title_to_id.insert(key, doc.id.clone());
        }
    }

    let mut rows = Vec::new();
    let mut missing = 0usize;
    for pair in &kept {
        match (title_to_id.get(&pair.target_a), title_to_id.get(&pair.target_b)) {
            (Some(a), Some(b)) => rows.push(DatasetRow {
                id_a: a.clone(),
                id_b: b.clone(),
                distance: pair.distances[0],
            }),
            _ => missing += 1,
        }
    }
    if missing > 0 {
        eprintln!("warning: dropped {missing} pairs whose documents are not in the corpus");
    }
    if let Some(n) = limit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rows.shuffle(&mut rng);
        rows.truncate(n);
    }

    let (train_rows, val_rows, test_rows) = split_dataset(rows, seed, fractions)?;
    for (name, rows) in [
        ("train.tsv", &train_rows),
        ("val.tsv", &val_rows),
        ("test.tsv", &test_rows),
    ] {
        let path = out_dir.join(name);
        let mut w = create_output(&path)?;
        pairs::write_dataset_rows(&mut w, rows)?;
        w.flush()
            .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))?;
    }

    // Vocabulary over the whole corpus, then fixed-length encodings.
    let tokenized: Vec<(String, Vec<String>)> = docs
        .iter()
        .map(|d| (d.id.clone(), normalize(&d.text, &stopwords)))
        .collect();
    let vocab = crate::textprep::build_vocab(tokenized.iter().map(|(_, t)| t.iter()))?;
    let vocab_path = out_dir.join("vocab.tsv");
    let mut w = create_output(&vocab_path)?;
    write_vocab(&mut w, &vocab)?;
    w.flush()
        .map_err(|e| CliError::Data(format!("writing {}: {e}", vocab_path.display())))?;

    let encoded: BTreeMap<String, Vec<u32>> = tokenized
        .iter()
        .map(|(id, tokens)| (id.clone(), encode(tokens, &vocab, seq_len)))
        .collect();
    write_encoded(&out_dir.join("encoded.tsv"), &encoded)?;

    // Keep only the vectors the vocabulary can use, in id order.
    let vectors = load_vectors(open_input(&vectors_path)?)?;
    for warning in &vectors.warnings {
        eprintln!("warning: {warning}");
    }
    let out_vectors = out_dir.join("vectors.txt");
    let mut w = create_output(&out_vectors)?;
    let mut covered = 0usize;
    for token in vocab.tokens() {
        if let Some(values) = vectors.get(token) {
            covered += 1;
            let mut line = String::from(token);
            for v in values {
                line.push(' ');
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")
                .map_err(|e| CliError::Data(format!("writing {}: {e}", out_vectors.display())))?;
        }
    }
    w.flush()
        .map_err(|e| CliError::Data(format!("writing {}: {e}", out_vectors.display())))?;

    println!(
        "dataset: {} usable pairs -> {}/{}/{} train/val/test, vocabulary {} tokens ({} with vectors) -> {}",
        train_rows.len() + val_rows.len() + test_rows.len(),
        train_rows.len(),
        val_rows.len(),
        test_rows.len(),
        vocab.len(),
        covered,
        out_dir.display()
    );
    Ok(())
}

fn load_examples(
    rows_path: &Path,
    encoded: &HashMap<String, Vec<u32>>,
    seq_len: usize,
) -> Result<Vec<DatasetExample>, CliError> {
    let rows = pairs::read_dataset_rows(open_input(rows_path)?)?;
    rows.into_iter()
        .map(|row| {
            let seq = |id: &str| {
                encoded.get(id).cloned().ok_or_else(|| {
                    CliError::Data(format!(
                        "{}: document {id} has no encoded sequence",
                        rows_path.display()
                    ))
                })
            };
            DatasetExample::new(seq(&row.id_a)?, seq(&row.id_b)?, row.distance, seq_len)
                .map_err(|e| CliError::Data(e.to_string()))
        })
        .collect()
}

/// Read the dataset directory pieces train/eval need.
struct DataDir {
    vocab: Vocabulary,
    vocab_hash: u64,
    encoded: HashMap<String, Vec<u32>>,
    seq_len: usize,
    dir: PathBuf,
}

impl DataDir {
    fn open(dir: &Path) -> Result<Self, CliError> {
        let vocab_path = dir.join("vocab.tsv");
        let vocab_bytes = fs::read(&vocab_path).map_err(|e| {
            CliError::Usage(format!("cannot read {}: {e}", vocab_path.display()))
        })?;
        let vocab = read_vocab(BufReader::new(vocab_bytes.as_slice()))?;
        let vocab_hash = fnv1a64(&vocab_bytes);
        let encoded = read_encoded(&dir.join("encoded.tsv"))?;
        let seq_len = match encoded.values().next() {
            Some(ids) => ids.len(),
            None => return Err(CliError::Data("encoded.tsv has no rows".into())),
        };
        if let Some((id, ids)) = encoded.iter().find(|(_, ids)| ids.len() != seq_len) {
            return Err(CliError::Data(format!(
                "encoded.tsv: document {id} has {} ids, expected {seq_len}",
                ids.len()
            )));
        }
        Ok(DataDir {
            vocab,
            vocab_hash,
            encoded,
            seq_len,
            dir: dir.to_path_buf(),
        })
    }

    fn examples(&self, name: &str) -> Result<Vec<DatasetExample>, CliError> {
        load_examples(&self.dir.join(name), &self.encoded, self.seq_len)
    }
}

pub fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let data_dir = resolve_path(args.data_dir, &cfg, "data-dir")?;
    let out_dir = resolve_out_dir(args.out_dir, &cfg)?;
    let epochs: usize = resolve(args.epochs, &cfg, "epochs", 100)?;
    let patience: usize = resolve(args.patience, &cfg, "patience", 5)?;
    let batch_size: usize = resolve(args.batch_size, &cfg, "batch-size", 64)?;
    let lr: f64 = resolve(args.lr, &cfg, "lr", 1e-3)?;
    let hidden: usize = resolve(args.hidden, &cfg, "hidden", 50)?;
    let seed: u64 = resolve(args.seed, &cfg, "seed", 0)?;
    if epochs == 0 || patience == 0 || batch_size == 0 || hidden == 0 {
        return Err(CliError::Usage(
            "--epochs, --patience, --batch-size and --hidden must be at least 1".into(),
        ));
    }

    let data = DataDir::open(&data_dir)?;
    let vectors = load_vectors(open_input(&data.dir.join("vectors.txt"))?)?;
    for warning in &vectors.warnings {
        eprintln!("warning: {warning}");
    }
    let matrix = build_matrix(&data.vocab, &vectors, vectors.dim)?;
    let train_set = data.examples("train.tsv")?;
    let val_set = data.examples("val.tsv")?;

    let model = SiameseModel::new(matrix, data.seq_len, hidden, seed);
    let train_cfg = TrainConfig {
        max_epochs: epochs,
        patience,
        batch_size,
        lr,
        seed,
        target_scale: 1000.0,
    };
    let (trained, history) = train(model, &train_set, &val_set, &train_cfg)?;

    let ckpt_path = out_dir.join("checkpoint.bin");
    save_checkpoint(&ckpt_path, &trained, &train_cfg, data.vocab_hash)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", ckpt_path.display())))?;
    let history_path = out_dir.join("history.json");
    let json = serde_json::to_string_pretty(&history)
        .map_err(|e| CliError::Internal(format!("serializing history: {e}")))?;
    fs::write(&history_path, json)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", history_path.display())))?;

    println!(
        "train: {} train / {} val examples, stopped at epoch {} (best epoch {}, val MAE {:.3}) -> {}",
        train_set.len(),
        val_set.len(),
        history.stopped_epoch,
        history.best_epoch,
        history
            .epochs
            .iter()
            .find(|e| e.epoch == history.best_epoch)
            .map(|e| e.val_mae)
            .unwrap_or(f64::NAN),
        ckpt_path.display()
    );
    Ok(())
}

pub fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let ckpt_path = resolve_path(args.checkpoint, &cfg, "checkpoint")?;
    let data_dir = resolve_path(args.data_dir, &cfg, "data-dir")?;
    let ckpt_dir = ckpt_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let history_path = match args.history {
        Some(p) => Some(p),
        None => {
            let default = ckpt_dir.join("history.json");
            cfg.get("history")
                .map(PathBuf::from)
                .or_else(|| default.exists().then_some(default))
        }
    };
    let out_path = match args.out {
        Some(p) => p,
        None => cfg
            .get("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| ckpt_dir.join("report.json")),
    };

    let checkpoint = load_checkpoint(&ckpt_path)?;
    let data = DataDir::open(&data_dir)?;
    if let Some(warning) = vocab_hash_warning(&checkpoint, data.vocab_hash) {
        eprintln!("warning: {warning}");
    }
    if data.seq_len != checkpoint.model.seq_len {
        return Err(CliError::Data(format!(
            "dataset sequence length {} does not match checkpoint {}",
            data.seq_len, checkpoint.model.seq_len
        )));
    }

    let train_rows = pairs::read_dataset_rows(open_input(&data.dir.join("train.tsv"))?)?;
    let train_distances: Vec<u32> = train_rows.iter().map(|r| r.distance).collect();
    let baseline = mean_baseline(&train_distances)?;
    let test_set = data.examples("test.tsv")?;
    let report = evaluate(&checkpoint.model, &test_set, baseline)?;

    let history: Option<TrainHistory> = match history_path {
        Some(p) => {
            let text = fs::read_to_string(&p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
            )
        }
        None => None,
    };
    let (text, doc) = emit_report(&report, history.as_ref());
    let json = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Internal(format!("serializing report: {e}")))?;
    fs::write(&out_path, &json)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", out_path.display())))?;
    print!("{text}");
    println!("report -> {}", out_path.display());
    Ok(())
}

pub fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let cfg = ConfigMap::load(args.config.as_deref())?;
    let ckpt_path = resolve_path(args.checkpoint, &cfg, "checkpoint")?;
    let vocab_path = resolve_path(args.vocab, &cfg, "vocab")?;
    let stopwords_path = match args.stopwords {
        Some(p) => Some(p),
        None => cfg.get("stopwords").map(PathBuf::from),
    };
    let text_a = match args.text_a {
        Some(p) => p,
        None => return Err(CliError::Usage("missing first text file argument".into())),
    };
    let text_b = match args.text_b {
        Some(p) => p,
        None => return Err(CliError::Usage("missing second text file argument".into())),
    };

    let checkpoint = load_checkpoint(&ckpt_path)?;
    let vocab_bytes = fs::read(&vocab_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", vocab_path.display())))?;
    let vocab = read_vocab(BufReader::new(vocab_bytes.as_slice()))?;
    if let Some(warning) = vocab_hash_warning(&checkpoint, fnv1a64(&vocab_bytes)) {
        eprintln!("warning: {warning}");
    }
    let stopwords = load_stopword_set(stopwords_path.as_deref())?;

    let encode_file = |path: &Path| -> Result<Vec<u32>, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(encode(
            &normalize(&text, &stopwords),
            &vocab,
            checkpoint.model.seq_len,
        ))
    };
    let seq_a = encode_file(&text_a)?;
    let seq_b = encode_file(&text_b)?;
    let distance = checkpoint.model.predict(&seq_a, &seq_b)?;
    println!("{distance}");
    Ok(())
}
