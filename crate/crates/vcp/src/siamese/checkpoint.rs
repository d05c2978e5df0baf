//! Versioned binary checkpoint container.
//!
//! Byte layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "VCPCKPT1"
//! 8       4     format version (u32, currently 1)
//! 12      4     seq_len (u32)
//! 16      4     hidden size (u32)
//! 20      4     embedding dim (u32)
//! 24      4     vocabulary size V (u32); the embedding table has V+1 rows
//! 28      8     output_scale (f64)
//! 36      4     train max_epochs (u32)
//! 40      4     train patience (u32)
//! 44      4     train batch_size (u32)
//! 48      8     train lr (f64)
//! 56      8     train seed (u64)
//! 64      8     train target_scale (f64)
//! 72      8     vocabulary file hash (FNV-1a 64, u64)
//! 80      -     parameter tensors as f64 runs, in declared order:
//!               embedding rows ((V+1)*D), then for each LSTM gate in
//!               input/forget/candidate/output order its W (H*D), U (H*H)
//!               and b (H), then head weights (2*L*H) and head bias (1)
//! ```
//!
//! Loading rejects unknown magics and versions and any size mismatch.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::embeddings::EmbeddingMatrix;
use crate::nn::{DenseParams, LstmParams};

use super::{SiameseModel, TrainConfig};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"VCPCKPT1";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated or oversized at {context}")]
    BadSize { context: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a checkpoint stores.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: SiameseModel,
    pub train_config: TrainConfig,
    pub vocab_hash: u64,
}

/// FNV-1a 64-bit hash, used to fingerprint the vocabulary file bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn save_checkpoint(
    path: &Path,
    model: &SiameseModel,
    cfg: &TrainConfig,
    vocab_hash: u64,
) -> Result<(), CheckpointError> {
    let vocab_size = model.embedding.rows() - 1;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.seq_len as u32).to_le_bytes());
    out.extend_from_slice(&(model.hidden() as u32).to_le_bytes());
    out.extend_from_slice(&(model.embed_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(vocab_size as u32).to_le_bytes());
    out.extend_from_slice(&model.output_scale.to_le_bytes());
    out.extend_from_slice(&(cfg.max_epochs as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.patience as u32).to_le_bytes());
    out.extend_from_slice(&(cfg.batch_size as u32).to_le_bytes());
    out.extend_from_slice(&cfg.lr.to_le_bytes());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    out.extend_from_slice(&cfg.target_scale.to_le_bytes());
    out.extend_from_slice(&vocab_hash.to_le_bytes());
    let push_f64s = |values: &[f64], out: &mut Vec<u8>| {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    push_f64s(model.embedding.as_slice(), &mut out);
    for gate in model.lstm.gates() {
        push_f64s(&gate.w.data, &mut out);
        push_f64s(&gate.u.data, &mut out);
        push_f64s(&gate.b, &mut out);
    }
    push_f64s(&model.head.w, &mut out);
    push_f64s(&[model.head.b], &mut out);
    fs::write(path, out)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, context: &'static str) -> Result<&'a [u8], CheckpointError> {
        if self.at + n > self.bytes.len() {
            return Err(CheckpointError::BadSize { context });
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self, context: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }

    fn f64(&mut self, context: &'static str) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, context: &'static str) -> Result<Vec<f64>, CheckpointError> {
        let raw = self.take(n * 8, context)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        bytes: &bytes,
        at: 0,
    };
    if r.take(8, "magic")? != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let seq_len = r.u32("seq_len")? as usize;
    let hidden = r.u32("hidden")? as usize;
    let dim = r.u32("dim")? as usize;
    let vocab_size = r.u32("vocab_size")? as usize;
    let output_scale = r.f64("output_scale")?;
    let train_config = TrainConfig {
        max_epochs: r.u32("max_epochs")? as usize,
        patience: r.u32("patience")? as usize,
        batch_size: r.u32("batch_size")? as usize,
        lr: r.f64("lr")?,
        seed: r.u64("seed")?,
        target_scale: r.f64("target_scale")?,
    };
    let vocab_hash = r.u64("vocab_hash")?;

    let rows = vocab_size + 1;
    let embedding = EmbeddingMatrix::from_raw(rows, dim, r.f64s(rows * dim, "embedding")?);
    let mut lstm = LstmParams::zeros(hidden, dim);
    for gate in lstm.gates_mut() {
        gate.w.data = r.f64s(hidden * dim, "gate w")?;
        gate.u.data = r.f64s(hidden * hidden, "gate u")?;
        gate.b = r.f64s(hidden, "gate b")?;
    }
    let head = DenseParams {
        w: r.f64s(2 * seq_len * hidden, "head w")?,
        b: r.f64("head b")?,
    };
    if r.at != bytes.len() {
        return Err(CheckpointError::BadSize {
            context: "trailing bytes",
        });
    }
    Ok(Checkpoint {
        model: SiameseModel {
            embedding,
            lstm,
            head,
            seq_len,
            output_scale,
        },
        train_config,
        vocab_hash,
    })
}

/// Message to surface when a checkpoint was trained against a different
/// vocabulary file than the one now supplied.
pub fn vocab_hash_warning(checkpoint: &Checkpoint, actual_hash: u64) -> Option<String> {
    (checkpoint.vocab_hash != actual_hash).then(|| {
        format!(
            "vocabulary hash mismatch: checkpoint was built with {:016x}, supplied file is {:016x}",
            checkpoint.vocab_hash, actual_hash
        )
    })
}
