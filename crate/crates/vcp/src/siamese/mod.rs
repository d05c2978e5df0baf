//! Dual-branch shared-weight model: frozen embedding, one LSTM parameter
//! set read by both branches, and a linear head over the concatenated
//! flattened hidden sequences.
//!
//! The branches are the same storage, not copies: gradients from either
//! branch accumulate into the single [`LstmParams`], so an update driven by
//! one branch changes the other branch's forward pass.

mod checkpoint;
mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embeddings::EmbeddingMatrix;
use crate::nn::{
    dense_backward, dense_forward, flatten, lstm_backward, lstm_forward, DenseParams, LstmCache,
    LstmParams, Mat, NnError, ParamBlock,
};

pub use checkpoint::{
    fnv1a64, load_checkpoint, save_checkpoint, vocab_hash_warning, Checkpoint, CheckpointError,
    CHECKPOINT_VERSION,
};
pub use train::{
    train, train_with_validator, EarlyStopping, EpochStats, TrainConfig, TrainHistory,
};

#[derive(Debug, Error)]
pub enum SiameseError {
    #[error("sequence length {got} does not match model length {expected}")]
    BadSequenceLength { expected: usize, got: usize },
    #[error("token id {id} outside embedding table of {rows} rows")]
    BadTokenId { id: u32, rows: usize },
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("non-finite loss at epoch {epoch}: {value}")]
    NonFiniteLoss { epoch: usize, value: f64 },
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// The assembled model. `output_scale` maps the raw head output to word
/// units; a freshly constructed model uses 1.0 and training sets it to the
/// configured target scale.
#[derive(Debug, Clone)]
pub struct SiameseModel {
    pub embedding: EmbeddingMatrix,
    pub lstm: LstmParams,
    pub head: DenseParams,
    pub seq_len: usize,
    pub output_scale: f64,
}

impl SiameseModel {
    /// Seeded Glorot initialization; the head spans `2 * seq_len * hidden`
    /// concatenated features.
    pub fn new(embedding: EmbeddingMatrix, seq_len: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lstm = LstmParams::glorot(hidden, embedding.dim(), &mut rng);
        let head = DenseParams::glorot(2 * seq_len * hidden, &mut rng);
        SiameseModel {
            embedding,
            lstm,
            head,
            seq_len,
            output_scale: 1.0,
        }
    }

    pub fn hidden(&self) -> usize {
        self.lstm.hidden
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.dim()
    }

    /// Look up the embedding rows of a sequence into an L×D matrix.
    fn embed(&self, ids: &[u32]) -> Result<Mat, SiameseError> {
        if ids.len() != self.seq_len {
            return Err(SiameseError::BadSequenceLength {
                expected: self.seq_len,
                got: ids.len(),
            });
        }
        let dim = self.embedding.dim();
        let mut x = Mat::zeros(ids.len(), dim);
        for (t, &id) in ids.iter().enumerate() {
            if id as usize >= self.embedding.rows() {
                return Err(SiameseError::BadTokenId {
                    id,
                    rows: self.embedding.rows(),
                });
            }
            x.row_mut(t).copy_from_slice(self.embedding.lookup(id));
        }
        Ok(x)
    }

    /// One branch: embed and run the shared LSTM, returning the L×H hidden
    /// sequence.
    pub fn branch_output(&self, ids: &[u32]) -> Result<Mat, SiameseError> {
        let x = self.embed(ids)?;
        let (hs, _) = lstm_forward(&x, &self.lstm)?;
        Ok(hs)
    }

    fn branch_with_cache(&self, ids: &[u32]) -> Result<(Mat, LstmCache), SiameseError> {
        let x = self.embed(ids)?;
        Ok(lstm_forward(&x, &self.lstm)?)
    }

    /// Predicted distance in word units (real-valued).
    ///
    /// Both sequences run through the same LSTM; the flattened hidden
    /// sequences concatenate (branch A first) into the linear head.
    pub fn forward(&self, seq_a: &[u32], seq_b: &[u32]) -> Result<f64, SiameseError> {
        Ok(self.forward_raw(seq_a, seq_b)?.0 * self.output_scale)
    }

    /// Raw head output (before output scaling) plus the branch caches.
    fn forward_raw(
        &self,
        seq_a: &[u32],
        seq_b: &[u32],
    ) -> Result<(f64, LstmCache, LstmCache), SiameseError> {
        let (hs_a, cache_a) = self.branch_with_cache(seq_a)?;
        let (hs_b, cache_b) = self.branch_with_cache(seq_b)?;
        let mut features = flatten(&hs_a);
        features.extend(flatten(&hs_b));
        let y = dense_forward(&features, &self.head)?;
        Ok((y, cache_a, cache_b))
    }

    /// Integer prediction clamped to `[1, 1000]`, rounding half away from
    /// zero.
    pub fn predict(&self, seq_a: &[u32], seq_b: &[u32]) -> Result<u32, SiameseError> {
        let raw = self.forward(seq_a, seq_b)?;
        Ok(raw.clamp(1.0, 1000.0).round() as u32)
    }

    /// Number of trainable parameters (LSTM + head; the embedding is
    /// frozen).
    pub fn trainable_len(&self) -> usize {
        self.lstm.param_count() + self.head.param_count()
    }

    /// Flatten the trainable parameters in declared order: the four LSTM
    /// gates (input, forget, candidate, output), each as W then U then b,
    /// followed by the head weights and bias.
    pub fn trainable_to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trainable_len());
        for gate in self.lstm.gates() {
            out.extend_from_slice(&gate.w.data);
            out.extend_from_slice(&gate.u.data);
            out.extend_from_slice(&gate.b);
        }
        out.extend_from_slice(&self.head.w);
        out.push(self.head.b);
        out
    }

    /// Inverse of [`trainable_to_vec`].
    pub fn set_trainable_from(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.trainable_len(), "trainable vector length");
        let mut at = 0usize;
        let mut take = |n: usize| {
            let s = &flat[at..at + n];
            at += n;
            s
        };
        for gate in self.lstm.gates_mut() {
            let nw = gate.w.data.len();
            gate.w.data.copy_from_slice(take(nw));
            let nu = gate.u.data.len();
            gate.u.data.copy_from_slice(take(nu));
            let nb = gate.b.len();
            gate.b.copy_from_slice(take(nb));
        }
        let nw = self.head.w.len();
        self.head.w.copy_from_slice(take(nw));
        self.head.b = take(1)[0];
    }

    /// Named ranges of the flat trainable vector, for gradient checking.
    pub fn param_blocks(&self) -> Vec<ParamBlock> {
        let mut blocks = Vec::new();
        let mut at = 0usize;
        let mut push = |name: String, len: usize, at: &mut usize| {
            blocks.push(ParamBlock::new(name, *at..*at + len));
            *at += len;
        };
        for (gate, name) in self
            .lstm
            .gates()
            .into_iter()
            .zip(["input", "forget", "candidate", "output"])
        {
            push(format!("lstm.{name}.w"), gate.w.data.len(), &mut at);
            push(format!("lstm.{name}.u"), gate.u.data.len(), &mut at);
            push(format!("lstm.{name}.b"), gate.b.len(), &mut at);
        }
        push("head.w".into(), self.head.w.len(), &mut at);
        push("head.b".into(), 1, &mut at);
        blocks
    }

    /// Gradient of the raw head output with respect to the trainable
    /// parameters, scaled by `d_output` (∂loss/∂raw_output).
    ///
    /// Both branches backpropagate into the same flat gradient vector: the
    /// LSTM blocks receive the sum of the two branch contributions.
    pub fn pair_gradients(
        &self,
        seq_a: &[u32],
        seq_b: &[u32],
        d_output: f64,
    ) -> Result<Vec<f64>, SiameseError> {
        let (_, cache_a, cache_b) = self.forward_raw(seq_a, seq_b)?;
        self.grads_from_caches(&cache_a, &cache_b, d_output)
    }

    fn grads_from_caches(
        &self,
        cache_a: &LstmCache,
        cache_b: &LstmCache,
        d_output: f64,
    ) -> Result<Vec<f64>, SiameseError> {
        let mut features = flatten(&cache_a.h);
        features.extend(flatten(&cache_b.h));
        let (head_grads, d_features) = dense_backward(&features, &self.head, d_output)?;

        let half = self.seq_len * self.hidden();
        let up_a = Mat::from_vec(self.seq_len, self.hidden(), d_features[..half].to_vec());
        let up_b = Mat::from_vec(self.seq_len, self.hidden(), d_features[half..].to_vec());
        let (grads_a, _) = lstm_backward(&self.lstm, cache_a, &up_a)?;
        let (grads_b, _) = lstm_backward(&self.lstm, cache_b, &up_b)?;

        let mut flat = Vec::with_capacity(self.trainable_len());
        for (ga, gb) in grads_a.gates().into_iter().zip(grads_b.gates()) {
            flat.extend(ga.w.data.iter().zip(&gb.w.data).map(|(a, b)| a + b));
            flat.extend(ga.u.data.iter().zip(&gb.u.data).map(|(a, b)| a + b));
            flat.extend(ga.b.iter().zip(&gb.b).map(|(a, b)| a + b));
        }
        flat.extend_from_slice(&head_grads.w);
        flat.push(head_grads.b);
        Ok(flat)
    }

    /// One training step's worth of work for a single example: the absolute
    /// error of the raw head output against a scaled target, and the MAE
    /// subgradient (`sign(err) * weight`) pushed through both branches.
    pub(crate) fn forward_backward(
        &self,
        seq_a: &[u32],
        seq_b: &[u32],
        target_scaled: f64,
        weight: f64,
    ) -> Result<(f64, Vec<f64>), SiameseError> {
        let (y, cache_a, cache_b) = self.forward_raw(seq_a, seq_b)?;
        let err = y - target_scaled;
        let d_output = if err == 0.0 { 0.0 } else { err.signum() * weight };
        let grads = self.grads_from_caches(&cache_a, &cache_b, d_output)?;
        Ok((err.abs(), grads))
    }

    /// Gradients of one branch alone, given an upstream gradient on its L×H
    /// hidden sequence. Head gradients are zero. Useful for probing the
    /// shared-weight wiring.
    pub fn branch_gradients(&self, ids: &[u32], upstream: &Mat) -> Result<Vec<f64>, SiameseError> {
        let (_, cache) = self.branch_with_cache(ids)?;
        let (grads, _) = lstm_backward(&self.lstm, &cache, upstream)?;
        let mut flat = Vec::with_capacity(self.trainable_len());
        for gate in grads.gates() {
            flat.extend_from_slice(&gate.w.data);
            flat.extend_from_slice(&gate.u.data);
            flat.extend_from_slice(&gate.b);
        }
        flat.resize(self.trainable_len(), 0.0);
        Ok(flat)
    }
}
