//! Differentiable primitives: LSTM, dense head, flatten, MAE loss, Adam,
//! and a finite-difference gradient checker.
//!
//! Everything is 64-bit, deterministic and single-threaded. Each backward
//! pass is the exact reverse-mode gradient of its forward pass; the checker
//! in [`gradcheck`] verifies that against central differences.

pub mod adam;
pub mod dense;
pub mod gradcheck;
pub mod lstm;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use gradcheck::{central_difference, grad_check, GradCheckReport, ParamBlock};
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmParams};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },
}

pub(crate) fn shape_error(context: &'static str, expected: String, got: String) -> NnError {
    NnError::ShapeMismatch {
        context,
        expected,
        got,
    }
}

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix shape");
        Mat { rows, cols, data }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// y = self · x, with x of length `cols`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
            })
            .collect()
    }

    /// y = selfᵀ · x, with x of length `rows`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += xr * w;
            }
        }
        out
    }

    /// self += u · vᵀ.
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            for (cell, &vc) in self.row_mut(r).iter_mut().zip(v) {
                *cell += ur * vc;
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Row-major flatten of an L×H matrix into an L·H vector.
pub fn flatten(m: &Mat) -> Vec<f64> {
    m.data.clone()
}

/// Inverse of [`flatten`].
pub fn unflatten(v: &[f64], rows: usize, cols: usize) -> Result<Mat, NnError> {
    if v.len() != rows * cols {
        return Err(shape_error(
            "unflatten",
            format!("{rows}x{cols}"),
            v.len().to_string(),
        ));
    }
    Ok(Mat::from_vec(rows, cols, v.to_vec()))
}

/// Mean absolute error and its gradient `sign(pred - target) / n`.
///
/// `sign(0)` is 0, so exact predictions contribute no gradient.
pub fn mae_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), NnError> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(shape_error(
            "mae_loss",
            format!("matching non-empty batches, pred={}", pred.len()),
            format!("target={}", target.len()),
        ));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let err = p - t;
        loss += err.abs();
        grad.push(signum_zero(err) / n);
    }
    Ok((loss / n, grad))
}

/// signum with sign(0) = 0 (f64::signum maps 0.0 to 1.0).
fn signum_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}
