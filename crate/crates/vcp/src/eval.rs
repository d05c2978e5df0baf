//! MAE evaluation against the mean-distance baseline.
//!
//! The baseline is a constant predictor: the arithmetic mean of the training
//! distances (training split only, so the test set leaks nothing), clamped
//! to the `[1, 1000]` prediction range. Model MAE is computed over clamped
//! integer predictions; the raw real-valued MAE is reported alongside since
//! the two can differ.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pairs::DatasetExample;
use crate::siamese::{SiameseError, SiameseModel, TrainHistory};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error(transparent)]
    Siamese(#[from] SiameseError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// MAE of clamped integer predictions.
    pub model_mae: f64,
    /// MAE of the raw real-valued model outputs.
    pub model_mae_raw: f64,
    pub baseline_mae: f64,
    /// `100 * (baseline_mae - model_mae) / baseline_mae`.
    pub improvement_pct: f64,
    pub n_test: usize,
}

/// Full report document: headline numbers plus the per-epoch MAE table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub model_mae: f64,
    pub model_mae_raw: f64,
    pub baseline_mae: f64,
    pub improvement_pct: f64,
    pub n_test: usize,
    pub history: Vec<HistoryRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub train_mae: f64,
    pub val_mae: f64,
}

/// The constant predictor: arithmetic mean of the training distances.
pub fn mean_baseline(train_distances: &[u32]) -> Result<f64, EvalError> {
    if train_distances.is_empty() {
        return Err(EvalError::EmptySet("train"));
    }
    Ok(train_distances.iter().map(|&d| d as f64).sum::<f64>() / train_distances.len() as f64)
}

/// Evaluate the model and the baseline predictor over the test set.
pub fn evaluate(
    model: &SiameseModel,
    test_set: &[DatasetExample],
    baseline: f64,
) -> Result<EvalReport, EvalError> {
    if test_set.is_empty() {
        return Err(EvalError::EmptySet("test"));
    }
    let n = test_set.len() as f64;
    let baseline_pred = baseline.clamp(1.0, 1000.0);
    let mut model_abs = 0.0;
    let mut raw_abs = 0.0;
    let mut baseline_abs = 0.0;
    for ex in test_set {
        let target = ex.distance as f64;
        let pred = model.predict(&ex.text_a_ids, &ex.text_b_ids)? as f64;
        let raw = model.forward(&ex.text_a_ids, &ex.text_b_ids)?;
        model_abs += (pred - target).abs();
        raw_abs += (raw - target).abs();
        baseline_abs += (baseline_pred - target).abs();
    }
    let model_mae = model_abs / n;
    let baseline_mae = baseline_abs / n;
    Ok(EvalReport {
        model_mae,
        model_mae_raw: raw_abs / n,
        baseline_mae,
        improvement_pct: 100.0 * (baseline_mae - model_mae) / baseline_mae,
        n_test: test_set.len(),
    })
}

/// Render the report as human-readable text plus the JSON document with the
/// per-epoch MAE table.
pub fn emit_report(report: &EvalReport, history: Option<&TrainHistory>) -> (String, ReportDocument) {
    let rows: Vec<HistoryRow> = history
        .map(|h| {
            h.epochs
                .iter()
                .map(|e| HistoryRow {
                    epoch: e.epoch,
                    train_mae: e.train_mae,
                    val_mae: e.val_mae,
                })
                .collect()
        })
        .unwrap_or_default();

    let mut text = String::new();
    text.push_str(&format!("test examples:      {}\n", report.n_test));
    text.push_str(&format!("model MAE:          {:.4}\n", report.model_mae));
    if report.model_mae_raw != report.model_mae {
        text.push_str(&format!("model MAE (raw):    {:.4}\n", report.model_mae_raw));
    }
    text.push_str(&format!("baseline MAE:       {:.4}\n", report.baseline_mae));
    text.push_str(&format!(
        "improvement:        {:.2}% over the mean baseline\n",
        report.improvement_pct
    ));
    if !rows.is_empty() {
        text.push_str("\nepoch  train MAE    val MAE\n");
        for r in &rows {
            text.push_str(&format!(
                "{:>5}  {:>9.3}  {:>9.3}\n",
                r.epoch, r.train_mae, r.val_mae
            ));
        }
    }

    let doc = ReportDocument {
        model_mae: report.model_mae,
        model_mae_raw: report.model_mae_raw,
        baseline_mae: report.baseline_mae,
        improvement_pct: report.improvement_pct,
        n_test: report.n_test,
        history: rows,
    };
    (text, doc)
}
