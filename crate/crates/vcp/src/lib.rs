//! Virtual citation proximity toolkit.
//!
//! Extracts co-citation ground truth from a wiki-style corpus (the word-count
//! distance between two link markers that are cited together) and trains a
//! Siamese shared-weight LSTM regressor that predicts that distance for
//! arbitrary document pairs.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] — parse wiki-link markup into word streams and link
//!    occurrences with word offsets and sentence/paragraph/section indices.
//! 2. [`pairs`] — enumerate co-citation events, aggregate them into pairs
//!    with distances, counts and CPI, filter to the once-cited pairs with
//!    distance in `[1, 1000]`, and split into train/validation/test.
//! 3. [`textprep`] — stopword removal, Porter stemming, frequency-ranked
//!    vocabulary, fixed-length id encoding.
//! 4. [`embeddings`] — pretrained word-vector loading and the frozen
//!    embedding matrix.
//! 5. [`nn`] — LSTM, dense and flatten primitives with exact backward
//!    passes, MAE loss, Adam, and a finite-difference gradient checker.
//! 6. [`siamese`] — the dual-branch shared-weight model, the training loop
//!    with early stopping, and checkpointing.
//! 7. [`eval`] — MAE, the mean-distance baseline, and the report.
//! 8. [`cli`] + [`synth`] — command-line pipeline wiring and a synthetic
//!    corpus generator for desk-scale validation.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod eval;
pub mod nn;
pub mod pairs;
pub mod siamese;
pub mod synth;
pub mod textprep;

pub use corpus::{parse_document, word_distance, Document, LinkOccurrence, ParsedDocument};
pub use pairs::{aggregate, enumerate_events, filter_pairs, split_dataset, CoCitationPair};
pub use siamese::{SiameseModel, TrainConfig, TrainHistory};
