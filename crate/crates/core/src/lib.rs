//! Batched BLEU over integer token IDs.
//!
//! Scores every candidate in a padded batch in one data-parallel pass. For
//! each n-gram order the n-grams of the candidates and all references are
//! windowed out of the batch, deduplicated into a compact batch-local
//! dictionary, and counted per sentence with a single offset histogram
//! (sentence `i` owns bins `[i * U, (i + 1) * U)`). Memory therefore scales
//! with the number of distinct n-grams in the batch, never with the
//! vocabulary.
//!
//! ```
//! use batchbleu::{sentence_bleu, BleuConfig, TokenBatch};
//!
//! let candidates = TokenBatch::from_rows(&[vec![1, 2, 3, 4], vec![5, 6, 7, 8]]);
//! let references = TokenBatch::from_rows(&[vec![1, 2, 3, 4], vec![9, 9, 9, 9]]);
//! let result = sentence_bleu(&candidates, &[references], &BleuConfig::default()).unwrap();
//! assert_eq!(result.scores, vec![1.0, 0.0]);
//! ```
//!
//! The [`oracle`] module is an independent serial implementation used as
//! ground truth and as the benchmark baseline.

pub mod batch;
pub mod config;
pub mod error;
pub mod metric;
pub mod ngram;
pub mod oracle;

pub use batch::{TokenBatch, TokenId};
pub use config::{BleuConfig, Smoothing};
pub use error::{BleuError, Result};
pub use metric::{
    apply_smoothing, brevity_penalty, compute_stats, compute_stats_with_plan, corpus_bleu,
    corpus_score_from_stats, effective_ref_len, sentence_bleu, sentence_scores_from_stats,
    BleuResult, CountingPlan, SentenceStats,
};
pub use ngram::{
    batched_bincount, build_dictionary, clip_counts, extract_ngrams, max_reference_counts,
    CompactId, CountMatrix, NGramDictionary, NGramSlices,
};
