//! Sentence and corpus BLEU assembled from batched counting statistics.
//!
//! Both [`sentence_bleu`] and [`corpus_bleu`] run the same single counting
//! pass ([`compute_stats`]); they differ only in how the resulting
//! [`SentenceStats`] are reduced. All floating point work happens in `f64`
//! after the integer counts are final.

use rayon::prelude::*;

use crate::batch::TokenBatch;
use crate::config::{BleuConfig, Smoothing};
use crate::error::{BleuError, Result};
use crate::ngram::{
    batched_bincount, build_dictionary, clip_counts, extract_ngrams, max_reference_counts,
    CountMatrix, NGramSlices,
};

/// Per-sentence clipped numerators, candidate n-gram denominators and the
/// lengths used by the brevity penalty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceStats {
    max_order: usize,
    // row-major (sentences, max_order)
    numerators: Vec<u64>,
    denominators: Vec<u64>,
    cand_len: Vec<usize>,
    eff_ref_len: Vec<usize>,
}

impl SentenceStats {
    pub fn batch_size(&self) -> usize {
        self.cand_len.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Clipped match count of sentence `i` at order `n` (1-based).
    pub fn numerator(&self, i: usize, n: usize) -> u64 {
        self.numerators[i * self.max_order + n - 1]
    }

    /// Number of candidate n-grams of sentence `i` at order `n` (1-based).
    pub fn denominator(&self, i: usize, n: usize) -> u64 {
        self.denominators[i * self.max_order + n - 1]
    }

    pub fn numerators_of(&self, i: usize) -> &[u64] {
        &self.numerators[i * self.max_order..(i + 1) * self.max_order]
    }

    pub fn denominators_of(&self, i: usize) -> &[u64] {
        &self.denominators[i * self.max_order..(i + 1) * self.max_order]
    }

    pub fn cand_len(&self) -> &[usize] {
        &self.cand_len
    }

    pub fn eff_ref_len(&self) -> &[usize] {
        &self.eff_ref_len
    }

    /// Sums every statistic over the batch.
    pub fn aggregate(&self) -> AggregateStats {
        let n = self.max_order;
        let mut numerators = vec![0u64; n];
        let mut denominators = vec![0u64; n];
        for i in 0..self.batch_size() {
            for k in 0..n {
                numerators[k] += self.numerators[i * n + k];
                denominators[k] += self.denominators[i * n + k];
            }
        }
        AggregateStats {
            numerators,
            denominators,
            cand_len: self.cand_len.iter().map(|&c| c as u64).sum(),
            eff_ref_len: self.eff_ref_len.iter().map(|&r| r as u64).sum(),
        }
    }
}

/// Batch-level sums of [`SentenceStats`], the input of corpus BLEU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateStats {
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
    pub cand_len: u64,
    pub eff_ref_len: u64,
}

/// Scores plus the per-order precisions and brevity penalties behind them.
///
/// Sentence mode has one entry per sentence; corpus mode has exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuResult {
    pub scores: Vec<f64>,
    pub precisions: Vec<Vec<f64>>,
    pub brevity_penalty: Vec<f64>,
}

impl BleuResult {
    /// The single corpus score, or the first sentence score.
    pub fn score(&self) -> f64 {
        self.scores[0]
    }
}

/// How the batch is split before counting.
///
/// Each chunk gets its own compact dictionary and dense count matrices, so
/// counting memory is `rows_per_chunk * U_chunk` per order instead of
/// `B * U`. Counts are exact integers, so any split yields identical
/// statistics. Chunks are processed on the current rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountingPlan {
    /// Pick the chunk height from the padded length and reference count.
    #[default]
    Auto,
    /// One dictionary for the whole batch.
    WholeBatch,
    /// At most this many sentences per chunk.
    ChunkRows(usize),
}

// Target number of dense cells (rows x unique n-grams) per count matrix.
const AUTO_CELL_BUDGET: usize = 1 << 14;

impl CountingPlan {
    fn chunk_rows(self, batch_size: usize, max_len: usize, num_sets: usize) -> usize {
        let rows = match self {
            CountingPlan::WholeBatch => batch_size,
            CountingPlan::ChunkRows(r) => r,
            CountingPlan::Auto => {
                // U grows roughly like rows * max_len * num_sets, so the dense
                // matrix grows like rows^2 * max_len * num_sets.
                let per_row = max_len.max(1) * num_sets;
                ((AUTO_CELL_BUDGET / per_row) as f64).sqrt() as usize
            }
        };
        rows.clamp(1, batch_size.max(1))
    }
}

/// Runs the counting pipeline for every order `1..=max_order` and reduces
/// each clipped row to its numerator.
pub fn compute_stats(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    config: &BleuConfig,
) -> Result<SentenceStats> {
    compute_stats_with_plan(candidates, references, config, CountingPlan::Auto)
}

pub fn compute_stats_with_plan(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    config: &BleuConfig,
    plan: CountingPlan,
) -> Result<SentenceStats> {
    if references.is_empty() {
        return Err(BleuError::NoReferences);
    }
    let batch_size = candidates.batch_size();
    if let Some(r) = references.iter().find(|r| r.batch_size() != batch_size) {
        return Err(BleuError::shape(
            "reference batch size",
            batch_size,
            r.batch_size(),
        ));
    }
    let max_order = config.max_order();

    let mut eff_ref_len = Vec::with_capacity(batch_size);
    let mut ref_lens = Vec::with_capacity(references.len());
    for i in 0..batch_size {
        ref_lens.clear();
        ref_lens.extend(references.iter().map(|r| r.lengths()[i]));
        eff_ref_len.push(effective_ref_len(candidates.lengths()[i], &ref_lens)?);
    }

    let max_len = references
        .iter()
        .map(TokenBatch::max_len)
        .fold(candidates.max_len(), usize::max);
    let rows = plan.chunk_rows(batch_size, max_len, references.len() + 1);
    let starts: Vec<usize> = (0..batch_size).step_by(rows).collect();

    let chunk_counts = |start: usize| -> Result<(Vec<u64>, Vec<u64>)> {
        let end = (start + rows).min(batch_size);
        if start == 0 && end == batch_size {
            count_chunk(candidates, references, max_order)
        } else {
            let cands = candidates.select_rows(start..end);
            let refs: Vec<TokenBatch> =
                references.iter().map(|r| r.select_rows(start..end)).collect();
            count_chunk(&cands, &refs, max_order)
        }
    };
    let chunks: Vec<(Vec<u64>, Vec<u64>)> = if starts.len() > 1 {
        starts.par_iter().map(|&s| chunk_counts(s)).collect::<Result<_>>()?
    } else {
        starts.iter().map(|&s| chunk_counts(s)).collect::<Result<_>>()?
    };

    let mut numerators = Vec::with_capacity(batch_size * max_order);
    let mut denominators = Vec::with_capacity(batch_size * max_order);
    for (num, den) in chunks {
        numerators.extend(num);
        denominators.extend(den);
    }

    Ok(SentenceStats {
        max_order,
        numerators,
        denominators,
        cand_len: candidates.lengths().to_vec(),
        eff_ref_len,
    })
}

// Row-major (rows, max_order) numerators and denominators of one chunk.
fn count_chunk(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    max_order: usize,
) -> Result<(Vec<u64>, Vec<u64>)> {
    let rows = candidates.batch_size();
    let mut numerators = vec![0u64; rows * max_order];
    let mut denominators = vec![0u64; rows * max_order];
    for n in 1..=max_order {
        let cand_slices = extract_ngrams(candidates, n)?;
        let ref_slices: Vec<NGramSlices<'_>> = references
            .iter()
            .map(|r| extract_ngrams(r, n))
            .collect::<Result<_>>()?;
        for (i, &c) in cand_slices.valid_counts().iter().enumerate() {
            denominators[i * max_order + n - 1] = c as u64;
        }
        if cand_slices.total() == 0 {
            continue;
        }

        let dict = build_dictionary(&cand_slices, &ref_slices)?;
        let num_unique = dict.num_unique();
        let cand_counts = batched_bincount(&dict.set_sentences(0), num_unique)?;
        let ref_counts: Vec<CountMatrix> = (1..dict.num_sets())
            .map(|set| batched_bincount(&dict.set_sentences(set), num_unique))
            .collect::<Result<_>>()?;
        let ref_max = max_reference_counts(&ref_counts)?;
        drop(ref_counts);
        let clipped = clip_counts(&cand_counts, &ref_max)?;
        for i in 0..rows {
            numerators[i * max_order + n - 1] = clipped.row_sum(i);
        }
    }
    Ok((numerators, denominators))
}

/// The reference length closest to `cand_len`, preferring the shorter one
/// on ties.
pub fn effective_ref_len(cand_len: usize, ref_lens: &[usize]) -> Result<usize> {
    ref_lens
        .iter()
        .copied()
        .min_by_key(|&r| (r.abs_diff(cand_len), r))
        .ok_or_else(|| BleuError::Argument("no reference lengths given".into()))
}

/// `1` when the candidate is longer than the reference, `exp(1 - r/c)`
/// otherwise, and `0` for an empty candidate.
pub fn brevity_penalty(cand_len: u64, eff_ref_len: u64) -> f64 {
    if cand_len == 0 {
        0.0
    } else if cand_len > eff_ref_len {
        1.0
    } else {
        (1.0 - eff_ref_len as f64 / cand_len as f64).exp()
    }
}

/// Modified precisions of one sentence (or of aggregated corpus counts).
pub fn smoothed_precisions(numerators: &[u64], denominators: &[u64], smoothing: Smoothing) -> Vec<f64> {
    let mut zero_matches = 0i32;
    numerators
        .iter()
        .zip(denominators)
        .enumerate()
        .map(|(idx, (&num, &den))| {
            if den == 0 {
                return 0.0;
            }
            let (num, den) = (num as f64, den as f64);
            match smoothing {
                Smoothing::AddK { k } if idx >= 1 => (num + k) / (den + k),
                _ if num > 0.0 => num / den,
                Smoothing::Floor { eps } => eps / den,
                Smoothing::Exp => {
                    zero_matches += 1;
                    1.0 / (2f64.powi(zero_matches) * den)
                }
                _ => 0.0,
            }
        })
        .collect()
}

/// Per-sentence smoothed precisions, one row per sentence.
pub fn apply_smoothing(stats: &SentenceStats, config: &BleuConfig) -> Vec<Vec<f64>> {
    (0..stats.batch_size())
        .map(|i| {
            smoothed_precisions(
                stats.numerators_of(i),
                stats.denominators_of(i),
                config.smoothing(),
            )
        })
        .collect()
}

/// `bp * exp(sum w_n ln p_n)`, or zero when a weighted precision is zero.
pub fn combine(brevity_penalty: f64, precisions: &[f64], weights: &[f64]) -> f64 {
    let mut log_sum = 0.0f64;
    for (&p, &w) in precisions.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += w * p.ln();
    }
    brevity_penalty * log_sum.exp()
}

/// Sentence scores from precomputed statistics.
pub fn sentence_scores_from_stats(stats: &SentenceStats, config: &BleuConfig) -> Result<BleuResult> {
    check_order(stats, config)?;
    let precisions = apply_smoothing(stats, config);
    let brevity: Vec<f64> = stats
        .cand_len
        .iter()
        .zip(&stats.eff_ref_len)
        .map(|(&c, &r)| brevity_penalty(c as u64, r as u64))
        .collect();
    let scores = precisions
        .iter()
        .zip(&brevity)
        .map(|(p, &bp)| combine(bp, p, config.weights()))
        .collect();
    Ok(BleuResult {
        scores,
        precisions,
        brevity_penalty: brevity,
    })
}

/// One corpus score from precomputed statistics.
pub fn corpus_score_from_stats(stats: &SentenceStats, config: &BleuConfig) -> Result<BleuResult> {
    check_order(stats, config)?;
    let agg = stats.aggregate();
    let precisions = smoothed_precisions(&agg.numerators, &agg.denominators, config.smoothing());
    let bp = brevity_penalty(agg.cand_len, agg.eff_ref_len);
    Ok(BleuResult {
        scores: vec![combine(bp, &precisions, config.weights())],
        precisions: vec![precisions],
        brevity_penalty: vec![bp],
    })
}

fn check_order(stats: &SentenceStats, config: &BleuConfig) -> Result<()> {
    if stats.max_order != config.max_order() {
        return Err(BleuError::OrderMismatch {
            expected: config.max_order(),
            found: stats.max_order,
        });
    }
    Ok(())
}

/// One BLEU score per candidate row.
pub fn sentence_bleu(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    config: &BleuConfig,
) -> Result<BleuResult> {
    let stats = compute_stats(candidates, references, config)?;
    sentence_scores_from_stats(&stats, config)
}

/// One BLEU score for the whole batch, from statistics summed before the
/// precisions are formed.
pub fn corpus_bleu(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    config: &BleuConfig,
) -> Result<BleuResult> {
    let stats = compute_stats(candidates, references, config)?;
    corpus_score_from_stats(&stats, config)
}
