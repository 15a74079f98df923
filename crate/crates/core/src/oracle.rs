//! Serial, per-sentence BLEU over explicit n-gram multisets.
//!
//! This is the ground truth the batched pipeline is checked against and the
//! single-threaded baseline for benchmarks. It shares nothing with the
//! batched code beyond [`BleuConfig`]: no dictionaries, no batching, and its
//! own copies of the brevity penalty and smoothing rules.

use std::collections::HashMap;

use crate::batch::{TokenBatch, TokenId};
use crate::config::{BleuConfig, Smoothing};
use crate::error::{BleuError, Result};

/// Occurrence count of every contiguous n-gram in a sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NGramMultiset(HashMap<Vec<TokenId>, usize>);

impl NGramMultiset {
    pub fn get(&self, ngram: &[TokenId]) -> usize {
        self.0.get(ngram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[TokenId], usize)> {
        self.0.iter().map(|(k, &v)| (k.as_slice(), v))
    }
}

pub fn oracle_ngram_counts(sentence: &[TokenId], n: usize) -> NGramMultiset {
    let mut counts = HashMap::new();
    if n >= 1 && sentence.len() >= n {
        for i in 0..=sentence.len() - n {
            *counts.entry(sentence[i..i + n].to_vec()).or_insert(0) += 1;
        }
    }
    NGramMultiset(counts)
}

// (clipped matches, candidate n-grams) for one order
fn oracle_clipped(candidate: &[TokenId], references: &[&[TokenId]], n: usize) -> (u64, u64) {
    let cand = oracle_ngram_counts(candidate, n);
    let refs: Vec<NGramMultiset> = references
        .iter()
        .map(|r| oracle_ngram_counts(r, n))
        .collect();
    let mut matched = 0;
    for (ngram, count) in cand.iter() {
        let max_ref = refs.iter().map(|r| r.get(ngram)).max().unwrap_or(0);
        matched += count.min(max_ref);
    }
    (matched as u64, cand.total() as u64)
}

fn closest_ref_len(cand_len: usize, references: &[&[TokenId]]) -> usize {
    let mut best = references[0].len();
    for r in references {
        let (d, best_d) = (r.len().abs_diff(cand_len), best.abs_diff(cand_len));
        if d < best_d || (d == best_d && r.len() < best) {
            best = r.len();
        }
    }
    best
}

fn score(matches: &[u64], totals: &[u64], cand_len: u64, ref_len: u64, config: &BleuConfig) -> f64 {
    if cand_len == 0 {
        return 0.0;
    }
    let bp = if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };

    let mut precisions = Vec::with_capacity(matches.len());
    let mut exp_counter = 1;
    for (idx, (&m, &t)) in matches.iter().zip(totals).enumerate() {
        let order = idx + 1;
        let p = if t == 0 {
            0.0
        } else {
            match config.smoothing() {
                Smoothing::None => m as f64 / t as f64,
                Smoothing::Floor { eps } => {
                    if m == 0 {
                        eps / t as f64
                    } else {
                        m as f64 / t as f64
                    }
                }
                Smoothing::AddK { k } => {
                    if order >= 2 {
                        (m as f64 + k) / (t as f64 + k)
                    } else {
                        m as f64 / t as f64
                    }
                }
                Smoothing::Exp => {
                    if m == 0 {
                        let p = 1.0 / (2f64.powi(exp_counter) * t as f64);
                        exp_counter += 1;
                        p
                    } else {
                        m as f64 / t as f64
                    }
                }
            }
        };
        precisions.push(p);
    }

    let mut log_mean = 0.0;
    for (p, &w) in precisions.iter().zip(config.weights()) {
        if w > 0.0 {
            if *p == 0.0 {
                return 0.0;
            }
            log_mean += w * p.ln();
        }
    }
    bp * log_mean.exp()
}

/// Textbook per-sentence BLEU of one candidate against its references.
pub fn oracle_sentence_bleu(
    candidate: &[TokenId],
    references: &[&[TokenId]],
    config: &BleuConfig,
) -> Result<f64> {
    if references.is_empty() {
        return Err(BleuError::NoReferences);
    }
    let mut matches = Vec::new();
    let mut totals = Vec::new();
    for n in 1..=config.max_order() {
        let (m, t) = oracle_clipped(candidate, references, n);
        matches.push(m);
        totals.push(t);
    }
    let r = closest_ref_len(candidate.len(), references);
    Ok(score(&matches, &totals, candidate.len() as u64, r as u64, config))
}

/// Corpus BLEU: sums per-sentence counts and lengths, then scores once.
///
/// `references[i]` holds the references of `candidates[i]`.
pub fn oracle_corpus_bleu(
    candidates: &[&[TokenId]],
    references: &[Vec<&[TokenId]>],
    config: &BleuConfig,
) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(BleuError::shape(
            "reference lists",
            candidates.len(),
            references.len(),
        ));
    }
    let orders = config.max_order();
    let mut matches = vec![0u64; orders];
    let mut totals = vec![0u64; orders];
    let (mut cand_len, mut ref_len) = (0u64, 0u64);
    for (cand, refs) in candidates.iter().zip(references) {
        if refs.is_empty() {
            return Err(BleuError::NoReferences);
        }
        for n in 1..=orders {
            let (m, t) = oracle_clipped(cand, refs, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
        cand_len += cand.len() as u64;
        ref_len += closest_ref_len(cand.len(), refs) as u64;
    }
    Ok(score(&matches, &totals, cand_len, ref_len, config))
}

/// Splits batched inputs into the per-sentence lists the oracle consumes.
pub fn unbatch<'a>(
    candidates: &'a TokenBatch,
    references: &'a [TokenBatch],
) -> (Vec<&'a [TokenId]>, Vec<Vec<&'a [TokenId]>>) {
    let cands: Vec<&[TokenId]> = candidates.rows().collect();
    let refs = (0..candidates.batch_size())
        .map(|i| references.iter().map(|r| r.row(i)).collect())
        .collect();
    (cands, refs)
}

/// Oracle sentence scores for a whole batch, one sentence at a time.
pub fn oracle_sentence_bleu_batch(
    candidates: &TokenBatch,
    references: &[TokenBatch],
    config: &BleuConfig,
) -> Result<Vec<f64>> {
    if let Some(r) = references.iter().find(|r| r.batch_size() != candidates.batch_size()) {
        return Err(BleuError::shape(
            "reference batch size",
            candidates.batch_size(),
            r.batch_size(),
        ));
    }
    let (cands, refs) = unbatch(candidates, references);
    cands
        .iter()
        .zip(&refs)
        .map(|(c, r)| oracle_sentence_bleu(c, r, config))
        .collect()
}
