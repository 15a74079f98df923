//! Padded batches of token IDs.

use std::ops::Range;

use crate::error::{BleuError, Result};

/// A single token ID as produced by a tokenizer.
pub type TokenId = u32;

/// A padded, row-major `(batch_size, max_len)` matrix of token IDs with an
/// explicit valid length per row.
///
/// Positions at or beyond `lengths[i]` are padding. Their values are never
/// read by any scoring routine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenBatch {
    ids: Vec<TokenId>,
    max_len: usize,
    lengths: Vec<usize>,
}

impl TokenBatch {
    /// Wraps a flat row-major buffer of `lengths.len() * max_len` IDs.
    pub fn new(ids: Vec<TokenId>, max_len: usize, lengths: Vec<usize>) -> Result<Self> {
        let expected = lengths
            .len()
            .checked_mul(max_len)
            .ok_or_else(|| BleuError::InvalidBatch("batch shape overflows usize".into()))?;
        if ids.len() != expected {
            return Err(BleuError::shape("token buffer length", expected, ids.len()));
        }
        if let Some((row, &len)) = lengths.iter().enumerate().find(|(_, &l)| l > max_len) {
            return Err(BleuError::InvalidBatch(format!(
                "row {row} has length {len} greater than max_len {max_len}"
            )));
        }
        Ok(Self {
            ids,
            max_len,
            lengths,
        })
    }

    /// Builds a batch from ragged rows, padding with `pad`.
    pub fn from_rows_with_pad<R: AsRef<[TokenId]>>(rows: &[R], pad: TokenId) -> Self {
        let max_len = rows.iter().map(|r| r.as_ref().len()).max().unwrap_or(0);
        let mut ids = Vec::with_capacity(rows.len() * max_len);
        let mut lengths = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_ref();
            ids.extend_from_slice(row);
            ids.resize(ids.len() + max_len - row.len(), pad);
            lengths.push(row.len());
        }
        Self {
            ids,
            max_len,
            lengths,
        }
    }

    pub fn from_rows<R: AsRef<[TokenId]>>(rows: &[R]) -> Self {
        Self::from_rows_with_pad(rows, 0)
    }

    pub fn batch_size(&self) -> usize {
        self.lengths.len()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// The valid (unpadded) tokens of row `i`.
    pub fn row(&self, i: usize) -> &[TokenId] {
        let start = i * self.max_len;
        &self.ids[start..start + self.lengths[i]]
    }

    /// The full padded row `i`, including fill values.
    pub fn padded_row(&self, i: usize) -> &[TokenId] {
        let start = i * self.max_len;
        &self.ids[start..start + self.max_len]
    }

    /// Mutable access to the padded row, mostly useful for tests that
    /// perturb fill values.
    pub fn padded_row_mut(&mut self, i: usize) -> &mut [TokenId] {
        let start = i * self.max_len;
        &mut self.ids[start..start + self.max_len]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[TokenId]> + '_ {
        (0..self.batch_size()).map(move |i| self.row(i))
    }

    pub fn as_flat(&self) -> &[TokenId] {
        &self.ids
    }

    /// Copies the rows in `range` into a new batch with the same `max_len`.
    pub fn select_rows(&self, range: Range<usize>) -> Self {
        let ids = self.ids[range.start * self.max_len..range.end * self.max_len].to_vec();
        Self {
            ids,
            max_len: self.max_len,
            lengths: self.lengths[range].to_vec(),
        }
    }

    /// Builds a batch from the given row indices, in order.
    pub fn gather_rows(&self, indices: &[usize]) -> Self {
        let mut ids = Vec::with_capacity(indices.len() * self.max_len);
        let mut lengths = Vec::with_capacity(indices.len());
        for &i in indices {
            ids.extend_from_slice(self.padded_row(i));
            lengths.push(self.lengths[i]);
        }
        Self {
            ids,
            max_len: self.max_len,
            lengths,
        }
    }
}
