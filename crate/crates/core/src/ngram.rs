//! N-gram extraction, the compact per-batch n-gram dictionary and offset
//! bincounting.
//!
//! Counting never indexes by token value. Every structure here is sized by
//! the number of n-grams actually present (`T`) or by `rows x unique` (`B*U`),
//! so the vocabulary size has no influence on memory.

use crate::batch::{TokenBatch, TokenId};
use crate::error::{BleuError, Result};

/// Index of an n-gram inside an [`NGramDictionary`].
pub type CompactId = u32;

/// All length-`n` windows of a batch, without copying.
///
/// Window `(i, j)` is `ids[i][j..j + n]`. Only windows that lie entirely
/// inside the valid prefix of a row are visible.
#[derive(Debug, Clone)]
pub struct NGramSlices<'a> {
    batch: &'a TokenBatch,
    order: usize,
    valid_counts: Vec<usize>,
}

impl<'a> NGramSlices<'a> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn batch_size(&self) -> usize {
        self.valid_counts.len()
    }

    /// Number of valid n-grams per row: `max(0, len - n + 1)`.
    pub fn valid_counts(&self) -> &[usize] {
        &self.valid_counts
    }

    pub fn total(&self) -> usize {
        self.valid_counts.iter().sum()
    }

    /// Window `j` of row `i`. Panics if `j >= valid_counts()[i]`.
    pub fn get(&self, i: usize, j: usize) -> &'a [TokenId] {
        assert!(
            j < self.valid_counts[i],
            "n-gram {j} out of range for row {i} ({} valid)",
            self.valid_counts[i]
        );
        &self.batch.row(i)[j..j + self.order]
    }

    /// Valid windows of row `i`, left to right.
    pub fn sentence(&self, i: usize) -> std::slice::Windows<'a, TokenId> {
        let row: &'a [TokenId] = self.batch.row(i);
        row.windows(self.order)
    }

    /// Every valid window in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = &'a [TokenId]> + '_ {
        (0..self.batch_size()).flat_map(move |i| self.sentence(i))
    }
}

/// Windows `batch` into its order-`n` n-grams.
pub fn extract_ngrams(batch: &TokenBatch, n: usize) -> Result<NGramSlices<'_>> {
    if n < 1 {
        return Err(BleuError::InvalidOrder(n));
    }
    let valid_counts = batch
        .lengths()
        .iter()
        .map(|&len| (len + 1).saturating_sub(n))
        .collect();
    Ok(NGramSlices {
        batch,
        order: n,
        valid_counts,
    })
}

/// The distinct n-grams of one order occurring anywhere in a batch, together
/// with the compact ID of every extracted n-gram.
///
/// `inverse_indices` is laid out as all candidate n-grams (row-major), then
/// the first reference set, then the second, and so on. Unique rows are
/// stored in ascending lexicographic order, although callers should only
/// rely on the reconstruction property.
#[derive(Debug, Clone)]
pub struct NGramDictionary {
    order: usize,
    unique: Vec<TokenId>,
    inverse: Vec<CompactId>,
    // one prefix-sum table per set (candidates first), each of length rows + 1
    set_offsets: Vec<Vec<usize>>,
}

impl NGramDictionary {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_unique(&self) -> usize {
        if self.order == 0 {
            0
        } else {
            self.unique.len() / self.order
        }
    }

    /// Flat `(U, n)` row-major storage of the unique n-grams.
    pub fn unique_ngrams(&self) -> &[TokenId] {
        &self.unique
    }

    pub fn unique_ngram(&self, id: CompactId) -> &[TokenId] {
        let start = id as usize * self.order;
        &self.unique[start..start + self.order]
    }

    pub fn inverse_indices(&self) -> &[CompactId] {
        &self.inverse
    }

    /// Number of sets (candidates plus reference sets).
    pub fn num_sets(&self) -> usize {
        self.set_offsets.len()
    }

    pub fn set_rows(&self, set: usize) -> usize {
        self.set_offsets[set].len() - 1
    }

    /// Compact IDs of the n-grams of sentence `row` within `set`, where set 0
    /// is the candidates and set `r + 1` is reference set `r`.
    pub fn sentence_ids(&self, set: usize, row: usize) -> &[CompactId] {
        let offsets = &self.set_offsets[set];
        &self.inverse[offsets[row]..offsets[row + 1]]
    }

    pub fn set_sentences(&self, set: usize) -> Vec<&[CompactId]> {
        (0..self.set_rows(set))
            .map(|row| self.sentence_ids(set, row))
            .collect()
    }
}

// Rows of up to four 32-bit tokens pack into a u128 whose numeric order is
// the lexicographic order of the rows.
const PACKED_MAX_ORDER: usize = 128 / TokenId::BITS as usize;

fn pack(ngram: &[TokenId]) -> u128 {
    ngram
        .iter()
        .fold(0u128, |key, &t| (key << TokenId::BITS) | t as u128)
}

/// Collects every valid n-gram of the candidates and all reference sets and
/// deduplicates them into a compact dictionary.
pub fn build_dictionary(
    candidates: &NGramSlices<'_>,
    references: &[NGramSlices<'_>],
) -> Result<NGramDictionary> {
    if references.is_empty() {
        return Err(BleuError::NoReferences);
    }
    let order = candidates.order();
    if let Some(r) = references.iter().find(|r| r.order() != order) {
        return Err(BleuError::OrderMismatch {
            expected: order,
            found: r.order(),
        });
    }

    let sets: Vec<&NGramSlices<'_>> = std::iter::once(candidates).chain(references).collect();
    let mut total = 0usize;
    let set_offsets: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut offsets = Vec::with_capacity(s.batch_size() + 1);
            offsets.push(total);
            for &c in s.valid_counts() {
                total += c;
                offsets.push(total);
            }
            offsets
        })
        .collect();
    if total > CompactId::MAX as usize {
        return Err(BleuError::Capacity {
            rows: total,
            cols: order,
        });
    }
    let all = || sets.iter().flat_map(|s| s.iter());

    let (unique, inverse) = if order <= PACKED_MAX_ORDER {
        dedup_packed(all(), total, order)
    } else {
        dedup_rows(all(), total, order)
    };

    Ok(NGramDictionary {
        order,
        unique,
        inverse,
        set_offsets,
    })
}

// Sorts (key, position) pairs and assigns consecutive IDs to distinct keys.
// Keys must order like the n-grams they encode.
fn assign_ids<K: Ord + Copy>(
    mut keyed: Vec<(K, CompactId)>,
    mut emit_unique: impl FnMut(K),
) -> Vec<CompactId> {
    keyed.sort_unstable();
    let mut inverse = vec![0 as CompactId; keyed.len()];
    let mut prev: Option<K> = None;
    let mut next_id: CompactId = 0;
    for &(key, k) in &keyed {
        if prev != Some(key) {
            if prev.is_some() {
                next_id += 1;
            }
            prev = Some(key);
            emit_unique(key);
        }
        inverse[k as usize] = next_id;
    }
    inverse
}

fn dedup_packed<'a>(
    ngrams: impl Iterator<Item = &'a [TokenId]>,
    total: usize,
    order: usize,
) -> (Vec<TokenId>, Vec<CompactId>) {
    let mut unique = Vec::new();
    let inverse = if order == 1 {
        // single tokens sort as u32 keys
        let mut keyed = Vec::with_capacity(total);
        keyed.extend(ngrams.enumerate().map(|(k, g)| (g[0], k as CompactId)));
        assign_ids(keyed, |key| unique.push(key))
    } else if order == 2 {
        let mut keyed = Vec::with_capacity(total);
        keyed.extend(
            ngrams
                .enumerate()
                .map(|(k, g)| (pack(g) as u64, k as CompactId)),
        );
        assign_ids(keyed, |key| {
            unique.push((key >> TokenId::BITS) as TokenId);
            unique.push(key as TokenId);
        })
    } else {
        let mut keyed = Vec::with_capacity(total);
        keyed.extend(ngrams.enumerate().map(|(k, g)| (pack(g), k as CompactId)));
        assign_ids(keyed, |key| {
            for pos in (0..order).rev() {
                unique.push((key >> (pos as u32 * TokenId::BITS)) as TokenId);
            }
        })
    };
    (unique, inverse)
}

fn dedup_rows<'a>(
    ngrams: impl Iterator<Item = &'a [TokenId]>,
    total: usize,
    order: usize,
) -> (Vec<TokenId>, Vec<CompactId>) {
    let mut flat: Vec<TokenId> = Vec::with_capacity(total * order);
    for g in ngrams {
        flat.extend_from_slice(g);
    }
    let row = |k: CompactId| &flat[k as usize * order..(k as usize + 1) * order];
    let mut perm: Vec<CompactId> = (0..total as CompactId).collect();
    perm.sort_unstable_by(|&a, &b| row(a).cmp(row(b)).then(a.cmp(&b)));

    let mut unique = Vec::new();
    let mut inverse = vec![0 as CompactId; total];
    let mut prev: Option<CompactId> = None;
    let mut next_id: CompactId = 0;
    for &k in &perm {
        let is_new = prev.map_or(true, |p| row(p) != row(k));
        if is_new {
            if prev.is_some() {
                next_id += 1;
            }
            unique.extend_from_slice(row(k));
        }
        prev = Some(k);
        inverse[k as usize] = next_id;
    }
    (unique, inverse)
}

/// Dense per-sentence counts over compact n-gram IDs, shape `(rows, cols)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u32>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Ok(Self {
            rows,
            cols,
            counts: vec![0; checked_cells(rows, cols)?],
        })
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(BleuError::shape("count matrix row", cols, r.len()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            counts: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.counts[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.row(row).iter().map(|&c| c as u64).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn check_same_shape(&self, other: &Self, what: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(BleuError::shape(
                what,
                format!("{:?}", self.shape()),
                format!("{:?}", other.shape()),
            ));
        }
        Ok(())
    }
}

// Offsets are computed in 64 bits; the flat histogram must also be
// addressable and allocatable on this platform.
fn checked_cells(rows: usize, cols: usize) -> Result<usize> {
    let cells = (rows as u64).checked_mul(cols as u64);
    let limit = (isize::MAX as u64) / std::mem::size_of::<u32>() as u64;
    match cells {
        Some(c) if c <= limit => Ok(c as usize),
        _ => Err(BleuError::Capacity { rows, cols }),
    }
}

/// Counts every sentence's compact IDs with one flat histogram.
///
/// Sentence `i` owns the disjoint bin range `[i * U, (i + 1) * U)`; the flat
/// histogram is then viewed as a `(B, U)` matrix.
pub fn batched_bincount(sentences: &[&[CompactId]], num_unique: usize) -> Result<CountMatrix> {
    let mut matrix = CountMatrix::zeros(sentences.len(), num_unique)?;
    let flat = &mut matrix.counts;
    for (i, ids) in sentences.iter().enumerate() {
        let offset = i as u64 * num_unique as u64;
        for &id in ids.iter() {
            if id as usize >= num_unique {
                return Err(BleuError::IdOutOfRange {
                    id: id as usize,
                    num_unique,
                });
            }
            flat[(offset + id as u64) as usize] += 1;
        }
    }
    Ok(matrix)
}

/// Elementwise maximum over the count matrices of several reference sets.
pub fn max_reference_counts(reference_counts: &[CountMatrix]) -> Result<CountMatrix> {
    let (first, rest) = reference_counts
        .split_first()
        .ok_or(BleuError::NoReferences)?;
    let mut out = first.clone();
    for m in rest {
        out.check_same_shape(m, "reference count matrices")?;
        for (o, &c) in out.counts.iter_mut().zip(&m.counts) {
            *o = (*o).max(c);
        }
    }
    Ok(out)
}

/// Elementwise minimum of candidate counts and reference-maximum counts.
pub fn clip_counts(candidate: &CountMatrix, reference_max: &CountMatrix) -> Result<CountMatrix> {
    candidate.check_same_shape(reference_max, "clipping")?;
    Ok(CountMatrix {
        rows: candidate.rows,
        cols: candidate.cols,
        counts: candidate
            .counts
            .iter()
            .zip(&reference_max.counts)
            .map(|(&c, &r)| c.min(r))
            .collect(),
    })
}
