//! Synthetic-data benchmark of batched BLEU against the serial oracle.
//!
//! For every `(seq_len, batch_size)` cell the harness generates a random
//! batch, checks that both implementations agree, then times one warm-up
//! and `repeats` measured runs of full per-sentence BLEU per implementation.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use batchbleu::oracle::oracle_sentence_bleu_batch;
use batchbleu::{sentence_bleu, BleuConfig, Smoothing, TokenBatch, TokenId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest tolerated score difference between the two implementations.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-6;

pub const CSV_HEADER: [&str; 6] = [
    "implementation",
    "batch_size",
    "seq_len",
    "mean_s",
    "std_s",
    "speedup",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Implementation {
    Batched,
    Oracle,
    Both,
}

impl Implementation {
    fn runs_oracle(self) -> bool {
        matches!(self, Implementation::Oracle | Implementation::Both)
    }

    fn runs_batched(self) -> bool {
        matches!(self, Implementation::Batched | Implementation::Both)
    }
}

impl FromStr for Implementation {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batched" => Ok(Implementation::Batched),
            "oracle" => Ok(Implementation::Oracle),
            "both" => Ok(Implementation::Both),
            other => bail!("unknown implementation {other:?} (expected both, batched or oracle)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub batch_sizes: Vec<usize>,
    pub seq_lens: Vec<usize>,
    pub vocab_size: u32,
    pub num_references: usize,
    pub repeats: usize,
    pub seed: u64,
    pub smoothing: Smoothing,
    pub max_order: usize,
    pub implementation: Implementation,
    /// Worker threads for the parallel batched run.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            batch_sizes: vec![16, 32, 64, 128, 256, 512],
            seq_lens: vec![256, 1024],
            vocab_size: 32_000,
            num_references: 1,
            repeats: 5,
            seed: 42,
            smoothing: Smoothing::None,
            max_order: 4,
            implementation: Implementation::Both,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            bail!("batch sizes must be non-empty and positive");
        }
        if self.seq_lens.is_empty() || self.seq_lens.contains(&0) {
            bail!("sequence lengths must be non-empty and positive");
        }
        if self.vocab_size == 0 {
            bail!("vocabulary size must be positive");
        }
        if self.num_references == 0 {
            bail!("at least one reference is required");
        }
        if self.repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if self.threads == 0 {
            bail!("thread count must be positive");
        }
        self.bleu_config()?;
        Ok(())
    }

    pub fn bleu_config(&self) -> Result<BleuConfig> {
        Ok(BleuConfig::new(self.max_order)?.with_smoothing(self.smoothing)?)
    }
}

/// Shape of one synthetic batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchShape {
    pub batch_size: usize,
    pub seq_len: usize,
    pub vocab_size: u32,
    pub num_references: usize,
}

// Fill value for padding; far outside any realistic vocabulary so leaks show.
const PAD: TokenId = TokenId::MAX;

/// Uniform random token IDs in `[0, vocab_size)` with row lengths drawn
/// uniformly from `[seq_len / 2, seq_len]`. Deterministic in `seed`.
pub fn generate_batch(shape: &BatchShape, seed: u64) -> (TokenBatch, Vec<TokenBatch>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = |rng: &mut ChaCha8Rng| {
        let mut ids = vec![PAD; shape.batch_size * shape.seq_len];
        let mut lengths = Vec::with_capacity(shape.batch_size);
        for row in ids.chunks_mut(shape.seq_len.max(1)).take(shape.batch_size) {
            let len = rng.gen_range(shape.seq_len / 2..=shape.seq_len);
            for t in &mut row[..len] {
                *t = rng.gen_range(0..shape.vocab_size);
            }
            lengths.push(len);
        }
        TokenBatch::new(ids, shape.seq_len, lengths).expect("generated batch is well formed")
    };
    let candidates = one(&mut rng);
    let references = (0..shape.num_references).map(|_| one(&mut rng)).collect();
    (candidates, references)
}

/// Source of elapsed times, so reports can be produced deterministically.
pub trait Clock {
    /// Runs `f` and returns how long it took, in seconds.
    fn time(&mut self, f: &mut dyn FnMut()) -> f64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct WallClock;

impl Clock for WallClock {
    fn time(&mut self, f: &mut dyn FnMut()) -> f64 {
        let start = Instant::now();
        f();
        start.elapsed().as_secs_f64()
    }
}

/// Runs the closure and replays scripted durations in order, cycling.
#[derive(Debug, Clone)]
pub struct FakeClock {
    durations: Vec<f64>,
    next: usize,
}

impl FakeClock {
    pub fn new(durations: Vec<f64>) -> Self {
        assert!(!durations.is_empty());
        Self { durations, next: 0 }
    }
}

impl Clock for FakeClock {
    fn time(&mut self, f: &mut dyn FnMut()) -> f64 {
        f();
        let d = self.durations[self.next % self.durations.len()];
        self.next += 1;
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub implementation: String,
    pub batch_size: usize,
    pub seq_len: usize,
    pub threads: usize,
    /// Every timed sample, in seconds; the warm-up run is not included.
    pub samples: Vec<f64>,
    pub mean_s: f64,
    pub std_s: f64,
    /// `baseline mean / this mean`, when the serial baseline ran.
    pub speedup: Option<f64>,
    /// Set when the run could not be completed (e.g. counting capacity).
    pub error: Option<String>,
}

impl BenchRecord {
    fn from_samples(implementation: String, shape: &BatchShape, threads: usize, samples: Vec<f64>) -> Self {
        let (mean_s, std_s) = mean_std(&samples);
        Self {
            implementation,
            batch_size: shape.batch_size,
            seq_len: shape.seq_len,
            threads,
            samples,
            mean_s,
            std_s,
            speedup: None,
            error: None,
        }
    }

    fn failed(implementation: String, shape: &BatchShape, threads: usize, error: String) -> Self {
        Self {
            error: Some(error),
            ..Self::from_samples(implementation, shape, threads, Vec::new())
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.implementation == ORACLE_LABEL
    }
}

pub const ORACLE_LABEL: &str = "oracle-serial";

pub fn batched_label(threads: usize) -> String {
    format!("batched-t{threads}")
}

/// Sample mean and (n - 1) standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")
}

fn timed_samples(clock: &mut dyn Clock, repeats: usize, mut run: impl FnMut()) -> Vec<f64> {
    run();
    (0..repeats).map(|_| clock.time(&mut run)).collect()
}

/// Seed of the batch for one cell, so cells are independent of run order.
pub fn cell_seed(seed: u64, batch_size: usize, seq_len: usize) -> u64 {
    seed ^ ((batch_size as u64) << 32) ^ (seq_len as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    run_benchmark_with_clock(config, &mut WallClock)
}

/// Benchmarks every cell. Aborts if the two implementations disagree on
/// any benchmarked batch.
pub fn run_benchmark_with_clock(config: &BenchConfig, clock: &mut dyn Clock) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let bleu = config.bleu_config()?;
    let serial_pool = pool(1)?;
    let parallel_pool = pool(config.threads)?;
    let mut batched_threads = vec![1];
    if config.threads > 1 {
        batched_threads.push(config.threads);
    }

    let mut records = Vec::new();
    for &seq_len in &config.seq_lens {
        for &batch_size in &config.batch_sizes {
            let shape = BatchShape {
                batch_size,
                seq_len,
                vocab_size: config.vocab_size,
                num_references: config.num_references,
            };
            let (cands, refs) = generate_batch(&shape, cell_seed(config.seed, batch_size, seq_len));

            let oracle_scores = oracle_sentence_bleu_batch(&cands, &refs, &bleu)?;
            let batched = parallel_pool.install(|| sentence_bleu(&cands, &refs, &bleu));
            let batched_ok = match &batched {
                Ok(result) => {
                    verify_equivalence(&result.scores, &oracle_scores)
                        .with_context(|| format!("batch_size={batch_size} seq_len={seq_len}"))?;
                    true
                }
                Err(_) => false,
            };

            let mut cell = Vec::new();
            if config.implementation.runs_oracle() {
                let samples = timed_samples(clock, config.repeats, || {
                    let scores = oracle_sentence_bleu_batch(&cands, &refs, &bleu);
                    std::hint::black_box(scores).ok();
                });
                cell.push(BenchRecord::from_samples(ORACLE_LABEL.into(), &shape, 1, samples));
            }
            if config.implementation.runs_batched() {
                for &threads in &batched_threads {
                    let label = batched_label(threads);
                    if !batched_ok {
                        let err = batched.as_ref().err().map(ToString::to_string).unwrap_or_default();
                        cell.push(BenchRecord::failed(label, &shape, threads, err));
                        continue;
                    }
                    let pool = if threads == 1 { &serial_pool } else { &parallel_pool };
                    let samples = timed_samples(clock, config.repeats, || {
                        let scores = pool.install(|| sentence_bleu(&cands, &refs, &bleu));
                        std::hint::black_box(scores).ok();
                    });
                    cell.push(BenchRecord::from_samples(label, &shape, threads, samples));
                }
            }

            let baseline = cell
                .iter()
                .find(|r| r.is_baseline())
                .map(|r| r.mean_s);
            for r in cell.iter_mut().filter(|r| !r.is_baseline() && r.error.is_none()) {
                r.speedup = baseline.map(|b| b / r.mean_s);
            }
            records.extend(cell);
        }
    }
    Ok(records)
}

pub fn verify_equivalence(batched: &[f64], oracle: &[f64]) -> Result<()> {
    if batched.len() != oracle.len() {
        bail!(
            "score count mismatch: batched {} vs oracle {}",
            batched.len(),
            oracle.len()
        );
    }
    for (i, (b, o)) in batched.iter().zip(oracle).enumerate() {
        if !((b - o).abs() <= EQUIVALENCE_TOLERANCE) {
            bail!("sentence {i}: batched score {b} differs from oracle score {o}");
        }
    }
    Ok(())
}

fn fmt_seconds(s: f64) -> String {
    if s.is_finite() {
        format!("{s:.9}")
    } else {
        String::new()
    }
}

/// Writes the records as CSV (LF line endings, `.` decimal separator).
pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.implementation.clone(),
            r.batch_size.to_string(),
            r.seq_len.to_string(),
            fmt_seconds(r.mean_s),
            fmt_seconds(r.std_s),
            r.speedup.map(|s| format!("{s:.3}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV report to `path` and returns the human-readable table.
pub fn emit_report(records: &[BenchRecord], path: &Path) -> Result<String> {
    if records.is_empty() {
        return Err(anyhow!("no benchmark records to report"));
    }
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating report {}", path.display()))?;
    write_csv(records, std::io::BufWriter::new(file))
        .with_context(|| format!("writing report {}", path.display()))?;
    Ok(format_table(records))
}

pub fn format_table(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>8} {:>8} {:>8} {:>12} {:>12} {:>9}",
        "implementation", "batch", "seq_len", "threads", "mean (s)", "std (s)", "speedup"
    );
    for r in records {
        if let Some(err) = &r.error {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>8} {:>8} failed: {err}",
                r.implementation, r.batch_size, r.seq_len, r.threads
            );
            continue;
        }
        let speedup = r.speedup.map(|s| format!("{s:.2}x")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>8} {:>8} {:>12.6} {:>12.6} {:>9}",
            r.implementation, r.batch_size, r.seq_len, r.threads, r.mean_s, r.std_s, speedup
        );
    }
    out
}

/// Least-squares slope of `ln(time)` against `ln(batch_size)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(batch_size: usize, seq_len: usize, vocab_size: u32) -> BatchShape {
        BatchShape {
            batch_size,
            seq_len,
            vocab_size,
            num_references: 2,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = shape(8, 40, 100);
        assert_eq!(generate_batch(&s, 7), generate_batch(&s, 7));
        assert_ne!(generate_batch(&s, 7).0, generate_batch(&s, 8).0);
    }

    #[test]
    fn lengths_stay_in_range() {
        for seed in 0..200 {
            let s = shape(4, 1 + (seed as usize % 37), 50);
            let (c, refs) = generate_batch(&s, seed);
            for b in std::iter::once(&c).chain(&refs) {
                for &len in b.lengths() {
                    assert!(len >= s.seq_len / 2 && len <= s.seq_len);
                }
                assert!(b.rows().flatten().all(|&t| t < 50));
            }
        }
    }

    #[test]
    fn single_token_vocabulary_scores_perfectly_against_itself() {
        let (c, _) = generate_batch(&shape(6, 30, 1), 3);
        let scores = sentence_bleu(&c, &[c.clone()], &BleuConfig::default()).unwrap().scores;
        assert!(scores.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn stats_helpers() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0].iter().map(|&b| (b, 3.0 * b)).collect();
        assert!((log_log_slope(&pts) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = BenchConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            BenchConfig { repeats: 0, ..ok.clone() },
            BenchConfig { batch_sizes: vec![], ..ok.clone() },
            BenchConfig { seq_lens: vec![0], ..ok.clone() },
            BenchConfig { vocab_size: 0, ..ok.clone() },
            BenchConfig { num_references: 0, ..ok.clone() },
            BenchConfig { threads: 0, ..ok.clone() },
            BenchConfig { max_order: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!("gpu".parse::<Implementation>().is_err());
    }

    #[test]
    fn equivalence_check_rejects_divergence() {
        assert!(verify_equivalence(&[0.5, 0.25], &[0.5, 0.25 + 1e-7]).is_ok());
        assert!(verify_equivalence(&[0.5, 0.25], &[0.5, 0.26]).is_err());
        assert!(verify_equivalence(&[f64::NAN], &[0.0]).is_err());
        assert!(verify_equivalence(&[0.5], &[]).is_err());
    }
}
