use std::path::PathBuf;

use anyhow::Result;
use batchbleu::Smoothing;
use batchbleu_bench::{emit_report, run_benchmark, BenchConfig, Implementation};
use clap::Parser;

/// Times batched per-sentence BLEU against the serial oracle on synthetic
/// token batches and writes a CSV report.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512")]
    batch_sizes: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_value = "256,1024")]
    seq_lens: Vec<usize>,

    #[arg(long, default_value_t = 32_000)]
    vocab: u32,

    /// Reference sets per candidate batch.
    #[arg(long, default_value_t = 1)]
    refs: usize,

    /// Timed runs per cell (after one untimed warm-up).
    #[arg(long, default_value_t = 5)]
    repeats: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// both, batched or oracle.
    #[arg(long = "impl", default_value = "both")]
    implementation: Implementation,

    /// Worker threads for the batched path (default: available cores).
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long, default_value = "report.csv")]
    out: PathBuf,

    /// none, floor, add-k or exp.
    #[arg(long, default_value = "none")]
    smoothing: Smoothing,

    #[arg(long, default_value_t = 4)]
    max_order: usize,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        batch_sizes: args.batch_sizes,
        seq_lens: args.seq_lens,
        vocab_size: args.vocab,
        num_references: args.refs,
        repeats: args.repeats,
        seed: args.seed,
        smoothing: args.smoothing,
        max_order: args.max_order,
        implementation: args.implementation,
        threads: args.threads.unwrap_or(defaults.threads),
    };
    config.validate()?;

    let records = run_benchmark(&config)?;
    let table = emit_report(&records, &args.out)?;
    print!("{table}");
    println!("report written to {}", args.out.display());
    Ok(())
}
