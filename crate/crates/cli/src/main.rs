// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use arrowgate_cli::gen::{DEFAULT_ROWS_PER_GROUP, DEFAULT_VALUE_BOUND};
use arrowgate_cli::{generate, inflate, run, Experiment, GenSpec, RunSpec};
use arrowgate_core::{Codec, FormatKind};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arrowgate",
    version,
    about = "Generate datasets and run scan experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic Int64 dataset and its manifest.
    Gen {
        #[arg(long, default_value_t = 10_000_000)]
        rows: u64,
        #[arg(long, default_value_t = 4)]
        cols: u32,
        #[arg(long, default_value_t = 2_500_000)]
        rows_per_file: u64,
        #[arg(long, value_delimiter = ',', default_value = "acf,csv")]
        formats: Vec<FormatKind>,
        #[arg(long, default_value = "none")]
        codec: Codec,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ROWS_PER_GROUP)]
        rows_per_group: u64,
        #[arg(long, default_value_t = DEFAULT_VALUE_BOUND)]
        value_bound: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Give every file of a generated dataset X hardlinked siblings.
    Inflate {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        factor: u32,
        /// Copy files when hardlinks are not supported.
        #[arg(long)]
        copy_fallback: bool,
    },
    /// Run an experiment and write its report.
    Run {
        #[arg(long)]
        exp: Experiment,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 31)]
        reps: usize,
        /// Keep the first run instead of discarding it.
        #[arg(long)]
        keep_first: bool,
        #[arg(long, default_value_t = 8192)]
        batch_rows: usize,
        /// Override the swept values: batch sizes (e1), inflation factors
        /// (e2, e3) or projection widths (e5).
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "none,fastlz,deflate")]
        codecs: Vec<Codec>,
        /// Format read by `scan`.
        #[arg(long)]
        format: Option<FormatKind>,
        #[arg(long, value_delimiter = ',')]
        projection: Option<Vec<String>>,
        #[arg(long)]
        partitions: Option<usize>,
        #[arg(long, env = "ARROWGATE_POOL")]
        pool: Option<usize>,
        #[arg(long, default_value_t = 0)]
        boundary_latency_us: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> arrowgate_cli::Result<()> {
    match command {
        Command::Gen {
            rows,
            cols,
            rows_per_file,
            formats,
            codec,
            seed,
            rows_per_group,
            value_bound,
            out,
        } => {
            let spec = GenSpec {
                rows,
                cols,
                rows_per_file,
                formats,
                codec,
                seed,
                out_dir: out.clone(),
                rows_per_group,
                value_bound,
            };
            let manifest = generate(&spec)?;
            println!(
                "wrote {} files ({} rows per format) to {}",
                manifest.files.len(),
                manifest.base_rows,
                out.display()
            );
        }
        Command::Inflate {
            dir,
            factor,
            copy_fallback,
        } => {
            let manifest = inflate(&dir, factor, copy_fallback)?;
            println!(
                "{} files in manifest, inflation {}{}",
                manifest.files.len(),
                manifest.inflation,
                if manifest.copy_fallback {
                    " (copied)"
                } else {
                    ""
                }
            );
        }
        Command::Run {
            exp,
            data,
            reps,
            keep_first,
            batch_rows,
            sweep,
            codecs,
            format,
            projection,
            partitions,
            pool,
            boundary_latency_us,
            out,
        } => {
            let spec = RunSpec {
                repetitions: reps,
                discard_first: !keep_first,
                batch_rows,
                sweep,
                codecs,
                format,
                projection,
                partitions,
                pool,
                boundary_latency: Duration::from_micros(boundary_latency_us),
                progress: true,
                ..RunSpec::new(exp, data)
            };
            let report = run(&spec)?;
            report.emit(&out)?;
            println!(
                "{} configurations, {} measured runs, report in {}",
                report.summaries.len(),
                report.runs.len(),
                out.display()
            );
        }
    }
    Ok(())
}
