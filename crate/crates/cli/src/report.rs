// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! Per-run records, summaries and their on-disk forms.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::runner::RunConfig;
use crate::stats::Stats;
use crate::{IoContext, Result};

pub const RAW_HEADER: &str = "experiment,config,run,elapsed_ns,rows,bytes_read,batch_copies";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    /// Fingerprint of the configuration.
    pub config: String,
    pub run: usize,
    pub elapsed_ns: u64,
    pub rows: u64,
    pub bytes_read: u64,
    pub batch_copies: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeCounters {
    pub registered: u64,
    pub released: u64,
    pub batch_copies: u64,
    pub live: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub config: String,
    /// Which reader produced the series, e.g. `scanner` or `naive_csv`.
    pub series: String,
    /// The swept parameter's value for this point.
    pub x: String,
    pub params: RunConfig,
    pub runs: usize,
    pub elapsed_ns: Stats,
    pub rows: u64,
    pub bytes_read: u64,
    /// Counters of the last run's bridge, read after its reader was dropped.
    pub bridge: BridgeCounters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub data_dir: String,
    /// Filesystem type of the data directory's mount, if known.
    pub filesystem: Option<String>,
    pub repetitions: usize,
    pub discard_first: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub meta: ReportMeta,
    pub summaries: Vec<Summary>,
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

impl BenchReport {
    pub fn summary(&self, series: &str, x: &str) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.series == series && s.x == x)
    }

    pub fn runs_for(&self, config: &str) -> impl Iterator<Item = &RunRecord> {
        let config = config.to_string();
        self.runs.iter().filter(move |r| r.config == config)
    }

    pub fn raw_csv(&self) -> String {
        let mut out = String::from(RAW_HEADER);
        out.push('\n');
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.experiment, r.config, r.run, r.elapsed_ns, r.rows, r.bytes_read, r.batch_copies
            )
            .unwrap();
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One plot series file per experiment, tab separated.
    pub fn series_tsv(&self) -> Vec<(String, String)> {
        let mut experiments: Vec<&str> = self
            .summaries
            .iter()
            .map(|s| s.experiment.as_str())
            .collect();
        experiments.dedup();
        experiments
            .into_iter()
            .map(|e| {
                let mut out =
                    String::from("series\tx\tmedian_ns\tp1_ns\tp99_ns\tmean_ns\tbytes_read\n");
                for s in self.summaries.iter().filter(|s| s.experiment == e) {
                    let st = &s.elapsed_ns;
                    writeln!(
                        out,
                        "{}\t{}\t{:.0}\t{:.0}\t{:.0}\t{:.0}\t{}",
                        s.series, s.x, st.median, st.p1, st.p99, st.mean, s.bytes_read
                    )
                    .unwrap();
                }
                (format!("{e}.tsv"), out)
            })
            .collect()
    }

    /// Writes `runs.csv`, `summary.json` and the per-experiment series.
    pub fn emit(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).at(dir)?;
        let mut files = vec![
            ("runs.csv".to_string(), self.raw_csv()),
            ("summary.json".to_string(), self.summary_json()),
        ];
        files.extend(self.series_tsv());
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).at(&path)?;
        }
        Ok(())
    }
}

/// Filesystem type of the mount holding `path`, from `/proc/mounts`.
pub fn filesystem_of(path: &Path) -> Option<String> {
    let path = path.canonicalize().ok()?;
    let mounts = std::fs::read_to_string("/proc/mounts").ok()?;
    mounts
        .lines()
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            let _dev = parts.next()?;
            let point = parts.next()?.replace("\\040", " ");
            let fs = parts.next()?;
            path.starts_with(&point)
                .then(|| (point.len(), fs.to_string()))
        })
        .max_by_key(|(len, _)| *len)
        .map(|(_, fs)| fs)
}
