// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Datasets live on /dev/shm when available.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use arrowgate_cli::baseline::eager_acf_count;
use arrowgate_cli::{generate, inflate, run, BenchReport, Experiment, GenSpec, RunSpec};
use arrowgate_core::columnar::ColumnBuilder;
use arrowgate_core::storage::{write_acf, CsvWriter};
use arrowgate_core::{
    load_with, rows, Bridge, Codec, CsvDialect, DataType, Dataset, Field, FormatKind, IoCounter,
    MemoryTracker, OpenOptions, OwnedValue, ReadConfig, RecordBatch, ScanOptions, Scanner, Schema,
    SchemaRef,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn scratch(name: &str) -> tempfile::TempDir {
    let shm = Path::new("/dev/shm");
    let prefix = format!("arrowgate-{name}-");
    let mut builder = tempfile::Builder::new();
    builder.prefix(&prefix);
    if shm.is_dir() {
        if let Ok(d) = builder.tempdir_in(shm) {
            return d;
        }
    }
    builder.tempdir().expect("temporary directory")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn median(report: &BenchReport, series: &str, x: &str) -> Result<f64, String> {
    report
        .summary(series, x)
        .map(|s| s.elapsed_ns.median)
        .ok_or_else(|| format!("no summary for {series} x={x}"))
}

fn ms(ns: f64) -> String {
    format!("{:.1} ms", ns / 1e6)
}

// ---------------------------------------------------------------- C1

struct Table {
    schema: SchemaRef,
    rows: Vec<Vec<OwnedValue>>,
}

impl Table {
    fn random(rng: &mut StdRng) -> Self {
        let cols = rng.gen_range(1..=8);
        let n = if rng.gen_bool(0.25) {
            rng.gen_range(0..=40)
        } else {
            rng.gen_range(0..=10_000)
        };
        let fields: Vec<Field> = (0..cols)
            .map(|c| {
                let dtype = *[DataType::Int64, DataType::Float64, DataType::Utf8]
                    .choose(rng)
                    .unwrap();
                Field::new(format!("f{c}"), dtype, rng.gen_bool(0.5))
            })
            .collect();
        let schema = Arc::new(Schema::try_new(fields).unwrap());
        let rows = (0..n)
            .map(|r| {
                schema
                    .fields()
                    .iter()
                    .map(|f| {
                        // the first row is never null so CSV inference sees every column's kind
                        if f.nullable && r > 0 && rng.gen_bool(0.2) {
                            return OwnedValue::Null;
                        }
                        match f.dtype {
                            DataType::Int64 => OwnedValue::Int64(rng.gen()),
                            DataType::Float64 => {
                                let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                                let v: f64 = rng.gen::<f64>() * 10f64.powi(rng.gen_range(-8..12));
                                OwnedValue::Float64(sign * v)
                            }
                            DataType::Utf8 => {
                                const TAIL: &[char] = &['a', 'q', 'z', '0', '7', ' ', 'é'];
                                let mut s = String::new();
                                s.push(rng.gen_range('a'..='z'));
                                for _ in 0..rng.gen_range(0..8) {
                                    s.push(*TAIL.choose(rng).unwrap());
                                }
                                OwnedValue::Utf8(s)
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Table { schema, rows }
    }

    fn batches(&self, chunk: usize) -> Vec<RecordBatch> {
        self.rows
            .chunks(chunk.max(1))
            .map(|part| {
                let columns = self
                    .schema
                    .fields()
                    .iter()
                    .enumerate()
                    .map(|(c, f)| {
                        let mut b = ColumnBuilder::new(f.dtype);
                        for row in part {
                            b.append_value(row[c].as_value()).unwrap();
                        }
                        b.finish()
                    })
                    .collect();
                RecordBatch::try_new_with_rows(Arc::clone(&self.schema), columns, part.len())
                    .unwrap()
            })
            .collect()
    }

    fn project(&self, cols: &[usize]) -> Vec<Vec<OwnedValue>> {
        self.rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect()
    }
}

fn scan_values(
    path: &Path,
    format: FormatKind,
    batch_rows: usize,
    projection: Option<Vec<String>>,
) -> Result<Vec<Vec<OwnedValue>>, String> {
    let bridge = Bridge::new();
    let ds = Dataset::open(
        &path.to_string_lossy(),
        &OpenOptions {
            format_override: Some(format),
            ..OpenOptions::default()
        },
    )
    .map_err(err)?;
    let mut options = ScanOptions::default().with_batch_rows(batch_rows);
    options.projection = projection;
    let scanner = Scanner::new(&bridge, ds.register(&bridge), options).map_err(err)?;
    let mut out = Vec::new();
    for task in scanner.tasks().map_err(err)? {
        for batch in task {
            let batch = batch.map_err(err)?;
            let mut cursor = rows(&batch);
            while let Some(r) = cursor.next_row() {
                out.push(r.to_owned().0);
            }
        }
    }
    Ok(out)
}

fn c1_correctness() -> Outcome {
    const TABLES: usize = 200;
    let start = Instant::now();
    let dir = scratch("c1");
    let mut rng = StdRng::seed_from_u64(0xA11C_E5ED);
    let mut checks = 0usize;
    for t in 0..TABLES {
        let table = Table::random(&mut rng);
        let codec = Codec::ALL[t % Codec::ALL.len()];
        let rpg = if table.rows.len() <= 200 {
            *[1, 7, 8192].choose(&mut rng).unwrap()
        } else {
            *[7, 8192].choose(&mut rng).unwrap()
        };
        let acf = dir.path().join(format!("t{t}.acf"));
        let csv = dir.path().join(format!("t{t}.csv"));
        let chunk = rng.gen_range(1..=2000);
        write_acf(
            &acf,
            Arc::clone(&table.schema),
            table.batches(chunk),
            codec,
            rpg,
        )
        .map_err(err)?;
        let mut w = CsvWriter::new(
            std::io::BufWriter::new(std::fs::File::create(&csv).map_err(err)?),
            CsvDialect::default(),
        );
        w.write_header(&table.schema).map_err(err)?;
        for b in table.batches(chunk) {
            w.write_batch(&b).map_err(err)?;
        }
        w.finish().map_err(err)?;

        let ctx = |what: &str| {
            format!(
                "table {t} ({} rows, {codec}, groups of {rpg}): {what}",
                table.rows.len()
            )
        };

        let from_acf = scan_values(&acf, FormatKind::Acf, 8192, None)?;
        if from_acf != table.rows {
            return Err(ctx("ACF round-trip differs"));
        }
        let from_csv = scan_values(&csv, FormatKind::Csv, 8192, None)?;
        if from_csv != from_acf {
            return Err(ctx("CSV and ACF scans differ"));
        }
        let mut sizes = vec![7, 1000];
        if table.rows.len() <= 2000 {
            sizes.push(1);
        }
        for b in sizes {
            if scan_values(&acf, FormatKind::Acf, b, None)? != table.rows {
                return Err(ctx(&format!("ACF scan at batch size {b} differs")));
            }
            if scan_values(&csv, FormatKind::Csv, b, None)? != table.rows {
                return Err(ctx(&format!("CSV scan at batch size {b} differs")));
            }
        }
        let width = table.schema.len();
        let mut cols: Vec<usize> = (0..width).collect();
        cols.shuffle(&mut rng);
        cols.truncate(rng.gen_range(1..=width));
        let names: Vec<String> = cols
            .iter()
            .map(|&c| table.schema.field(c).name.clone())
            .collect();
        let expected = table.project(&cols);
        if scan_values(&acf, FormatKind::Acf, 8192, Some(names.clone()))? != expected {
            return Err(ctx(&format!("ACF projection {names:?} differs")));
        }
        if scan_values(&csv, FormatKind::Csv, 8192, Some(names.clone()))? != expected {
            return Err(ctx(&format!("CSV projection {names:?} differs")));
        }
        checks += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!(
            "{checks} tables correct but took {secs:.1} s (target < 60 s)"
        ));
    }
    Ok(format!("{checks} random tables, all codecs, {secs:.1} s"))
}

// ---------------------------------------------------------------- C2

fn c2_single_copy() -> Outcome {
    let dir = scratch("c2");
    // 4 files x 6 groups of 1000 rows = 24 fragments
    let spec = GenSpec {
        rows_per_group: 1000,
        formats: vec![FormatKind::Acf],
        ..GenSpec::new(24_000, 4, 6_000, dir.path())
    };
    generate(&spec).map_err(err)?;
    let uri = dir.path().join("acf").to_string_lossy().into_owned();
    let batch_rows = 300;
    // ceil(1000 / 300) batches per fragment
    let oracle = 24 * 1000u64.div_ceil(batch_rows as u64);

    let bridge = Bridge::new();
    let ds = Dataset::open(&uri, &OpenOptions::default()).map_err(err)?;
    if ds.fragments().len() != 24 {
        return Err(format!("{} fragments, expected 24", ds.fragments().len()));
    }
    let handle = ds.register(&bridge);
    let scanner = Scanner::new(
        &bridge,
        handle,
        ScanOptions::default().with_batch_rows(batch_rows),
    )
    .map_err(err)?;
    let mut consumed = 0u64;
    let mut counted = 0u64;
    for task in scanner.tasks().map_err(err)? {
        for batch in task {
            consumed += 1;
            counted += batch.map_err(err)?.num_rows() as u64;
        }
    }
    let copies = bridge.stats().batch_copies;
    drop(scanner);
    bridge.release(handle).map_err(err)?;
    if copies != consumed || consumed != oracle || counted != 24_000 {
        return Err(format!(
            "scanner: batch_copies {copies}, batches consumed {consumed}, expected {oracle}, rows {counted}"
        ));
    }
    if bridge.stats().live != 0 {
        return Err(format!("{} handles leaked", bridge.stats().live));
    }

    let bridge = Bridge::new();
    let cfg = ReadConfig::builder()
        .with_source_uri(&uri)
        .with_batch_rows(batch_rows)
        .with_num_partitions(5)
        .build()
        .map_err(err)?;
    let reader = load_with(&cfg, &bridge, None).map_err(err)?;
    let n = reader.count().map_err(err)?;
    let query_copies = bridge.stats().batch_copies;
    drop(reader);
    if n != 24_000 || query_copies != oracle || bridge.stats().live != 0 {
        return Err(format!(
            "count query: {n} rows, batch_copies {query_copies}, expected {oracle}, live {}",
            bridge.stats().live
        ));
    }
    Ok(format!(
        "24 fragments, batch_copies == batches consumed == {oracle}"
    ))
}

// ---------------------------------------------------------------- C3

fn c3_streaming_bound() -> Outcome {
    const BASE_BYTES: u64 = 64 << 20;
    const COLS: u32 = 4;
    const BATCH_ROWS: usize = 8192;
    let base_rows = BASE_BYTES / (8 * COLS as u64);
    let batch_bytes = (BATCH_ROWS * 8 * COLS as usize) as u64;

    let dir = scratch("c3");
    let spec = GenSpec {
        formats: vec![FormatKind::Acf],
        ..GenSpec::new(base_rows, COLS, base_rows / 4, dir.path())
    };
    generate(&spec).map_err(err)?;
    let manifest = inflate(dir.path(), 99, false).map_err(err)?;
    let acf = dir.path().join("acf");
    let logical_bytes = manifest.logical_rows(FormatKind::Acf) * 8 * COLS as u64;

    let io = IoCounter::new();
    let tracker = MemoryTracker::new();
    let bridge = Bridge::new();
    let ds = Dataset::open(
        &acf.to_string_lossy(),
        &OpenOptions {
            io: Some(Arc::clone(&io)),
            ..OpenOptions::default()
        },
    )
    .map_err(err)?;
    let scanner = Scanner::new(
        &bridge,
        ds.register(&bridge),
        ScanOptions::default()
            .with_batch_rows(BATCH_ROWS)
            .with_memory(Arc::clone(&tracker)),
    )
    .map_err(err)?;
    let tasks = scanner.tasks().map_err(err)?;
    let setup_data = io.snapshot().data_bytes;
    if setup_data != 0 {
        return Err(format!(
            "scanner and task creation read {setup_data} column-data bytes"
        ));
    }
    let mut rows = 0u64;
    for task in tasks {
        for batch in task {
            rows += batch.map_err(err)?.num_rows() as u64;
        }
    }
    let peak = tracker.snapshot().peak as u64;
    if rows != manifest.logical_rows(FormatKind::Acf) {
        return Err(format!(
            "counted {rows} rows, manifest says {}",
            manifest.logical_rows(FormatKind::Acf)
        ));
    }
    if logical_bytes < 100 * BASE_BYTES {
        return Err(format!("dataset is only {logical_bytes} bytes"));
    }
    if peak > 4 * batch_bytes {
        return Err(format!("peak live batch bytes {peak} > 4 x {batch_bytes}"));
    }
    let eager = eager_acf_count(&acf.join("part-00000.acf")).map_err(err)?;
    Ok(format!(
        "{} GiB logical, peak {} KiB <= {} KiB, 0 data bytes before the first batch (eager reader holds {} MiB for one file)",
        logical_bytes >> 30,
        peak >> 10,
        (4 * batch_bytes) >> 10,
        eager.peak_bytes >> 20
    ))
}

// ---------------------------------------------------------------- C4, C5

fn quick_spec(experiment: Experiment, data: &Path) -> RunSpec {
    RunSpec {
        repetitions: 31,
        ..RunSpec::new(experiment, data)
    }
}

fn base_dataset(dir: &Path) -> Result<PathBuf, String> {
    let spec = GenSpec {
        formats: vec![FormatKind::Acf],
        ..GenSpec::new(10_000_000, 4, 2_500_000, dir)
    };
    generate(&spec).map_err(err)?;
    Ok(dir.to_path_buf())
}

fn c4_batch_sweep(data: &Path, reports: &mut Vec<BenchReport>) -> Outcome {
    let start = Instant::now();
    let report = run(&quick_spec(Experiment::E1, data)).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    let small = median(&report, "scanner", "32")?;
    let large = median(&report, "scanner", "8192")?;
    let ratio = small / large;
    let sweep: Vec<String> = report
        .summaries
        .iter()
        .map(|s| format!("{}:{:.0}", s.x, s.elapsed_ns.median / 1e6))
        .collect();
    reports.push(report);
    let detail = format!(
        "median(32) {} / median(8192) {} = {ratio:.2} (>= 2.0); full sweep {secs:.0} s; ms by batch size {}",
        ms(small),
        ms(large),
        sweep.join(" ")
    );
    if ratio >= 2.0 && secs < 600.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_size_sweep(data: &Path, reports: &mut Vec<BenchReport>) -> Outcome {
    let report = run(&RunSpec {
        sweep: vec![0, 1, 3],
        ..quick_spec(Experiment::E2, data)
    })
    .map_err(err)?;
    let xs: Vec<String> = report.summaries.iter().map(|s| s.x.clone()).collect();
    let m: Vec<f64> = xs
        .iter()
        .map(|x| median(&report, "scanner", x))
        .collect::<Result<_, _>>()?;
    reports.push(report);
    let r1 = m[1] / m[0];
    let r2 = m[2] / m[1];
    let ok = |r: f64| (1.6..=2.6).contains(&r);
    let detail = format!(
        "S {} -> 2S {} -> 4S {}: ratios {r1:.2}, {r2:.2} (each in [1.6, 2.6])",
        ms(m[0]),
        ms(m[1]),
        ms(m[2])
    );
    if ok(r1) && ok(r2) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- C6

fn c6_csv_speedup(reports: &mut Vec<BenchReport>) -> Outcome {
    let dir = scratch("c6");
    let spec = GenSpec {
        formats: vec![FormatKind::Csv],
        ..GenSpec::new(1_000_000, 4, 250_000, dir.path())
    };
    generate(&spec).map_err(err)?;
    let report = run(&RunSpec {
        sweep: vec![0, 1, 3],
        ..quick_spec(Experiment::E3, dir.path())
    })
    .map_err(err)?;
    let mut speedups = Vec::new();
    for x in ["1000000", "2000000", "4000000"] {
        speedups.push(median(&report, "naive_csv", x)? / median(&report, "scanner", x)?);
    }
    reports.push(report);
    let lo = speedups.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = speedups.iter().cloned().fold(0.0, f64::max);
    let variation = (hi - lo) / lo;
    let detail = format!(
        "speedups over naive at 1M/2M/4M rows: {:.2} {:.2} {:.2} (>= 2.0), variation {:.1}% (< 30%)",
        speedups[0],
        speedups[1],
        speedups[2],
        variation * 100.0
    );
    if lo >= 2.0 && variation < 0.30 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- C7

fn c7_codecs(reports: &mut Vec<BenchReport>) -> Outcome {
    let dir = scratch("c7");
    let spec = GenSpec {
        formats: vec![FormatKind::Acf],
        ..GenSpec::new(2_500_000, 4, 625_000, dir.path())
    };
    generate(&spec).map_err(err)?;
    let report = run(&quick_spec(Experiment::E4, dir.path())).map_err(err)?;
    let fs = report
        .meta
        .filesystem
        .clone()
        .unwrap_or_else(|| "unknown".into());
    let none = median(&report, "scanner", "none")?;
    let fast = median(&report, "scanner", "fastlz")?;
    let deflate = median(&report, "scanner", "deflate")?;
    reports.push(report);
    let detail = format!(
        "on {fs}: none {} <= fastlz {} <= deflate {}, deflate/none {:.2} (>= 1.2)",
        ms(none),
        ms(fast),
        ms(deflate),
        deflate / none
    );
    if none <= fast && fast <= deflate && deflate >= 1.2 * none {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- C8

fn c8_projection(reports: &mut Vec<BenchReport>) -> Outcome {
    let dir = scratch("c8");
    let spec = GenSpec {
        formats: vec![FormatKind::Acf],
        ..GenSpec::new(400_000, 100, 100_000, dir.path())
    };
    generate(&spec).map_err(err)?;
    let report = run(&RunSpec {
        sweep: vec![1, 10, 50, 100],
        ..quick_spec(Experiment::E5, dir.path())
    })
    .map_err(err)?;
    let widths = ["1", "10", "50", "100"];
    let m: Vec<f64> = widths
        .iter()
        .map(|w| median(&report, "scanner", w))
        .collect::<Result<_, _>>()?;
    let bytes = |w: &str| {
        report
            .summary("scanner", w)
            .map(|s| s.bytes_read)
            .unwrap_or(0)
    };
    let byte_frac = bytes("10") as f64 / bytes("100") as f64;
    let time_frac = m[1] / m[3];
    // an inversion: a wider projection more than 5% faster than a narrower one
    let inversions: Vec<String> = (1..m.len())
        .filter(|&i| m[i] < 0.95 * m[i - 1])
        .map(|i| format!("{}<{}", widths[i], widths[i - 1]))
        .collect();
    reports.push(report);
    let detail = format!(
        "medians {} / {} / {} / {}; inversions {:?}; bytes(10)/bytes(100) {:.3} (<= 0.12); time(10)/time(100) {:.2} (<= 0.5)",
        ms(m[0]),
        ms(m[1]),
        ms(m[2]),
        ms(m[3]),
        inversions,
        byte_frac,
        time_frac
    );
    if inversions.is_empty() && byte_frac <= 0.12 && time_frac <= 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- C9

fn c9_methodology(reports: &[BenchReport]) -> Outcome {
    let mut configs = 0;
    for report in reports {
        for s in &report.summaries {
            let raw = report.runs_for(&s.config).count();
            let st = &s.elapsed_ns;
            let finite = [st.median, st.p1, st.p99]
                .iter()
                .all(|v| v.is_finite() && *v > 0.0);
            if s.runs != 30
                || raw != 30
                || st.n != 30
                || !finite
                || st.p1 > st.median
                || st.median > st.p99
            {
                return Err(format!(
                    "{} {} x={}: {} summary runs, {raw} raw rows, p1 {} median {} p99 {}",
                    s.experiment, s.series, s.x, s.runs, st.p1, st.median, st.p99
                ));
            }
            configs += 1;
        }
        let csv = report.raw_csv();
        if csv.lines().count() != report.runs.len() + 1 {
            return Err("raw CSV row count differs from the run list".into());
        }
    }

    // every repetition re-verifies counts against the manifest; any mismatch is an error
    let dir = scratch("c9");
    let spec = GenSpec {
        rows_per_group: 4096,
        ..GenSpec::new(100_000, 6, 30_000, dir.path())
    };
    generate(&spec).map_err(err)?;
    let mut verified = 0;
    for format in [FormatKind::Acf, FormatKind::Csv] {
        let report = run(&RunSpec {
            format: Some(format),
            batch_rows: 1000,
            ..quick_spec(Experiment::Scan, dir.path())
        })
        .map_err(err)?;
        let s = &report.summaries[0];
        if s.runs != 30 || report.runs.iter().any(|r| r.rows != 100_000) {
            return Err(format!("{format} scan: {} runs, rows {:?}", s.runs, s.rows));
        }
        verified += 31;
    }
    Ok(format!(
        "{configs} configurations with exactly 30 measured runs each; {verified} count runs agree with the manifest"
    ))
}

/// Criteria named on the command line (`-- C2 C7`), or all of them.
fn selected() -> impl Fn(&str) -> bool {
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.len() >= 2 && a.starts_with(['C', 'c']))
        .map(|a| a.to_ascii_uppercase())
        .collect();
    move |id: &str| only.is_empty() || only.iter().any(|o| o == id)
}

fn main() {
    let want = selected();
    let mut reports = Vec::new();
    let mut results: Vec<Outcome> = Vec::new();
    let mut record = |id: &str, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(d) => println!("{id} PASS {name}: {d}"),
            Err(d) => println!("{id} FAIL {name}: {d}"),
        }
        results.push(outcome);
    };

    if want("C1") {
        record("C1", "correctness suite", c1_correctness());
    }
    if want("C2") {
        record("C2", "single-copy law", c2_single_copy());
    }
    if want("C3") {
        record("C3", "laziness and streaming bound", c3_streaming_bound());
    }
    if want("C4") || want("C5") || want("C9") {
        let dir = scratch("e1e2");
        match base_dataset(dir.path()) {
            Ok(data) => {
                if want("C4") || want("C9") {
                    let outcome = c4_batch_sweep(&data, &mut reports);
                    if want("C4") {
                        record("C4", "batch size trend", outcome);
                    }
                }
                if want("C5") || want("C9") {
                    let outcome = c5_size_sweep(&data, &mut reports);
                    if want("C5") {
                        record("C5", "dataset size trend", outcome);
                    }
                }
            }
            Err(e) => {
                for (id, name) in [("C4", "batch size trend"), ("C5", "dataset size trend")] {
                    if want(id) {
                        record(id, name, Err(e.clone()));
                    }
                }
            }
        }
    }
    if want("C6") || want("C9") {
        let outcome = c6_csv_speedup(&mut reports);
        if want("C6") {
            record("C6", "CSV parser speedup", outcome);
        }
    }
    if want("C7") || want("C9") {
        let outcome = c7_codecs(&mut reports);
        if want("C7") {
            record("C7", "codec cost ordering", outcome);
        }
    }
    if want("C8") || want("C9") {
        let outcome = c8_projection(&mut reports);
        if want("C8") {
            record("C8", "projection selectivity", outcome);
        }
    }
    if want("C9") {
        record("C9", "methodology", c9_methodology(&reports));
    }

    let passed = results.iter().filter(|o| o.is_ok()).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
