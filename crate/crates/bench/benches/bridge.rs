// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright The Arrowgate Authors

use std::sync::Arc;

use arrowgate_core::{
    deserialize_batch, Bridge, ColumnVector, DataType, Field, RecordBatch, Schema,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn batch(rows: usize) -> RecordBatch {
    let schema = Arc::new(
        Schema::try_new(
            (0..4)
                .map(|i| Field::new(format!("c{i}"), DataType::Int64, false))
                .collect(),
        )
        .unwrap(),
    );
    let values: Vec<i64> = (0..rows as i64).collect();
    let columns = (0..4).map(|_| ColumnVector::from_i64s(&values)).collect();
    RecordBatch::try_new(schema, columns).unwrap()
}

fn transfer(c: &mut Criterion) {
    let bridge = Bridge::new();
    let mut group = c.benchmark_group("bridge_transfer");
    for rows in [32, 1024, 8192, 65536] {
        let b = batch(rows);
        group.throughput(Throughput::Bytes(b.byte_size() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &b, |bench, b| {
            bench.iter(|| {
                let (handle, msg) = bridge.transfer_batch(b).unwrap();
                let out = deserialize_batch(&msg, b.schema().clone()).unwrap();
                bridge.release(handle).unwrap();
                out
            })
        });
    }
    group.finish();
}

criterion_group!(benches, transfer);
criterion_main!(benches);
