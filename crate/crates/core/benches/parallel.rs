//! Sequential against parallel execution of the loops that fan out.
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;
use std::sync::Arc;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sievekit::arith::enumerate_squarefree_supported;
use sievekit::primes::{PrimeSubset, PrimeTable, Selector};
use sievekit::sieves::{discrepancy_sum, sift_count_with, DiscrepancyReference, ShiftSet};
use sievekit::smooth::{bv_discrepancy_sum_with, smooth_tuple_count_with, SmoothQuery};
use sievekit::sumset::{decompose_binary_with, IntegerSet, SearchOptions};
use sievekit::verify::verify_all_with;
use sievekit::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn sifting(c: &mut Criterion) {
    let table = Arc::new(PrimeTable::new(2_000_000).unwrap());
    let set = IntegerSet::range(1, 2_000_000);
    let shifts = ShiftSet::new(vec![0, 2, 6, 8, 12]).unwrap();
    let ps = PrimeSubset::new(
        table,
        Selector::Interval {
            lo: 10.0,
            hi: 2000.0,
        },
    );
    let mut g = c.benchmark_group("sift_count");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| sift_count_with(black_box(&set), &shifts, &ps, exec))
        });
    }
    g.finish();
}

fn tuples(c: &mut Criterion) {
    let shifts = ShiftSet::new(vec![0, 1, 2]).unwrap();
    let mut g = c.benchmark_group("smooth_tuple_count");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| smooth_tuple_count_with(black_box(5_000_000), 1000, &shifts, exec).unwrap())
        });
    }
    g.finish();
}

fn discrepancy(c: &mut Criterion) {
    let table = Arc::new(PrimeTable::new(10_000).unwrap());
    let large = PrimeSubset::new(table.clone(), Selector::Min { threshold: 50.0 });
    let q = SmoothQuery::new(1_000_000, 30);
    let mut g = c.benchmark_group("bv_discrepancy");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                bv_discrepancy_sum_with(black_box(&q), &large, 60, 2, u64::MAX, exec).unwrap()
            })
        });
    }
    g.finish();

    let elements: Vec<u64> = (1..200_000).filter(|n| n % 3 != 0).collect();
    let moduli = enumerate_squarefree_supported(
        &PrimeSubset::new(table, Selector::Interval { lo: 4.0, hi: 400.0 }),
        2500,
    );
    let mut g = c.benchmark_group("discrepancy_sum");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                discrepancy_sum(
                    black_box(&elements),
                    &moduli,
                    2.0,
                    DiscrepancyReference::Total,
                    u64::MAX,
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    // primes in a short window: indecomposable, so the whole tree is searched
    let table = PrimeTable::new(10_000).unwrap();
    let s: IntegerSet = table.primes_in(1000.0, 1400.0).iter().copied().collect();
    let mut g = c.benchmark_group("decompose_binary");
    for (name, exec) in MODES {
        let opts = SearchOptions {
            exec,
            ..SearchOptions::default()
        };
        g.bench_with_input(BenchmarkId::new(name, s.len()), &s, |b, s| {
            b.iter(|| decompose_binary_with(black_box(s), opts).unwrap())
        });
    }
    g.finish();
}

fn batches(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_all");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| verify_all_with(7, Duration::from_secs(60), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    sifting,
    tuples,
    discrepancy,
    decomposition,
    batches
);
criterion_main!(benches);
