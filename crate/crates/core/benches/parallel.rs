//! Parallel vs sequential throughput of the Monte-Carlo kernels and the
//! placement corner enumeration.
//!
//! The parallel paths ride the default rayon pool; the `_seq` functions are
//! the always-available sequential references that the determinism tests
//! compare against bit-for-bit.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use riscalc_core::channel::db_to_linear;
use riscalc_core::metrics::ModulationScheme;
use riscalc_core::montecarlo::{
    empirical_asep, empirical_asep_seq, empirical_outage, empirical_outage_seq, McRun,
};
use riscalc_core::{GlobalConfig, RisLinkConfig, Scenario};

fn scenario(k: usize, n: u32) -> Scenario {
    let link = RisLinkConfig {
        n_elements: n,
        m1: 1.0,
        m2: 1.0,
        omega1: 1.0,
        omega2: 1.0,
        d1_m: 5.0,
        d2_m: 5.0,
        g1_db: 5.0,
        g2_db: 5.0,
        efficiency: 1.0,
    };
    let global = GlobalConfig {
        carrier_frequency_hz: 2.4e9,
        outage_threshold_linear: 1.0,
        avg_snr_grid_db: vec![60.0, 120.0],
    };
    Scenario::new(global, vec![link; k]).unwrap()
}

fn bench_outage(c: &mut Criterion) {
    let scn = scenario(3, 5);
    let snr = db_to_linear(76.0);
    let mut group = c.benchmark_group("empirical_outage");
    for &trials in &[50_000u64, 200_000] {
        let run = McRun::new(trials, 7, 16_384).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", trials), &run, |b, run| {
            b.iter(|| empirical_outage(&scn, snr, run))
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &run, |b, run| {
            b.iter(|| empirical_outage_seq(&scn, snr, run))
        });
    }
    group.finish();
}

fn bench_asep(c: &mut Criterion) {
    let scn = scenario(3, 5);
    let snr = db_to_linear(84.0);
    let bpsk = ModulationScheme::bpsk();
    let run = McRun::new(100_000, 11, 16_384).unwrap();
    let mut group = c.benchmark_group("empirical_asep");
    group.bench_function("parallel", |b| b.iter(|| empirical_asep(&scn, &bpsk, snr, &run)));
    group.bench_function("sequential", |b| {
        b.iter(|| empirical_asep_seq(&scn, &bpsk, snr, &run))
    });
    group.finish();
}

criterion_group!(benches, bench_outage, bench_asep);
criterion_main!(benches);
