use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use secrecy_bench::{example_system, skewed_source, symmetric_channel};
use secrecy_core::gamma::{gamma1, gamma2, GammaOptions};
use secrecy_core::rd::{
    channel_capacity, conditional_rate_distortion, rate_distortion, SolverOptions,
};
use secrecy_core::regions::{DmEngine, RegionSearch};
use secrecy_core::sim::{uncoded_run, AttackSpec, AttackStrategy, RunConfig};
use secrecy_core::{Channel, DistortionMatrix, JointPmf, Pmf};
use std::hint::black_box;

fn blahut_arimoto(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut g = c.benchmark_group("blahut_arimoto");
    for n in [2, 4, 8, 16] {
        let ch = symmetric_channel(n, 0.2);
        g.bench_with_input(BenchmarkId::new("capacity", n), &ch, |b, ch| {
            b.iter(|| channel_capacity(black_box(ch), &opts).unwrap())
        });
        let src = skewed_source(n);
        let d = DistortionMatrix::hamming(n);
        g.bench_with_input(BenchmarkId::new("rate_distortion", n), &n, |b, _| {
            b.iter(|| rate_distortion(black_box(&src), &d, 0.2, &opts).unwrap())
        });
    }
    g.finish();
}

fn conditional(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let joint = JointPmf::from_input(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
    let d = DistortionMatrix::erasure(2);
    c.bench_function("conditional_rd_two_routes", |b| {
        b.iter(|| conditional_rate_distortion(black_box(&joint), &d, 0.3, &opts).unwrap())
    });
}

fn equivocation(c: &mut Criterion) {
    let sys = example_system();
    let opts = GammaOptions::default();
    let mut g = c.benchmark_group("equivocation");
    g.sample_size(10);
    g.bench_function("gamma1", |b| {
        b.iter(|| gamma1(black_box(&sys.channel), 0.7, &opts).unwrap())
    });
    g.bench_function("gamma2", |b| {
        b.iter(|| gamma2(black_box(&sys.channel), 0.7, &opts).unwrap())
    });
    g.finish();
}

fn region(c: &mut Criterion) {
    let sys = example_system();
    let search = RegionSearch::default();
    let mut g = c.benchmark_group("region");
    g.sample_size(10);
    g.bench_function("engine_lossy_bounds", |b| {
        b.iter(|| {
            DmEngine::new(black_box(&sys), &search)
                .unwrap()
                .lossy_bounds(0.3, 0.3, true)
                .unwrap()
        })
    });
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let sys = example_system();
    let cfg = RunConfig {
        trials: 200,
        seed: 1,
        attacks: vec![AttackSpec {
            strategy: AttackStrategy::GreedyList,
            rate: 0.25,
        }],
        de: 0.3,
        posterior_samples: 128,
    };
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("uncoded_greedy_m12", |b| {
        b.iter(|| uncoded_run(black_box(&sys), &Channel::identity(2), 12, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    blahut_arimoto,
    conditional,
    equivocation,
    region,
    simulation
);
criterion_main!(benches);
