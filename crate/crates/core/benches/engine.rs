//! Serial against data-parallel agent updates.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, SamplingMode};
use timepref::engine::{Population, Sampling, Schedule};
use timepref::{run_with, Execution, SimConfig};

fn config(n_agents: usize, t_max: f64) -> SimConfig {
    let mut c = SimConfig {
        schedule: Schedule {
            n_agents,
            t_max,
            ..Default::default()
        },
        output: Sampling {
            sample_agents: Vec::new(),
            sample_stride: 24,
        },
        seed: 1,
        ..Default::default()
    };
    c.interaction.eps_c = 0.1;
    c
}

const MODES: [(&str, Execution); 2] = [
    ("serial", Execution::Serial),
    ("parallel", Execution::Parallel),
];

/// One simulated year for growing populations.
fn bench_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_one_year");
    group.sample_size(10).sampling_mode(SamplingMode::Flat);
    for n in [100, 1000, 4000] {
        let cfg = config(n, 1.0);
        for (name, execution) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| run_with(black_box(cfg), execution).unwrap())
            });
        }
    }
    group.finish();
}

/// Lifetime-utility tails, the other per-agent parallel section.
fn bench_finish(c: &mut Criterion) {
    let mut group = c.benchmark_group("finish");
    group.sample_size(10);
    let cfg = config(1000, 0.25);
    for (name, execution) in MODES {
        group.bench_function(name, |b| {
            b.iter_batched(
                || {
                    let mut pop = Population::init_with(&cfg, execution).unwrap();
                    pop.run_to_end().unwrap();
                    pop
                },
                |pop| pop.finish().unwrap(),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_run, bench_finish);
criterion_main!(benches);
