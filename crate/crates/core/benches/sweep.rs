use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use thimbleq::oracle::{ode_transition_probability, HorizonPolicy, DEFAULT_TOL};
use thimbleq::parallel::{par_map, Execution};
use thimbleq::schwinger::{model_from_field, Preset};
use thimbleq::thimble::{amplitude_gaussian, analyze_model, ThimbleConfig};
use thimbleq::ModelSpec;

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn lambda_grid() -> Vec<ModelSpec> {
    (1..=16)
        .map(|k| ModelSpec::ModifiedLz {
            lambda: 0.5 + 0.5 * k as f64,
            tau: 1.0,
            big_t: 2.0,
        })
        .collect()
}

fn oracle_sweep(c: &mut Criterion) {
    let grid = lambda_grid();
    let mut g = c.benchmark_group("ode-sweep");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                par_map(&grid, exec, |m| {
                    ode_transition_probability(m, DEFAULT_TOL, HorizonPolicy::default())
                        .map(|r| r.probability)
                        .unwrap_or(f64::NAN)
                })
            })
        });
    }
    g.finish();
}

fn thimble_sweep(c: &mut Criterion) {
    let grid = lambda_grid();
    let mut g = c.benchmark_group("thimble-sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ThimbleConfig {
            execution: exec,
            ..ThimbleConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| {
                par_map(&grid, exec, |m| {
                    let st = analyze_model(m, *cfg).unwrap();
                    let s: Vec<_> = st.saddles.iter().map(|s| s.saddle).collect();
                    amplitude_gaussian(&s).unwrap().probability
                })
            })
        });
    }
    g.finish();
}

fn saddle_search(c: &mut Criterion) {
    let m = model_from_field(&Preset::Fig8.profile(6.0));
    let mut g = c.benchmark_group("assisted-analysis");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ThimbleConfig {
            execution: exec,
            ..ThimbleConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| analyze_model(black_box(&m), *cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle_sweep, thimble_sweep, saddle_search);
criterion_main!(benches);
