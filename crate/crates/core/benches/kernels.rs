//! Hot kernels on a single-thread pool versus the default pool.
//!
//! Without the `parallel` feature only the sequential variants run.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nlcsim::diagnostics::criterion_quantities;
use nlcsim::initial_data::{equatorial_director, random_divfree_band, theta_field, ThetaProfile};
use nlcsim::littlewood_paley::build_cutoff_bank;
use nlcsim::solver::{SolverConfig, State, Stepper};
use nlcsim::spectral::{leray_project, Grid};

fn state(dim: usize, n: usize) -> State {
    let g = Grid::new(dim, n).unwrap();
    let band = Some((n / 3) as i32);
    let u = random_divfree_band(&g, band, -3.0, 1, 0.5).unwrap();
    let theta = theta_field(
        &g,
        &ThetaProfile::Random {
            amplitude: 0.5,
            slope: -3.0,
            seed: 2,
            band,
        },
    )
    .unwrap();
    State::new(0.0, u, equatorial_director(&g, &theta).unwrap()).unwrap()
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn on_each_pool<F: Fn() + Sync>(c: &mut Criterion, group: &str, param: &str, f: F) {
    let mut g = c.benchmark_group(group);
    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new(name, param), |b| {
            pool.install(|| b.iter(&f));
        });
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function(BenchmarkId::new("sequential", param), |b| b.iter(&f));
    g.finish();
}

fn step(c: &mut Criterion) {
    for (dim, n) in [(2, 64), (2, 128), (3, 32)] {
        let s = state(dim, n);
        let stepper = Stepper::new(s.grid(), &SolverConfig::default()).unwrap();
        on_each_pool(c, "step", &format!("{dim}d_n{n}"), || {
            std::hint::black_box(stepper.advance(&s, 1).unwrap());
        });
    }
}

fn leray(c: &mut Criterion) {
    for (dim, n) in [(2, 128), (3, 32)] {
        let s = state(dim, n);
        on_each_pool(c, "leray", &format!("{dim}d_n{n}"), || {
            std::hint::black_box(leray_project(&s.u).unwrap());
        });
    }
}

fn besov(c: &mut Criterion) {
    for (dim, n) in [(2, 128), (3, 32)] {
        let s = state(dim, n);
        let bank = build_cutoff_bank(s.grid()).unwrap();
        on_each_pool(c, "criterion_quantities", &format!("{dim}d_n{n}"), || {
            std::hint::black_box(criterion_quantities(&bank, &s).unwrap());
        });
    }
}

criterion_group!(benches, step, leray, besov);
criterion_main!(benches);
