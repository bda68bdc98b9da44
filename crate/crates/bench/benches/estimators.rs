use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use extremal_core::bvpp::{fit_pp, DependenceFamily, FamilyTag};
use extremal_core::cmev::fit_ht;
use extremal_core::gpd::fit_excesses;
use extremal_core::simulate::{sim_bvevd, sim_gauss_copula_panel, sim_gpd, sim_spliced, CopulaMargin};
use extremal_core::threshold_mix::{kde_density, suggest_threshold};

fn gpd(c: &mut Criterion) {
    let y = sim_gpd(1.0, 0.2, 5000, 1);
    c.bench_function("gpd fit, 5000 excesses", |b| b.iter(|| fit_excesses(black_box(&y), 5, 1).unwrap()));
}

fn spectral_density(c: &mut Criterion) {
    let mut g = c.benchmark_group("ln_h over 99 angles");
    for f in [
        DependenceFamily::logistic(0.5).unwrap(),
        DependenceFamily::husler_reiss(1.3).unwrap(),
        DependenceFamily::new(FamilyTag::Bilogistic, &[0.4, 0.7]).unwrap(),
        DependenceFamily::new(FamilyTag::ColesTawn, &[0.8, 2.0]).unwrap(),
    ] {
        g.bench_function(f.tag.name(), |b| b.iter(|| (1..100).map(|k| f.ln_h(black_box(k as f64 / 100.0)).unwrap()).sum::<f64>()));
    }
    g.finish();
}

fn point_process(c: &mut Criterion) {
    let mut g = c.benchmark_group("point-process fit, n = 1e4");
    g.sample_size(10);
    for f in [DependenceFamily::logistic(0.5).unwrap(), DependenceFamily::new(FamilyTag::Bilogistic, &[0.4, 0.7]).unwrap()] {
        let (x, y): (Vec<f64>, Vec<f64>) = sim_bvevd(&f, 10_000, 2).unwrap().into_iter().unzip();
        g.bench_function(f.tag.name(), |b| b.iter(|| fit_pp(black_box(&x), &y, f.tag, 0.7).unwrap()));
    }
    g.finish();
}

fn conditional_extremes(c: &mut Criterion) {
    let corr = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
    let panel = sim_gauss_copula_panel(&["X", "Y"], &corr, 50_000, 3, CopulaMargin::Laplace).unwrap();
    let mut g = c.benchmark_group("conditional extremes");
    g.sample_size(10);
    g.bench_function("fit, n = 5e4", |b| b.iter(|| fit_ht(black_box(&panel), "X", 0.7).unwrap()));
    g.finish();
}

fn mixture(c: &mut Criterion) {
    let x = sim_spliced(5000, 0.9, 1.0, 0.3, 4);
    c.bench_function("kde density, 5000 centres", |b| b.iter(|| kde_density(black_box(&x), 0.2, 0.5)));
    let mut g = c.benchmark_group("mixture threshold");
    g.sample_size(10);
    g.bench_function("suggest, n = 5000", |b| b.iter(|| suggest_threshold(black_box(&x)).unwrap()));
    g.finish();
}

criterion_group!(benches, gpd, spectral_density, point_process, conditional_extremes, mixture);
criterion_main!(benches);
