use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hlorentz_bench::sawtooth;
use hlorentz_core::cz::{apply_cz, HilbertKernel};
use hlorentz_core::decomposition::default_psi;
use hlorentz_core::interpolation::{CoupleSpec, KFunctional};
use hlorentz_core::maximal::{nontangential_maximal, Mollifier};
use hlorentz_core::{decompose, lorentz_quasinorm, Exponent, LorentzIndex};

fn lorentz(c: &mut Criterion) {
    let mut g = c.benchmark_group("lorentz_quasinorm");
    let idx = LorentzIndex::new(0.5, Exponent::Finite(2.0)).unwrap();
    for n in [256usize, 4096] {
        let f = sawtooth(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| lorentz_quasinorm(f, idx)));
    }
    g.finish();
}

fn maximal(c: &mut Criterion) {
    let mut g = c.benchmark_group("nontangential_maximal");
    for n in [256usize, 4096] {
        let f = sawtooth(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| nontangential_maximal(f, &Mollifier::for_p(1.0)))
        });
    }
    g.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("decompose");
    g.sample_size(10);
    for n in [256usize, 2048] {
        let f = sawtooth(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| decompose(f, 1.0, &default_psi(1.0))));
    }
    g.finish();
}

fn kfunctional(c: &mut Criterion) {
    let couple = CoupleSpec::function(Exponent::Finite(1.0), Exponent::Finite(2.0)).unwrap();
    let f = sawtooth(1024);
    c.bench_function("k_functional_1024", |b| b.iter(|| KFunctional::new(&f, &couple).unwrap().at(0.5)));
}

fn singular_integral(c: &mut Criterion) {
    let f = sawtooth(1024);
    c.bench_function("apply_cz_1024", |b| b.iter(|| apply_cz(&f, &HilbertKernel, 0.5 / 1024.0).unwrap()));
}

criterion_group!(benches, lorentz, maximal, decomposition, kfunctional, singular_integral);
criterion_main!(benches);
