use criterion::{black_box, criterion_group, criterion_main, Criterion};
use muskat_core::besov::besov_norm;
use muskat_core::gamma::{gamma_closed_form, gamma_closed_form_int, gamma_oracle, GammaKernel, QuadratureSpec};
use muskat_core::iterate::{assemble_r_term, family_component, IterateConfig, TimeRule};
use muskat_core::sequences::{build_initial_data, generate_family, initial_data_norm};
use muskat_core::spline::convolve_indicators;
use num_bigint::BigInt;

fn gamma(c: &mut Criterion) {
    let k1 = GammaKernel::new(1).unwrap();
    let k2 = GammaKernel::new(2).unwrap();
    c.bench_function("gamma closed form k=1", |b| b.iter(|| gamma_closed_form(&k1, black_box(&[-1.5, -2.0, 4.25]))));
    c.bench_function("gamma closed form k=2", |b| {
        b.iter(|| gamma_closed_form(&k2, black_box(&[-3.0, 7.5, -3.0, 11.0, -9.0])))
    });
    let big: Vec<BigInt> = [-(1i128 << 90), -(1i128 << 90), (1i128 << 91) + 5].iter().map(|x| BigInt::from(*x)).collect();
    c.bench_function("gamma integer form k=1 at 2^90", |b| b.iter(|| gamma_closed_form_int(1, black_box(&big))));
    c.bench_function("gamma oracle k=1", |b| b.iter(|| gamma_oracle(&k1, black_box(&[-1.5, -2.0, 4.25]))));
}

fn splines(c: &mut Criterion) {
    c.bench_function("bspline n=5 eval", |b| {
        let s = convolve_indicators(&[1.0, -2.0, 0.5, 3.0, 0.25]).unwrap();
        b.iter(|| (0..100).map(|i| s.eval(black_box(-2.0 + 0.1 * i as f64))).sum::<f64>())
    });
}

fn norms(c: &mut Criterion) {
    let f = generate_family(1, 1.0, 4.0, 0.1, 1.0, 5, 8).unwrap();
    c.bench_function("initial data norm N=8 (fast path or engine)", |b| b.iter(|| initial_data_norm(black_box(&f))));
    let p = build_initial_data(&f);
    let params = f.norm_params();
    let q = QuadratureSpec::default();
    c.bench_function("besov engine N=8", |b| b.iter(|| besov_norm(black_box(&p), &params, &q)));
}

fn iterate(c: &mut Criterion) {
    let centers: Vec<BigInt> = [-(1i64 << 20), -(1i64 << 20), (1i64 << 21) + 5].iter().map(|x| BigInt::from(*x)).collect();
    let r = assemble_r_term(&centers, 8).unwrap();
    c.bench_function("R-term assemble k=1", |b| b.iter(|| assemble_r_term(black_box(&centers), 8)));
    c.bench_function("R-term duhamel k=1", |b| b.iter(|| r.duhamel(black_box(0.3), 0.0, 1e-3, TimeRule::Exact)));
    let mut group = c.benchmark_group("f_1 component");
    group.sample_size(10);
    let f = generate_family(1, 1.0, 4.0, 0.1, 1.0, 5, 4).unwrap();
    let t = 2.0 / 2f64.powi(16);
    group.bench_function("N=4", |b| b.iter(|| family_component(black_box(&f), 1, t, &IterateConfig::default())));
    group.finish();
}

criterion_group!(benches, gamma, splines, norms, iterate);
criterion_main!(benches);
