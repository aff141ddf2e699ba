use criterion::{black_box, criterion_group, criterion_main, Criterion};

use theta_hyper::identities::{
    sample_ft, sample_multi1, sample_nome, verify_ft_sum, verify_multi1, DEFAULT_BAND,
};
use theta_hyper::sampling::Sampler;
use theta_hyper::theta::{theta, theta1, Theta1Method};
use theta_hyper::{ModularPair, C64};

fn theta_functions(c: &mut Criterion) {
    let z = C64::new(0.7, 0.3);
    let p = C64::new(0.2, 0.1);
    c.bench_function("theta", |b| b.iter(|| theta(black_box(z), black_box(p))));

    let pair = ModularPair::new(C64::new(0.1, 0.3), C64::new(0.2, 0.8)).unwrap();
    let u = C64::new(0.4, 0.1);
    c.bench_function("theta1 series", |b| {
        b.iter(|| theta1(black_box(u), &pair, Theta1Method::Series))
    });
    c.bench_function("theta1 product", |b| {
        b.iter(|| theta1(black_box(u), &pair, Theta1Method::Product))
    });
}

fn identities(c: &mut Criterion) {
    let mut rng = Sampler::new(1);
    let nome = sample_nome(&mut rng).unwrap();
    let ft = sample_ft(&mut rng, 6, &nome, DEFAULT_BAND).unwrap();
    c.bench_function("ft sum N=6", |b| {
        b.iter(|| verify_ft_sum(black_box(&ft), 1e-8))
    });

    for n in 1..=3 {
        let params = sample_multi1(&mut rng, n, 3, &nome, DEFAULT_BAND).unwrap();
        c.bench_function(&format!("multi1 rank {n} N=3"), |b| {
            b.iter(|| verify_multi1(black_box(&params), 1e-7))
        });
    }
}

criterion_group!(benches, theta_functions, identities);
criterion_main!(benches);
