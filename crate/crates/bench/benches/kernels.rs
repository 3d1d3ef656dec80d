use criterion::{black_box, criterion_group, criterion_main, Criterion};
use marklab::algebra::FreeWord;
use marklab::marked::{agreement_radius, Ball, MarkedGroup};
use marklab::trees::{fg_key, fg_normal_form, DEFAULT_WORD_PROBLEM_BUDGET};
use marklab::walklab::{exact_convolution, StepDistribution};
use marklab::wreath::GammaGenerators;

fn word_problem(c: &mut Criterion) {
    let w = fg_normal_form(&FreeWord::parse("abAbaBabbAbaBBabaaBab", 2).unwrap());
    c.bench_function("fg_key/len21", |b| b.iter(|| fg_key(black_box(&w), DEFAULT_WORD_PROBLEM_BUDGET).unwrap()));
}

fn wreath(c: &mut Criterion) {
    let gens = GammaGenerators::new(6);
    let w = FreeWord::parse("abAbaBabbAbaBBabaaBabAbab", 2).unwrap();
    c.bench_function("gamma6/eval_len25", |b| b.iter(|| gens.eval(black_box(&w))));
}

fn balls(c: &mut Criterion) {
    let g = MarkedGroup::fg();
    c.bench_function("ball/G_r7", |b| b.iter(|| Ball::build(&g, 7, usize::MAX).unwrap().len()));
    let gamma = MarkedGroup::gamma(5).unwrap();
    c.bench_function("agreement/gamma5_vs_G", |b| b.iter(|| agreement_radius(&gamma, &g, 16).unwrap()));
}

fn convolution(c: &mut Criterion) {
    let g = MarkedGroup::parse("diag(abelian:2,gamma:3)").unwrap();
    let mu = StepDistribution::srw(2);
    c.bench_function("convolution/Z2xGamma3_t6", |b| {
        b.iter(|| exact_convolution::<f64>(&g, &mu, 6, usize::MAX).unwrap().len())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = word_problem, wreath, balls, convolution
}
criterion_main!(kernels);
