use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qbh_bench::annulus_chart;
use qbh_core::eval::Bindings;
use qbh_core::multivec::{schouten, wedge, VectorField};
use qbh_core::poly::Poly;
use qbh_core::zero::{decide_zero, Policy};
use qbh_core::parse_expr;

fn schouten_self_bracket(c: &mut Criterion) {
    let chart = annulus_chart();
    let xh = VectorField::parse(&chart, &["x2", "-x1", "1"]).unwrap();
    let x3 = VectorField::parse(
        &chart,
        &[
            "x1 + atan(x2/x1)*x2",
            "x2 - atan(x2/x1)*x1",
            "atan(x2/x1)",
        ],
    )
    .unwrap();
    let j2 = wedge(&xh.to_multivector(), &x3.to_multivector()).unwrap();
    c.bench_function("schouten_j2_self_bracket", |b| {
        b.iter(|| schouten(black_box(&j2), black_box(&j2)).unwrap())
    });
}

fn polynomial_expansion(c: &mut Criterion) {
    let chart = annulus_chart();
    let e = parse_expr("(x1 + x2 + x3)^8 - (x3 + x2 + x1)^8", &chart).unwrap();
    c.bench_function("poly_normal_form_degree8", |b| {
        b.iter(|| {
            let p = Poly::from_expr(black_box(&e), 3).unwrap();
            assert!(p.is_zero());
        })
    });
}

fn sampled_zero_decision(c: &mut Criterion) {
    let chart = annulus_chart();
    let e = parse_expr("sin(x1)^2 + cos(x1)^2 - 1", &chart).unwrap();
    let policy = Policy::default();
    let bindings = Bindings::empty();
    c.bench_function("decide_zero_pythagorean_200_samples", |b| {
        b.iter(|| decide_zero(black_box(&e), &chart, &policy, &bindings).unwrap())
    });
}

fn parse_and_render(c: &mut Criterion) {
    let chart = annulus_chart();
    let text = "x1 + atan(x2/x1)*x2 - 3/2*x3*(x1^2 + x2^2) + sin(x3)/x1";
    c.bench_function("parse_render_round_trip", |b| {
        b.iter(|| {
            let e = parse_expr(black_box(text), &chart).unwrap();
            black_box(chart.render(&e))
        })
    });
}

criterion_group!(
    kernels,
    schouten_self_bracket,
    polynomial_expansion,
    sampled_zero_decision,
    parse_and_render
);
criterion_main!(kernels);
