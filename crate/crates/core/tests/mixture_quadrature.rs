//! Mixture CDFs over continuous mixing laws against reference values.
//!
//! The frozen constants were computed offline with 30-digit adaptive
//! Gauss-Legendre quadrature. The two-dimensional references use the fact
//! that a product of two independent U(0,1) variables has density `-ln w`
//! on (0,1), which turns the box integral into a one-dimensional one.

use std::sync::Arc;

use transferlab::distributions::{GaussianScaleFamily, LogarithmicMixing, UniformBox};
use transferlab::{mixture_cdf, Distribution, MixingLaw, MixtureLaw, Normal};

fn scalar_mixture(mixing: MixingLaw) -> MixtureLaw {
    MixtureLaw::new(Arc::new(GaussianScaleFamily::scalar()), mixing).unwrap()
}

fn uniform(a: f64, b: f64) -> MixingLaw {
    MixingLaw::continuous(Arc::new(UniformBox::interval(a, b).unwrap())).unwrap()
}

/// Fixed composite Simpson rule with `panels` panels.
fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn uniform_one_two_at_one() {
    let m = scalar_mixture(uniform(1.0, 2.0));
    let v = mixture_cdf(&m, 1.0).unwrap();
    assert!((v - 0.795_480_889_531_063).abs() < 1e-8, "{v}");
    let z = Normal::standard();
    let oracle = composite_simpson(|t| z.cdf(1.0 / t.sqrt()), 1.0, 2.0, 100_000);
    assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
}

#[test]
fn uniform_zero_two_has_singular_endpoint() {
    let m = scalar_mixture(uniform(0.0, 2.0));
    for (x, reference) in [(0.5, 0.725_435_360_641_647_6), (-0.3, 0.351_976_545_430_390_8)] {
        let v = mixture_cdf(&m, x).unwrap();
        assert!((v - reference).abs() < 1e-8, "x = {x}: {v} vs {reference}");
    }
    assert!((mixture_cdf(&m, 0.0).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn logarithmic_mixing() {
    let m = scalar_mixture(MixingLaw::continuous(Arc::new(LogarithmicMixing::new(2.0).unwrap())).unwrap());
    let v = mixture_cdf(&m, 0.7).unwrap();
    assert!((v - 0.722_586_616_294_144_7).abs() < 1e-8, "{v}");
}

#[test]
fn two_dimensional_box() {
    let family = GaussianScaleFamily::new(2, 0.25).unwrap();
    let mixing =
        MixingLaw::continuous(Arc::new(UniformBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap())).unwrap();
    let m = MixtureLaw::new(Arc::new(family), mixing).unwrap();
    for (x, reference) in [
        (0.001, 0.501_587_996_281_788),
        (0.01, 0.515_410_426_378_654_6),
        (0.5, 0.875_284_986_956_668_6),
        (-0.3, 0.214_630_718_829_837_47),
    ] {
        let v = mixture_cdf(&m, x).unwrap();
        assert!((v - reference).abs() < 1e-8, "x = {x}: {v} vs {reference}");
    }
}

#[test]
fn continuous_mixture_cdf_is_monotone_and_symmetric() {
    let m = scalar_mixture(uniform(0.0, 2.0));
    let mut last = 0.0;
    for i in -60..=60 {
        let x = i as f64 * 0.1;
        let v = m.cdf(x);
        assert!(v >= last - 1e-12);
        assert!((v + m.cdf(-x) - 1.0).abs() < 1e-8);
        last = v;
    }
}
