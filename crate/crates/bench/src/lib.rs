//! Fixtures shared by the criterion benchmarks of the core crate.

use std::sync::Arc;

use transferlab::distributions::{GaussianScaleFamily, UniformBox};
use transferlab::{Distribution, EmpiricalDistribution, MixingLaw, MixtureLaw, Normal, SeedSpec};

/// `n` standard normal draws from a fixed stream.
pub fn normal_sample(n: usize, seed: u64) -> EmpiricalDistribution {
    let mut rng = SeedSpec::new(seed, 0).rng();
    let z = Normal::standard();
    EmpiricalDistribution::new((0..n).map(|_| z.sample(&mut rng)).collect()).expect("non-empty sample")
}

/// `∫ N(0, t) dt/2` over `[0, 2]`, evaluated by quadrature.
pub fn uniform_scale_mixture() -> MixtureLaw {
    let mixing = MixingLaw::continuous(Arc::new(UniformBox::interval(0.0, 2.0).expect("valid box"))).expect("unit mass");
    MixtureLaw::new(Arc::new(GaussianScaleFamily::scalar()), mixing).expect("matching dimensions")
}

/// Two-point Gaussian scale mixture, evaluated in closed form.
pub fn discrete_scale_mixture() -> MixtureLaw {
    let mixing = MixingLaw::discrete(vec![(vec![0.5], 0.4), (vec![2.0], 0.6)]).expect("weights sum to one");
    MixtureLaw::new(Arc::new(GaussianScaleFamily::scalar()), mixing).expect("matching dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_usable() {
        assert_eq!(normal_sample(100, 1).len(), 100);
        assert!((uniform_scale_mixture().cdf(0.0) - 0.5).abs() < 1e-9);
        assert!((discrete_scale_mixture().cdf(0.0) - 0.5).abs() < 1e-15);
    }
}
