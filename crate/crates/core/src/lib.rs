//! Monte Carlo laboratory for randomly indexed families and their mixture
//! limits `∫ μ_t dρ(t)`.

pub mod distributions;
pub mod engine;
pub mod experiments;
pub mod index;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use distributions::{
    mixture_cdf, mixture_sample, std_poisson_cdf, DistError, Distribution, EmpiricalDistribution, LimitFamily,
    MixingLaw, MixtureLaw, Normal, StandardizedPoisson,
};
pub use experiments::ExperimentError;
pub use engine::{run_collect, run_replicated, try_run_collect, EngineError, ReplicationPlan, SeedSpec};
pub use index::{classify_regime, phi_alloc, phi_triangular, ControlError, ControlMap, LimitTag, MultiIndex, SamplingSequence};
pub use stats::{ks_one_sample, ks_two_sample, wasserstein1, GofReport};
