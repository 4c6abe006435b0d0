//! Real-valued probability laws that can be sampled and evaluated.
//!
//! Every law exposes a right-continuous CDF, its left limits, and the atoms
//! where the two differ. Goodness-of-fit code relies on that triple to
//! compute exact supremum distances against lattice and mixed laws.

mod empirical;
mod logarithmic;
mod mixture;
mod normal;
mod poisson;
mod uniform;

use rand::RngCore;
use thiserror::Error;

pub use empirical::EmpiricalDistribution;
pub use logarithmic::{log_law_cdf, LogarithmicLaw};
pub use mixture::{
    mixture_cdf, mixture_sample, ConstantFamily, ContinuousMixing, GaussianScaleFamily, LimitFamily,
    LogarithmicMixing, MixingLaw, MixtureLaw, RegimeFamily, StdPoissonFamily, UniformBox,
};
pub use normal::Normal;
pub use poisson::{std_poisson_cdf, StandardizedPoisson, POISSON_TAIL_MASS};
pub use uniform::Uniform;

use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("{name} must be {constraint}, got {value}")]
    Parameter { name: &'static str, constraint: &'static str, value: f64 },
    #[error("empirical distribution needs at least one value")]
    EmptySample,
    #[error("sample value at position {0} is NaN")]
    NanSample(usize),
    #[error("mixing weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("mixing law has dimension {mixing}, family expects {family}")]
    Dimension { family: usize, mixing: usize },
    #[error("parameter {point:?} is outside the family's index set: {reason}")]
    OutsideFamily { point: Vec<f64>, reason: String },
    #[error("mixing density integrates to {0}, expected 1")]
    DensityMass(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub(crate) fn check_param(name: &'static str, constraint: &'static str, value: f64, ok: bool) -> Result<(), DistError> {
    if ok {
        Ok(())
    } else {
        Err(DistError::Parameter { name, constraint, value })
    }
}

/// Where a law puts its mass.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Continuous on `[lower, upper]`; bounds may be infinite.
    Interval { lower: f64, upper: f64 },
    /// Atoms at `origin + spacing * k` for `k` in `first..=last`.
    Lattice { origin: f64, spacing: f64, first: i64, last: i64 },
    /// Finitely many atoms, sorted.
    Atoms(Vec<f64>),
    /// Continuous part plus atoms; the interval is the convex hull.
    Mixed { lower: f64, upper: f64 },
}

impl Support {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Support::Interval { lower, upper } | Support::Mixed { lower, upper } => (*lower, *upper),
            Support::Lattice { origin, spacing, first, last } => {
                (origin + spacing * *first as f64, origin + spacing * *last as f64)
            }
            Support::Atoms(a) => (a[0], a[a.len() - 1]),
        }
    }
}

pub trait Distribution: Send + Sync + std::fmt::Debug {
    /// `P(X <= x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `P(X < x)`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn support(&self) -> Support;

    /// Atoms of the law, sorted; empty for continuous laws.
    fn jump_points(&self) -> Vec<f64> {
        match self.support() {
            Support::Lattice { origin, spacing, first, last } => {
                (first..=last).map(|k| origin + spacing * k as f64).collect()
            }
            Support::Atoms(a) => a,
            _ => Vec::new(),
        }
    }
}

impl<D: Distribution + ?Sized> Distribution for Box<D> {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        (**self).cdf_left(x)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        (**self).sample(rng)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn jump_points(&self) -> Vec<f64> {
        (**self).jump_points()
    }
}

impl<D: Distribution + ?Sized> Distribution for std::sync::Arc<D> {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        (**self).cdf_left(x)
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        (**self).sample(rng)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn jump_points(&self) -> Vec<f64> {
        (**self).jump_points()
    }
}
