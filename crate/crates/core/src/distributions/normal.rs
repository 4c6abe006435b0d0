use rand::RngCore;
use rand_distr::{Distribution as _, StandardNormal};

use super::{check_param, DistError, Distribution, Support};
use crate::special::std_normal_cdf;

/// Gaussian law; a zero standard deviation is the point mass at the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self, DistError> {
        check_param("mean", "finite", mean, mean.is_finite())?;
        check_param("standard deviation", "finite and >= 0", sd, sd.is_finite() && sd >= 0.0)?;
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }

    pub fn with_variance(mean: f64, variance: f64) -> Result<Self, DistError> {
        check_param("variance", "finite and >= 0", variance, variance.is_finite() && variance >= 0.0)?;
        Self::new(mean, variance.sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

impl Distribution for Normal {
    fn cdf(&self, x: f64) -> f64 {
        if self.sd == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        std_normal_cdf((x - self.mean) / self.sd)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if self.sd == 0.0 {
            return if x > self.mean { 1.0 } else { 0.0 };
        }
        self.cdf(x)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }

    fn support(&self) -> Support {
        if self.sd == 0.0 {
            Support::Atoms(vec![self.mean])
        } else {
            Support::Interval { lower: f64::NEG_INFINITY, upper: f64::INFINITY }
        }
    }
}
