use rand::{Rng, RngCore};

use super::{check_param, DistError, Distribution, Support};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    lower: f64,
    upper: f64,
}

impl Uniform {
    pub fn new(lower: f64, upper: f64) -> Result<Self, DistError> {
        check_param("lower bound", "finite", lower, lower.is_finite())?;
        check_param("upper bound", "finite and > lower bound", upper, upper.is_finite() && upper > lower)?;
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl Distribution for Uniform {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lower) / (self.upper - self.lower)).clamp(0.0, 1.0)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        self.lower + u * (self.upper - self.lower)
    }

    fn support(&self) -> Support {
        Support::Interval { lower: self.lower, upper: self.upper }
    }
}
