use rand::{Rng, RngCore};

use super::{check_param, DistError, Distribution, Support};

/// Law on `[1, c]` with density `1 / (t ln c)`, so `F(t) = ln t / ln c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogarithmicLaw {
    c: f64,
    ln_c: f64,
}

impl LogarithmicLaw {
    pub fn new(c: f64) -> Result<Self, DistError> {
        check_param("c", "finite and > 1", c, c.is_finite() && c > 1.0)?;
        Ok(Self { c, ln_c: c.ln() })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn density(&self, t: f64) -> f64 {
        if (1.0..=self.c).contains(&t) {
            1.0 / (t * self.ln_c)
        } else {
            0.0
        }
    }
}

impl Distribution for LogarithmicLaw {
    fn cdf(&self, t: f64) -> f64 {
        if t < 1.0 {
            0.0
        } else if t >= self.c {
            1.0
        } else {
            t.ln() / self.ln_c
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        (u * self.ln_c).exp().min(self.c)
    }

    fn support(&self) -> Support {
        Support::Interval { lower: 1.0, upper: self.c }
    }
}

/// `ln t / ln c` clamped to `[0, 1]`.
pub fn log_law_cdf(c: f64, t: f64) -> Result<f64, DistError> {
    Ok(LogarithmicLaw::new(c)?.cdf(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    #[test]
    fn cdf_examples() {
        assert!((log_law_cdf(2.0, SQRT_2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(log_law_cdf(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(log_law_cdf(E, E).unwrap(), 1.0);
        assert_eq!(log_law_cdf(2.0, 0.5).unwrap(), 0.0);
        assert_eq!(log_law_cdf(2.0, 3.0).unwrap(), 1.0);
        assert!(log_law_cdf(1.0, 1.0).is_err());
        assert!(log_law_cdf(0.5, 1.0).is_err());
    }
}
