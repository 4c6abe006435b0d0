use rand::{Rng, RngCore};

use super::{DistError, Distribution, Support};

/// Law putting mass `1/n` on each of `n` observed values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self, DistError> {
        if values.is_empty() {
            return Err(DistError::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(DistError::NanSample(i));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance; zero for a single value.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.sorted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    /// Smallest value `v` with `cdf(v) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let p = p.clamp(0.0, 1.0);
        let rank = (p * n as f64).ceil() as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    /// Number of values `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// Number of values `< x`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }
}

impl Distribution for EmpiricalDistribution {
    fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.count_lt(x) as f64 / self.len() as f64
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.sorted[rng.random_range(0..self.sorted.len())]
    }

    fn support(&self) -> Support {
        let mut atoms = self.sorted.clone();
        atoms.dedup();
        Support::Atoms(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_quantiles() {
        let e = EmpiricalDistribution::new(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(e.cdf(2.0), 0.75);
        assert_eq!(e.cdf_left(2.0), 0.25);
        assert_eq!(e.cdf(0.5), 0.0);
        assert_eq!(e.quantile(0.0), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.quantile(0.76), 3.0);
        assert_eq!(e.jump_points(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn quantiles_are_ordered() {
        let e = EmpiricalDistribution::new((0..97).map(|i| ((i * 37) % 97) as f64).collect()).unwrap();
        let mut last = f64::NEG_INFINITY;
        for i in 0..=200 {
            let q = e.quantile(i as f64 / 200.0);
            assert!(q >= last);
            assert!(e.cdf(q) >= i as f64 / 200.0);
            last = q;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(EmpiricalDistribution::new(vec![]), Err(DistError::EmptySample));
        assert_eq!(EmpiricalDistribution::new(vec![0.0, f64::NAN]), Err(DistError::NanSample(1)));
    }
}
