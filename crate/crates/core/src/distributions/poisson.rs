use rand::{Rng, RngCore};

use super::{check_param, DistError, Distribution, Support};
use crate::special::ln_factorial;

/// Upper tail mass beyond the last listed atom.
pub const POISSON_TAIL_MASS: f64 = 1e-14;

// pmf terms below this fraction of the modal mass are not tabulated
const TABLE_CUTOFF: f64 = 1e-22;

/// Law of `(P - lambda) / sqrt(lambda)` for `P ~ Poisson(lambda)`.
///
/// The pmf is tabulated once around the mode by the two-sided recurrence
/// `p(k+1) = p(k) * lambda / (k+1)`, so CDF queries are a lookup and
/// sampling is exact inversion against the same table.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedPoisson {
    lambda: f64,
    sqrt_lambda: f64,
    /// First tabulated count.
    first: u64,
    /// `cumulative[i] = P(P <= first + i)`.
    cumulative: Vec<f64>,
    /// Last count before the upper tail drops under [`POISSON_TAIL_MASS`].
    last_listed: u64,
}

impl StandardizedPoisson {
    pub fn new(lambda: f64) -> Result<Self, DistError> {
        check_param("lambda", "finite and > 0", lambda, lambda.is_finite() && lambda > 0.0)?;
        let mode = lambda.floor() as u64;
        let ln_mode = mode as f64 * lambda.ln() - lambda - ln_factorial(mode);
        let p_mode = ln_mode.exp();

        let mut below = Vec::new();
        let mut p = p_mode;
        let mut k = mode;
        while k > 0 {
            p *= k as f64 / lambda;
            k -= 1;
            if p < TABLE_CUTOFF * p_mode {
                break;
            }
            below.push(p);
        }
        let first = mode - below.len() as u64;
        let mut pmf: Vec<f64> = below.into_iter().rev().collect();
        pmf.push(p_mode);
        let mut p = p_mode;
        let mut k = mode;
        loop {
            k += 1;
            p *= lambda / k as f64;
            if p < TABLE_CUTOFF * p_mode {
                break;
            }
            pmf.push(p);
        }

        let mut cumulative = Vec::with_capacity(pmf.len());
        let mut acc = 0.0;
        for q in &pmf {
            acc += q;
            cumulative.push(acc.min(1.0));
        }
        // upper tail summed from the far end for accuracy
        let mut tail = 0.0;
        let mut last_listed = first + pmf.len() as u64 - 1;
        for (i, q) in pmf.iter().enumerate().rev() {
            tail += q;
            if tail >= POISSON_TAIL_MASS {
                last_listed = first + i as u64;
                break;
            }
        }
        Ok(Self { lambda, sqrt_lambda: lambda.sqrt(), first, cumulative, last_listed })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Standardized value of the count `k`.
    pub fn atom(&self, k: u64) -> f64 {
        (k as f64 - self.lambda) / self.sqrt_lambda
    }

    /// `P(P = k)` from the table.
    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.first {
            return 0.0;
        }
        let i = (k - self.first) as usize;
        match i {
            0 => self.cumulative.first().copied().unwrap_or(0.0),
            _ if i < self.cumulative.len() => self.cumulative[i] - self.cumulative[i - 1],
            _ => 0.0,
        }
    }

    /// Largest count whose atom is `<= x` (or `< x` when `strict`).
    fn count_at(&self, x: f64, strict: bool) -> Option<u64> {
        let guess = self.lambda + x * self.sqrt_lambda;
        if guess < -1.0 {
            return None;
        }
        if guess > 1e18 {
            return Some(u64::MAX);
        }
        let ok = |k: u64| if strict { self.atom(k) < x } else { self.atom(k) <= x };
        let mut k = guess.max(0.0).floor() as u64;
        while k > 0 && !ok(k) {
            k -= 1;
        }
        if !ok(k) {
            return None;
        }
        while ok(k + 1) {
            k += 1;
        }
        Some(k)
    }

    fn cumulative_at(&self, k: Option<u64>) -> f64 {
        match k {
            None => 0.0,
            Some(k) if k < self.first => 0.0,
            Some(k) => {
                let i = (k - self.first) as usize;
                if i >= self.cumulative.len() {
                    1.0
                } else {
                    self.cumulative[i]
                }
            }
        }
    }

    /// Nearest atom to `x`.
    pub fn snap(&self, x: f64) -> f64 {
        let k = (self.lambda + x * self.sqrt_lambda).round().max(0.0);
        (k - self.lambda) / self.sqrt_lambda
    }
}

impl Distribution for StandardizedPoisson {
    fn cdf(&self, x: f64) -> f64 {
        self.cumulative_at(self.count_at(x, false))
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.cumulative_at(self.count_at(x, true))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u);
        let k = self.first + i.min(self.cumulative.len() - 1) as u64;
        self.atom(k)
    }

    fn support(&self) -> Support {
        Support::Lattice {
            origin: -self.sqrt_lambda,
            spacing: 1.0 / self.sqrt_lambda,
            first: self.first as i64,
            last: self.last_listed as i64,
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        (self.first..=self.last_listed).map(|k| self.atom(k)).collect()
    }
}

/// CDF of the standardized Poisson law at `x`.
pub fn std_poisson_cdf(lambda: f64, x: f64) -> Result<f64, DistError> {
    Ok(StandardizedPoisson::new(lambda)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf_oracle(lambda: f64, k: u64) -> f64 {
        // direct product form, independent of the table recurrence
        let mut p = (-lambda).exp();
        for j in 1..=k {
            p *= lambda / j as f64;
        }
        p
    }

    #[test]
    fn cdf_examples() {
        let v = std_poisson_cdf(1.0, -1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        let v = std_poisson_cdf(4.0, 0.0).unwrap();
        let oracle: f64 = (0..=4).map(|k| pmf_oracle(4.0, k)).sum();
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - 0.628_836_935_179_468_7).abs() < 1e-12);
        assert_eq!(std_poisson_cdf(3.0, 1e6).unwrap(), 1.0);
        assert_eq!(std_poisson_cdf(3.0, -1e6).unwrap(), 0.0);
        assert!(std_poisson_cdf(0.0, 0.0).is_err());
        assert!(std_poisson_cdf(-2.0, 0.0).is_err());
    }

    #[test]
    fn left_limits_at_atoms() {
        let d = StandardizedPoisson::new(1.0).unwrap();
        assert_eq!(d.cdf_left(-1.0), 0.0);
        assert!((d.cdf(-1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((d.cdf_left(0.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn standardized_moments_from_pmf() {
        for lambda in [0.05, 0.5, 1.0, 2.0, 7.3, 50.0, 1000.0] {
            let d = StandardizedPoisson::new(lambda).unwrap();
            let (mut m1, mut m2) = (0.0, 0.0);
            for k in d.first..(d.first + d.cumulative.len() as u64) {
                let p = d.pmf(k);
                let x = d.atom(k);
                m1 += p * x;
                m2 += p * x * x;
            }
            assert!(m1.abs() < 1e-10, "lambda {lambda}: mean {m1}");
            assert!((m2 - 1.0).abs() < 1e-10, "lambda {lambda}: second moment {m2}");
        }
    }

    #[test]
    fn table_agrees_with_direct_pmf() {
        let d = StandardizedPoisson::new(3.5).unwrap();
        for k in 0..25 {
            assert!((d.pmf(k) - pmf_oracle(3.5, k)).abs() < 1e-15);
        }
    }

    #[test]
    fn snapping_picks_nearest_atom() {
        let d = StandardizedPoisson::new(1.0).unwrap();
        assert_eq!(d.snap(-0.98), -1.0);
        assert_eq!(d.snap(0.4), 0.0);
        assert_eq!(d.snap(-5.0), -1.0);
    }
}
