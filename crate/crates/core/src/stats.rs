//! Distances between empirical and target laws, and the accept/reject rules
//! built on them.

use std::fmt;

use crate::distributions::{Distribution, EmpiricalDistribution, Support};

/// Outcome of a goodness-of-fit comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    pub statistic: &'static str,
    pub value: f64,
    pub sizes: Vec<usize>,
    pub critical: f64,
    pub alpha: f64,
    pub pass: bool,
}

impl GofReport {
    fn new(statistic: &'static str, value: f64, sizes: Vec<usize>, critical: f64, alpha: f64) -> Self {
        Self { statistic, value, sizes, critical, alpha, pass: value < critical }
    }
}

impl fmt::Display for GofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {:.6} (critical {:.6} at alpha {}, n = {:?}): {}",
            self.statistic,
            self.value,
            self.critical,
            self.alpha,
            self.sizes,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Asymptotic Kolmogorov coefficient `c(alpha)`; tabulated at 0.01 and 0.05,
/// `sqrt(-ln(alpha/2)/2)` elsewhere.
pub fn critical_coefficient(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1), got {alpha}");
    if alpha == 0.01 {
        1.628
    } else if alpha == 0.05 {
        1.358
    } else {
        (-(alpha / 2.0).ln() / 2.0).sqrt()
    }
}

/// `sup_x |F_n(x) - F(x)|`, exact for continuous, lattice and mixed targets.
///
/// `F_n` is constant between consecutive sample values and `F` is monotone,
/// so on each gap the supremum is reached at an end: `F` at the left sample
/// value or `F(x-)` at the right one. Only the sample values are visited,
/// from both sides, which also covers targets with too many atoms to list.
pub fn ks_distance(emp: &EmpiricalDistribution, target: &dyn Distribution) -> f64 {
    let values = emp.values();
    let n = values.len() as f64;
    let continuous = matches!(target.support(), Support::Interval { .. });
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < values.len() {
        let x = values[i];
        let mut j = i;
        while j < values.len() && values[j] == x {
            j += 1;
        }
        let right_target = target.cdf(x);
        let left_target = if continuous { right_target } else { target.cdf_left(x) };
        d = d.max((i as f64 / n - left_target).abs()).max((j as f64 / n - right_target).abs());
        i = j;
    }
    d.min(1.0)
}

pub fn ks_one_sample(emp: &EmpiricalDistribution, target: &dyn Distribution, alpha: f64) -> GofReport {
    let n = emp.len();
    let critical = critical_coefficient(alpha) / (n as f64).sqrt();
    GofReport::new("ks_one_sample", ks_distance(emp, target), vec![n], critical, alpha)
}

/// `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (m, n) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution, alpha: f64) -> GofReport {
    let (m, n) = (a.len() as f64, b.len() as f64);
    let critical = critical_coefficient(alpha) * ((m + n) / (m * n)).sqrt();
    GofReport::new("ks_two_sample", ks_two_sample_distance(a, b), vec![a.len(), b.len()], critical, alpha)
}

/// `∫ |F_a - F_b| dx` over the merged grid of both samples.
pub fn wasserstein1(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (m, n) = (xa.len() as f64, xb.len() as f64);
    let mut grid: Vec<f64> = xa.iter().chain(xb).copied().collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    for w in grid.windows(2) {
        while i < xa.len() && xa[i] <= w[0] {
            i += 1;
        }
        while j < xb.len() && xb[j] <= w[0] {
            j += 1;
        }
        total += (i as f64 / m - j as f64 / n).abs() * (w[1] - w[0]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{Normal, StandardizedPoisson};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_sample(mean: f64, sd: f64, n: usize, seed: u64) -> EmpiricalDistribution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(mean, sd).unwrap();
        EmpiricalDistribution::new((0..n).map(|_| d.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_coefficient(0.01), 1.628);
        assert_eq!(critical_coefficient(0.05), 1.358);
        assert!((critical_coefficient(0.1) - 1.2239).abs() < 1e-4);
    }

    #[test]
    fn single_point_against_standard_normal() {
        let e = EmpiricalDistribution::new(vec![0.0]).unwrap();
        assert!((ks_distance(&e, &Normal::standard()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn null_and_shifted_one_sample() {
        let e = normal_sample(0.0, 1.0, 10_000, 3);
        assert!(ks_one_sample(&e, &Normal::standard(), 0.01).pass);
        let shifted = ks_one_sample(&e, &Normal::new(1.0, 1.0).unwrap(), 0.01);
        assert!(!shifted.pass);
        assert!((shifted.value - 0.3829).abs() < 0.02, "{}", shifted.value);
    }

    #[test]
    fn invariant_under_increasing_maps() {
        #[derive(Debug)]
        struct Cubed(Normal);
        impl Distribution for Cubed {
            fn cdf(&self, x: f64) -> f64 {
                self.0.cdf(x.cbrt())
            }
            fn sample(&self, rng: &mut dyn rand::RngCore) -> f64 {
                self.0.sample(rng).powi(3)
            }
            fn support(&self) -> Support {
                self.0.support()
            }
        }
        let e = normal_sample(0.2, 1.0, 2_000, 5);
        let cubed = EmpiricalDistribution::new(e.values().iter().map(|v| v.powi(3)).collect()).unwrap();
        let a = ks_distance(&e, &Normal::standard());
        let b = ks_distance(&cubed, &Cubed(Normal::standard()));
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn lattice_target_uses_both_limits() {
        // all mass on the atom -1 of π*_1 leaves a gap of 1 - e^{-1} just right of it
        let e = EmpiricalDistribution::new(vec![-1.0; 10]).unwrap();
        let d = ks_distance(&e, &StandardizedPoisson::new(1.0).unwrap());
        assert!((d - (1.0 - (-1f64).exp())).abs() < 1e-14);
        // an empirical law equal to the target on its atoms has distance only from rounding
        let p = StandardizedPoisson::new(1.0).unwrap();
        let mut vals = Vec::new();
        for (k, count) in [(0u64, 3679usize), (1, 3679), (2, 1839), (3, 613), (4, 153), (5, 31), (6, 5), (7, 1)] {
            vals.extend(std::iter::repeat(p.atom(k)).take(count));
        }
        let e = EmpiricalDistribution::new(vals).unwrap();
        assert!(ks_distance(&e, &p) < 1e-3);
    }

    #[test]
    fn two_sample_cases() {
        let a = normal_sample(0.0, 1.0, 10_000, 7);
        let b = normal_sample(0.0, 1.0, 10_000, 8);
        let c = normal_sample(0.0, 2.0, 10_000, 9);
        assert_eq!(ks_two_sample(&a, &a, 0.01).value, 0.0);
        assert!(ks_two_sample(&a, &b, 0.01).pass);
        let ac = ks_two_sample(&a, &c, 0.01);
        assert!(!ac.pass);
        assert_eq!(ac.value, ks_two_sample(&c, &a, 0.01).value);
        // oracle: maximize Φ(x) - Φ(x/2) on a fine grid
        let z = Normal::standard();
        let sup = (0..40_000).map(|i| i as f64 * 1e-4).map(|x| z.cdf(x) - z.cdf(x / 2.0)).fold(0.0, f64::max);
        assert!((ac.value - sup).abs() < 0.02, "{} vs {}", ac.value, sup);
    }

    #[test]
    fn wasserstein_cases() {
        let a = normal_sample(0.0, 1.0, 500, 1);
        assert_eq!(wasserstein1(&a, &a), 0.0);
        let zero = EmpiricalDistribution::new(vec![0.0; 4]).unwrap();
        let one = EmpiricalDistribution::new(vec![1.0; 7]).unwrap();
        assert!((wasserstein1(&zero, &one) - 1.0).abs() < 1e-15);
        let h = 0.013;
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let g = EmpiricalDistribution::new(grid.clone()).unwrap();
        let s = EmpiricalDistribution::new(grid.iter().map(|x| x + h).collect()).unwrap();
        assert!((wasserstein1(&g, &s) - h).abs() < 1e-12);
    }
}
