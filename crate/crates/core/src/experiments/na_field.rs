//! Partial sums of a negatively associated Gaussian field at a random index.
//!
//! The field is the moving difference `X_k = ε_k - a ε_{k+e_1}` on `N^d`
//! with `ε` i.i.d. standard normal and `0 < a < 1`. All its covariances are
//! nonpositive off the diagonal, so the field is negatively associated, and
//! the covariance series sums to `σ² = (1 - a)²`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{config_error, mixing_lower, mixing_upper, ExperimentError};
use crate::distributions::{EmpiricalDistribution, GaussianScaleFamily, MixingLaw, MixtureLaw};
use crate::engine::{run_collect, ReplicationPlan, StreamRng};

/// Default bound on lattice cells needed at the largest index.
pub const DEFAULT_MAX_CELLS: u64 = 50_000_000;

#[derive(Debug, Clone)]
pub struct NAFieldConfig {
    pub a: f64,
    /// Lattice size `n`, one entry per dimension.
    pub n: Vec<u64>,
    pub mixing: MixingLaw,
    pub max_cells: u64,
}

impl NAFieldConfig {
    pub fn new(a: f64, n: Vec<u64>, mixing: MixingLaw) -> Self {
        Self { a, n, mixing, max_cells: DEFAULT_MAX_CELLS }
    }

    pub fn sigma2(&self) -> f64 {
        (1.0 - self.a) * (1.0 - self.a)
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(config_error(format!("a must lie in (0, 1), got {}", self.a)));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(config_error("lattice size must be a nonempty vector of positive integers"));
        }
        if self.mixing.dim() != self.n.len() {
            return Err(config_error(format!(
                "mixing law has dimension {}, lattice has {}",
                self.mixing.dim(),
                self.n.len()
            )));
        }
        if mixing_lower(&self.mixing).iter().any(|v| *v < 0.0) {
            return Err(config_error("mixing law must live on [0, inf)^d"));
        }
        let upper = mixing_upper(&self.mixing);
        let cells: f64 = self.n.iter().zip(&upper).map(|(n, t)| (*n as f64 * t).floor() + 1.0).product();
        if cells > self.max_cells as f64 {
            return Err(config_error(format!(
                "field needs {cells} lattice cells at the largest index, bound is {}",
                self.max_cells
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NAFieldOutcome {
    pub empirical: EmpiricalDistribution,
    pub target: MixtureLaw,
    pub sigma2: f64,
}

/// `⌊n_i t_i⌋` per coordinate.
pub fn scaled_index(n: &[u64], t: &[f64]) -> Vec<u64> {
    n.iter().zip(t).map(|(n, t)| (*n as f64 * t).floor() as u64).collect()
}

/// Draws `ε` on `[1, m_1 + 1] x [1, m_2] x ... x [1, m_d]` and returns
/// `sum_{k <= m} X_k`. The first coordinate varies fastest.
pub fn field_partial_sum(a: f64, m: &[u64], rng: &mut StreamRng) -> f64 {
    if m.contains(&0) {
        return 0.0;
    }
    let row = (m[0] + 1) as usize;
    let rows: usize = m[1..].iter().map(|v| *v as usize).product();
    let mut eps = vec![0.0f64; row];
    let mut s = 0.0;
    for _ in 0..rows {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        for k in 0..row - 1 {
            s += eps[k] - a * eps[k + 1];
        }
    }
    s
}

/// Exact variance of `|n|^{-1/2} sum_{k <= m} X_k`.
pub fn na_exact_variance(a: f64, m: &[u64], n: &[u64]) -> f64 {
    if m.contains(&0) {
        return 0.0;
    }
    let others: f64 = m[1..].iter().map(|v| *v as f64).product();
    let m1 = m[0] as f64;
    let volume: f64 = n.iter().map(|v| *v as f64).product();
    others * (1.0 + a * a + (1.0 - a) * (1.0 - a) * (m1 - 1.0)) / volume
}

pub fn run_na_field(cfg: &NAFieldConfig, plan: &ReplicationPlan) -> Result<NAFieldOutcome, ExperimentError> {
    cfg.validate()?;
    let scale = 1.0 / cfg.n.iter().map(|v| *v as f64).product::<f64>().sqrt();
    let values = run_collect(plan, |rng| {
        let t = cfg.mixing.sample(rng);
        let m = scaled_index(&cfg.n, &t);
        field_partial_sum(cfg.a, &m, rng) * scale
    })?;
    let family = GaussianScaleFamily::new(cfg.n.len(), cfg.sigma2())?;
    let target = MixtureLaw::new(Arc::new(family), cfg.mixing.clone())?;
    Ok(NAFieldOutcome { empirical: EmpiricalDistribution::new(values)?, target, sigma2: cfg.sigma2() })
}

/// Empirical covariances `mean(X_k X_{k+h})` of one field realization on the
/// box `shape`, for each lag `h`.
pub fn na_lag_covariances(a: f64, shape: &[u64], lags: &[Vec<i64>], rng: &mut StreamRng) -> Vec<f64> {
    let dims: Vec<usize> = shape.iter().map(|v| *v as usize).collect();
    let total: usize = dims.iter().product();
    let row = dims[0];
    // ε on the box extended by one cell along the first axis
    let mut x = vec![0.0f64; total];
    let mut eps = vec![0.0f64; row + 1];
    for r in 0..total / row {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        for k in 0..row {
            x[r * row + k] = eps[k] - a * eps[k + 1];
        }
    }
    let strides: Vec<usize> = dims.iter().scan(1usize, |acc, d| {
        let s = *acc;
        *acc *= d;
        Some(s)
    }).collect();
    lags.iter()
        .map(|h| {
            assert_eq!(h.len(), dims.len(), "lag dimension must match the field");
            let mut sum = 0.0;
            let mut count = 0usize;
            let mut coord = vec![0usize; dims.len()];
            for idx in 0..total {
                let mut rem = idx;
                for (c, d) in coord.iter_mut().zip(&dims) {
                    *c = rem % d;
                    rem /= d;
                }
                let mut other = 0usize;
                let mut inside = true;
                for ((c, d), (hv, s)) in coord.iter().zip(&dims).zip(h.iter().zip(&strides)) {
                    let v = *c as i64 + hv;
                    if v < 0 || v >= *d as i64 {
                        inside = false;
                        break;
                    }
                    other += v as usize * s;
                }
                if inside {
                    sum += x[idx] * x[other];
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SeedSpec;

    #[test]
    fn variance_formula_small_cases() {
        // m = 1: X_1 = ε_1 - a ε_2
        assert!((na_exact_variance(0.5, &[1], &[1]) - 1.25).abs() < 1e-15);
        // m = 2: ε_1 + (1 - a) ε_2 - a ε_3
        assert!((na_exact_variance(0.5, &[2], &[1]) - 1.5).abs() < 1e-15);
        assert_eq!(na_exact_variance(0.5, &[3, 0], &[1, 1]), 0.0);
        assert!((na_exact_variance(0.5, &[2, 3], &[1, 1]) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn partial_sum_variance_matches_formula() {
        let plan = ReplicationPlan::new(20_000, SeedSpec::new(9, 0));
        let values = run_collect(&plan, |rng| field_partial_sum(0.3, &[5, 2], rng)).unwrap();
        let var = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        let exact = na_exact_variance(0.3, &[5, 2], &[1, 1]);
        assert!((var / exact - 1.0).abs() < 0.04, "{var} vs {exact}");
    }

    #[test]
    fn lag_structure() {
        let mut rng = SeedSpec::new(1, 0).rng();
        let lags = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1]];
        let c = na_lag_covariances(0.5, &[400, 400], &lags, &mut rng);
        assert!((c[0] - 1.25).abs() < 0.02);
        assert!((c[1] + 0.5).abs() < 0.02);
        for v in &c[2..] {
            assert!(v.abs() < 0.02);
        }
    }

    #[test]
    fn lattice_bound_is_enforced() {
        let mut cfg = NAFieldConfig::new(0.5, vec![10_000, 10_000], MixingLaw::point(vec![1.0, 1.0]));
        cfg.max_cells = 1_000_000;
        let plan = ReplicationPlan::new(1, SeedSpec::new(0, 0));
        assert!(matches!(run_na_field(&cfg, &plan), Err(ExperimentError::Config(_))));
        let bad_a = NAFieldConfig::new(1.0, vec![10], MixingLaw::point(vec![1.0]));
        assert!(matches!(run_na_field(&bad_a, &plan), Err(ExperimentError::Config(_))));
    }
}
