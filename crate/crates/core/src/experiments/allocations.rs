//! Occupancy counts of balls thrown uniformly into boxes.
//!
//! `μ_r(n, N)` is the number of boxes holding exactly `r` of `n` balls
//! among `N` boxes. It is standardized with its exact mean and variance, and
//! its limit law is read off the allocation control map: standard normal in
//! the central regime, standardized Poisson in sparse and dense regimes.
//!
//! Exact moments come from the indicator decomposition
//! `μ_r = sum_i 1{box i holds r}`: `E μ_r = N p_r` and
//! `Var μ_r = E μ_r + N(N-1) q_r - (E μ_r)^2` with
//! `p_r = C(n,r) N^{-r} (1-1/N)^{n-r}` and
//! `q_r = n! / (r!^2 (n-2r)!) N^{-2r} (1-2/N)^{n-2r}` (zero when `n < 2r`).

use std::sync::Arc;

use rand::Rng;

use super::{config_error, ExperimentError};
use crate::distributions::{EmpiricalDistribution, MixingLaw, MixtureLaw, RegimeFamily, StandardizedPoisson};
use crate::engine::{run_collect, ReplicationPlan, StreamRng};
use crate::index::{classify_regime, LimitTag, RegimePoint};
use crate::special::{ln_binomial, ln_factorial};

fn check_domain(r: u64, n: u64, big_n: u64) -> Result<(), ExperimentError> {
    if big_n == 0 || r > n {
        return Err(config_error(format!("occupancy moments need 0 <= r <= n and N >= 1, got r = {r}, n = {n}, N = {big_n}")));
    }
    Ok(())
}

/// `x * ln(1 + y)` with `0 * ln 0 = 0`.
fn xlog1p(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln_1p()
    }
}

/// `E μ_r(n, N)`.
pub fn alloc_exact_mean(r: u64, n: u64, big_n: u64) -> Result<f64, ExperimentError> {
    check_domain(r, n, big_n)?;
    if big_n == 1 {
        return Ok(if r == n { 1.0 } else { 0.0 });
    }
    let nn = big_n as f64;
    let ln_mean = nn.ln() + ln_binomial(n, r) - r as f64 * nn.ln() + xlog1p((n - r) as f64, -1.0 / nn);
    Ok(ln_mean.exp())
}

/// `Var μ_r(n, N)`.
pub fn alloc_exact_var(r: u64, n: u64, big_n: u64) -> Result<f64, ExperimentError> {
    let mean = alloc_exact_mean(r, n, big_n)?;
    if big_n == 1 || mean == 0.0 {
        return Ok(0.0);
    }
    if n < 2 * r || (big_n == 2 && n > 2 * r) {
        // no two boxes can both hold r balls
        return Ok((mean - mean * mean).max(0.0));
    }
    let nn = big_n as f64;
    // ln(N(N-1) q_r / mean^2)
    let mut ln_ratio = (-1.0 / nn).ln_1p();
    for j in 0..r {
        ln_ratio += (-(r as f64) / (n - j) as f64).ln_1p();
    }
    ln_ratio += xlog1p((n - 2 * r) as f64, -2.0 / nn) - xlog1p((2 * n - 2 * r) as f64, -1.0 / nn);
    Ok((mean + mean * mean * ln_ratio.exp_m1()).max(0.0))
}

/// Ball counts along which the box count `N` is driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocationPath {
    /// `n = N`; limit point `(0, 0)`.
    Central,
    /// Few balls: `n = ⌊sqrt(2Nλ)⌋` for `r = 0`, `n = ⌊(r! N^{r-1} λ)^{1/r}⌋`
    /// for `r >= 2`; limit `π*_λ`. Undefined for `r = 1`.
    Sparse { lambda: f64 },
    /// Many balls: the second control coordinate is solved to equal `1/λ`
    /// with `n > rN`; limit `π*_λ`.
    Dense { lambda: f64 },
}

/// Law of the random index: a single path or a two-point mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum AllocationIndex {
    Path(AllocationPath),
    TwoPoint { first: AllocationPath, second: AllocationPath, p_first: f64 },
}

/// What to do with the lattice structure of the standardized count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeCorrection {
    /// Report the standardized count as is.
    Off,
    /// Spread normal-regime values uniformly over one lattice cell, and snap
    /// Poisson-regime values to the nearest atom of the limit law.
    Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationConfig {
    pub r: u32,
    /// Number of boxes `N`.
    pub boxes: u64,
    pub index: AllocationIndex,
    pub correction: LatticeCorrection,
}

/// One deterministic component of the index law, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPath {
    pub path: AllocationPath,
    pub weight: f64,
    pub balls: u64,
    /// Limit point `(g, d)` of the path.
    pub limit: (f64, f64),
    pub tag: LimitTag,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone)]
pub struct AllocationOutcome {
    /// Standardized counts after the lattice correction.
    pub empirical: EmpiricalDistribution,
    /// Standardized counts without correction.
    pub raw: EmpiricalDistribution,
    pub target: MixtureLaw,
    pub components: Vec<ResolvedPath>,
}

fn ln_control_d(r: u32, t: f64, u: f64) -> f64 {
    match r {
        0 => t / u - u.ln(),
        1 => t / u - t.ln(),
        _ => ln_factorial(r as u64) + (r as f64 - 1.0) * u.ln() - r as f64 * t.ln() + t / u,
    }
}

/// Real `T > max(r, 1) N` with `ln d(T) = -ln λ`; `ln d` is increasing there.
fn solve_dense(r: u32, u: f64, lambda: f64) -> Result<f64, ExperimentError> {
    let goal = -lambda.ln();
    let f = |t: f64| ln_control_d(r, t, u) - goal;
    let mut lo = (r.max(1) as f64) * u;
    if f(lo) > 0.0 {
        return Err(config_error(format!(
            "dense path with lambda = {lambda} needs fewer than {lo} balls for r = {r}, N = {u}; choose a smaller lambda or larger N"
        )));
    }
    let mut hi = 2.0 * lo;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of balls for `path` with `N` boxes, and its limit point.
pub fn resolve_path(r: u32, boxes: u64, path: AllocationPath) -> Result<(u64, (f64, f64)), ExperimentError> {
    let u = boxes as f64;
    let check_lambda = |lambda: f64| {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(())
        } else {
            Err(config_error(format!("lambda must be finite and > 0, got {lambda}")))
        }
    };
    let (balls, limit) = match path {
        AllocationPath::Central => (boxes, (0.0, 0.0)),
        AllocationPath::Sparse { lambda } => {
            check_lambda(lambda)?;
            match r {
                0 => ((2.0 * u * lambda).sqrt().floor() as u64, (1.0 / lambda, 0.0)),
                1 => return Err(config_error("no sparse Poisson regime exists for r = 1")),
                _ => {
                    let ln_t = (ln_factorial(r as u64) + (r as f64 - 1.0) * u.ln() + lambda.ln()) / r as f64;
                    (ln_t.exp().floor() as u64, (0.0, 1.0 / lambda))
                }
            }
        }
        AllocationPath::Dense { lambda } => {
            check_lambda(lambda)?;
            (solve_dense(r, u, lambda)?.round() as u64, (0.0, 1.0 / lambda))
        }
    };
    if balls < r as u64 || balls == 0 {
        return Err(config_error(format!("path {path:?} gives {balls} balls, fewer than max(r, 1) for r = {r}, N = {boxes}")));
    }
    Ok((balls, limit))
}

impl AllocationConfig {
    pub fn resolve(&self) -> Result<Vec<ResolvedPath>, ExperimentError> {
        if self.boxes == 0 {
            return Err(config_error("number of boxes must be >= 1"));
        }
        let parts = match &self.index {
            AllocationIndex::Path(p) => vec![(*p, 1.0)],
            AllocationIndex::TwoPoint { first, second, p_first } => {
                if !(*p_first > 0.0 && *p_first < 1.0) {
                    return Err(config_error(format!("two-point weight must lie in (0, 1), got {p_first}")));
                }
                vec![(*first, *p_first), (*second, 1.0 - p_first)]
            }
        };
        parts
            .into_iter()
            .map(|(path, weight)| {
                let (balls, limit) = resolve_path(self.r, self.boxes, path)?;
                let tag = classify_regime(self.r, RegimePoint::new(limit.0, limit.1));
                if tag == LimitTag::Undefined {
                    return Err(config_error(format!("limit point {limit:?} is outside the regime table for r = {}", self.r)));
                }
                let mean = alloc_exact_mean(self.r as u64, balls, self.boxes)?;
                let variance = alloc_exact_var(self.r as u64, balls, self.boxes)?;
                if variance.is_nan() || variance <= 0.0 {
                    return Err(config_error(format!(
                        "zero variance for r = {}, n = {balls}, N = {}",
                        self.r, self.boxes
                    )));
                }
                Ok(ResolvedPath { path, weight, balls, limit, tag, mean, variance })
            })
            .collect()
    }
}

/// `μ_r` for one uniform allocation of `balls` balls into `boxes` boxes.
pub fn simulate_occupancy(r: u32, balls: u64, boxes: u64, rng: &mut StreamRng) -> u64 {
    let mut counts = vec![0u32; boxes as usize];
    for _ in 0..balls {
        counts[rng.random_range(0..boxes) as usize] += 1;
    }
    counts.iter().filter(|&&c| c == r).count() as u64
}

/// One replicate: the raw and corrected standardized counts.
fn replicate(
    cfg: &AllocationConfig,
    parts: &[ResolvedPath],
    poisson: &[Option<StandardizedPoisson>],
    rng: &mut StreamRng,
) -> (f64, f64) {
    let j = if parts.len() == 1 {
        0
    } else {
        let u: f64 = rng.random();
        if u < parts[0].weight {
            0
        } else {
            1
        }
    };
    let part = &parts[j];
    let count = simulate_occupancy(cfg.r, part.balls, cfg.boxes, rng);
    let sd = part.variance.sqrt();
    let y = (count as f64 - part.mean) / sd;
    let corrected = match (cfg.correction, &poisson[j]) {
        (LatticeCorrection::Off, _) => y,
        (LatticeCorrection::Regime, Some(p)) => p.snap(y),
        (LatticeCorrection::Regime, None) => {
            let u: f64 = rng.random();
            y + (u - 0.5) / sd
        }
    };
    (y, corrected)
}

pub fn run_allocations(cfg: &AllocationConfig, plan: &ReplicationPlan) -> Result<AllocationOutcome, ExperimentError> {
    let parts = cfg.resolve()?;
    let poisson: Vec<Option<StandardizedPoisson>> = parts
        .iter()
        .map(|p| match p.tag {
            LimitTag::PoissonStd { lambda } => StandardizedPoisson::new(lambda).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_, _>>()?;
    let pairs = run_collect(plan, |rng| replicate(cfg, &parts, &poisson, rng))?;
    let (raw, corrected): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mixing = MixingLaw::discrete(parts.iter().map(|p| (vec![p.limit.0, p.limit.1], p.weight)).collect())?;
    let target = MixtureLaw::new(Arc::new(RegimeFamily::new(cfg.r)), mixing)?;
    Ok(AllocationOutcome {
        empirical: EmpiricalDistribution::new(corrected)?,
        raw: EmpiricalDistribution::new(raw)?,
        target,
        components: parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SeedSpec;

    #[test]
    fn moment_examples() {
        assert!((alloc_exact_mean(0, 2, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(alloc_exact_mean(1, 1, 1).unwrap(), 1.0);
        assert_eq!(alloc_exact_var(1, 1, 1).unwrap(), 0.0);
        assert!(alloc_exact_mean(3, 2, 5).is_err());
        assert!(alloc_exact_var(0, 2, 0).is_err());
    }

    #[test]
    fn large_system_moments_are_finite() {
        let mean = alloc_exact_mean(0, 10_000, 10_000).unwrap();
        let var = alloc_exact_var(0, 10_000, 10_000).unwrap();
        let e = (-1f64).exp();
        assert!((mean / (10_000.0 * e) - 1.0).abs() < 1e-4);
        // N (e^{-1} - 2 e^{-2}) to leading order
        assert!((var / (10_000.0 * (e - 2.0 * e * e)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn paths_land_in_their_regimes() {
        let (n, lim) = resolve_path(0, 10_000, AllocationPath::Sparse { lambda: 1.0 }).unwrap();
        assert_eq!((n, lim), (141, (1.0, 0.0)));
        let (n, _) = resolve_path(0, 10_000, AllocationPath::Dense { lambda: 1.0 }).unwrap();
        assert_eq!(n, (10_000.0 * 10_000f64.ln()).round() as u64);
        for r in [1u32, 2] {
            let (n, lim) = resolve_path(r, 10_000, AllocationPath::Dense { lambda: 1.0 }).unwrap();
            let point = crate::index::phi_alloc(r, n, 10_000);
            assert!((point.d.value() - 1.0).abs() < 1e-3, "r = {r}: {point:?}");
            assert_eq!(lim, (0.0, 1.0));
        }
        assert!(resolve_path(1, 10_000, AllocationPath::Sparse { lambda: 1.0 }).is_err());
    }

    #[test]
    fn zero_variance_is_a_config_error() {
        let cfg = AllocationConfig {
            r: 0,
            boxes: 1,
            index: AllocationIndex::Path(AllocationPath::Central),
            correction: LatticeCorrection::Off,
        };
        match cfg.resolve() {
            Err(ExperimentError::Config(msg)) => assert!(msg.contains("r = 0, n = 1, N = 1"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn standardized_counts_have_unit_moments() {
        let cfg = AllocationConfig {
            r: 1,
            boxes: 500,
            index: AllocationIndex::Path(AllocationPath::Central),
            correction: LatticeCorrection::Off,
        };
        let out = run_allocations(&cfg, &ReplicationPlan::new(10_000, SeedSpec::new(2, 0))).unwrap();
        assert!(out.raw.mean().abs() < 4.0 / 100.0);
        assert!((out.raw.variance() - 1.0).abs() < 0.05);
    }
}
