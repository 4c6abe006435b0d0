//! Randomly indexed sums of a Gaussian triangular array.
//!
//! Row `n` holds `X_{n,k} = ξ_k / sqrt(|k_n|)` with `ξ_k` i.i.d. standard
//! normal, so the partial sum over `⌊k_n t⌋` terms has law close to
//! `N(0, |t|)`. The random index is `T_n = max(1, ⌊k_n τ⌋)` coordinatewise
//! with `τ ~ ρ` independent of the array.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{config_error, mixing_lower, ExperimentError};
use crate::distributions::{EmpiricalDistribution, GaussianScaleFamily, MixingLaw, MixtureLaw};
use crate::engine::{run_collect, ReplicationPlan};
use crate::index::SamplingSequence;

/// Cap on normal draws per replicate.
pub const MAX_TERMS: u64 = 1 << 26;

#[derive(Debug, Clone)]
pub struct RandomSumConfig {
    /// One sequence per coordinate, or one shared by all.
    pub k_seq: Vec<SamplingSequence>,
    /// Row of the triangular array.
    pub stage: u64,
    /// Law `ρ` of the scaled index.
    pub mixing: MixingLaw,
}

impl RandomSumConfig {
    pub fn dim(&self) -> usize {
        self.mixing.dim()
    }

    /// `k_n` per coordinate.
    pub fn row_lengths(&self) -> Result<Vec<u64>, ExperimentError> {
        let d = self.dim();
        if self.k_seq.len() != d && self.k_seq.len() != 1 {
            return Err(config_error(format!("{} sampling sequences for a {d}-dimensional index", self.k_seq.len())));
        }
        (0..d)
            .map(|i| {
                let k = self.k_seq.get(i).unwrap_or(&self.k_seq[0]).term(self.stage)?;
                if k == 0 {
                    return Err(config_error(format!("k_n is zero at stage {}", self.stage)));
                }
                Ok(k)
            })
            .collect()
    }

    fn validate(&self) -> Result<Vec<u64>, ExperimentError> {
        let k = self.row_lengths()?;
        if mixing_lower(&self.mixing).iter().any(|v| *v < 0.0) {
            return Err(config_error("mixing law must live on [0, inf)^d"));
        }
        let upper = super::mixing_upper(&self.mixing);
        let terms: f64 = k.iter().zip(&upper).map(|(k, t)| (*k as f64 * t).floor().max(1.0)).product();
        if terms > MAX_TERMS as f64 {
            return Err(config_error(format!("up to {terms} terms per replicate exceeds the cap of {MAX_TERMS}")));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone)]
pub struct RandomSumOutcome {
    pub empirical: EmpiricalDistribution,
    pub target: MixtureLaw,
}

/// Number of summands for the scaled index `t`.
pub fn index_terms(k: &[u64], t: &[f64]) -> u64 {
    k.iter().zip(t).map(|(k, t)| ((*k as f64 * t).floor() as u64).max(1)).product()
}

pub fn run_random_sum(cfg: &RandomSumConfig, plan: &ReplicationPlan) -> Result<RandomSumOutcome, ExperimentError> {
    let k = cfg.validate()?;
    let scale = 1.0 / k.iter().map(|v| *v as f64).product::<f64>().sqrt();
    let values = run_collect(plan, |rng| {
        let t = cfg.mixing.sample(rng);
        let terms = index_terms(&k, &t);
        let mut s = 0.0;
        for _ in 0..terms {
            s += rng.sample::<f64, _>(StandardNormal);
        }
        s * scale
    })?;
    let family = GaussianScaleFamily::new(cfg.dim(), 1.0)?;
    let target = MixtureLaw::new(Arc::new(family), cfg.mixing.clone())?;
    let empirical = EmpiricalDistribution::new(values)?;
    Ok(RandomSumOutcome { empirical, target })
}
