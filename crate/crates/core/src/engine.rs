//! Deterministic replicated Monte Carlo.
//!
//! Every replicate owns a private random stream derived from the pair
//! `(master_seed, stream_id)`; replicate `i` of a plan always uses
//! `stream_id = base + i`. Results are gathered into a buffer indexed by
//! replicate, so the output does not depend on how many workers ran or in
//! which order they finished.
//!
//! Stream derivation: `h1 = mix(master_seed + G1)`,
//! `h2 = mix(h1 ^ mix(stream_id + G2))`, where `mix` is the 64-bit
//! avalanche finalizer `z ^= z >> 30; z *= M1; z ^= z >> 27; z *= M2;
//! z ^= z >> 31` (a bijection). The 256-bit ChaCha8 key is
//! `mix(h2 + j * G1)` for `j = 1..=4`, little-endian.

use std::num::NonZeroUsize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::{DistError, EmpiricalDistribution};

/// Environment variable capping the worker count.
pub const WORKERS_ENV: &str = "TRANSFERLAB_WORKERS";

/// Generator behind every replicate stream.
pub type StreamRng = ChaCha8Rng;

const G1: u64 = 0x9E37_79B9_7F4A_7C15;
const G2: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// The same master seed, streams shifted by `offset`.
    pub fn offset(self, offset: u64) -> Self {
        Self { stream_id: self.stream_id.wrapping_add(offset), ..self }
    }

    pub fn derived_key(&self) -> [u8; 32] {
        let h1 = mix(self.master_seed.wrapping_add(G1));
        let h2 = mix(h1 ^ mix(self.stream_id.wrapping_add(G2)));
        let mut key = [0u8; 32];
        for (j, chunk) in key.chunks_exact_mut(8).enumerate() {
            let w = mix(h2.wrapping_add((j as u64 + 1).wrapping_mul(G1)));
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        key
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::from_seed(self.derived_key())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("replicate {index} failed: {message}")]
    Task { index: usize, message: String },
    #[error("replicate {index} produced non-finite value {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("replication plan needs at least one replicate")]
    NoReplicates,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl From<DistError> for EngineError {
    fn from(e: DistError) -> Self {
        EngineError::Task { index: 0, message: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationPlan {
    pub replicates: usize,
    /// Minimum number of consecutive replicates handed to one worker.
    pub chunk_size: usize,
    /// Replicate `i` uses `seed.offset(i)`.
    pub seed: SeedSpec,
    /// Worker count; `None` reads [`WORKERS_ENV`] and falls back to the
    /// available parallelism.
    pub workers: Option<NonZeroUsize>,
}

impl ReplicationPlan {
    pub fn new(replicates: usize, seed: SeedSpec) -> Self {
        Self { replicates, chunk_size: 64, seed, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = NonZeroUsize::new(workers);
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Self {
        self.chunk_size = chunk_size.max(1);
        self
    }

    /// Same shape, streams shifted by `offset`; used to give independent
    /// sub-runs of one experiment disjoint stream ranges.
    pub fn offset_streams(mut self, offset: u64) -> Self {
        self.seed = self.seed.offset(offset);
        self
    }

    pub fn stream(&self, replicate: usize) -> StreamRng {
        self.seed.offset(replicate as u64).rng()
    }

    pub fn resolved_workers(&self) -> usize {
        if let Some(w) = self.workers {
            return w.get();
        }
        if let Some(w) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            if w > 0 {
                return w;
            }
        }
        std::thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
    }
}

/// Runs `task` once per replicate and returns the outputs in replicate
/// order. The first failing replicate (lowest index) is reported.
pub fn try_run_collect<T, E, F>(plan: &ReplicationPlan, task: F) -> Result<Vec<T>, EngineError>
where
    T: Send,
    E: std::fmt::Display + Send,
    F: Fn(&mut StreamRng) -> Result<T, E> + Sync,
{
    if plan.replicates == 0 {
        return Err(EngineError::NoReplicates);
    }
    let one = |i: usize| {
        let mut rng = plan.stream(i);
        task(&mut rng)
    };
    let workers = plan.resolved_workers();
    let results: Vec<Result<T, E>> = if workers == 1 {
        (0..plan.replicates).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        pool.install(|| {
            (0..plan.replicates)
                .into_par_iter()
                .with_min_len(plan.chunk_size.max(1))
                .map(one)
                .collect()
        })
    };
    let mut out = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => return Err(EngineError::Task { index, message: e.to_string() }),
        }
    }
    Ok(out)
}

/// Infallible variant of [`try_run_collect`].
pub fn run_collect<T, F>(plan: &ReplicationPlan, task: F) -> Result<Vec<T>, EngineError>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    try_run_collect(plan, |rng| Ok::<T, std::convert::Infallible>(task(rng)))
}

/// Runs a scalar task per replicate and returns the empirical law of the
/// outputs.
pub fn run_replicated<F>(plan: &ReplicationPlan, task: F) -> Result<EmpiricalDistribution, EngineError>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let values = run_collect(plan, task)?;
    finite_empirical(values)
}

pub(crate) fn finite_empirical(values: Vec<f64>) -> Result<EmpiricalDistribution, EngineError> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(EngineError::NonFinite { index, value });
    }
    EmpiricalDistribution::new(values).map_err(EngineError::from)
}
