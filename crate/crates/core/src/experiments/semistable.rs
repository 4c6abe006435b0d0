//! Logarithmic summation along a geometric block sequence.
//!
//! With `k_0 = 1 < k_1 < ...` and `k_{p+1} / k_p -> c`, every `n >= 1`
//! sits in a unique block `k_p <= n < k_{p+1}`; its mantissa is
//! `ψ(n) = n / k_p ∈ [1, c)`. Under the weights `P(T_n = k) = 1 / (D_n k)`
//! the law of `ψ(T_n)` tends to the logarithmic law on `[1, c]`.
//!
//! The demo pairs this with St. Petersburg sums: the statistic at the random
//! index `T_n` is compared with the statistic at a fixed large block whose
//! position inside the block is drawn from the logarithmic law.

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution as _};

use super::{config_error, ExperimentError};
use crate::distributions::{Distribution, EmpiricalDistribution, LogarithmicLaw, Support};
use crate::engine::{run_collect, ReplicationPlan};
use crate::index::SamplingSequence;
use crate::special::{harmonic, harmonic_range, log2};

/// Largest horizon for which the sweep over all atoms is used.
pub const SWEEP_LIMIT: u64 = 10_000_000;

/// Position of `n` within its block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mantissa {
    /// `ψ(n) = n / k_p`.
    pub t: f64,
    /// Block index `p`.
    pub p: usize,
    /// Block start `k_p`.
    pub k_p: u64,
}

/// Block starts of a geometric sequence, with lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTable {
    c: f64,
    starts: Vec<u64>,
}

impl BlockTable {
    pub fn new(seq: &SamplingSequence) -> Result<Self, ExperimentError> {
        let c = match *seq {
            SamplingSequence::Geometric { ratio } if ratio.is_finite() && ratio > 1.0 => ratio,
            other => return Err(config_error(format!("mantissa needs a geometric block sequence, got {other:?}"))),
        };
        Ok(Self { c, starts: seq.blocks() })
    }

    pub fn ratio(&self) -> f64 {
        self.c
    }

    pub fn starts(&self) -> &[u64] {
        &self.starts
    }

    pub fn block_of(&self, n: u64) -> usize {
        debug_assert!(n >= 1);
        match self.starts.binary_search(&n) {
            Ok(p) => p,
            Err(p) => p - 1,
        }
    }

    pub fn psi(&self, n: u64) -> Mantissa {
        let p = self.block_of(n);
        let k_p = self.starts[p];
        Mantissa { t: n as f64 / k_p as f64, p, k_p }
    }

    /// Last index of block `p` that does not exceed `n`.
    fn block_end(&self, p: usize, n: u64) -> u64 {
        match self.starts.get(p + 1) {
            Some(next) => (next - 1).min(n),
            None => n,
        }
    }
}

/// `ψ(n)` together with its block.
pub fn mantissa_psi(n: u64, seq: &SamplingSequence) -> Result<Mantissa, ExperimentError> {
    if n == 0 {
        return Err(config_error("mantissa is defined for n >= 1"));
    }
    Ok(BlockTable::new(seq)?.psi(n))
}

/// `P(T = k) = 1 / (D_n k)` on `{1, ..., n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogIndexLaw {
    n: u64,
    d_n: f64,
    /// Dyadic blocks `[2^j, min(2^{j+1} - 1, n)]`.
    blocks: Vec<(u64, u64)>,
    cumulative: Vec<f64>,
}

impl LogIndexLaw {
    pub fn new(n: u64) -> Result<Self, ExperimentError> {
        if n == 0 {
            return Err(config_error("log index law needs a horizon n >= 1"));
        }
        let d_n = harmonic(n);
        let mut blocks = Vec::new();
        let mut a = 1u64;
        while a <= n {
            let b = a.checked_mul(2).map_or(n, |x| (x - 1).min(n));
            blocks.push((a, b));
            match a.checked_mul(2) {
                Some(x) => a = x,
                None => break,
            }
        }
        let mut cumulative = Vec::with_capacity(blocks.len());
        let mut acc = 0.0;
        for &(a, b) in &blocks {
            acc += harmonic_range(a, b) / d_n;
            cumulative.push(acc);
        }
        Ok(Self { n, d_n, blocks, cumulative })
    }

    pub fn horizon(&self) -> u64 {
        self.n
    }

    /// `D_n = 1 + 1/2 + ... + 1/n`.
    pub fn normalizer(&self) -> f64 {
        self.d_n
    }

    pub fn weight(&self, k: u64) -> f64 {
        if k == 0 || k > self.n {
            0.0
        } else {
            1.0 / (self.d_n * k as f64)
        }
    }

    /// Exact draw: a dyadic block from its mass, then a uniform proposal
    /// inside the block accepted with probability `a / k`.
    pub fn sample(&self, rng: &mut dyn RngCore) -> u64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let j = self.cumulative.partition_point(|&c| c <= u).min(self.blocks.len() - 1);
        let (a, b) = self.blocks[j];
        if a == b {
            return a;
        }
        loop {
            let k = rng.random_range(a..=b);
            let v: f64 = rng.random();
            if v * (k as f64) < a as f64 {
                return k;
            }
        }
    }
}

/// Exact law of `ψ(T_n)` for `T_n` with logarithmic weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiLaw {
    index: LogIndexLaw,
    table: BlockTable,
}

impl PsiLaw {
    pub fn new(n: u64, seq: &SamplingSequence) -> Result<Self, ExperimentError> {
        Ok(Self { index: LogIndexLaw::new(n)?, table: BlockTable::new(seq)? })
    }

    pub fn horizon(&self) -> u64 {
        self.index.n
    }

    pub fn ratio(&self) -> f64 {
        self.table.c
    }

    /// Largest `k` in `[k_p, end]` with `k / k_p <= t` (or `< t`), using the
    /// same floating expression as [`BlockTable::psi`].
    fn last_below(k_p: u64, end: u64, t: f64, strict: bool) -> Option<u64> {
        let kp = k_p as f64;
        let ok = |k: u64| {
            let v = k as f64 / kp;
            if strict {
                v < t
            } else {
                v <= t
            }
        };
        if !ok(k_p) {
            return None;
        }
        let guess = (t * kp).floor();
        let mut k = if guess >= end as f64 { end } else { (guess as u64).clamp(k_p, end) };
        while k > k_p && !ok(k) {
            k -= 1;
        }
        while k < end && ok(k + 1) {
            k += 1;
        }
        Some(k)
    }

    fn mass(&self, t: f64, strict: bool) -> f64 {
        let n = self.index.n;
        let mut total = 0.0;
        for (p, &k_p) in self.table.starts.iter().enumerate() {
            if k_p > n {
                break;
            }
            let end = self.table.block_end(p, n);
            if let Some(k) = Self::last_below(k_p, end, t, strict) {
                total += harmonic_range(k_p, k);
            }
        }
        (total / self.index.d_n).clamp(0.0, 1.0)
    }
}

impl Distribution for PsiLaw {
    fn cdf(&self, t: f64) -> f64 {
        self.mass(t, false)
    }

    fn cdf_left(&self, t: f64) -> f64 {
        self.mass(t, true)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.table.psi(self.index.sample(rng)).t
    }

    fn support(&self) -> Support {
        Support::Mixed { lower: 1.0, upper: self.table.c }
    }
}

/// `P(ψ(T_n) <= t)`, summed blockwise.
pub fn psi_pushforward_cdf(n: u64, seq: &SamplingSequence, t: f64) -> Result<f64, ExperimentError> {
    Ok(PsiLaw::new(n, seq)?.cdf(t))
}

/// `sup_t |P(ψ(T_n) <= t) - ln t / ln c|` by sorting all atoms `(ψ(k), 1/k)`.
pub fn psi_sup_distance(n: u64, seq: &SamplingSequence) -> Result<f64, ExperimentError> {
    if n == 0 || n > SWEEP_LIMIT {
        return Err(config_error(format!("sup distance sweep needs 1 <= n <= {SWEEP_LIMIT}, got {n}")));
    }
    let table = BlockTable::new(seq)?;
    let log_law = LogarithmicLaw::new(table.c)?;
    let d_n = harmonic(n);
    let mut atoms: Vec<(f64, u64)> = (1..=n).map(|k| (table.psi(k).t, k)).collect();
    atoms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut d: f64 = 0.0;
    let mut acc = 0.0;
    let mut i = 0;
    while i < atoms.len() {
        let v = atoms[i].0;
        let target = log_law.cdf(v);
        d = d.max((acc / d_n - target).abs());
        while i < atoms.len() && atoms[i].0 == v {
            acc += 1.0 / atoms[i].1 as f64;
            i += 1;
        }
        d = d.max((acc / d_n - target).abs());
    }
    Ok(d)
}

/// Sup distances for each horizon in `ns`.
pub fn psi_convergence(ns: &[u64], seq: &SamplingSequence) -> Result<Vec<f64>, ExperimentError> {
    ns.iter().map(|&n| psi_sup_distance(n, seq)).collect()
}

/// `S_k` for `k` i.i.d. St. Petersburg variables, `P(X = 2^j) = 2^{-j}`.
///
/// A variable exceeding `2^{j-1}` equals `2^j` with conditional probability
/// one half, so the number of summands equal to `2^j` is binomial in those
/// still above `2^{j-1}`.
pub fn st_petersburg_sum(k: u64, rng: &mut dyn RngCore) -> f64 {
    let mut remaining = k;
    let mut level = 2.0f64;
    let mut s = 0.0;
    while remaining > 0 {
        let hits = Binomial::new(remaining, 0.5).expect("p = 1/2 is valid").sample(rng);
        s += level * hits as f64;
        remaining -= hits;
        level *= 2.0;
    }
    s
}

/// `S_k / k - log2 k`.
pub fn st_petersburg_statistic(k: u64, rng: &mut dyn RngCore) -> f64 {
    st_petersburg_sum(k, rng) / k as f64 - log2(k as f64)
}

/// Law of the random index in the demo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemistableIndex {
    /// Logarithmic weights on `{1, ..., horizon}`.
    LogIndex,
    /// The constant index `k`.
    Fixed(u64),
}

/// Law of the position inside the fixed block on the mixture side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockMixing {
    Logarithmic,
    /// Always the block start.
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemistableConfig {
    pub c: f64,
    pub horizon: u64,
    /// The fixed block is `[2^m, 2^{m+1})`.
    pub m: u32,
    pub index: SemistableIndex,
    pub mixing: BlockMixing,
}

impl Default for SemistableConfig {
    fn default() -> Self {
        Self { c: 2.0, horizon: 1 << 62, m: 40, index: SemistableIndex::LogIndex, mixing: BlockMixing::Logarithmic }
    }
}

impl SemistableConfig {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.c != 2.0 {
            return Err(config_error(format!("St. Petersburg normalization needs c = 2, got {}", self.c)));
        }
        if self.horizon == 0 {
            return Err(config_error("horizon must be >= 1"));
        }
        if self.m > 62 {
            return Err(config_error(format!("block exponent m must be <= 62, got {}", self.m)));
        }
        if self.index == SemistableIndex::Fixed(0) {
            return Err(config_error("fixed index must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SemistableOutcome {
    /// Statistic at the random index.
    pub random_index: EmpiricalDistribution,
    /// Statistic at `⌊2^m t⌋`, `t` from the block mixing law.
    pub mixture: EmpiricalDistribution,
    /// `ψ(T)` recorded alongside the random-index side.
    pub psi_sample: EmpiricalDistribution,
    /// Exact law of `ψ(T_n)`, for the logarithmic index.
    pub psi_law: Option<PsiLaw>,
}

/// Runs both sides: the random-index side on the plan's streams, the mixture
/// side on the next `replicates` streams.
pub fn run_semistable_demo(cfg: &SemistableConfig, plan: &ReplicationPlan) -> Result<SemistableOutcome, ExperimentError> {
    cfg.validate()?;
    let seq = SamplingSequence::powers_of_two();
    let table = BlockTable::new(&seq)?;
    let index_law = match cfg.index {
        SemistableIndex::LogIndex => Some(LogIndexLaw::new(cfg.horizon)?),
        SemistableIndex::Fixed(_) => None,
    };
    let pairs = run_collect(plan, |rng| {
        let k = match (&index_law, cfg.index) {
            (Some(law), _) => law.sample(rng),
            (None, SemistableIndex::Fixed(k)) => k,
            (None, SemistableIndex::LogIndex) => unreachable!("log index law is built above"),
        };
        (st_petersburg_statistic(k, rng), table.psi(k).t)
    })?;
    let log_law = LogarithmicLaw::new(2.0)?;
    let start = 1u64 << cfg.m;
    let mixture_plan = plan.offset_streams(plan.replicates as u64);
    let mixture = run_collect(&mixture_plan, |rng| {
        let t = match cfg.mixing {
            BlockMixing::Logarithmic => log_law.sample(rng),
            BlockMixing::Point => 1.0,
        };
        let k = ((start as f64 * t).floor() as u64).clamp(start, 2 * start - 1);
        st_petersburg_statistic(k, rng)
    })?;
    let (stats, psis): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let psi_law = match cfg.index {
        SemistableIndex::LogIndex => Some(PsiLaw { index: index_law.expect("built for log index"), table }),
        SemistableIndex::Fixed(_) => None,
    };
    Ok(SemistableOutcome {
        random_index: EmpiricalDistribution::new(stats)?,
        mixture: EmpiricalDistribution::new(mixture)?,
        psi_sample: EmpiricalDistribution::new(psis)?,
        psi_law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SeedSpec;
    use crate::stats::{ks_one_sample, ks_two_sample};

    fn two() -> SamplingSequence {
        SamplingSequence::powers_of_two()
    }

    #[test]
    fn mantissa_examples() {
        assert_eq!(mantissa_psi(1, &two()).unwrap(), Mantissa { t: 1.0, p: 0, k_p: 1 });
        assert_eq!(mantissa_psi(3, &two()).unwrap(), Mantissa { t: 1.5, p: 1, k_p: 2 });
        for m in 0..63 {
            let v = mantissa_psi(1 << m, &two()).unwrap();
            assert_eq!((v.t, v.p), (1.0, m as usize));
        }
        assert!(mantissa_psi(0, &two()).is_err());
        assert!(mantissa_psi(5, &SamplingSequence::Identity).is_err());
    }

    #[test]
    fn mantissa_is_exact_in_block() {
        for seq in [two(), SamplingSequence::geometric(3.0).unwrap(), SamplingSequence::geometric(1.5).unwrap()] {
            let table = BlockTable::new(&seq).unwrap();
            let c = table.ratio();
            for n in 1..=1_000_000u64 {
                let m = table.psi(n);
                assert!(m.t >= 1.0 && m.t < c * (1.0 + 1e-12), "n = {n}: t = {}", m.t);
                assert!(m.k_p <= n && n < table.starts()[m.p + 1]);
                // n and k_p are below 2^53, so the quotient is correctly rounded
                assert_eq!(m.t, n as f64 / m.k_p as f64);
            }
        }
    }

    #[test]
    fn log_index_weights() {
        let law = LogIndexLaw::new(1).unwrap();
        assert_eq!(law.weight(1), 1.0);
        let law = LogIndexLaw::new(3).unwrap();
        assert!((law.weight(1) - 6.0 / 11.0).abs() < 1e-15);
        assert!((law.weight(2) - 3.0 / 11.0).abs() < 1e-15);
        assert!((law.weight(3) - 2.0 / 11.0).abs() < 1e-15);
        let law = LogIndexLaw::new(1_000_000).unwrap();
        let total: f64 = (1..=1_000_000u64).rev().map(|k| law.weight(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_index_sampler_frequencies() {
        let law = LogIndexLaw::new(10).unwrap();
        let mut rng = SeedSpec::new(3, 0).rng();
        let mut counts = [0usize; 11];
        let draws = 200_000;
        for _ in 0..draws {
            counts[law.sample(&mut rng) as usize] += 1;
        }
        for (k, &count) in counts.iter().enumerate().skip(1) {
            let p = law.weight(k as u64);
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((count as f64 / draws as f64 - p).abs() < 5.0 * se, "k = {k}");
        }
    }

    #[test]
    fn psi_cdf_examples() {
        assert_eq!(psi_pushforward_cdf(1, &two(), 1.0).unwrap(), 1.0);
        assert_eq!(psi_pushforward_cdf(1, &two(), 1.7).unwrap(), 1.0);
        assert!((psi_pushforward_cdf(3, &two(), 1.4).unwrap() - 9.0 / 11.0).abs() < 1e-15);
        let v = psi_pushforward_cdf(1_000_000, &two(), std::f64::consts::SQRT_2).unwrap();
        assert!((v - 0.5).abs() < 0.15);
    }

    #[test]
    fn psi_cdf_is_proper() {
        for n in [1u64, 2, 3, 7, 100, 12_345, 1 << 40, u64::MAX >> 2] {
            let law = PsiLaw::new(n, &two()).unwrap();
            assert_eq!(law.cdf_left(1.0), 0.0);
            assert!((law.cdf(2.0) - 1.0).abs() < 1e-12);
            let mut last = 0.0;
            for i in 0..=1000 {
                let v = law.cdf(1.0 + i as f64 / 1000.0);
                assert!(v >= last - 1e-15, "n = {n}");
                last = v;
            }
        }
    }

    #[test]
    fn blockwise_cdf_matches_brute_force() {
        let n = 5_000u64;
        let table = BlockTable::new(&two()).unwrap();
        let d_n: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        for t in [1.0, 1.1, 1.25, 1.5, std::f64::consts::SQRT_2, 1.999] {
            let brute: f64 = (1..=n).filter(|&k| table.psi(k).t <= t).map(|k| 1.0 / k as f64).sum::<f64>() / d_n;
            assert!((psi_pushforward_cdf(n, &two(), t).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_and_blockwise_sup_agree() {
        let n = 3_000u64;
        let law = PsiLaw::new(n, &two()).unwrap();
        let log_law = LogarithmicLaw::new(2.0).unwrap();
        let table = BlockTable::new(&two()).unwrap();
        let mut atoms: Vec<f64> = (1..=n).map(|k| table.psi(k).t).collect();
        atoms.sort_unstable_by(f64::total_cmp);
        atoms.dedup();
        let blockwise = atoms
            .iter()
            .map(|&t| (law.cdf(t) - log_law.cdf(t)).abs().max((law.cdf_left(t) - log_law.cdf(t)).abs()))
            .fold(0.0, f64::max);
        assert!((psi_sup_distance(n, &two()).unwrap() - blockwise).abs() < 1e-12);
    }

    #[test]
    fn psi_distance_shrinks_over_decades() {
        let ns = [100, 1_000, 10_000, 100_000, 1_000_000];
        let d = psi_convergence(&ns, &two()).unwrap();
        for w in d.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "{d:?}");
        }
        assert!(d[4] <= 0.15, "{d:?}");
    }

    #[test]
    fn binomial_splitting_matches_direct_summation() {
        fn direct(k: u64, rng: &mut dyn RngCore) -> f64 {
            let mut s = 0.0;
            for _ in 0..k {
                let mut j = 1;
                loop {
                    let bits = rng.next_u64();
                    if bits != 0 {
                        j += bits.trailing_zeros() as i32;
                        break;
                    }
                    j += 64;
                }
                s += 2f64.powi(j);
            }
            s / k as f64 - log2(k as f64)
        }
        let mut rng = SeedSpec::new(21, 0).rng();
        let a: Vec<f64> = (0..10_000).map(|_| st_petersburg_statistic(100, &mut rng)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| direct(100, &mut rng)).collect();
        let report = ks_two_sample(&EmpiricalDistribution::new(a).unwrap(), &EmpiricalDistribution::new(b).unwrap(), 0.01);
        assert!(report.pass, "{report}");
        assert_eq!(st_petersburg_sum(1, &mut rng).log2().fract(), 0.0);
    }

    #[test]
    fn recorded_psi_follows_exact_law() {
        let cfg = SemistableConfig { horizon: 1 << 30, m: 20, ..SemistableConfig::default() };
        let out = run_semistable_demo(&cfg, &ReplicationPlan::new(5_000, SeedSpec::new(8, 0))).unwrap();
        let report = ks_one_sample(&out.psi_sample, out.psi_law.as_ref().unwrap(), 0.01);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn degenerate_index_matches_block_start() {
        let cfg = SemistableConfig {
            index: SemistableIndex::Fixed(1 << 12),
            m: 12,
            mixing: BlockMixing::Point,
            ..SemistableConfig::default()
        };
        let out = run_semistable_demo(&cfg, &ReplicationPlan::new(5_000, SeedSpec::new(4, 0))).unwrap();
        assert!(ks_two_sample(&out.random_index, &out.mixture, 0.01).pass);
        assert!(out.psi_sample.values().iter().all(|&t| t == 1.0));
    }
}
