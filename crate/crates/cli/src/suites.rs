//! Per-experiment drivers: parameter parsing, the run, and its checks.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use transferlab::distributions::{LogarithmicMixing, UniformBox};
use transferlab::experiments::allocations::{
    run_allocations, AllocationConfig, AllocationIndex, AllocationPath, LatticeCorrection,
};
use transferlab::experiments::na_field::{na_exact_variance, na_lag_covariances, run_na_field, scaled_index, NAFieldConfig};
use transferlab::experiments::random_sum::{run_random_sum, RandomSumConfig};
use transferlab::experiments::semistable::{
    psi_convergence, run_semistable_demo, BlockMixing, PsiLaw, SemistableConfig, SemistableIndex,
};
use transferlab::index::SamplingSequence;
use transferlab::stats::wasserstein1;
use transferlab::{ks_one_sample, ks_two_sample, Distribution, MixingLaw, ReplicationPlan, SeedSpec};

use crate::args::Params;
use crate::output::{Check, EcdfTable};
use crate::CliError;

/// Keys handled outside the experiment drivers.
pub const DRIVER_KEYS: [&str; 4] = ["experiment", "out", "workers", "timing"];

/// Everything an experiment produced.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    pub tables: Vec<EcdfTable>,
}

fn bad(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn numbers(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("`{key}`: cannot parse {v:?} as a number"))))
        .collect()
}

/// `delta:t1,..,td`, `uniform:lo1,hi1,..` or `log:c`.
pub fn parse_rho(s: &str) -> Result<MixingLaw, CliError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad(format!("`rho` needs the form kind:values, got {s:?}")))?;
    let v = numbers("rho", rest)?;
    match kind {
        "delta" => Ok(MixingLaw::point(v)),
        "uniform" => {
            if v.len() % 2 != 0 {
                return Err(bad("`rho` uniform needs lower,upper pairs"));
            }
            let lower = v.iter().step_by(2).copied().collect();
            let upper = v.iter().skip(1).step_by(2).copied().collect();
            Ok(MixingLaw::continuous(Arc::new(UniformBox::new(lower, upper).map_err(|e| bad(e.to_string()))?))
                .map_err(|e| bad(e.to_string()))?)
        }
        "log" => {
            if v.len() != 1 {
                return Err(bad("`rho` log takes exactly one ratio c"));
            }
            Ok(MixingLaw::continuous(Arc::new(LogarithmicMixing::new(v[0]).map_err(|e| bad(e.to_string()))?))
                .map_err(|e| bad(e.to_string()))?)
        }
        other => Err(bad(format!("unknown mixing law kind {other:?}"))),
    }
}

/// `pow2`, `square`, `identity` or `geometric:c`.
pub fn parse_sequence(s: &str) -> Result<SamplingSequence, CliError> {
    match s {
        "pow2" => Ok(SamplingSequence::powers_of_two()),
        "square" => Ok(SamplingSequence::Square),
        "identity" => Ok(SamplingSequence::Identity),
        _ => match s.strip_prefix("geometric:") {
            Some(c) => {
                let c: f64 = c.trim().parse().map_err(|_| bad(format!("bad geometric ratio {c:?}")))?;
                SamplingSequence::geometric(c).map_err(|e| bad(e.to_string()))
            }
            None => Err(bad(format!("unknown sampling sequence {s:?}"))),
        },
    }
}

struct Common {
    seed: u64,
    alpha: f64,
    plan: ReplicationPlan,
}

fn common(params: &mut Params, workers: Option<usize>) -> Result<Common, CliError> {
    let seed = params.u64("seed", 42)?;
    let replicates = params.u64("replicates", 10_000)?;
    let alpha = params.f64("alpha", 0.01)?;
    if replicates == 0 {
        return Err(bad("`replicates` must be >= 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(bad(format!("`alpha` must lie in (0, 1), got {alpha}")));
    }
    let mut plan = ReplicationPlan::new(replicates as usize, SeedSpec::new(seed, 0));
    if let Some(w) = workers {
        plan = plan.with_workers(w);
    }
    Ok(Common { seed, alpha, plan })
}

fn finish_parsing(params: &Params) -> Result<(), CliError> {
    let unused = params.unused(&DRIVER_KEYS);
    if unused.is_empty() {
        Ok(())
    } else {
        Err(bad(format!("parameters not used by this experiment: {}", unused.join(", "))))
    }
}

pub fn run(experiment: &str, params: &mut Params, workers: Option<usize>) -> Result<SuiteOutput, CliError> {
    match experiment {
        "random-sum" => random_sum(params, workers),
        "na-field" => na_field(params, workers),
        "semistable" => semistable(params, workers),
        "allocations" => allocations(params, workers),
        "psi-law" => psi_law(params),
        other => Err(CliError::Usage(format!("unknown experiment {other:?}; expected one of {}", crate::args::EXPERIMENTS.join(", ")))),
    }
}

fn random_sum(params: &mut Params, workers: Option<usize>) -> Result<SuiteOutput, CliError> {
    let c = common(params, workers)?;
    let seq = parse_sequence(&params.string("k_seq", "pow2")?)?;
    let stage = params.u64("stage", 14)?;
    let mixing = parse_rho(&params.string("rho", "uniform:0,2")?)?;
    finish_parsing(params)?;

    let cfg = RandomSumConfig { k_seq: vec![seq], stage, mixing };
    let out = run_random_sum(&cfg, &c.plan)?;
    let gof = ks_one_sample(&out.empirical, &out.target, c.alpha);
    let table = EcdfTable::one_sample("random_sum_ecdf.csv", &out.empirical, &out.target);
    let mut metrics = Map::new();
    metrics.insert("row_lengths".into(), json!(cfg.row_lengths()?));
    metrics.insert("sample_mean".into(), json!(out.empirical.mean()));
    metrics.insert("sample_variance".into(), json!(out.empirical.variance()));
    Ok(SuiteOutput {
        seed: c.seed,
        checks: vec![Check::from_gof("ks_vs_mixture", &gof, Some(&table.file))],
        metrics,
        tables: vec![table],
    })
}

/// Cells in the field used for the lag covariance check.
const LAG_FIELD_CELLS: f64 = 1e6;
const LAG_TOLERANCE: f64 = 0.02;

fn na_field(params: &mut Params, workers: Option<usize>) -> Result<SuiteOutput, CliError> {
    let c = common(params, workers)?;
    let a = params.f64("a", 0.5)?;
    let n: Vec<u64> = if params.is_given("lattice") {
        let sizes = numbers("lattice", &params.string("lattice", "")?)?;
        if sizes.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(bad("`lattice` needs positive integers"));
        }
        sizes.into_iter().map(|v| v as u64).collect()
    } else {
        let d = params.u64("d", 1)?;
        let side = params.u64("n", 10_000)?;
        if d == 0 {
            return Err(bad("`d` must be >= 1"));
        }
        vec![side; d as usize]
    };
    let d = n.len();
    let default_rho = format!("delta:{}", vec!["1"; d].join(","));
    let mixing = parse_rho(&params.string("rho", &default_rho)?)?;
    finish_parsing(params)?;

    let cfg = NAFieldConfig::new(a, n.clone(), mixing.clone());
    let out = run_na_field(&cfg, &c.plan)?;
    let gof = ks_one_sample(&out.empirical, &out.target, c.alpha);
    let table = EcdfTable::one_sample("na_field_ecdf.csv", &out.empirical, &out.target);

    let side = LAG_FIELD_CELLS.powf(1.0 / d as f64).floor().max(2.0) as u64;
    let shape = vec![side; d];
    let unit = |i: usize, k: i64| {
        let mut h = vec![0i64; d];
        h[i] = k;
        h
    };
    let mut other_lags = vec![vec![0i64; d], unit(0, 2)];
    for i in 1..d {
        other_lags.push(unit(i, 1));
        let mut diag = unit(i, 1);
        diag[0] = 1;
        other_lags.push(diag);
    }
    let mut lags = vec![unit(0, 1)];
    lags.extend(other_lags.iter().skip(1).cloned());
    lags.push(vec![0i64; d]);
    let mut rng = SeedSpec::new(c.seed, u64::MAX).rng();
    let cov = na_lag_covariances(a, &shape, &lags, &mut rng);
    let lag1 = cov[0];
    let others = &cov[1..cov.len() - 1];
    let worst_other = others.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut metrics = Map::new();
    metrics.insert("sigma2".into(), json!(out.sigma2));
    metrics.insert("lag_field_shape".into(), json!(shape));
    metrics.insert(
        "lag_covariances".into(),
        Value::Array(lags.iter().zip(&cov).map(|(h, v)| json!({"lag": h, "covariance": v})).collect()),
    );
    if let MixingLaw::Discrete(atoms) = &mixing {
        if atoms.len() == 1 {
            let m = scaled_index(&n, &atoms[0].0);
            metrics.insert("exact_finite_n_variance".into(), json!(na_exact_variance(a, &m, &n)));
        }
    }
    metrics.insert("sample_variance".into(), json!(out.empirical.variance()));
    Ok(SuiteOutput {
        seed: c.seed,
        checks: vec![
            Check::from_gof("ks_vs_mixture", &gof, Some(&table.file)),
            Check::tolerance("lag1_covariance", "abs_error_vs_minus_a", (lag1 + a).abs(), LAG_TOLERANCE),
            Check::tolerance("other_lag_covariances", "max_abs_covariance", worst_other, LAG_TOLERANCE),
        ],
        metrics,
        tables: vec![table],
    })
}

fn semistable(params: &mut Params, workers: Option<usize>) -> Result<SuiteOutput, CliError> {
    let c = common(params, workers)?;
    let ratio = params.f64("c", 2.0)?;
    let horizon = params.u64("horizon", 1 << 62)?;
    let m = params.u64("m", 40)?;
    let index = match params.string("index", "log")?.as_str() {
        "log" => SemistableIndex::LogIndex,
        s => match s.strip_prefix("fixed:").map(|k| k.trim().parse::<u64>()) {
            Some(Ok(k)) => SemistableIndex::Fixed(k),
            _ => return Err(bad(format!("`index` must be log or fixed:k, got {s:?}"))),
        },
    };
    let mixing = match params.string("mixing", "log")?.as_str() {
        "log" => BlockMixing::Logarithmic,
        "point" => BlockMixing::Point,
        s => return Err(bad(format!("`mixing` must be log or point, got {s:?}"))),
    };
    finish_parsing(params)?;
    let m = u32::try_from(m).map_err(|_| bad("`m` is too large"))?;

    let cfg = SemistableConfig { c: ratio, horizon, m, index, mixing };
    let out = run_semistable_demo(&cfg, &c.plan)?;
    let gof = ks_two_sample(&out.random_index, &out.mixture, c.alpha);
    let table = EcdfTable::two_sample("semistable_two_sample.csv", &out.random_index, &out.mixture);
    let mut checks = vec![Check::from_gof("ks_random_index_vs_block_mixture", &gof, Some(&table.file))];
    let mut tables = vec![table];
    if let Some(law) = &out.psi_law {
        let psi = ks_one_sample(&out.psi_sample, law, c.alpha);
        let psi_table = EcdfTable::one_sample("psi_marginal.csv", &out.psi_sample, law);
        checks.push(Check::from_gof("ks_psi_marginal_vs_exact_law", &psi, Some(&psi_table.file)));
        tables.push(psi_table);
    }
    let mut metrics = Map::new();
    metrics.insert("wasserstein1".into(), json!(wasserstein1(&out.random_index, &out.mixture)));
    metrics.insert("median_random_index".into(), json!(out.random_index.quantile(0.5)));
    metrics.insert("median_block_mixture".into(), json!(out.mixture.quantile(0.5)));
    Ok(SuiteOutput { seed: c.seed, checks, metrics, tables })
}

fn allocations(params: &mut Params, workers: Option<usize>) -> Result<SuiteOutput, CliError> {
    let c = common(params, workers)?;
    let r = params.u64("r", 0)?;
    let boxes = params.u64("N", 10_000)?;
    let path_name = params.string("path", "central")?;
    let r = u32::try_from(r).map_err(|_| bad("`r` is too large"))?;
    let mut lambda = || params.f64("lambda", 1.0);
    let index = match path_name.as_str() {
        "central" => AllocationIndex::Path(AllocationPath::Central),
        "sparse" => AllocationIndex::Path(AllocationPath::Sparse { lambda: lambda()? }),
        "dense" => AllocationIndex::Path(AllocationPath::Dense { lambda: lambda()? }),
        "two-point" => {
            let lambda = lambda()?;
            let second = if r == 0 { AllocationPath::Sparse { lambda } } else { AllocationPath::Dense { lambda } };
            AllocationIndex::TwoPoint { first: AllocationPath::Central, second, p_first: params.f64("p", 0.5)? }
        }
        other => return Err(bad(format!("`path` must be central, sparse, dense or two-point, got {other:?}"))),
    };
    let correction = match params.string("correction", "regime")?.as_str() {
        "regime" => LatticeCorrection::Regime,
        "off" => LatticeCorrection::Off,
        other => return Err(bad(format!("`correction` must be regime or off, got {other:?}"))),
    };
    finish_parsing(params)?;

    let cfg = AllocationConfig { r, boxes, index, correction };
    let out = run_allocations(&cfg, &c.plan)?;
    let gof = ks_one_sample(&out.empirical, &out.target, c.alpha);
    let raw = ks_one_sample(&out.raw, &out.target, c.alpha);
    let table = EcdfTable::one_sample("allocations_ecdf.csv", &out.empirical, &out.target);
    let reps = out.raw.len() as f64;
    let mut metrics = Map::new();
    metrics.insert("uncorrected_ks_distance".into(), json!(raw.value));
    metrics.insert("uncorrected_ks_critical".into(), json!(raw.critical));
    metrics.insert(
        "components".into(),
        Value::Array(
            out.components
                .iter()
                .map(|p| {
                    json!({
                        "path": format!("{:?}", p.path),
                        "weight": p.weight,
                        "balls": p.balls,
                        "limit_point": [p.limit.0, p.limit.1],
                        "limit_law": format!("{:?}", p.tag),
                        "exact_mean": p.mean,
                        "exact_variance": p.variance,
                    })
                })
                .collect(),
        ),
    );
    Ok(SuiteOutput {
        seed: c.seed,
        checks: vec![
            Check::from_gof("ks_vs_limit_law", &gof, Some(&table.file)),
            Check::tolerance("standardized_mean", "abs_sample_mean", out.raw.mean().abs(), 4.0 / reps.sqrt()),
            Check::tolerance("standardized_variance", "abs_sample_variance_minus_one", (out.raw.variance() - 1.0).abs(), 0.05),
        ],
        metrics,
        tables: vec![table],
    })
}

const PSI_SUP_TOLERANCE: f64 = 0.15;
const PSI_MONOTONE_SLACK: f64 = 1.1;
const PSI_GRID: usize = 1000;

fn psi_law(params: &mut Params) -> Result<SuiteOutput, CliError> {
    let seed = params.take_silent("seed").and_then(|v| v.as_u64()).unwrap_or(42);
    let n = params.u64("n", 1_000_000)?;
    let ratio = params.f64("c", 2.0)?;
    finish_parsing_ignoring(params, &["seed", "replicates", "alpha"])?;
    let seq = SamplingSequence::geometric(ratio).map_err(|e| bad(e.to_string()))?;
    if n == 0 {
        return Err(bad("`n` must be >= 1"));
    }

    let mut horizons = Vec::new();
    let mut h = 100u64;
    while h < n {
        horizons.push(h);
        h = h.saturating_mul(10);
    }
    horizons.push(n);
    let dists = psi_convergence(&horizons, &seq)?;
    let worst_ratio = dists.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);

    let law = PsiLaw::new(n, &seq)?;
    let log_law = transferlab::distributions::LogarithmicLaw::new(ratio).map_err(|e| bad(e.to_string()))?;
    let rows = (0..=PSI_GRID)
        .map(|i| {
            let t = 1.0 + (ratio - 1.0) * i as f64 / PSI_GRID as f64;
            [t, law.cdf(t), log_law.cdf(t)]
        })
        .collect();
    let table = EcdfTable { file: "psi_cdf.csv".into(), rows };

    let mut sup = Check::tolerance("psi_sup_distance", "sup_t_abs_cdf_difference", dists[dists.len() - 1], PSI_SUP_TOLERANCE);
    sup.csv = Some(table.file.clone());
    let mut metrics = Map::new();
    metrics.insert(
        "decades".into(),
        Value::Array(horizons.iter().zip(&dists).map(|(n, d)| json!({"n": n, "sup_distance": d})).collect()),
    );
    Ok(SuiteOutput {
        seed,
        checks: vec![sup, Check::tolerance("psi_decade_monotone", "max_successive_ratio", worst_ratio, PSI_MONOTONE_SLACK)],
        metrics,
        tables: vec![table],
    })
}

fn finish_parsing_ignoring(params: &Params, extra: &[&str]) -> Result<(), CliError> {
    let mut ignore: Vec<&str> = DRIVER_KEYS.to_vec();
    ignore.extend_from_slice(extra);
    let unused = params.unused(&ignore);
    if unused.is_empty() {
        Ok(())
    } else {
        Err(bad(format!("parameters not used by this experiment: {}", unused.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixing_laws() {
        assert_eq!(parse_rho("delta:1,1").unwrap().dim(), 2);
        assert_eq!(parse_rho("uniform:0,2").unwrap().dim(), 1);
        assert_eq!(parse_rho("uniform:0,2,1,3").unwrap().dim(), 2);
        assert_eq!(parse_rho("log:2").unwrap().dim(), 1);
        for bad in ["uniform:0", "uniform:2,1", "log:1", "beta:1,2", "delta", "delta:x"] {
            assert!(parse_rho(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_sequences() {
        assert_eq!(parse_sequence("pow2").unwrap(), SamplingSequence::powers_of_two());
        assert_eq!(parse_sequence("geometric:3").unwrap(), SamplingSequence::Geometric { ratio: 3.0 });
        assert!(parse_sequence("geometric:1").is_err());
        assert!(parse_sequence("cubes").is_err());
    }
}
