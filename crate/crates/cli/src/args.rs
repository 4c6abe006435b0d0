//! Command line, config file, and the merged parameter set.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Number, Value};

use crate::CliError;

pub const EXPERIMENTS: [&str; 5] = ["random-sum", "na-field", "semistable", "allocations", "psi-law"];

#[derive(Debug, Parser)]
#[command(name = "transferlab", version, about = "Monte Carlo checks of transfer theorems for randomly indexed families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write report.json plus CSV tables.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Timing {
    On,
    Off,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Experiment id.
    #[arg(long, value_parser = EXPERIMENTS)]
    pub experiment: Option<String>,
    /// Flat JSON object of parameters; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Significance level of the KS checks.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Worker threads; not part of the report.
    #[arg(long)]
    pub workers: Option<u64>,
    /// Record wall-clock time (`off` writes null, for byte-stable reports).
    #[arg(long, value_enum)]
    pub timing: Option<Timing>,
    /// Stage, horizon or lattice size, depending on the experiment.
    #[arg(long)]
    pub n: Option<u64>,
    /// Number of boxes.
    #[arg(long = "N")]
    pub big_n: Option<u64>,
    /// Block ratio.
    #[arg(long)]
    pub c: Option<f64>,
    /// Occupancy level.
    #[arg(long)]
    pub r: Option<u64>,
    /// Allocation path: central, sparse, dense, two-point.
    #[arg(long)]
    pub path: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Weight of the central component of a two-point index.
    #[arg(long)]
    pub p: Option<f64>,
    /// Field dimension.
    #[arg(long)]
    pub d: Option<u64>,
    /// Moving-difference coefficient.
    #[arg(long)]
    pub a: Option<f64>,
    /// Field lattice size per axis, comma separated.
    #[arg(long)]
    pub lattice: Option<String>,
    /// Mixing law: delta:t1,..,td | uniform:lo1,hi1,..,lod,hid | log:c.
    #[arg(long)]
    pub rho: Option<String>,
    /// Sampling sequence: pow2, square, identity, geometric:c.
    #[arg(long = "k-seq")]
    pub k_seq: Option<String>,
    /// Row of the triangular array.
    #[arg(long)]
    pub stage: Option<u64>,
    /// Horizon of the logarithmic index law.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Fixed block exponent on the mixture side.
    #[arg(long)]
    pub m: Option<u64>,
    /// Random index law: log or fixed:k.
    #[arg(long)]
    pub index: Option<String>,
    /// Position law inside the fixed block: log or point.
    #[arg(long)]
    pub mixing: Option<String>,
    /// Lattice correction for allocation counts: regime or off.
    #[arg(long)]
    pub correction: Option<String>,
}

const KNOWN_KEYS: [&str; 25] = [
    "experiment", "out", "seed", "replicates", "alpha", "workers", "timing", "n", "N", "c", "r", "path", "lambda", "p",
    "d", "a", "lattice", "rho", "k_seq", "stage", "horizon", "m", "index", "mixing", "correction",
];

fn float(key: &str, v: f64) -> Result<Value, CliError> {
    Number::from_f64(v).map(Value::Number).ok_or_else(|| CliError::Config(format!("`{key}` must be finite, got {v}")))
}

/// Parameters after merging the config file with flags.
#[derive(Debug, Clone, Default)]
pub struct Params {
    given: BTreeMap<String, Value>,
    used: BTreeMap<String, Value>,
}

impl Params {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        let mut given = BTreeMap::new();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?;
            let Value::Object(map) = doc else {
                return Err(CliError::Config("config must be a flat JSON object".into()));
            };
            for (k, v) in map {
                if !KNOWN_KEYS.contains(&k.as_str()) {
                    return Err(CliError::Config(format!("unknown config key `{k}`")));
                }
                if v.is_object() || v.is_array() || v.is_null() {
                    return Err(CliError::Config(format!("config key `{k}` must hold a number, string or boolean")));
                }
                given.insert(k, v);
            }
        }
        let mut set = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                given.insert(k.to_string(), v);
            }
        };
        set("experiment", args.experiment.clone().map(Value::from));
        set("out", args.out.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        set("seed", args.seed.map(Value::from));
        set("replicates", args.replicates.map(Value::from));
        set("alpha", args.alpha.map(|v| float("alpha", v)).transpose()?);
        set("workers", args.workers.map(Value::from));
        set("timing", args.timing.map(|t| Value::from(if t == Timing::On { "on" } else { "off" })));
        set("n", args.n.map(Value::from));
        set("N", args.big_n.map(Value::from));
        set("c", args.c.map(|v| float("c", v)).transpose()?);
        set("r", args.r.map(Value::from));
        set("path", args.path.clone().map(Value::from));
        set("lambda", args.lambda.map(|v| float("lambda", v)).transpose()?);
        set("p", args.p.map(|v| float("p", v)).transpose()?);
        set("d", args.d.map(Value::from));
        set("a", args.a.map(|v| float("a", v)).transpose()?);
        set("lattice", args.lattice.clone().map(Value::from));
        set("rho", args.rho.clone().map(Value::from));
        set("k_seq", args.k_seq.clone().map(Value::from));
        set("stage", args.stage.map(Value::from));
        set("horizon", args.horizon.map(Value::from));
        set("m", args.m.map(Value::from));
        set("index", args.index.clone().map(Value::from));
        set("mixing", args.mixing.clone().map(Value::from));
        set("correction", args.correction.clone().map(Value::from));
        Ok(Self { given, used: BTreeMap::new() })
    }

    pub fn is_given(&self, key: &str) -> bool {
        self.given.contains_key(key)
    }

    fn take(&mut self, key: &str, default: Value) -> Value {
        let v = self.given.get(key).cloned().unwrap_or(default);
        self.used.insert(key.to_string(), v.clone());
        v
    }

    /// Like [`Params::take`] but kept out of the config echo.
    pub fn take_silent(&self, key: &str) -> Option<Value> {
        self.given.get(key).cloned()
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.take(key, Value::from(default)) {
            Value::Number(n) => n.as_u64().ok_or_else(|| CliError::Config(format!("`{key}` must be a nonnegative integer, got {n}"))),
            Value::String(s) => s.trim().parse().map_err(|_| CliError::Config(format!("`{key}` must be a nonnegative integer, got {s:?}"))),
            other => Err(CliError::Config(format!("`{key}` must be a nonnegative integer, got {other}"))),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = match self.take(key, float(key, default)?) {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.trim().parse().ok(),
            _ => None,
        };
        match v {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(CliError::Config(format!("`{key}` must be a finite number"))),
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String, CliError> {
        match self.take(key, Value::from(default)) {
            Value::String(s) => Ok(s),
            other => Err(CliError::Config(format!("`{key}` must be a string, got {other}"))),
        }
    }

    /// Keys that were given but not read by the experiment.
    pub fn unused(&self, ignore: &[&str]) -> Vec<String> {
        self.given.keys().filter(|k| !self.used.contains_key(*k) && !ignore.contains(&k.as_str())).cloned().collect()
    }

    /// Every parameter the experiment read, with its final value.
    pub fn echo(&self) -> Map<String, Value> {
        self.used.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 7, "r": 2, "path": "dense"}"#).unwrap();
        let args = RunArgs { config: Some(path), seed: Some(9), ..RunArgs::default() };
        let mut p = Params::from_args(&args).unwrap();
        assert_eq!(p.u64("seed", 0).unwrap(), 9);
        assert_eq!(p.u64("r", 0).unwrap(), 2);
        assert_eq!(p.string("path", "central").unwrap(), "dense");
        assert_eq!(p.f64("lambda", 1.5).unwrap(), 1.5);
        assert_eq!(p.echo().len(), 4);
    }

    #[test]
    fn rejects_bad_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sed": 7}"#).unwrap();
        let args = RunArgs { config: Some(path.clone()), ..RunArgs::default() };
        assert!(Params::from_args(&args).is_err());
        std::fs::write(&path, "[1, 2]").unwrap();
        assert!(Params::from_args(&args).is_err());
        std::fs::write(&path, "{not json").unwrap();
        assert!(Params::from_args(&args).is_err());
    }
}
