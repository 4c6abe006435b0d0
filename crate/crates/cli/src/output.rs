//! Report and CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;
use transferlab::{Distribution, EmpiricalDistribution};

/// `printf("%.12g", x)`.
pub fn format_g(x: f64) -> String {
    format_g_precision(x, 12)
}

pub fn format_g_precision(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    // the exponent after rounding to p significant digits decides the style
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows `x, F_empirical, F_target, abs_diff`.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfTable {
    pub file: String,
    pub rows: Vec<[f64; 3]>,
}

impl EcdfTable {
    /// Empirical CDF against a target law at every distinct sample value.
    pub fn one_sample(file: &str, emp: &EmpiricalDistribution, target: &dyn Distribution) -> Self {
        let mut xs = emp.values().to_vec();
        xs.dedup();
        let rows = xs.into_iter().map(|x| [x, emp.cdf(x), target.cdf(x)]).collect();
        Self { file: file.into(), rows }
    }

    /// Two empirical CDFs at every distinct value of either sample; the
    /// second sample takes the target column.
    pub fn two_sample(file: &str, a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Self {
        let mut xs: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
        xs.sort_unstable_by(f64::total_cmp);
        xs.dedup();
        let rows = xs.into_iter().map(|x| [x, a.cdf(x), b.cdf(x)]).collect();
        Self { file: file.into(), rows }
    }

    pub fn render(&self) -> String {
        let mut out = String::from("x,F_empirical,F_target,abs_diff\n");
        for [x, fe, ft] in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", format_g(*x), format_g(*fe), format_g(*ft), format_g((fe - ft).abs()));
        }
        out
    }
}

/// One pass/fail decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// What the statistic measures.
    pub kind: String,
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl Check {
    pub fn from_gof(name: &str, report: &transferlab::GofReport, csv: Option<&str>) -> Self {
        Self {
            name: name.into(),
            kind: report.statistic.into(),
            statistic: report.value,
            critical: report.critical,
            pass: report.pass,
            alpha: Some(report.alpha),
            sizes: report.sizes.clone(),
            csv: csv.map(str::to_string),
        }
    }

    /// `statistic <= tolerance`.
    pub fn tolerance(name: &str, kind: &str, statistic: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
            statistic,
            critical: tolerance,
            pass: statistic <= tolerance,
            alpha: None,
            sizes: Vec::new(),
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: Map<String, Value>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    /// Wall-clock time; `null` when timing is switched off.
    pub runtime_seconds: Option<f64>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: source.to_string() }
}

/// Writes `report.json` and every table under `dir`.
pub fn write_outputs(dir: &Path, report: &Report, tables: &[EcdfTable]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    for table in tables {
        let path = dir.join(&table.file);
        fs::write(&path, table.render()).map_err(|e| io_error(&path, e))?;
    }
    let path = dir.join("report.json");
    fs::write(&path, report.to_json()).map_err(|e| io_error(&path, e))?;
    Ok(path)
}
