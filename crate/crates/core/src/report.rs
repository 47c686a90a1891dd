//! CSV reports.
//!
//! Every report starts with `#` comment lines echoing the canonical config,
//! the seed and a per-case summary, followed by one of two fixed schemas:
//!
//! * convergence: `case,theta,grid_point,empirical,target,abs_error,sup_error,empirical_im,target_im`
//! * checks: `case,check,point,value,reference,abs_error,bound,pass`
//!
//! Multi-dimensional grid points are written as `x1;x2;…`. Floats use the
//! shortest representation that round-trips, so equal runs give equal bytes.

use std::io::Write;

use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::error::{PhimixError, Result};

pub const CONVERGENCE_COLUMNS: [&str; 9] =
    ["case", "theta", "grid_point", "empirical", "target", "abs_error", "sup_error", "empirical_im", "target_im"];

pub const CHECK_COLUMNS: [&str; 8] = ["case", "check", "point", "value", "reference", "abs_error", "bound", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLine {
    pub case: usize,
    pub theta: f64,
    pub grid_point: Vec<f64>,
    pub empirical: Complex64,
    pub target: Complex64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// A soft check that did not hold; reported but not counted as failure.
    Warn,
    /// A diagnostic row with no verdict of its own.
    Info,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "true",
            Verdict::Fail => "false",
            Verdict::Warn => "warn",
            Verdict::Info => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub case: usize,
    pub check: String,
    pub point: Vec<f64>,
    pub value: f64,
    pub reference: f64,
    /// Usually `|value - reference|`; the complex modulus for CF rows.
    pub abs_error: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

impl CheckLine {
    /// A row whose error is `|value - reference|` and whose verdict is `error ≤ bound`.
    pub fn within(case: usize, check: impl Into<String>, point: Vec<f64>, value: f64, reference: f64, bound: f64) -> Self {
        let abs_error = (value - reference).abs();
        Self { case, check: check.into(), point, value, reference, abs_error, bound, verdict: Verdict::from_bool(abs_error <= bound) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Convergence(Vec<ConvergenceLine>),
    Checks(Vec<CheckLine>),
}

/// Outcome of one configured run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub table: Table,
    /// One line per case: what was checked and the verdict.
    pub summary: Vec<String>,
    /// Empty iff every threshold was met.
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn write_csv<W: Write>(&self, config: &ExperimentConfig, out: W) -> Result<()> {
        let io = |e: std::io::Error| PhimixError::Io(e.to_string());
        let mut out = out;
        writeln!(out, "# experiment: {}", config.kind()).map_err(io)?;
        writeln!(out, "# seed: {}", config.seed).map_err(io)?;
        writeln!(out, "# config:").map_err(io)?;
        for line in config.to_toml()?.lines() {
            if line.is_empty() {
                writeln!(out, "#").map_err(io)?;
            } else {
                writeln!(out, "#   {line}").map_err(io)?;
            }
        }
        for line in &self.summary {
            writeln!(out, "# {line}").map_err(io)?;
        }
        writeln!(out, "# result: {}", if self.pass() { "pass" } else { "fail" }).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| PhimixError::Io(e.to_string());
        match &self.table {
            Table::Convergence(lines) => {
                w.write_record(CONVERGENCE_COLUMNS).map_err(csv_err)?;
                for l in lines {
                    w.write_record([
                        l.case.to_string(),
                        num(l.theta),
                        point(&l.grid_point),
                        num(l.empirical.re),
                        num(l.target.re),
                        num((l.empirical - l.target).norm()),
                        num(l.sup_error),
                        num(l.empirical.im),
                        num(l.target.im),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Table::Checks(lines) => {
                w.write_record(CHECK_COLUMNS).map_err(csv_err)?;
                for l in lines {
                    w.write_record([
                        l.case.to_string(),
                        l.check.clone(),
                        point(&l.point),
                        num(l.value),
                        num(l.reference),
                        num(l.abs_error),
                        num(l.bound),
                        l.verdict.as_str().to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        w.flush().map_err(io)
    }

    pub fn to_csv_bytes(&self, config: &ExperimentConfig) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(config, &mut buf)?;
        Ok(buf)
    }
}

fn num(x: f64) -> String {
    // `-0` and `0` print differently; normalize so sign-of-zero noise does not leak.
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn point(p: &[f64]) -> String {
    p.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}
