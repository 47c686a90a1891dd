//! Declarative experiment configuration.
//!
//! A config is a TOML document with an `experiment` key naming the kind,
//! optional `seed`, `samples` and `out`, and kind-specific keys. Unknown
//! keys are rejected at every level.
//!
//! ```toml
//! experiment = "converge-sum"
//! seed = 42
//! samples = 100000
//! thetas = [0.1, 0.01, 0.001]
//!
//! [[cases]]
//! counting = { mixing = { kind = "exponential" } }
//! increments = { kind = "stable", lambda = 1.0, alpha = 1.0 }
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{PhimixError, Result};
use crate::id_laws::StableExponent;
use crate::limits::{CheckMode, IncrementLaw, NsFamily, Norming};
use crate::mid::MidLaw;
use crate::mixing::{linspace, MixingLaw};
use crate::pgf::{CountingSpec, DEFAULT_THETAS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Pgf,
    ScaledLimit,
    ConvergeSum,
    ConvergeMax,
    MidCheck,
    MidSample,
    MixtureId,
    Subordinate,
    Classl,
    NsCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Pgf,
        ExperimentKind::ScaledLimit,
        ExperimentKind::ConvergeSum,
        ExperimentKind::ConvergeMax,
        ExperimentKind::MidCheck,
        ExperimentKind::MidSample,
        ExperimentKind::MixtureId,
        ExperimentKind::Subordinate,
        ExperimentKind::Classl,
        ExperimentKind::NsCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Pgf => "pgf",
            ExperimentKind::ScaledLimit => "scaled-limit",
            ExperimentKind::ConvergeSum => "converge-sum",
            ExperimentKind::ConvergeMax => "converge-max",
            ExperimentKind::MidCheck => "mid-check",
            ExperimentKind::MidSample => "mid-sample",
            ExperimentKind::MixtureId => "mixture-id",
            ExperimentKind::Subordinate => "subordinate",
            ExperimentKind::Classl => "classl",
            ExperimentKind::NsCheck => "ns-check",
        }
    }

    fn default_samples(&self) -> usize {
        match self {
            ExperimentKind::Classl => 20_000,
            _ => 100_000,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid given either as explicit points or as `{ lo, hi, n }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Linear(LinearGrid),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Linear(g) => linspace(g.lo, g.hi, g.n),
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let pts = self.points();
        if pts.is_empty() || pts.iter().any(|x| !x.is_finite()) {
            return Err(PhimixError::Config(format!("{what}: grid must be non-empty and finite")));
        }
        Ok(())
    }
}

fn grid_or(grid: &Option<GridSpec>, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    grid.as_ref().map(GridSpec::points).unwrap_or_else(default)
}

/// Expected verdict of a validity check, for negative fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Valid,
    Invalid,
}

fn default_thetas() -> Vec<f64> {
    DEFAULT_THETAS.to_vec()
}

fn default_m_max() -> usize {
    30
}

fn default_cf_slack() -> f64 {
    0.005
}

fn default_level() -> f64 {
    0.01
}

fn default_sum_threshold() -> f64 {
    0.02
}

fn default_scaled_threshold() -> f64 {
    1e-2
}

fn default_classl_tol() -> f64 {
    1e-8
}

fn default_mid_tol() -> f64 {
    1e-12
}

fn default_s_list() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgfCase {
    pub counting: CountingSpec,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<GridSpec>,
}

impl PgfCase {
    pub fn s_points(&self) -> Vec<f64> {
        grid_or(&self.s_grid, || (1..=9).map(|i| i as f64 / 10.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgfSpec {
    pub cases: Vec<PgfCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledLimitSpec {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_grid: Option<GridSpec>,
    #[serde(default = "default_scaled_threshold")]
    pub threshold: f64,
    pub cases: Vec<CountingSpec>,
}

impl ScaledLimitSpec {
    pub fn v_points(&self) -> Vec<f64> {
        grid_or(&self.v_grid, || linspace(0.1, 5.0, 50))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumCase {
    pub counting: CountingSpec,
    pub increments: IncrementLaw,
    #[serde(default)]
    pub norming: Norming,
    #[serde(default)]
    pub mode: CheckMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumSpec {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_sum_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub cases: Vec<SumCase>,
}

impl SumSpec {
    pub fn grid_points(&self) -> Vec<f64> {
        grid_or(&self.grid, crate::stats::cf_grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxCase {
    pub counting: CountingSpec,
    pub mid: MidLaw,
    #[serde(default)]
    pub norming: Norming,
    #[serde(default)]
    pub mode: CheckMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<GridSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxSpec {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_sum_threshold")]
    pub threshold: f64,
    pub cases: Vec<MaxCase>,
}

/// Shipped bivariate d.f.s that are not MID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MidFixture {
    Countermonotone,
    TwoAtom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidCheckCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<MidLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<MidFixture>,
    #[serde(default = "default_s_list")]
    pub s_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<GridSpec>>,
    #[serde(default)]
    pub expect: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidCheckSpec {
    #[serde(default = "default_mid_tol")]
    pub tol: f64,
    pub cases: Vec<MidCheckCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spot {
    pub at: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidSampleCase {
    pub mixing: MixingLaw,
    pub mid: MidLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<GridSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spots: Vec<Spot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidSampleSpec {
    #[serde(default = "default_level")]
    pub threshold: f64,
    pub cases: Vec<MidSampleCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureIdCase {
    pub mixing: MixingLaw,
    pub id: StableExponent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureIdSpec {
    /// CF tolerance is `3/√n + cf_slack`.
    #[serde(default = "default_cf_slack")]
    pub cf_slack: f64,
    #[serde(default = "default_level")]
    pub ks_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub cases: Vec<MixtureIdCase>,
}

impl MixtureIdSpec {
    pub fn grid_points(&self) -> Vec<f64> {
        grid_or(&self.grid, crate::stats::cf_grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubordinateCase {
    pub base: StableExponent,
    pub directing: MixingLaw,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubordinateSpec {
    #[serde(default = "default_cf_slack")]
    pub cf_slack: f64,
    /// Two-sample KS significance level for the unit-time marginal.
    #[serde(default = "default_level")]
    pub ks_level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub cases: Vec<SubordinateCase>,
}

impl SubordinateSpec {
    pub fn grid_points(&self) -> Vec<f64> {
        grid_or(&self.grid, crate::stats::cf_grid)
    }
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClasslSubject {
    /// Factor check on a mixing law's LT.
    Mixing { mixing: MixingLaw },
    /// The LT `0.5 + 0.5 e^{-s}`.
    BernoulliLt {},
    /// CF check on `(1 + ψ)^{-ν}`, optionally with a unimodality probe.
    Linnik {
        #[serde(default = "default_lambda")]
        lambda: f64,
        alpha: f64,
        #[serde(default)]
        beta: f64,
        nu: f64,
        #[serde(default)]
        unimodality: bool,
    },
    /// CF check on `e^{-λt²}`.
    Gaussian {
        #[serde(default = "one")]
        lambda: f64,
    },
    /// The CF `sin t / t`.
    UniformCf {},
    /// Builds `φ(ψ)` after the factor check, then runs the CF check on it.
    Mixture { mixing: MixingLaw, id: StableExponent },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClasslCase {
    pub subject: ClasslSubject,
    #[serde(default)]
    pub expect: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClasslSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridSpec>,
    #[serde(default = "default_classl_tol")]
    pub tol: f64,
    pub cases: Vec<ClasslCase>,
}

impl ClasslSpec {
    pub fn c_points(&self) -> Vec<f64> {
        self.c_grid.clone().unwrap_or_else(crate::classl::default_c_grid)
    }

    pub fn s_points(&self) -> Vec<f64> {
        grid_or(&self.s_grid, crate::classl::default_s_grid)
    }

    pub fn t_points(&self) -> Vec<f64> {
        grid_or(&self.t_grid, crate::classl::default_t_grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsCase {
    pub family: NsFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsSpec {
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridSpec>,
    #[serde(default = "default_scaled_threshold")]
    pub threshold: f64,
    pub cases: Vec<NsCase>,
}

impl NsSpec {
    pub fn t_points(&self) -> Vec<f64> {
        grid_or(&self.t_grid, crate::limits::default_ns_grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    Pgf(PgfSpec),
    ScaledLimit(ScaledLimitSpec),
    ConvergeSum(SumSpec),
    ConvergeMax(MaxSpec),
    MidCheck(MidCheckSpec),
    MidSample(MidSampleSpec),
    MixtureId(MixtureIdSpec),
    Subordinate(SubordinateSpec),
    Classl(ClasslSpec),
    NsCheck(NsSpec),
}

impl ExperimentSpec {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentSpec::Pgf(_) => ExperimentKind::Pgf,
            ExperimentSpec::ScaledLimit(_) => ExperimentKind::ScaledLimit,
            ExperimentSpec::ConvergeSum(_) => ExperimentKind::ConvergeSum,
            ExperimentSpec::ConvergeMax(_) => ExperimentKind::ConvergeMax,
            ExperimentSpec::MidCheck(_) => ExperimentKind::MidCheck,
            ExperimentSpec::MidSample(_) => ExperimentKind::MidSample,
            ExperimentSpec::MixtureId(_) => ExperimentKind::MixtureId,
            ExperimentSpec::Subordinate(_) => ExperimentKind::Subordinate,
            ExperimentSpec::Classl(_) => ExperimentKind::Classl,
            ExperimentSpec::NsCheck(_) => ExperimentKind::NsCheck,
        }
    }

    fn case_count(&self) -> usize {
        match self {
            ExperimentSpec::Pgf(s) => s.cases.len(),
            ExperimentSpec::ScaledLimit(s) => s.cases.len(),
            ExperimentSpec::ConvergeSum(s) => s.cases.len(),
            ExperimentSpec::ConvergeMax(s) => s.cases.len(),
            ExperimentSpec::MidCheck(s) => s.cases.len(),
            ExperimentSpec::MidSample(s) => s.cases.len(),
            ExperimentSpec::MixtureId(s) => s.cases.len(),
            ExperimentSpec::Subordinate(s) => s.cases.len(),
            ExperimentSpec::Classl(s) => s.cases.len(),
            ExperimentSpec::NsCheck(s) => s.cases.len(),
        }
    }

    fn to_value(&self) -> Result<toml::Value> {
        let v = match self {
            ExperimentSpec::Pgf(s) => toml::Value::try_from(s),
            ExperimentSpec::ScaledLimit(s) => toml::Value::try_from(s),
            ExperimentSpec::ConvergeSum(s) => toml::Value::try_from(s),
            ExperimentSpec::ConvergeMax(s) => toml::Value::try_from(s),
            ExperimentSpec::MidCheck(s) => toml::Value::try_from(s),
            ExperimentSpec::MidSample(s) => toml::Value::try_from(s),
            ExperimentSpec::MixtureId(s) => toml::Value::try_from(s),
            ExperimentSpec::Subordinate(s) => toml::Value::try_from(s),
            ExperimentSpec::Classl(s) => toml::Value::try_from(s),
            ExperimentSpec::NsCheck(s) => toml::Value::try_from(s),
        };
        v.map_err(|e| PhimixError::Config(e.to_string()))
    }
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub spec: ExperimentSpec,
}

fn take<T: DeserializeOwned>(table: &mut toml::Table, key: &str) -> Result<Option<T>> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => v
            .try_into()
            .map(Some)
            .map_err(|e| PhimixError::Config(format!("key `{key}`: {e}"))),
    }
}

fn parse_spec<T: DeserializeOwned>(rest: toml::Table) -> Result<T> {
    toml::Value::Table(rest).try_into().map_err(|e: toml::de::Error| PhimixError::Config(e.to_string()))
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        self.spec.kind()
    }

    /// Effective sample count: the config value or the kind's default.
    pub fn samples(&self) -> usize {
        self.samples.unwrap_or_else(|| self.kind().default_samples())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| PhimixError::Config(e.to_string()))?;
        let kind: ExperimentKind =
            take(&mut table, "experiment")?.ok_or_else(|| PhimixError::Config("missing key `experiment`".into()))?;
        let seed = take(&mut table, "seed")?.unwrap_or(0);
        let samples = take(&mut table, "samples")?;
        let out = take(&mut table, "out")?;
        let spec = match kind {
            ExperimentKind::Pgf => ExperimentSpec::Pgf(parse_spec(table)?),
            ExperimentKind::ScaledLimit => ExperimentSpec::ScaledLimit(parse_spec(table)?),
            ExperimentKind::ConvergeSum => ExperimentSpec::ConvergeSum(parse_spec(table)?),
            ExperimentKind::ConvergeMax => ExperimentSpec::ConvergeMax(parse_spec(table)?),
            ExperimentKind::MidCheck => ExperimentSpec::MidCheck(parse_spec(table)?),
            ExperimentKind::MidSample => ExperimentSpec::MidSample(parse_spec(table)?),
            ExperimentKind::MixtureId => ExperimentSpec::MixtureId(parse_spec(table)?),
            ExperimentKind::Subordinate => ExperimentSpec::Subordinate(parse_spec(table)?),
            ExperimentKind::Classl => ExperimentSpec::Classl(parse_spec(table)?),
            ExperimentKind::NsCheck => ExperimentSpec::NsCheck(parse_spec(table)?),
        };
        let config = Self { seed, samples, out, spec };
        config.validate()?;
        Ok(config)
    }

    /// Structural checks that do not depend on running anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PhimixError::Config(msg));
        if self.spec.case_count() == 0 {
            return bad("at least one [[cases]] entry is required".into());
        }
        if self.samples == Some(0) {
            return bad("samples must be positive".into());
        }
        let check_thetas = |thetas: &[f64]| -> Result<()> {
            if thetas.is_empty() || thetas.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return bad("thetas must be positive".into());
            }
            if !thetas.windows(2).all(|w| w[1] < w[0]) {
                return bad("thetas must be strictly decreasing".into());
            }
            Ok(())
        };
        let sequence_counting = |c: &CountingSpec| -> Result<()> {
            if c.theta.is_some() {
                return bad("counting.theta is not used here; θ comes from `thetas`".into());
            }
            if c.stride == 0 {
                return bad("counting.stride must be at least 1".into());
            }
            Ok(())
        };
        match &self.spec {
            ExperimentSpec::Pgf(s) => {
                for c in &s.cases {
                    if c.counting.theta.is_none() {
                        return bad("pgf cases need counting.theta".into());
                    }
                    if let Some(g) = &c.s_grid {
                        g.validate("s_grid")?;
                    }
                }
            }
            ExperimentSpec::ScaledLimit(s) => {
                check_thetas(&s.thetas)?;
                s.cases.iter().try_for_each(sequence_counting)?;
            }
            ExperimentSpec::ConvergeSum(s) => {
                check_thetas(&s.thetas)?;
                if let Some(g) = &s.grid {
                    g.validate("grid")?;
                }
                for c in &s.cases {
                    sequence_counting(&c.counting)?;
                    c.increments.validate()?;
                }
            }
            ExperimentSpec::ConvergeMax(s) => {
                check_thetas(&s.thetas)?;
                for c in &s.cases {
                    sequence_counting(&c.counting)?;
                    if let Some(axes) = &c.axes {
                        if axes.len() != c.mid.dim() {
                            return bad(format!("{} axes given for a {}-dimensional law", axes.len(), c.mid.dim()));
                        }
                    }
                }
            }
            ExperimentSpec::MidCheck(s) => {
                for c in &s.cases {
                    if c.mid.is_some() == c.fixture.is_some() {
                        return bad("each mid-check case needs exactly one of `mid` or `fixture`".into());
                    }
                }
            }
            ExperimentSpec::MidSample(_) | ExperimentSpec::MixtureId(_) => {}
            ExperimentSpec::Subordinate(s) => {
                for c in &s.cases {
                    crate::subordination::SubordinatedSpec::new(c.base, c.directing, c.times.clone())
                        .map_err(|e| PhimixError::Config(e.to_string()))?;
                }
            }
            ExperimentSpec::Classl(s) => {
                if s.c_points().iter().any(|&c| !(c > 0.0 && c < 1.0)) {
                    return bad("c_grid must lie in (0, 1)".into());
                }
            }
            ExperimentSpec::NsCheck(s) => {
                check_thetas(&s.thetas)?;
                for c in &s.cases {
                    c.family.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Canonical TOML form, with the effective sample count filled in. The
    /// output path is not part of the echo so that reports do not depend on it.
    pub fn to_toml(&self) -> Result<String> {
        let mut table = toml::Table::new();
        table.insert("experiment".into(), toml::Value::String(self.kind().name().into()));
        table.insert("seed".into(), toml::Value::Integer(self.seed as i64));
        table.insert("samples".into(), toml::Value::Integer(self.samples() as i64));
        if let toml::Value::Table(spec) = self.spec.to_value()? {
            table.extend(spec);
        }
        toml::to_string(&table).map_err(|e| PhimixError::Config(e.to_string()))
    }
}

/// Example configs shipped with the crate, one per acceptance criterion.
pub const EXAMPLES: [(&str, &str); 11] = [
    ("c01-mixture-id", include_str!("../configs/c01-mixture-id.toml")),
    ("c02-pgf", include_str!("../configs/c02-pgf.toml")),
    ("c03-scaled-limit", include_str!("../configs/c03-scaled-limit.toml")),
    ("c04-converge-sum", include_str!("../configs/c04-converge-sum.toml")),
    ("c05-mid-sample", include_str!("../configs/c05-mid-sample.toml")),
    ("c06-converge-max", include_str!("../configs/c06-converge-max.toml")),
    ("c07-subordinate", include_str!("../configs/c07-subordinate.toml")),
    ("c08-classl", include_str!("../configs/c08-classl.toml")),
    ("c09-mid-check", include_str!("../configs/c09-mid-check.toml")),
    ("c10-ns-check", include_str!("../configs/c10-ns-check.toml")),
    ("c11-reproducibility", include_str!("../configs/c11-reproducibility.toml")),
];

pub fn example(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
