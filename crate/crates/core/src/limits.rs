//! Sums and maxima of a random number `N_θ` of i.i.d. terms.
//!
//! With `N_θ` from the PGF family and increments whose CF satisfies
//! `(1 - g_θ(t))/θ → ψ(t)` after norming, the normalized `N_θ`-sum has the
//! limit CF `φ(cψ)`; for maxima the limit d.f. is `φ(-c log H)`. The factor
//! `c` depends on the norming rule (see [`Norming`]). The experiments here
//! draw the sums and maxima directly and report per-θ sup distances to the
//! analytic limit, which is how convergence is witnessed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};

use crate::error::{require, PhimixError, Result};
use crate::id_laws::{Exponent, StableExponent, StableSampler};
use crate::mid::{frechet_axis, MidKind, MidLaw};
use crate::mixing::{linspace, Mixing, MixingKind, MixingLaw};
use crate::pgf::PgfFamily;
use crate::rng::SeedStream;
use crate::stats::{empirical_cf, empirical_joint_df, ks_distance};

/// A source of random term counts.
pub trait CountSampler {
    fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64;
    fn mean_count(&self) -> f64;
}

impl CountSampler for PgfFamily<MixingLaw> {
    fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.sample(rng)
    }

    fn mean_count(&self) -> f64 {
        self.shift() as f64 + self.stride() as f64 * self.mixing().mean() / self.theta()
    }
}

/// Pass-through counting: always exactly `n` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedCount(pub u64);

impl CountSampler for FixedCount {
    fn sample_count<R: Rng + ?Sized>(&self, _rng: &mut R) -> u64 {
        self.0
    }

    fn mean_count(&self) -> f64 {
        self.0 as f64
    }
}

/// `(Σ_{i ≤ N} X_i)/a - N·b`; an empty sum gives 0.
pub fn random_sum_sample<C, R, F>(counting: &C, increment: F, a: f64, b: f64, rng: &mut R) -> f64
where
    C: CountSampler + ?Sized,
    R: Rng + ?Sized,
    F: Fn(&mut R) -> f64,
{
    let n = counting.sample_count(rng);
    let mut total = 0.0;
    for _ in 0..n {
        total += increment(rng);
    }
    total / a - n as f64 * b
}

/// Component-wise maximum of `N ≥ 1` vectors, normalized as `(M_i - b_i)/a_i`.
///
/// Draws with `N = 0` are discarded and `N` is redrawn; the number of
/// discarded draws is returned alongside the vector.
pub fn random_max_sample<C, R, F>(counting: &C, draw: F, a: &[f64], b: &[f64], rng: &mut R) -> (Vec<f64>, u64)
where
    C: CountSampler + ?Sized,
    R: Rng + ?Sized,
    F: Fn(&mut R, &mut [f64]),
{
    let d = a.len();
    let mut redraws = 0;
    let n = loop {
        let n = counting.sample_count(rng);
        if n > 0 {
            break n;
        }
        redraws += 1;
    };
    let mut best = vec![f64::NEG_INFINITY; d];
    let mut cur = vec![0.0; d];
    for _ in 0..n {
        draw(rng, &mut cur);
        for (m, &x) in best.iter_mut().zip(&cur) {
            *m = m.max(x);
        }
    }
    for ((m, &ai), &bi) in best.iter_mut().zip(a).zip(b) {
        *m = (*m - bi) / ai;
    }
    (best, redraws)
}

/// Classical stable norming `a(θ) = θ^{-1/α}`, `b(θ) = 0`.
pub fn attraction_norming(alpha: f64, theta: f64) -> Result<(f64, f64)> {
    require(alpha > 0.0 && alpha <= 2.0, || format!("index α must lie in (0, 2], got {alpha}"))?;
    require(theta.is_finite() && theta > 0.0, || format!("θ must be positive, got {theta}"))?;
    Ok((theta.powf(-1.0 / alpha), 0.0))
}

/// How the number of terms `m(θ)` entering the norming is chosen.
///
/// Sums are divided by `m^{1/α}`; maxima use the max-domain norming for `m`
/// terms. The resulting limit is `φ(c·ψ)` (resp. `φ(-c log H)`):
///
/// | rule         | `m(θ)`    | `c`       |
/// |--------------|-----------|-----------|
/// | `attraction` | `1/θ`     | `k`       |
/// | `k-adjusted` | `k/θ`     | `1`       |
/// | `mean-count` | `E[N_θ]`  | `1/E[Z]`  |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norming {
    #[default]
    Attraction,
    KAdjusted,
    MeanCount,
}

impl Norming {
    pub fn terms(&self, family: &PgfFamily<MixingLaw>) -> f64 {
        match self {
            Norming::Attraction => 1.0 / family.theta(),
            Norming::KAdjusted => family.stride() as f64 / family.theta(),
            Norming::MeanCount => family.mean_count(),
        }
    }

    pub fn limit_factor(&self, mixing: &MixingLaw, stride: u32) -> f64 {
        match self {
            Norming::Attraction => stride as f64,
            Norming::KAdjusted => 1.0,
            Norming::MeanCount => 1.0 / mixing.mean(),
        }
    }
}

/// Increment laws for sum experiments, each with its limit exponent `ψ`
/// under the norming `m^{1/α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IncrementLaw {
    /// Strictly stable: the limit exponent is the law's own `ψ`.
    Stable {
        lambda: f64,
        alpha: f64,
        #[serde(default)]
        beta: f64,
    },
    /// Exponential with mean `μ`: `ψ(t) = -iμt`, index 1.
    Exponential { mean: f64 },
    /// Uniform on `(-h, h)`: `ψ(t) = h²t²/6`, index 2.
    Uniform { half_width: f64 },
}

impl IncrementLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            IncrementLaw::Stable { lambda, alpha, beta } => StableExponent::new(lambda, alpha, beta)?.sampler().map(|_| ()),
            IncrementLaw::Exponential { mean } => {
                require(mean.is_finite() && mean > 0.0, || format!("exponential mean must be positive, got {mean}"))
            }
            IncrementLaw::Uniform { half_width } => require(half_width.is_finite() && half_width > 0.0, || {
                format!("uniform half-width must be positive, got {half_width}")
            }),
        }
    }

    pub fn index(&self) -> f64 {
        match *self {
            IncrementLaw::Stable { alpha, .. } => alpha,
            IncrementLaw::Exponential { .. } => 1.0,
            IncrementLaw::Uniform { .. } => 2.0,
        }
    }

    pub fn limit_psi(&self, t: f64) -> Complex64 {
        match *self {
            IncrementLaw::Stable { lambda, alpha, beta } => {
                StableExponent::new(lambda, alpha, beta).expect("validated").psi(t)
            }
            IncrementLaw::Exponential { mean } => Complex64::new(0.0, -mean * t),
            IncrementLaw::Uniform { half_width } => Complex64::new(half_width * half_width * t * t / 6.0, 0.0),
        }
    }

    fn sampler(&self) -> Result<IncrementSampler> {
        self.validate()?;
        Ok(match *self {
            IncrementLaw::Stable { lambda, alpha, beta } => {
                IncrementSampler::Stable(StableExponent::new(lambda, alpha, beta)?.sampler()?)
            }
            IncrementLaw::Exponential { mean } => IncrementSampler::Exponential(mean),
            IncrementLaw::Uniform { half_width } => IncrementSampler::Uniform(half_width),
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum IncrementSampler {
    Stable(StableSampler),
    Exponential(f64),
    Uniform(f64),
}

impl IncrementSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            IncrementSampler::Stable(s) => s.sample(rng),
            IncrementSampler::Exponential(mean) => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            IncrementSampler::Uniform(h) => h * (2.0 * rng.sample::<f64, _>(Open01) - 1.0),
        }
    }
}

/// One grid point of a convergence report. For d.f. experiments the
/// imaginary parts are zero and `point` has one coordinate per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValue {
    pub point: Vec<f64>,
    pub empirical: Complex64,
    pub target: Complex64,
}

impl GridValue {
    pub fn abs_error(&self) -> f64 {
        (self.empirical - self.target).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub theta: f64,
    /// The count `m(θ)` used for norming.
    pub norming_terms: f64,
    pub values: Vec<GridValue>,
    pub sup_error: f64,
    /// KS distance to the limit d.f., where it has a closed form.
    pub ks: Option<f64>,
    /// Fraction of count draws discarded because `N = 0` (maxima only).
    pub zero_count_rate: f64,
}

/// Whether the θ sequence should show convergence or an exact identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// Distances strictly decrease and the last one is below the threshold.
    #[default]
    Limit,
    /// Every distance is below the threshold.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Distance of a direct sample from the limit law to its own analytic
    /// CF or d.f., with the same `n` and grid.
    pub noise_floor: f64,
    pub decreasing: bool,
    pub final_below_threshold: bool,
    pub ks_pass: Option<bool>,
    pub pass: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn validate_thetas(thetas: &[f64]) -> Result<()> {
    require(!thetas.is_empty(), || "θ sequence is empty".into())?;
    require(thetas.iter().all(|t| t.is_finite() && *t > 0.0), || "θ values must be positive".into())?;
    require(strictly_decreasing(thetas), || "θ sequence must be strictly decreasing".into())
}

fn finish(
    rows: Vec<ConvergenceRow>,
    noise_floor: f64,
    mode: CheckMode,
    threshold: f64,
    ks_threshold: Option<f64>,
) -> ConvergenceReport {
    let errors: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let decreasing = strictly_decreasing(&errors);
    let final_below_threshold = errors.last().is_some_and(|&e| e < threshold);
    let ks_rows: Box<dyn Iterator<Item = &ConvergenceRow>> = match mode {
        CheckMode::Limit => Box::new(rows.last().into_iter()),
        CheckMode::Exact => Box::new(rows.iter()),
    };
    let ks_pass = ks_threshold.map(|k| {
        let mut any = false;
        let ok = ks_rows.into_iter().all(|r| {
            any = true;
            r.ks.is_some_and(|d| d < k)
        });
        ok && any
    });
    let converged = match mode {
        CheckMode::Limit => decreasing && final_below_threshold,
        CheckMode::Exact => errors.iter().all(|&e| e < threshold),
    };
    let pass = converged && ks_pass.unwrap_or(true);
    ConvergenceReport { rows, noise_floor, decreasing, final_below_threshold, ks_pass, pass }
}

/// `N_θ`-sums of i.i.d. increments for a decreasing θ sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SumExperiment {
    pub mixing: MixingLaw,
    pub shift: u32,
    pub stride: u32,
    pub increments: IncrementLaw,
    pub norming: Norming,
    pub thetas: Vec<f64>,
    pub samples: usize,
    pub grid: Vec<f64>,
    pub threshold: f64,
    pub mode: CheckMode,
    /// KS bound against the limit d.f. (exponential increments only).
    pub ks_threshold: Option<f64>,
}

impl SumExperiment {
    pub fn limit_factor(&self) -> f64 {
        self.norming.limit_factor(&self.mixing, self.stride)
    }

    /// `φ(c·ψ(t))`.
    pub fn target_cf(&self, t: f64) -> Complex64 {
        let z = self.limit_factor() * self.increments.limit_psi(t);
        self.mixing.lt_complex(z).expect("Re ψ ≥ 0 keeps 1 + σcψ off the branch cut")
    }

    /// D.f. of the limit law where closed-form: exponential increments with
    /// gamma or exponential mixing, whose limit is `μcZ`.
    pub fn target_df(&self) -> Option<impl Fn(f64) -> f64> {
        let IncrementLaw::Exponential { mean } = self.increments else {
            return None;
        };
        let (shape, scale) = match *self.mixing.kind() {
            MixingKind::Gamma { shape, scale } => (shape, scale),
            MixingKind::Exponential { scale } => (1.0, scale),
            MixingKind::Degenerate { .. } => return None,
        };
        let dist = GammaDist::new(shape, 1.0 / (scale * mean * self.limit_factor())).ok()?;
        Some(move |x: f64| if x <= 0.0 { 0.0 } else { dist.cdf(x) })
    }

    fn sample_limit<R: Rng + ?Sized>(&self, sampler: &LimitSampler, rng: &mut R) -> f64 {
        let z = self.limit_factor() * self.mixing.sample(rng);
        match sampler {
            LimitSampler::Scale(s) => z.powf(1.0 / self.increments.index()) * s.sample(rng),
            LimitSampler::Drift(mean) => mean * z,
        }
    }

    fn validate(&self) -> Result<()> {
        self.increments.validate()?;
        validate_thetas(&self.thetas)?;
        require(self.stride >= 1, || "stride k must be at least 1".into())?;
        require(self.samples >= 1, || "sample count must be positive".into())?;
        require(!self.grid.is_empty(), || "t grid is empty".into())
    }

    pub fn run(&self, stream: &SeedStream, workers: usize) -> Result<ConvergenceReport> {
        self.validate()?;
        let sampler = self.increments.sampler()?;
        let alpha = self.increments.index();
        let target: Vec<Complex64> = self.grid.iter().map(|&t| self.target_cf(t)).collect();
        let target_df = self.target_df();
        let distance = |xs: &[f64]| -> (Vec<GridValue>, f64) {
            let values: Vec<GridValue> = self
                .grid
                .iter()
                .zip(&target)
                .map(|(&t, &target)| GridValue { point: vec![t], empirical: empirical_cf(xs, t), target })
                .collect();
            let sup = values.iter().map(GridValue::abs_error).fold(0.0, f64::max);
            (values, sup)
        };
        let mut rows = Vec::with_capacity(self.thetas.len());
        for (i, &theta) in self.thetas.iter().enumerate() {
            let family = PgfFamily::new(self.mixing, self.shift, self.stride, theta)?;
            let terms = self.norming.terms(&family);
            let a = terms.powf(1.0 / alpha);
            let xs = stream
                .child(i as u64)
                .sample(self.samples, workers, |r| random_sum_sample(&family, |r| sampler.sample(r), a, 0.0, r));
            let (values, sup_error) = distance(&xs);
            let ks = target_df.as_ref().map(|f| ks_distance(&xs, f));
            rows.push(ConvergenceRow { theta, norming_terms: terms, values, sup_error, ks, zero_count_rate: 0.0 });
        }
        let limit = match self.increments {
            IncrementLaw::Exponential { mean } => LimitSampler::Drift(mean),
            IncrementLaw::Stable { lambda, alpha, beta } => {
                LimitSampler::Scale(StableExponent::new(lambda, alpha, beta)?.sampler()?)
            }
            IncrementLaw::Uniform { half_width } => {
                LimitSampler::Scale(StableExponent::new(half_width * half_width / 6.0, 2.0, 0.0)?.sampler()?)
            }
        };
        let direct = stream.child(u64::MAX).sample(self.samples, workers, |r| self.sample_limit(&limit, r));
        let noise_floor = distance(&direct).1;
        Ok(finish(rows, noise_floor, self.mode, self.threshold, self.ks_threshold))
    }
}

enum LimitSampler {
    /// `(cZ)^{1/α} S` with `S` from the limit exponent.
    Scale(StableSampler),
    /// `μcZ`.
    Drift(f64),
}

/// `N_θ`-maxima of i.i.d. vectors drawn from a product MID law.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxExperiment {
    pub mixing: MixingLaw,
    pub shift: u32,
    pub stride: u32,
    pub mid: MidLaw,
    pub norming: Norming,
    pub thetas: Vec<f64>,
    pub samples: usize,
    pub axes: Vec<Vec<f64>>,
    pub threshold: f64,
    pub mode: CheckMode,
}

impl MaxExperiment {
    /// Per-axis default grid: `{0.25, …, 16}` for Fréchet, `[-1, 3]` for the
    /// Gumbel-domain exponential law.
    pub fn default_axes(mid: &MidLaw) -> Vec<Vec<f64>> {
        let axis = if mid.is_frechet() { frechet_axis() } else { linspace(-1.0, 3.0, 7) };
        vec![axis; mid.dim()]
    }

    /// Norming constants `(a_i, b_i)` for `m` terms: Fréchet `a_i = m^{1/γ_i}`,
    /// `b_i = l_i`; exponential `a_i = 1`, `b_i = l_i + ln(m)/r_i`.
    pub fn norming_constants(&self, m: f64) -> (Vec<f64>, Vec<f64>) {
        match self.mid.kind() {
            MidKind::ProductFrechet { gamma, .. } => {
                (gamma.iter().map(|g| m.powf(1.0 / g)).collect(), self.mid.lower().to_vec())
            }
            MidKind::ProductExponential { rate, .. } => (
                vec![1.0; rate.len()],
                rate.iter().zip(self.mid.lower()).map(|(r, l)| l + m.ln() / r).collect(),
            ),
        }
    }

    /// `-log` of the max-domain limit of `H^m` under the norming above.
    pub fn limit_neg_log(&self, x: &[f64]) -> f64 {
        match self.mid.kind() {
            MidKind::ProductFrechet { gamma, .. } => {
                let mut s = 0.0;
                for (&xi, g) in x.iter().zip(gamma) {
                    if !(xi > 0.0) {
                        return f64::INFINITY;
                    }
                    s += xi.powf(-g);
                }
                s
            }
            MidKind::ProductExponential { rate, .. } => x.iter().zip(rate).map(|(&xi, r)| (-r * xi).exp()).sum(),
        }
    }

    /// `φ(c·(-log H_lim(x)))`.
    pub fn target_df(&self, x: &[f64]) -> f64 {
        let s = self.limit_neg_log(x);
        if s.is_finite() {
            self.mixing.lt_eval(self.norming.limit_factor(&self.mixing, self.stride) * s).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        validate_thetas(&self.thetas)?;
        require(self.stride >= 1, || "stride k must be at least 1".into())?;
        require(self.samples >= 1, || "sample count must be positive".into())?;
        require(self.axes.len() == self.mid.dim(), || {
            format!("grid has {} axes for a {}-dimensional law", self.axes.len(), self.mid.dim())
        })?;
        require(self.axes.iter().all(|a| !a.is_empty()), || "grid axes must be non-empty".into())
    }

    fn grid_points(&self) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        crate::mid::for_each_index(&self.axes, |idx| {
            pts.push(idx.iter().zip(&self.axes).map(|(&i, a)| a[i]).collect());
        });
        pts
    }

    pub fn run(&self, stream: &SeedStream, workers: usize) -> Result<ConvergenceReport> {
        self.validate()?;
        let d = self.mid.dim();
        let points = self.grid_points();
        let target: Vec<f64> = points.iter().map(|x| self.target_df(x)).collect();
        let distance = |flat: &[f64]| -> (Vec<GridValue>, f64) {
            let values: Vec<GridValue> = points
                .iter()
                .zip(&target)
                .map(|(x, &t)| GridValue {
                    point: x.clone(),
                    empirical: Complex64::new(empirical_joint_df(flat, x), 0.0),
                    target: Complex64::new(t, 0.0),
                })
                .collect();
            let sup = values.iter().map(GridValue::abs_error).fold(0.0, f64::max);
            (values, sup)
        };
        let draw = |r: &mut rand_chacha::ChaCha8Rng, out: &mut [f64]| self.mid.sample_power(1.0, r, out);
        let mut rows = Vec::with_capacity(self.thetas.len());
        for (i, &theta) in self.thetas.iter().enumerate() {
            let family = PgfFamily::new(self.mixing, self.shift, self.stride, theta)?;
            let terms = self.norming.terms(&family);
            let (a, b) = self.norming_constants(terms);
            let draws = stream
                .child(i as u64)
                .sample(self.samples, workers, |r| random_max_sample(&family, draw, &a, &b, r));
            let redraws: u64 = draws.iter().map(|(_, k)| k).sum();
            let flat: Vec<f64> = draws.into_iter().flat_map(|(v, _)| v).collect();
            let (values, sup_error) = distance(&flat);
            let zero_count_rate = redraws as f64 / (redraws as f64 + self.samples as f64);
            rows.push(ConvergenceRow { theta, norming_terms: terms, values, sup_error, ks: None, zero_count_rate });
        }
        // The limit is the limiting MID law run to time cZ.
        let c = self.norming.limit_factor(&self.mixing, self.stride);
        let direct: Vec<f64> = stream
            .child(u64::MAX)
            .sample(self.samples, workers, |r| {
                let z = c * self.mixing.sample(r);
                let mut out = vec![0.0; d];
                match self.mid.kind() {
                    MidKind::ProductFrechet { gamma, .. } => {
                        // exp(-z Σ x^{-γ}) ⇔ X = (z/E)^{1/γ}
                        for (o, g) in out.iter_mut().zip(gamma) {
                            let e: f64 = Exp1.sample(r);
                            *o = (z / e.max(f64::MIN_POSITIVE)).powf(1.0 / g);
                        }
                    }
                    MidKind::ProductExponential { rate, .. } => {
                        // exp(-z Σ e^{-r x}) ⇔ X = (ln z - ln E)/r
                        for (o, rate) in out.iter_mut().zip(rate) {
                            let e: f64 = Exp1.sample(r);
                            *o = (z.ln() - e.max(f64::MIN_POSITIVE).ln()) / rate;
                        }
                    }
                }
                out
            })
            .into_iter()
            .flatten()
            .collect();
        let noise_floor = distance(&direct).1;
        Ok(finish(rows, noise_floor, self.mode, self.threshold, None))
    }
}

/// Candidate increment families for the necessary-and-sufficient condition
/// `(1 - g_θ(t))/θ → ψ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NsFamily {
    /// `g_θ = e^{-θ|t|}`, `ψ = |t|`.
    ExpAbs {},
    /// `g_θ = e^{-θt²}`, `ψ = t²`.
    ExpSquare {},
    /// `g_θ = e^{-θψ}` for a strictly stable `ψ`.
    Stable {
        lambda: f64,
        alpha: f64,
        #[serde(default)]
        beta: f64,
    },
    /// `g_θ = 1/(1 + θ|t|)`, `ψ = |t|`.
    Rational {},
}

impl NsFamily {
    pub fn validate(&self) -> Result<()> {
        if let NsFamily::Stable { lambda, alpha, beta } = *self {
            StableExponent::new(lambda, alpha, beta)?;
        }
        Ok(())
    }

    pub fn g(&self, theta: f64, t: f64) -> Complex64 {
        match *self {
            NsFamily::ExpAbs {} => Complex64::new((-theta * t.abs()).exp(), 0.0),
            NsFamily::ExpSquare {} => Complex64::new((-theta * t * t).exp(), 0.0),
            NsFamily::Stable { .. } => (-theta * self.psi(t)).exp(),
            NsFamily::Rational {} => Complex64::new(1.0 / (1.0 + theta * t.abs()), 0.0),
        }
    }

    pub fn psi(&self, t: f64) -> Complex64 {
        match *self {
            NsFamily::ExpAbs {} | NsFamily::Rational {} => Complex64::new(t.abs(), 0.0),
            NsFamily::ExpSquare {} => Complex64::new(t * t, 0.0),
            NsFamily::Stable { lambda, alpha, beta } => StableExponent::new(lambda, alpha, beta).expect("validated").psi(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsRow {
    pub theta: f64,
    /// `(t, (1 - g_θ(t))/θ, ψ(t))`.
    pub values: Vec<GridValue>,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NsReport {
    pub rows: Vec<NsRow>,
    pub decreasing: bool,
    pub final_below_threshold: bool,
    pub pass: bool,
}

/// Sup over the grid of `|(1 - g_θ(t))/θ - ψ(t)|` for each θ.
pub fn ns_condition_check<G, P>(g: G, psi: P, thetas: &[f64], t_grid: &[f64], threshold: f64) -> Result<NsReport>
where
    G: Fn(f64, f64) -> Complex64,
    P: Fn(f64) -> Complex64,
{
    for &theta in thetas {
        let g0 = g(theta, 0.0);
        if (g0 - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(PhimixError::InvalidParameter(format!("g_θ(0) = {g0} ≠ 1 at θ = {theta}")));
        }
    }
    deficiency_check(|theta, t| (1.0 - g(theta, t)) / theta, psi, thetas, t_grid, threshold)
}

fn deficiency_check<D, P>(deficiency: D, psi: P, thetas: &[f64], t_grid: &[f64], threshold: f64) -> Result<NsReport>
where
    D: Fn(f64, f64) -> Complex64,
    P: Fn(f64) -> Complex64,
{
    validate_thetas(thetas)?;
    require(!t_grid.is_empty(), || "t grid is empty".into())?;
    let rows: Vec<NsRow> = thetas
        .iter()
        .map(|&theta| {
            let values: Vec<GridValue> = t_grid
                .iter()
                .map(|&t| GridValue { point: vec![t], empirical: deficiency(theta, t), target: psi(t) })
                .collect();
            let sup_error = values.iter().map(GridValue::abs_error).fold(0.0, f64::max);
            NsRow { theta, values, sup_error }
        })
        .collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let decreasing = strictly_decreasing(&errors);
    let final_below_threshold = errors.last().is_some_and(|&e| e < threshold);
    Ok(NsReport { rows, decreasing, final_below_threshold, pass: decreasing && final_below_threshold })
}

/// `e^w - 1` without cancellation for small `w`.
fn expm1_complex(w: Complex64) -> Complex64 {
    // e^{a+ib} - 1 = (e^a - 1) e^{ib} + (e^{ib} - 1), with e^{ib} - 1 = -2sin²(b/2) + i sin b.
    let half = (0.5 * w.im).sin();
    w.re.exp_m1() * Complex64::from_polar(1.0, w.im) + Complex64::new(-2.0 * half * half, w.im.sin())
}

/// The check for a named family. Exponential families evaluate `1 - g_θ`
/// through `expm1` so that small θ does not lose digits.
pub fn ns_family_check(family: &NsFamily, thetas: &[f64], t_grid: &[f64], threshold: f64) -> Result<NsReport> {
    family.validate()?;
    let deficiency = |theta: f64, t: f64| match family {
        NsFamily::Rational {} => (1.0 - family.g(theta, t)) / theta,
        _ => -expm1_complex(-theta * family.psi(t)) / theta,
    };
    deficiency_check(deficiency, |t| family.psi(t), thetas, t_grid, threshold)
}

pub fn default_ns_grid() -> Vec<f64> {
    linspace(-1.0, 1.0, 41)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id_laws::linnik_cf;
    use crate::stats::cf_grid;

    fn exp1() -> MixingLaw {
        MixingLaw::exponential(1.0).unwrap()
    }

    fn cauchy() -> IncrementLaw {
        IncrementLaw::Stable { lambda: 1.0, alpha: 1.0, beta: 0.0 }
    }

    fn sum_exp(mixing: MixingLaw, shift: u32, stride: u32, increments: IncrementLaw, thetas: Vec<f64>, n: usize) -> SumExperiment {
        SumExperiment {
            mixing,
            shift,
            stride,
            increments,
            norming: Norming::Attraction,
            thetas,
            samples: n,
            grid: cf_grid(),
            threshold: 0.02,
            mode: CheckMode::Limit,
            ks_threshold: None,
        }
    }

    #[test]
    fn norming_examples() {
        let (a, b) = attraction_norming(2.0, 1e-4).unwrap();
        assert!((a - 100.0).abs() < 1e-9 && b == 0.0);
        let (a, b) = attraction_norming(1.0, 1e-2).unwrap();
        assert!((a - 100.0).abs() < 1e-9 && b == 0.0);
        assert!(attraction_norming(0.0, 0.1).is_err());
        assert!(attraction_norming(2.5, 0.1).is_err());
        assert!(attraction_norming(1.0, 0.0).is_err());
    }

    #[test]
    fn fixed_count_passes_single_increment_through() {
        let mut r1 = SeedStream::new(1).rng(0);
        let mut r2 = SeedStream::new(1).rng(0);
        let x = random_sum_sample(&FixedCount(1), |r| r.sample::<f64, _>(Exp1), 4.0, 0.0, &mut r1);
        let y: f64 = r2.sample(Exp1);
        assert_eq!(x, y / 4.0);
        assert_eq!(random_sum_sample(&FixedCount(0), |_| 1.0, 1.0, 0.0, &mut r1), 0.0);
        assert_eq!(random_sum_sample(&FixedCount(3), |_| 2.0, 2.0, 0.5, &mut r1), 1.5);

        let mut r3 = SeedStream::new(2).rng(0);
        let mut r4 = SeedStream::new(2).rng(0);
        let (v, redraws) = random_max_sample(&FixedCount(1), |r, out| out.iter_mut().for_each(|o| *o = r.random::<f64>()), &[1.0, 1.0], &[0.0, 0.0], &mut r3);
        assert_eq!(redraws, 0);
        assert_eq!(v, vec![r4.random::<f64>(), r4.random::<f64>()]);
    }

    #[test]
    fn max_redraws_empty_counts() {
        let family = PgfFamily::new(exp1(), 0, 1, 1.0).unwrap();
        let draws = SeedStream::new(3).sample(20_000, 1, |r| {
            random_max_sample(&family, |_, out| out.fill(1.0), &[1.0, 1.0], &[0.0, 0.0], r)
        });
        let redraws: u64 = draws.iter().map(|d| d.1).sum();
        // P(N = 0) = θ/(1 + θ) = 1/2, so the discarded fraction is about 1/2.
        let rate = redraws as f64 / (redraws as f64 + 20_000.0);
        assert!((rate - 0.5).abs() < 0.01, "{rate}");
        assert!(draws.iter().all(|d| d.0 == vec![1.0, 1.0]));
    }

    #[test]
    fn mean_count_matches_simulation() {
        let family = PgfFamily::new(MixingLaw::gamma(2.0, 1.5).unwrap(), 3, 2, 0.5).unwrap();
        // j + k·νσ/θ = 3 + 2·3/0.5.
        assert!((family.mean_count() - 15.0).abs() < 1e-12);
        let n = 200_000;
        let xs = SeedStream::new(4).sample(n, 1, |r| family.sample_count(r) as f64);
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 15.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn geometric_exponential_sums_are_exactly_exponential() {
        // j = 1 makes N geometric on {1, 2, …} with mean 1 + 1/θ; dividing by
        // that mean gives an exponential(1) law at every θ.
        for theta in [1.0, 0.1, 0.01] {
            let family = PgfFamily::new(exp1(), 1, 1, theta).unwrap();
            let a = family.mean_count();
            assert!((a - (1.0 + theta) / theta).abs() < 1e-12);
            let xs = SeedStream::new(5).sample(100_000, 1, |r| random_sum_sample(&family, |r| r.sample::<f64, _>(Exp1), a, 0.0, r));
            let d = ks_distance(&xs, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() });
            assert!(d < 0.01, "θ={theta}: {d}");
        }
    }

    #[test]
    fn shift_zero_with_inverse_theta_norming_is_not_exponential() {
        // With j = 0 the empty sum puts an atom of mass θ/(1 + θ) at 0, which
        // KS detects at θ = 0.1 (distance ≈ 0.09).
        let family = PgfFamily::new(exp1(), 0, 1, 0.1).unwrap();
        let xs = SeedStream::new(6).sample(100_000, 1, |r| random_sum_sample(&family, |r| r.sample::<f64, _>(Exp1), 10.0, 0.0, r));
        let d = ks_distance(&xs, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() });
        assert!(d > 0.05, "{d}");
    }

    #[test]
    fn target_cf_examples() {
        let e = sum_exp(exp1(), 0, 1, cauchy(), vec![0.1], 10);
        for t in [-3.0, 0.0, 0.5, 4.0] {
            assert!((e.target_cf(t) - Complex64::new(1.0 / (1.0 + f64::abs(t)), 0.0)).norm() < 1e-15);
        }
        let g2 = sum_exp(MixingLaw::gamma(2.0, 1.0).unwrap(), 0, 1, cauchy(), vec![0.1], 10);
        for t in [-2.0, 1.0] {
            assert!((g2.target_cf(t) - linnik_cf(1.0, 1.0, 0.0, 2.0, t).unwrap()).norm() < 1e-15);
        }
        let d = sum_exp(MixingLaw::degenerate(1.0).unwrap(), 0, 1, cauchy(), vec![0.1], 10);
        assert!((d.target_cf(2.0) - Complex64::new((-2.0f64).exp(), 0.0)).norm() < 1e-15);
        // Attraction norming with stride k scales ψ by k.
        let k3 = sum_exp(exp1(), 0, 3, cauchy(), vec![0.1], 10);
        assert!((k3.target_cf(1.0) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let u = sum_exp(exp1(), 0, 1, IncrementLaw::Uniform { half_width: 3.0 }, vec![0.1], 10);
        assert!((u.target_cf(1.0) - Complex64::new(1.0 / 2.5, 0.0)).norm() < 1e-15);
        let ex = sum_exp(exp1(), 0, 1, IncrementLaw::Exponential { mean: 2.0 }, vec![0.1], 10);
        assert!((ex.target_cf(1.0) - Complex64::new(1.0, 0.0) / Complex64::new(1.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn cauchy_geometric_sum_converges_to_linnik() {
        let e = sum_exp(exp1(), 0, 1, cauchy(), vec![1e-1, 1e-2], 20_000);
        let r = e.run(&SeedStream::new(7), 1).unwrap();
        // Bias at θ is about θ·max|t|/(1+|t|)² plus noise ≈ 3/√n.
        assert!(r.rows[1].sup_error < 3.0 / (20_000f64).sqrt() + 0.01, "{r:?}");
        assert!(r.noise_floor < 3.0 / (20_000f64).sqrt() + 0.005);
        assert_eq!(r.rows[0].values.len(), 61);
    }

    #[test]
    fn degenerate_mixing_reduces_to_stable_convergence() {
        // N ~ Poisson(1/θ): the limit is the stable law itself.
        let e = sum_exp(
            MixingLaw::degenerate(1.0).unwrap(),
            0,
            1,
            IncrementLaw::Stable { lambda: 1.0, alpha: 1.5, beta: 0.3 },
            vec![1e-1, 1e-2],
            20_000,
        );
        let r = e.run(&SeedStream::new(8), 1).unwrap();
        assert!(r.rows.iter().all(|row| row.sup_error < 3.0 / (20_000f64).sqrt() + 0.02), "{r:?}");
    }

    #[test]
    fn uniform_increments_reach_gaussian_mixture() {
        let mut e = sum_exp(exp1(), 0, 1, IncrementLaw::Uniform { half_width: 1.0 }, vec![1e-1, 1e-2], 20_000);
        e.norming = Norming::KAdjusted;
        let r = e.run(&SeedStream::new(9), 1).unwrap();
        assert!(r.rows[1].sup_error < 3.0 / (20_000f64).sqrt() + 0.01, "{r:?}");
    }

    #[test]
    fn shift_and_stride_are_absorbed_by_k_adjusted_norming() {
        let n = 20_000;
        let mut base = sum_exp(MixingLaw::gamma(2.0, 1.0).unwrap(), 0, 1, cauchy(), vec![1e-2], n);
        base.norming = Norming::KAdjusted;
        let mut shifted = base.clone();
        shifted.shift = 5;
        shifted.stride = 3;
        for t in cf_grid() {
            assert_eq!(base.target_cf(t), shifted.target_cf(t));
        }
        let r0 = base.run(&SeedStream::new(10), 1).unwrap();
        let r1 = shifted.run(&SeedStream::new(11), 1).unwrap();
        let noise = 3.0 / (n as f64).sqrt() + 0.01;
        assert!(r0.rows[0].sup_error < noise && r1.rows[0].sup_error < noise, "{r0:?} {r1:?}");
    }

    #[test]
    fn exponential_increment_ks_target() {
        let mut e = sum_exp(exp1(), 1, 1, IncrementLaw::Exponential { mean: 1.0 }, vec![0.5, 0.1], 20_000);
        e.norming = Norming::MeanCount;
        e.mode = CheckMode::Exact;
        e.ks_threshold = Some(0.02);
        let r = e.run(&SeedStream::new(12), 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.rows.iter().all(|row| row.ks.is_some()));
        // Gamma mixing: the limit d.f. is a gamma d.f., not exponential.
        let g = sum_exp(MixingLaw::gamma(2.0, 1.0).unwrap(), 0, 1, IncrementLaw::Exponential { mean: 1.0 }, vec![0.1], 10);
        let f = g.target_df().unwrap();
        // P(Z ≤ 2) with Z ~ Gamma(2, 1): 1 - 3e^{-2}.
        assert!((f(2.0) - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-12);
        assert!(sum_exp(exp1(), 0, 1, cauchy(), vec![0.1], 10).target_df().is_none());
    }

    #[test]
    fn experiments_reject_bad_theta_sequences() {
        let e = sum_exp(exp1(), 0, 1, cauchy(), vec![1e-2, 1e-1], 10);
        assert!(e.run(&SeedStream::new(0), 1).is_err());
        let e = sum_exp(exp1(), 0, 1, cauchy(), vec![], 10);
        assert!(e.run(&SeedStream::new(0), 1).is_err());
        let e = sum_exp(exp1(), 0, 1, IncrementLaw::Stable { lambda: 1.0, alpha: 1.0, beta: 0.3 }, vec![0.1], 10);
        assert!(e.run(&SeedStream::new(0), 1).is_err());
    }

    fn frechet_max(mixing: MixingLaw, thetas: Vec<f64>, n: usize) -> MaxExperiment {
        let mid = MidLaw::product_frechet(vec![1.0, 1.0]).unwrap();
        MaxExperiment {
            mixing,
            shift: 1,
            stride: 1,
            axes: MaxExperiment::default_axes(&mid),
            mid,
            norming: Norming::Attraction,
            thetas,
            samples: n,
            threshold: 0.02,
            mode: CheckMode::Limit,
        }
    }

    #[test]
    fn max_targets() {
        let e = frechet_max(exp1(), vec![0.1], 10);
        assert_eq!(e.target_df(&[2.0, 2.0]), 0.5);
        assert_eq!(e.target_df(&[0.0, 2.0]), 0.0);
        let g = frechet_max(MixingLaw::gamma(2.0, 1.0).unwrap(), vec![0.1], 10);
        for x in [[0.5f64, 1.0], [2.0, 8.0]] {
            let expected = (1.0 + 1.0 / x[0] + 1.0 / x[1]).powi(-2);
            assert!((g.target_df(&x) - expected).abs() < 1e-15);
        }
        let d = frechet_max(MixingLaw::degenerate(1.0).unwrap(), vec![0.1], 10);
        let h = MidLaw::product_frechet(vec![1.0, 1.0]).unwrap();
        assert!((d.target_df(&[1.5, 0.7]) - crate::mid::mid_df_eval(&h, &[1.5, 0.7])).abs() < 1e-15);
    }

    #[test]
    fn frechet_spot_value_and_convergence() {
        let e = frechet_max(exp1(), vec![1e-1, 1e-2], 20_000);
        let r = e.run(&SeedStream::new(13), 1).unwrap();
        let spot = r.rows[1].values.iter().find(|v| v.point == vec![2.0, 2.0]).unwrap();
        assert!((spot.empirical.re - 0.5).abs() < 0.02, "{spot:?}");
        assert!(r.rows[1].sup_error < 3.0 / (20_000f64).sqrt() + 0.01, "{r:?}");
        assert_eq!(r.rows[1].zero_count_rate, 0.0);
        assert_eq!(r.rows[0].values.len(), 49);
    }

    #[test]
    fn frechet_max_joint_df_matches_margin_mixture_form() {
        // Independent coordinates: the joint d.f. is φ(x^{-1} + y^{-1}), not the
        // product of margins φ(x^{-1})φ(y^{-1}).
        let mut e = frechet_max(exp1(), vec![1e-2], 20_000);
        e.axes = vec![vec![0.5, 1.0, 2.0, 4.0, 8.0]; 2];
        let r = e.run(&SeedStream::new(14), 1).unwrap();
        let mut gap = 0.0f64;
        for v in &r.rows[0].values {
            let (x, y) = (v.point[0], v.point[1]);
            let product = 1.0 / (1.0 + 1.0 / x) / (1.0 + 1.0 / y);
            gap = gap.max((v.empirical.re - product).abs());
            assert!((v.empirical.re - 1.0 / (1.0 + 1.0 / x + 1.0 / y)).abs() < 0.02);
        }
        assert!(gap > 0.05, "{gap}");
    }

    #[test]
    fn gumbel_domain_maxima() {
        let mid = MidLaw::product_exponential(vec![1.0, 2.0], vec![0.0, 0.5]).unwrap();
        let e = MaxExperiment {
            mixing: MixingLaw::gamma(2.0, 1.0).unwrap(),
            shift: 1,
            stride: 1,
            axes: MaxExperiment::default_axes(&mid),
            mid,
            norming: Norming::Attraction,
            thetas: vec![1e-1, 1e-2],
            samples: 20_000,
            threshold: 0.02,
            mode: CheckMode::Limit,
        };
        let r = e.run(&SeedStream::new(15), 1).unwrap();
        assert!(r.rows[1].sup_error < 3.0 / (20_000f64).sqrt() + 0.01, "{r:?}");
        assert!(r.noise_floor < 3.0 / (20_000f64).sqrt() + 0.005, "{}", r.noise_floor);
    }

    #[test]
    fn ns_examples() {
        let thetas = [1e-1, 1e-2, 1e-3];
        let grid = default_ns_grid();
        for fam in [NsFamily::ExpAbs {}, NsFamily::ExpSquare {}] {
            let r = ns_family_check(&fam, &thetas, &grid, 1e-2).unwrap();
            assert!(r.pass, "{fam:?} {r:?}");
            for row in &r.rows {
                let zero = row.values.iter().find(|v| v.point[0] == 0.0).unwrap();
                assert_eq!(zero.abs_error(), 0.0);
            }
        }
        // Taylor oracle: the error is θt²/2 for |t| and θt⁴/2 for t², largest at the grid edge.
        let wide = linspace(-3.0, 3.0, 61);
        let r = ns_family_check(&NsFamily::ExpAbs {}, &[1e-2], &wide, 1.0).unwrap();
        let oracle = 3.0 - (-(-0.03f64).exp_m1()) / 1e-2;
        assert!((r.rows[0].sup_error - oracle).abs() < 1e-12, "{}", r.rows[0].sup_error);
        assert!((oracle - 0.0446).abs() < 1e-3);
        let r = ns_family_check(&NsFamily::ExpSquare {}, &[1e-2], &wide, 1.0).unwrap();
        let oracle = 9.0 - (-(-0.09f64).exp_m1()) / 1e-2;
        assert!((r.rows[0].sup_error - oracle).abs() < 1e-12);
        assert!(oracle > 0.38);
    }

    #[test]
    fn ns_other_families() {
        let thetas = [1e-1, 1e-2, 1e-3];
        let grid = default_ns_grid();
        let st = NsFamily::Stable { lambda: 1.0, alpha: 1.3, beta: 0.4 };
        assert!(ns_family_check(&st, &thetas, &grid, 1e-2).unwrap().pass);
        assert!(ns_family_check(&NsFamily::Rational {}, &thetas, &grid, 1e-2).unwrap().pass);
        // A g that does not start at 1 is rejected.
        assert!(ns_condition_check(|_, _| Complex64::new(0.5, 0.0), |t| Complex64::new(t, 0.0), &thetas, &grid, 1e-2).is_err());
        // The wrong ψ never converges.
        let r = ns_condition_check(|th, t| NsFamily::ExpAbs {}.g(th, t), |t| Complex64::new(t * t, 0.0), &thetas, &grid, 1e-2).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn expm1_complex_keeps_precision() {
        let w = expm1_complex(Complex64::new(-1e-12, 1e-13));
        assert!((w.re + 1e-12).abs() < 1e-23, "{w}");
        assert!((w.im - 1e-13).abs() < 1e-23, "{w}");
        let big = Complex64::new(0.7, -2.0);
        assert!((expm1_complex(big) - (big.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn family_and_generic_checks_agree() {
        let grid = default_ns_grid();
        for fam in [NsFamily::ExpAbs {}, NsFamily::Stable { lambda: 2.0, alpha: 0.7, beta: -0.5 }] {
            let a = ns_family_check(&fam, &[0.5, 0.1], &grid, 1.0).unwrap();
            let b = ns_condition_check(|th, t| fam.g(th, t), |t| fam.psi(t), &[0.5, 0.1], &grid, 1.0).unwrap();
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                assert!((ra.sup_error - rb.sup_error).abs() < 1e-12);
            }
        }
    }
}
