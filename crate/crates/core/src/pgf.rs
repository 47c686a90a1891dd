//! The counting-law family `P_θ(s) = s^j φ((1 - s^k)/θ)`.
//!
//! `N_θ = j + k·M` with `M | Z ~ Poisson(Z/θ)` and `Z` drawn from the mixing
//! law has exactly this PGF, since `E[s^M] = E[exp(-Z(1 - s)/θ)]`. As
//! `θ → 0`, `θ N_θ` converges in law to `kZ`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{require, PhimixError, Result};
use crate::mixing::{Mixing, MixingLaw};
use crate::rng::SeedStream;

fn one_u32() -> u32 {
    1
}

/// Configuration form: `counting = { mixing = …, shift = 0, stride = 1, theta = 0.01 }`.
/// `theta` may be omitted when an experiment supplies its own θ sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingSpec {
    pub mixing: MixingLaw,
    #[serde(default)]
    pub shift: u32,
    #[serde(default = "one_u32")]
    pub stride: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl CountingSpec {
    pub fn family(&self, theta: f64) -> Result<PgfFamily> {
        PgfFamily::new(self.mixing, self.shift, self.stride, theta)
    }
}

/// A member of the family: mixing law, shift `j ≥ 0`, stride `k ≥ 1`, `θ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfFamily<M = MixingLaw> {
    mixing: M,
    shift: u32,
    stride: u32,
    theta: f64,
}

/// Closed-form pmf on `{j, j+k, …, j+k·m_max}` plus the remaining mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub support: Vec<u64>,
    pub probs: Vec<f64>,
    pub tail: f64,
}

/// Monte-Carlo pmf estimate with binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfEstimate {
    pub support: Vec<u64>,
    pub freqs: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub tail: f64,
}

impl<M: Mixing> PgfFamily<M> {
    pub fn new(mixing: M, shift: u32, stride: u32, theta: f64) -> Result<Self> {
        require(stride >= 1, || "stride k must be at least 1".into())?;
        require(theta.is_finite() && theta > 0.0, || format!("θ must be positive, got {theta}"))?;
        Ok(Self { mixing, shift, stride, theta })
    }

    pub fn mixing(&self) -> &M {
        &self.mixing
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `s^j φ((1 - s^k)/θ)` for `s ∈ [0, 1]`.
    pub fn pgf_eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(PhimixError::Domain { what: "a probability generating function", value: s });
        }
        Ok(self.pgf_unchecked(s))
    }

    fn pgf_unchecked(&self, s: f64) -> f64 {
        let inner = (1.0 - s.powi(self.stride as i32)) / self.theta;
        s.powi(self.shift as i32) * self.mixing.lt(inner)
    }

    /// Draws `j + k·M` with `M | Z ~ Poisson(Z/θ)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let rate = self.mixing.sample(rng) / self.theta;
        let m = if rate > 0.0 {
            Poisson::new(rate).map(|p| p.sample(rng) as u64).unwrap_or(0)
        } else {
            0
        };
        self.shift as u64 + self.stride as u64 * m
    }

    /// Laplace transform of `θ N_θ`: `e^{-vjθ} φ((1 - e^{-vkθ})/θ)`.
    pub fn scaled_lt(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return Err(PhimixError::Domain { what: "the scaled Laplace transform", value: v });
        }
        let theta = self.theta;
        let inner = -(-v * self.stride as f64 * theta).exp_m1() / theta;
        Ok((-v * self.shift as f64 * theta).exp() * self.mixing.lt(inner))
    }

    /// Closed-form pmf where the mixing law provides one.
    pub fn pmf(&self, m_max: usize) -> Result<PmfTable> {
        let (probs, tail) = self.mixing.mixed_poisson_pmf(1.0 / self.theta, m_max)?;
        Ok(PmfTable { support: self.support(m_max), probs, tail })
    }

    /// Frequencies of `{j + k·m}` in `n` draws, for mixings without a closed form.
    pub fn estimate_pmf(&self, m_max: usize, n: usize, stream: &SeedStream, workers: usize) -> PmfEstimate
    where
        M: Sync,
    {
        let draws = stream.sample(n, workers, |r| self.sample(r));
        let mut counts = vec![0usize; m_max + 1];
        let mut tail = 0usize;
        for d in draws {
            let m = ((d - self.shift as u64) / self.stride as u64) as usize;
            match counts.get_mut(m) {
                Some(c) => *c += 1,
                None => tail += 1,
            }
        }
        let nf = n as f64;
        let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
        let std_errors = freqs.iter().map(|p| (p * (1.0 - p) / nf).sqrt()).collect();
        PmfEstimate { support: self.support(m_max), freqs, std_errors, tail: tail as f64 / nf }
    }

    fn support(&self, m_max: usize) -> Vec<u64> {
        (0..=m_max as u64).map(|m| self.shift as u64 + self.stride as u64 * m).collect()
    }
}

/// `pgf_eval` as a free function.
pub fn pgf_eval<M: Mixing>(f: &PgfFamily<M>, s: f64) -> Result<f64> {
    f.pgf_eval(s)
}

/// `pgf_pmf` as a free function.
pub fn pgf_pmf<M: Mixing>(f: &PgfFamily<M>, m_max: usize) -> Result<PmfTable> {
    f.pmf(m_max)
}

/// One row of the θ-refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLimitRow {
    pub theta: f64,
    /// `(v, scaled_lt(v), φ(kv))` on the v-grid.
    pub points: Vec<(f64, f64, f64)>,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLimitReport {
    pub rows: Vec<ScaledLimitRow>,
    /// Each sup error is strictly below the previous one.
    pub decreasing: bool,
    pub final_below_threshold: bool,
    pub pass: bool,
}

/// Default θ refinement sequence.
pub const DEFAULT_THETAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Tabulates `sup_v |LT of θN_θ at v − φ(kv)|` along a decreasing θ sequence.
pub fn check_scaled_limit<M: Mixing + Clone>(
    mixing: &M,
    shift: u32,
    stride: u32,
    thetas: &[f64],
    v_grid: &[f64],
    threshold: f64,
) -> Result<ScaledLimitReport> {
    require(!thetas.is_empty(), || "θ sequence is empty".into())?;
    require(thetas.windows(2).all(|w| w[1] < w[0]), || "θ sequence must be strictly decreasing".into())?;
    require(v_grid.iter().all(|&v| v > 0.0), || "v grid must be positive".into())?;
    let mut rows = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let fam = PgfFamily::new(mixing.clone(), shift, stride, theta)?;
        let points: Vec<(f64, f64, f64)> = v_grid
            .iter()
            .map(|&v| Ok((v, fam.scaled_lt(v)?, mixing.lt(stride as f64 * v))))
            .collect::<Result<_>>()?;
        let sup_error = points.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.push(ScaledLimitRow { theta, points, sup_error });
    }
    let decreasing = rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let final_below_threshold = rows.last().map(|r| r.sup_error < threshold).unwrap_or(false);
    Ok(ScaledLimitReport { rows, decreasing, final_below_threshold, pass: decreasing && final_below_threshold })
}
