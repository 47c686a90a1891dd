//! Mixing laws: a positive random variable `Z` presented through its
//! Laplace transform `φ(s) = E[exp(-sZ)]` together with an exact sampler.
//!
//! Three kinds are built in:
//!
//! | kind          | `φ(s)`            | mean  |
//! |---------------|-------------------|-------|
//! | `gamma`       | `(1 + σs)^(-ν)`   | `νσ`  |
//! | `exponential` | `1 / (1 + σs)`    | `σ`   |
//! | `degenerate`  | `exp(-cs)`        | `c`   |
//!
//! The gamma parameterization puts the shape `ν` in the exponent so that the
//! gamma mixture of a strictly stable law has CF `(1 + ψ(t))^(-ν)` with the
//! stable scale carried by `ψ`. Other mixing laws plug in through the
//! [`LaplaceTransform`] and [`Mixing`] traits.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{require, PhimixError, Result};

/// A function `s ↦ E[exp(-sZ)]` for `s ≥ 0`.
pub trait LaplaceTransform {
    /// Evaluates the transform; callers guarantee `s ≥ 0`.
    fn lt(&self, s: f64) -> f64;
}

/// A mixing law: Laplace transform plus sampler.
pub trait Mixing: LaplaceTransform {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;

    /// Probabilities `P(M = m)`, `m = 0..=m_max`, and the tail `P(M > m_max)`
    /// of the mixed Poisson law `M | Z ~ Poisson(rate·Z)`.
    fn mixed_poisson_pmf(&self, rate: f64, m_max: usize) -> Result<(Vec<f64>, f64)> {
        let _ = (rate, m_max);
        Err(PhimixError::NoClosedForm("custom"))
    }
}

impl<F: Fn(f64) -> f64> LaplaceTransform for F {
    fn lt(&self, s: f64) -> f64 {
        self(s)
    }
}

fn one() -> f64 {
    1.0
}

/// Raw, unvalidated description of a built-in mixing law, as read from
/// configuration (`mixing = { kind = "gamma", shape = 2.0, scale = 1.0 }`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MixingKind {
    Gamma {
        shape: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Exponential {
        #[serde(default = "one")]
        scale: f64,
    },
    Degenerate {
        point: f64,
    },
}

impl MixingKind {
    pub fn name(&self) -> &'static str {
        match self {
            MixingKind::Gamma { .. } => "gamma",
            MixingKind::Exponential { .. } => "exponential",
            MixingKind::Degenerate { .. } => "degenerate",
        }
    }
}

/// A validated built-in mixing law. Immutable and `Copy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixingKind", into = "MixingKind")]
pub struct MixingLaw(MixingKind);

impl TryFrom<MixingKind> for MixingLaw {
    type Error = PhimixError;

    fn try_from(kind: MixingKind) -> Result<Self> {
        let positive = |v: f64, name: &str| {
            require(v.is_finite() && v > 0.0, || format!("{name} must be positive and finite, got {v}"))
        };
        match kind {
            MixingKind::Gamma { shape, scale } => {
                positive(shape, "gamma shape")?;
                positive(scale, "gamma scale")?;
            }
            MixingKind::Exponential { scale } => positive(scale, "exponential scale")?,
            MixingKind::Degenerate { point } => positive(point, "degenerate point mass")?,
        }
        Ok(MixingLaw(kind))
    }
}

impl From<MixingLaw> for MixingKind {
    fn from(law: MixingLaw) -> Self {
        law.0
    }
}

impl MixingLaw {
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        MixingKind::Gamma { shape, scale }.try_into()
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        MixingKind::Exponential { scale }.try_into()
    }

    pub fn degenerate(point: f64) -> Result<Self> {
        MixingKind::Degenerate { point }.try_into()
    }

    pub fn kind(&self) -> &MixingKind {
        &self.0
    }

    /// `φ(s)`; negative `s` is a domain error.
    pub fn lt_eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(PhimixError::Domain { what: "a Laplace transform", value: s });
        }
        Ok(self.lt(s))
    }

    /// Analytic continuation of `φ` to complex arguments, principal branch.
    ///
    /// For gamma and exponential kinds, `1 + σz` on the closed negative real
    /// axis is reported as [`PhimixError::BranchCut`].
    pub fn lt_complex(&self, z: Complex64) -> Result<Complex64> {
        let shifted = |scale: f64| {
            let w = Complex64::new(1.0, 0.0) + z * scale;
            if w.im == 0.0 && w.re <= 0.0 {
                Err(PhimixError::BranchCut { scale, re: w.re, im: w.im })
            } else {
                Ok(w)
            }
        };
        match self.0 {
            MixingKind::Gamma { shape, scale } => Ok((-shape * shifted(scale)?.ln()).exp()),
            MixingKind::Exponential { scale } => Ok(shifted(scale)?.inv()),
            MixingKind::Degenerate { point } => Ok((-point * z).exp()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.0 {
            MixingKind::Gamma { shape, scale } => shape * scale,
            MixingKind::Exponential { scale } => scale,
            MixingKind::Degenerate { point } => point,
        }
    }

    /// The law whose Laplace transform is `φ^t`, i.e. the time-`t` marginal of
    /// the subordinator generated by this law.
    pub fn convolution_power(&self, t: f64) -> Result<Self> {
        require(t.is_finite() && t > 0.0, || format!("convolution power must be positive, got {t}"))?;
        match self.0 {
            MixingKind::Gamma { shape, scale } => Self::gamma(shape * t, scale),
            MixingKind::Exponential { scale } => Self::gamma(t, scale),
            MixingKind::Degenerate { point } => Self::degenerate(point * t),
        }
    }
}

impl LaplaceTransform for MixingLaw {
    fn lt(&self, s: f64) -> f64 {
        match self.0 {
            MixingKind::Gamma { shape, scale } => (1.0 + scale * s).powf(-shape),
            MixingKind::Exponential { scale } => 1.0 / (1.0 + scale * s),
            MixingKind::Degenerate { point } => (-point * s).exp(),
        }
    }
}

impl Mixing for MixingLaw {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.0 {
            MixingKind::Gamma { shape, scale } => Gamma::new(shape, scale)
                .expect("validated gamma parameters")
                .sample(rng),
            MixingKind::Exponential { scale } => {
                let e: f64 = Exp1.sample(rng);
                scale * e
            }
            MixingKind::Degenerate { point } => point,
        }
    }

    /// Negative binomial for gamma/exponential mixing, Poisson for a point mass.
    fn mixed_poisson_pmf(&self, rate: f64, m_max: usize) -> Result<(Vec<f64>, f64)> {
        use statrs::function::{beta::beta_reg, gamma::gamma_lr};
        require(rate.is_finite() && rate > 0.0, || format!("Poisson rate must be positive, got {rate}"))?;
        let mut probs = Vec::with_capacity(m_max + 1);
        let tail = match self.0 {
            MixingKind::Gamma { shape, scale } => negative_binomial(shape, scale * rate, m_max, &mut probs, beta_reg),
            MixingKind::Exponential { scale } => negative_binomial(1.0, scale * rate, m_max, &mut probs, beta_reg),
            MixingKind::Degenerate { point } => {
                let mean = point * rate;
                let mut log_p = -mean;
                for m in 0..=m_max {
                    if m > 0 {
                        log_p += mean.ln() - (m as f64).ln();
                    }
                    probs.push(log_p.exp());
                }
                gamma_lr(m_max as f64 + 1.0, mean)
            }
        };
        Ok((probs, tail))
    }
}

/// `P(M = m) = C(ν+m-1, m) p^ν (1-p)^m` with `p = 1/(1 + σ·rate)`; returns the tail
/// `P(M > m_max) = I_{1-p}(m_max + 1, ν)`.
fn negative_binomial(
    shape: f64,
    scaled_rate: f64,
    m_max: usize,
    probs: &mut Vec<f64>,
    beta_reg: fn(f64, f64, f64) -> f64,
) -> f64 {
    let p = 1.0 / (1.0 + scaled_rate);
    let q = scaled_rate / (1.0 + scaled_rate);
    let mut log_p = shape * p.ln();
    for m in 0..=m_max {
        if m > 0 {
            log_p += ((shape + m as f64 - 1.0) / m as f64).ln() + q.ln();
        }
        probs.push(log_p.exp());
    }
    beta_reg(m_max as f64 + 1.0, shape, q)
}

/// Outcome of [`check_complete_monotonicity`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub pass: bool,
    /// Largest amount by which some `(-1)^n Δ_h^n f` fell below zero; 0 if none did.
    pub worst_violation: f64,
    pub worst_order: Option<usize>,
    pub worst_at: Option<f64>,
    /// Orders at which at least one grid point broke the tolerance, ascending.
    pub failing_orders: Vec<usize>,
}

pub const MAX_CM_ORDER: usize = 8;

/// Checks the sign pattern `(-1)^n Δ_h^n f(s) ≥ -tol·scale` for `n = 0..=max_order`
/// at every grid point, with `h` the (uniform) grid spacing and `scale` the
/// largest `|f|` on the difference stencil.
pub fn check_complete_monotonicity<F: Fn(f64) -> f64>(
    f: F,
    grid: &[f64],
    max_order: usize,
    tol: f64,
) -> Result<MonotonicityReport> {
    require(max_order <= MAX_CM_ORDER, || format!("max_order {max_order} exceeds {MAX_CM_ORDER}"))?;
    require(grid.len() >= 2, || "complete-monotonicity grid needs at least two points".into())?;
    let h = uniform_step(grid)?;

    let mut binom = [[0.0f64; MAX_CM_ORDER + 1]; MAX_CM_ORDER + 1];
    for n in 0..=MAX_CM_ORDER {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
        }
    }

    let mut report = MonotonicityReport {
        pass: true,
        worst_violation: 0.0,
        worst_order: None,
        worst_at: None,
        failing_orders: Vec::new(),
    };
    let mut stencil = vec![0.0; max_order + 1];
    for &s in grid {
        for (k, v) in stencil.iter_mut().enumerate() {
            *v = f(s + k as f64 * h);
        }
        for n in 0..=max_order {
            // (-1)^n Δ^n f(s) = Σ_k (-1)^k C(n,k) f(s + kh)
            let value: f64 = (0..=n)
                .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * binom[n][k] * stencil[k])
                .sum();
            let scale = stencil[..=n].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            if value < -tol * scale {
                report.pass = false;
                if !report.failing_orders.contains(&n) {
                    report.failing_orders.push(n);
                }
            }
            if -value > report.worst_violation {
                report.worst_violation = -value;
                report.worst_order = Some(n);
                report.worst_at = Some(s);
            }
        }
    }
    report.failing_orders.sort_unstable();
    Ok(report)
}

/// Returns the spacing of a strictly increasing, uniformly spaced grid.
pub(crate) fn uniform_step(grid: &[f64]) -> Result<f64> {
    let h = grid[1] - grid[0];
    require(h > 0.0, || "grid must be strictly increasing".into())?;
    for (i, w) in grid.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - h).abs() > 1e-9 * h.max(w[1].abs()) {
            return Err(PhimixError::NonUniformGrid { first: h, found: step, index: i });
        }
    }
    Ok(h)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
