//! Strictly stable exponents, their φ-mixtures, and the generalized Linnik
//! family.
//!
//! A strictly stable law is described here in polar form: its CF is
//! `exp(-ψ(t))` with `ψ(t) = λ|t|^α exp(-iβ sgn t)`. Randomizing the power
//! `s` in `exp(-sψ)` by a positive `Z` with Laplace transform `φ` gives the
//! CF `φ(ψ(t))`. With `Z ~ gamma(ν, 1)` this is the generalized Linnik CF
//! `(1 + ψ(t))^(-ν)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{require, PhimixError, Result};
use crate::mixing::{Mixing, MixingLaw};

/// A Lévy exponent `ψ`, so that `exp(-ψ)` is an ID characteristic function.
pub trait Exponent {
    fn psi(&self, t: f64) -> Complex64;
}

impl<F: Fn(f64) -> Complex64> Exponent for F {
    fn psi(&self, t: f64) -> Complex64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExponent {
    lambda: f64,
    alpha: f64,
    #[serde(default)]
    beta: f64,
}

/// `ψ(t) = λ|t|^α exp(-iβ sgn t)` with `λ > 0`, `0 < α ≤ 2` and
/// `|β| ≤ min(πα/2, π - πα/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExponent", into = "RawExponent")]
pub struct StableExponent {
    lambda: f64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawExponent> for StableExponent {
    type Error = PhimixError;

    fn try_from(r: RawExponent) -> Result<Self> {
        StableExponent::new(r.lambda, r.alpha, r.beta)
    }
}

impl From<StableExponent> for RawExponent {
    fn from(e: StableExponent) -> Self {
        RawExponent { lambda: e.lambda, alpha: e.alpha, beta: e.beta }
    }
}

/// Largest admissible `|β|` for index `α`.
pub fn max_skew(alpha: f64) -> f64 {
    (FRAC_PI_2 * alpha).min(PI - FRAC_PI_2 * alpha)
}

impl StableExponent {
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Result<Self> {
        require(lambda.is_finite() && lambda > 0.0, || format!("stable scale λ must be positive, got {lambda}"))?;
        require(alpha > 0.0 && alpha <= 2.0, || format!("stable index α must lie in (0, 2], got {alpha}"))?;
        require(beta.is_finite() && beta.abs() <= max_skew(alpha) + 1e-12, || {
            format!("skew angle |β| = {} exceeds min(πα/2, π - πα/2) = {}", beta.abs(), max_skew(alpha))
        })?;
        Ok(Self { lambda, alpha, beta })
    }

    /// Symmetric exponent `λ|t|^α`.
    pub fn symmetric(lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(lambda, alpha, 0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ω(t) = exp(-ψ(t))`.
    pub fn cf(&self, t: f64) -> Complex64 {
        (-self.psi(t)).exp()
    }

    /// Exact sampler for the law with CF `exp(-ψ)`.
    pub fn sampler(&self) -> Result<StableSampler> {
        StableSampler::new(*self)
    }
}

/// `stable_cf_exponent`: `λ|t|^α exp(-iβ sgn t)`, with `ψ(0) = 0`.
impl Exponent for StableExponent {
    fn psi(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let modulus = self.lambda * t.abs().powf(self.alpha);
        let angle = -self.beta * t.signum();
        Complex64::from_polar(modulus, angle)
    }
}

/// Chambers–Mallows–Stuck sampler for a strictly stable law in polar form.
///
/// The polar exponent `λ|t|^α e^{-iβ sgn t}` equals
/// `γ^α |t|^α (1 - i b tan(πα/2) sgn t)` with `γ^α = λ cos β` and
/// `b = tan β / tan(πα/2)`, which is the standard `S(α, b, γ, 0)` form
/// for `α ≠ 1`. Under that map the CMS shift `arctan(b tan(πα/2))/α`
/// reduces to `β/α` and the CMS prefactor times `γ` reduces to `λ^{1/α}`,
/// so with `U ~ Uniform(-π/2, π/2)` and `W ~ Exp(1)`:
///
/// ```text
/// X = λ^{1/α} · sin(αU + β) / cos(U)^{1/α} · (cos((1-α)U - β) / W)^{(1-α)/α}
/// ```
///
/// For `α = 1` only `β = 0` is supported, where `X = λ tan U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSampler {
    exponent: StableExponent,
    scale: f64,
    cauchy: bool,
}

impl StableSampler {
    pub fn new(exponent: StableExponent) -> Result<Self> {
        let cauchy = (exponent.alpha - 1.0).abs() < 1e-12;
        if cauchy && exponent.beta != 0.0 {
            return Err(PhimixError::Unsupported(format!(
                "sampling a strictly 1-stable law with skew β = {} (only β = 0 is supported at α = 1)",
                exponent.beta
            )));
        }
        Ok(Self { exponent, scale: exponent.lambda.powf(1.0 / exponent.alpha), cauchy })
    }

    pub fn exponent(&self) -> &StableExponent {
        &self.exponent
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = PI * (rng.sample::<f64, _>(Open01) - 0.5);
        if self.cauchy {
            return self.exponent.lambda * u.tan();
        }
        let StableExponent { alpha, beta, .. } = self.exponent;
        let w: f64 = Exp1.sample(rng);
        let w = w.max(f64::MIN_POSITIVE);
        let head = (alpha * u + beta).sin() / u.cos().powf(1.0 / alpha);
        let tail = (((1.0 - alpha) * u - beta).cos() / w).powf((1.0 - alpha) / alpha);
        self.scale * head * tail
    }
}

/// One draw from the strictly stable law with CF `exp(-ψ)`.
pub fn sample_strictly_stable<R: Rng + ?Sized>(e: &StableExponent, rng: &mut R) -> Result<f64> {
    Ok(e.sampler()?.sample(rng))
}

/// `φ(ψ(t))`: the CF of the φ-mixture of the ID law with CF `exp(-ψ)`.
pub fn mixture_cf<E: Exponent + ?Sized>(mixing: &MixingLaw, exponent: &E, t: f64) -> Result<Complex64> {
    mixing.lt_complex(exponent.psi(t))
}

/// Generalized Linnik law: CF `(1 + λ|t|^α e^{-iβ sgn t})^{-ν}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinnikLaw {
    exponent: StableExponent,
    nu: f64,
}

impl LinnikLaw {
    pub fn new(lambda: f64, alpha: f64, beta: f64, nu: f64) -> Result<Self> {
        require(nu.is_finite() && nu > 0.0, || format!("Linnik ν must be positive, got {nu}"))?;
        Ok(Self { exponent: StableExponent::new(lambda, alpha, beta)?, nu })
    }

    pub fn exponent(&self) -> &StableExponent {
        &self.exponent
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Closed form via the polar decomposition of `1 + ψ(t)`.
    pub fn cf(&self, t: f64) -> Complex64 {
        let z = Complex64::new(1.0, 0.0) + self.exponent.psi(t);
        Complex64::from_polar(z.norm().powf(-self.nu), -self.nu * z.arg())
    }

    /// The gamma mixing law that produces this Linnik law.
    pub fn mixing(&self) -> MixingLaw {
        MixingLaw::gamma(self.nu, 1.0).expect("ν validated at construction")
    }
}

pub fn linnik_cf(lambda: f64, alpha: f64, beta: f64, nu: f64, t: f64) -> Result<Complex64> {
    Ok(LinnikLaw::new(lambda, alpha, beta, nu)?.cf(t))
}

/// Draws `Z^{1/α} S` with `Z` from the mixing law and `S` strictly stable;
/// its CF is `φ(ψ(t))` because `exp(-zψ(t))` is the CF of `z^{1/α} S`.
pub fn sample_mixture_id<M: Mixing, R: Rng + ?Sized>(mixing: &M, stable: &StableSampler, rng: &mut R) -> f64 {
    let z = mixing.sample(rng);
    z.powf(1.0 / stable.exponent.alpha) * stable.sample(rng)
}
