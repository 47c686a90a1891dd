//! Self-decomposability (class L) witnesses.
//!
//! An LT `φ` is self-decomposable when `φ(s)/φ(cs)` is again an LT for every
//! `0 < c < 1`; a CF `f` when `f(t)/f(ct)` is again a CF. Neither property is
//! decidable from finite data, so the checks run the crate's numerical
//! witnesses on each factor: finite-difference complete monotonicity for
//! LTs and the Toeplitz positive-semidefiniteness test for CFs.
//!
//! A φ-mixture of a strictly stable law inherits membership from `φ`:
//! `φ(ψ) = φ(cψ)·φ_c(ψ)` and `cψ(t) = ψ(c^{1/α} t)`.

use num_complex::Complex64;

use crate::error::{require, PhimixError, Result};
use crate::id_laws::{mixture_cf, StableExponent};
use crate::mixing::{check_complete_monotonicity, LaplaceTransform, MixingLaw, MonotonicityReport};
use crate::stats::{psd_toeplitz_check, ToeplitzReport};

/// Finite-difference order used for the LT factor check.
pub const FACTOR_CM_ORDER: usize = 6;

/// `φ(s)/φ(cs)`.
pub fn selfdecomp_factor<L: LaplaceTransform + ?Sized>(phi: &L, c: f64, s: f64) -> Result<f64> {
    require(c > 0.0 && c < 1.0, || format!("c must lie in (0, 1), got {c}"))?;
    if !(s >= 0.0) {
        return Err(PhimixError::Domain { what: "the self-decomposability factor", value: s });
    }
    Ok(phi.lt(s) / phi.lt(c * s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorCheckRow {
    pub c: f64,
    pub report: MonotonicityReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorCheckReport {
    pub rows: Vec<FactorCheckRow>,
    pub pass: bool,
}

/// Complete-monotonicity check of `s ↦ φ(s)/φ(cs)` for every `c` in the grid.
pub fn classl_factor_check<L: LaplaceTransform + ?Sized>(
    phi: &L,
    c_grid: &[f64],
    s_grid: &[f64],
    tol: f64,
) -> Result<FactorCheckReport> {
    require(!c_grid.is_empty(), || "c grid is empty".into())?;
    require(c_grid.iter().all(|&c| c > 0.0 && c < 1.0), || "c grid must lie in (0, 1)".into())?;
    require(s_grid.first().is_some_and(|&s| s >= 0.0), || "s grid must be nonnegative".into())?;
    let rows = c_grid
        .iter()
        .map(|&c| {
            let report = check_complete_monotonicity(|s| phi.lt(s) / phi.lt(c * s), s_grid, FACTOR_CM_ORDER, tol)?;
            Ok(FactorCheckRow { c, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.report.pass);
    Ok(FactorCheckReport { rows, pass })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CfFactorOutcome {
    /// Toeplitz check of `f(t)/f(ct)` plus the largest modulus seen.
    Checked { toeplitz: ToeplitzReport, max_modulus: f64 },
    /// `f` vanishes (to the scan resolution) near this point, so the factor is undefined.
    RealZero { t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfCheckRow {
    pub c: f64,
    pub outcome: CfFactorOutcome,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfCheckReport {
    pub rows: Vec<CfCheckRow>,
    pub pass: bool,
}

/// Locates a zero of `f` on `[0, t_max]` by scanning segments of length
/// `t_max / steps`. A zero is reported where `f` vanishes exactly or the
/// chord between consecutive values passes within `rel_tol` times the larger
/// endpoint modulus of the origin. Fast but zero-free decay does not trigger.
pub fn find_real_zero<F: Fn(f64) -> Complex64>(f: &F, t_max: f64, steps: usize, rel_tol: f64) -> Option<f64> {
    let h = t_max / steps as f64;
    let mut prev_t = 0.0;
    let mut prev = f(0.0);
    if prev.norm() == 0.0 {
        return Some(0.0);
    }
    for i in 1..=steps {
        let t = i as f64 * h;
        let cur = f(t);
        if cur.norm() == 0.0 {
            return Some(t);
        }
        let d = cur - prev;
        let lambda = if d.norm_sqr() > 0.0 { (-(prev.conj() * d).re / d.norm_sqr()).clamp(0.0, 1.0) } else { 0.0 };
        if (prev + d * lambda).norm() <= rel_tol * prev.norm().max(cur.norm()) {
            return Some(prev_t + lambda * h);
        }
        prev_t = t;
        prev = cur;
    }
    None
}

/// For each `c`, forms `g_c(t) = f(t)/f(ct)` and checks that `[g_c(t_i - t_j)]`
/// is positive semidefinite and `|g_c| ≤ 1 + tol` on the differences.
pub fn selfdecomp_cf_check<F: Fn(f64) -> Complex64>(f: F, c_grid: &[f64], t_grid: &[f64], tol: f64) -> Result<CfCheckReport> {
    require(!c_grid.is_empty(), || "c grid is empty".into())?;
    require(c_grid.iter().all(|&c| c > 0.0 && c < 1.0), || "c grid must lie in (0, 1)".into())?;
    require(!t_grid.is_empty(), || "t grid is empty".into())?;
    require((f(0.0) - Complex64::new(1.0, 0.0)).norm() <= tol, || "f(0) must equal 1".into())?;
    let reach = t_grid.iter().fold(0.0f64, |m, &a| t_grid.iter().fold(m, |m, &b| m.max((a - b).abs())));
    let zero = find_real_zero(&f, reach.max(1e-12), 20_000, 1e-6);
    let rows = c_grid
        .iter()
        .map(|&c| {
            if let Some(t) = zero {
                return Ok(CfCheckRow { c, outcome: CfFactorOutcome::RealZero { t }, pass: false });
            }
            let g = |t: f64| f(t) / f(c * t);
            let toeplitz = psd_toeplitz_check(g, t_grid, tol)?;
            let max_modulus = t_grid
                .iter()
                .flat_map(|&a| t_grid.iter().map(move |&b| a - b))
                .map(|u| g(u).norm())
                .fold(0.0, f64::max);
            let pass = toeplitz.pass && max_modulus <= 1.0 + tol;
            Ok(CfCheckRow { c, outcome: CfFactorOutcome::Checked { toeplitz, max_modulus }, pass })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(CfCheckReport { rows, pass })
}

/// Default grids for the class-L checks.
pub fn default_c_grid() -> Vec<f64> {
    vec![0.3, 0.5, 0.7]
}

pub fn default_s_grid() -> Vec<f64> {
    crate::mixing::linspace(0.0, 20.0, 81)
}

pub fn default_t_grid() -> Vec<f64> {
    crate::mixing::linspace(-5.0, 5.0, 41)
}

/// The CF `t ↦ φ(ψ(t))` of a class-L mixing law applied to a strictly stable exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassLMixture {
    mixing: MixingLaw,
    exponent: StableExponent,
}

impl ClassLMixture {
    pub fn cf(&self, t: f64) -> Complex64 {
        mixture_cf(&self.mixing, &self.exponent, t).expect("Re ψ ≥ 0 keeps 1 + σψ off the branch cut")
    }

    pub fn mixing(&self) -> &MixingLaw {
        &self.mixing
    }

    pub fn exponent(&self) -> &StableExponent {
        &self.exponent
    }
}

/// Builds the mixture after confirming the factor check on default grids.
pub fn construct_classl_mixture(mixing: MixingLaw, exponent: StableExponent) -> Result<ClassLMixture> {
    let report = classl_factor_check(&mixing, &default_c_grid(), &default_s_grid(), 1e-9)?;
    if let Some(bad) = report.rows.iter().find(|r| !r.report.pass) {
        return Err(PhimixError::NotClassL { c: bad.c, worst_violation: bad.report.worst_violation });
    }
    Ok(ClassLMixture { mixing, exponent })
}

/// LT `0.5 + 0.5 e^{-s}` of a Bernoulli-scaled law: an LT, but not self-decomposable.
#[derive(Debug, Clone, Copy, Default)]
pub struct BernoulliLt;

impl LaplaceTransform for BernoulliLt {
    fn lt(&self, s: f64) -> f64 {
        0.5 + 0.5 * (-s).exp()
    }
}

/// CF `sin t / t` of the uniform law on `(-1, 1)`.
pub fn uniform_cf(t: f64) -> Complex64 {
    if t == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(t.sin() / t, 0.0)
    }
}
