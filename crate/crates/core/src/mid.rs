//! Max-infinitely divisible distribution functions on `R^d`, `d ≥ 2`.
//!
//! A d.f. `H` is MID when every power `H^s`, `s > 0`, is again a d.f. The
//! built-in laws are product-form so that `H^t` can be sampled exactly,
//! which realizes the extremal process `Y(t)` with `P{Y(t) ≤ x} = H(x)^t`.
//! Randomizing `t` by a mixing law gives the d.f. `φ(-log H)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{require, PhimixError, Result};
use crate::mixing::{LaplaceTransform, Mixing};

/// A joint distribution function evaluated point-wise.
pub trait JointDf {
    fn df(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> JointDf for F {
    fn df(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MidKind {
    /// `exp(-Σ (x_i - l_i)^{-γ_i})` for `x > l`.
    ProductFrechet {
        gamma: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
    },
    /// `Π (1 - exp(-r_i (x_i - l_i)))` for `x > l`.
    ProductExponential {
        rate: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
    },
}

/// Validated MID law: `mid = { kind = "product-frechet", gamma = [1.0, 1.0] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MidKind", into = "MidKind")]
pub struct MidLaw {
    kind: MidKind,
    params: Vec<f64>,
    lower: Vec<f64>,
}

impl TryFrom<MidKind> for MidLaw {
    type Error = PhimixError;

    fn try_from(kind: MidKind) -> Result<Self> {
        let (params, lower) = match &kind {
            MidKind::ProductFrechet { gamma, lower } => (gamma.clone(), lower.clone()),
            MidKind::ProductExponential { rate, lower } => (rate.clone(), lower.clone()),
        };
        let d = params.len();
        require(d >= 2, || format!("MID laws live on R^d with d ≥ 2, got d = {d}"))?;
        require(params.iter().all(|p| p.is_finite() && *p > 0.0), || "MID shape/rate parameters must be positive".into())?;
        let lower = lower.unwrap_or_else(|| vec![0.0; d]);
        require(lower.len() == d, || format!("lower corner has {} coordinates, expected {d}", lower.len()))?;
        require(lower.iter().all(|l| l.is_finite()), || "lower corner must be finite".into())?;
        Ok(Self { kind, params, lower })
    }
}

impl From<MidLaw> for MidKind {
    fn from(law: MidLaw) -> Self {
        law.kind
    }
}

impl MidLaw {
    pub fn product_frechet(gamma: Vec<f64>) -> Result<Self> {
        MidKind::ProductFrechet { gamma, lower: None }.try_into()
    }

    pub fn product_exponential(rate: Vec<f64>, lower: Vec<f64>) -> Result<Self> {
        MidKind::ProductExponential { rate, lower: Some(lower) }.try_into()
    }

    pub fn kind(&self) -> &MidKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn is_frechet(&self) -> bool {
        matches!(self.kind, MidKind::ProductFrechet { .. })
    }

    /// Per-coordinate Fréchet shapes, if this is a product-Fréchet law.
    pub fn frechet_shapes(&self) -> Option<&[f64]> {
        self.is_frechet().then_some(self.params.as_slice())
    }

    /// `-log H(x)`, `+∞` outside the support.
    pub fn neg_log_df(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut total = 0.0;
        for ((&xi, &p), &l) in x.iter().zip(&self.params).zip(&self.lower) {
            let y = xi - l;
            if !(y > 0.0) {
                return f64::INFINITY;
            }
            total += match self.kind {
                MidKind::ProductFrechet { .. } => y.powf(-p),
                MidKind::ProductExponential { .. } => -(-(-p * y).exp()).ln_1p(),
            };
        }
        total
    }

    /// Draws one vector from the d.f. `H^t`.
    pub fn sample_power<R: Rng + ?Sized>(&self, t: f64, rng: &mut R, out: &mut [f64]) {
        for ((o, &p), &l) in out.iter_mut().zip(&self.params).zip(&self.lower) {
            *o = match self.kind {
                // P(X ≤ x) = exp(-t x^{-γ})  ⇔  X = (t/E)^{1/γ}
                MidKind::ProductFrechet { .. } => {
                    let e: f64 = Exp1.sample(rng);
                    l + (t / e.max(f64::MIN_POSITIVE)).powf(1.0 / p)
                }
                // P(X ≤ x) = (1 - e^{-r x})^t  ⇔  X = -ln(1 - U^{1/t}) / r
                MidKind::ProductExponential { .. } => {
                    let u: f64 = rng.sample(Open01);
                    l - (-(u.powf(1.0 / t))).ln_1p() / p
                }
            };
        }
    }
}

/// `mid_df_eval`.
impl JointDf for MidLaw {
    fn df(&self, x: &[f64]) -> f64 {
        (-self.neg_log_df(x)).exp()
    }
}

pub fn mid_df_eval(h: &MidLaw, x: &[f64]) -> f64 {
    h.df(x)
}

/// `φ(-log H(x))`, with the boundary value 0 where `H(x) = 0`.
pub fn mixture_mid_df<L: LaplaceTransform + ?Sized>(mixing: &L, h: &MidLaw, x: &[f64]) -> f64 {
    let s = h.neg_log_df(x);
    if s.is_finite() {
        mixing.lt(s)
    } else {
        0.0
    }
}

/// Draws `Y(Z)`: `Z` from the mixing law, then one vector from `H^Z`.
pub fn sample_extremal_at_random_time<M: Mixing, R: Rng + ?Sized>(mixing: &M, h: &MidLaw, rng: &mut R) -> Vec<f64> {
    let z = mixing.sample(rng);
    let mut out = vec![0.0; h.dim()];
    h.sample_power(z, rng, &mut out);
    out
}

/// Iterates over all points of a rectangular grid given per-axis coordinates.
pub(crate) fn for_each_index(axes: &[Vec<f64>], mut visit: impl FnMut(&[usize])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; axes.len()];
    loop {
        visit(&idx);
        let mut axis = 0;
        loop {
            if axis == axes.len() {
                return;
            }
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn point(axes: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    idx.iter().zip(axes).map(|(&i, a)| a[i]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Value outside `[0, 1]`.
    Range,
    /// Decrease along the given axis.
    Monotone { axis: usize },
    /// Negative mass of the grid cell whose lower corner is `at`.
    RectangleMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub s: f64,
    pub kind: ViolationKind,
    pub at: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCheckReport {
    pub pass: bool,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
}

/// Checks that `H^s` behaves as a d.f. on the grid for every `s` in `s_list`:
/// values in `[0, 1]`, non-decreasing along each axis, and every grid cell
/// carrying nonnegative mass (inclusion–exclusion over its `2^d` corners).
pub fn mid_power_check<H: JointDf + ?Sized>(h: &H, s_list: &[f64], axes: &[Vec<f64>], tol: f64) -> Result<PowerCheckReport> {
    require(!axes.is_empty(), || "grid needs at least one axis".into())?;
    for a in axes {
        require(a.windows(2).all(|w| w[1] > w[0]), || "grid axes must be strictly increasing".into())?;
    }
    require(s_list.iter().all(|&s| s > 0.0), || "powers s must be positive".into())?;
    let d = axes.len();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let strides: Vec<usize> = (0..d).map(|i| shape[..i].iter().product()).collect();
    let flat = |idx: &[usize]| idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>();

    let mut base = vec![0.0; shape.iter().product()];
    for_each_index(axes, |idx| base[flat(idx)] = h.df(&point(axes, idx)));

    let mut violations = Vec::new();
    for &s in s_list {
        let vals: Vec<f64> = base.iter().map(|&v| if v > 0.0 { v.powf(s) } else { v }).collect();
        for_each_index(axes, |idx| {
            let v = vals[flat(idx)];
            let at = || point(axes, idx);
            if !(v >= -tol && v <= 1.0 + tol) {
                violations.push(Violation { s, kind: ViolationKind::Range, at: at(), value: v });
            }
            for axis in 0..d {
                if idx[axis] + 1 < shape[axis] {
                    let next = vals[flat(idx) + strides[axis]];
                    if next - v < -tol {
                        violations.push(Violation { s, kind: ViolationKind::Monotone { axis }, at: at(), value: next - v });
                    }
                }
            }
            if idx.iter().zip(&shape).all(|(&i, &n)| i + 1 < n) {
                let mut mass = 0.0;
                for corner in 0..(1usize << d) {
                    let mut off = 0;
                    let mut lower_count = 0;
                    for (axis, stride) in strides.iter().enumerate().take(d) {
                        if corner >> axis & 1 == 1 {
                            off += stride;
                        } else {
                            lower_count += 1;
                        }
                    }
                    let sign = if lower_count % 2 == 0 { 1.0 } else { -1.0 };
                    mass += sign * vals[flat(idx) + off];
                }
                if mass < -tol {
                    violations.push(Violation { s, kind: ViolationKind::RectangleMass, at: at(), value: mass });
                }
            }
        });
    }
    Ok(PowerCheckReport { pass: violations.is_empty(), points_checked: base.len() * s_list.len(), violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectangleReport {
    pub pass: bool,
    /// Grid points where positivity differs from the product of its projections.
    pub mismatches: Vec<Vec<f64>>,
}

/// Checks that `{H > 0}` restricted to the grid is the product of its
/// coordinate projections.
pub fn support_rectangle_check<H: JointDf + ?Sized>(h: &H, axes: &[Vec<f64>]) -> RectangleReport {
    let mut positive = Vec::new();
    let mut projections: Vec<Vec<bool>> = axes.iter().map(|a| vec![false; a.len()]).collect();
    for_each_index(axes, |idx| {
        let p = h.df(&point(axes, idx)) > 0.0;
        if p {
            for (axis, &i) in idx.iter().enumerate() {
                projections[axis][i] = true;
            }
        }
        positive.push((idx.to_vec(), p));
    });
    let mismatches: Vec<Vec<f64>> = positive
        .into_iter()
        .filter(|(idx, p)| idx.iter().enumerate().all(|(axis, &i)| projections[axis][i]) != *p)
        .map(|(idx, _)| point(axes, &idx))
        .collect();
    RectangleReport { pass: mismatches.is_empty(), mismatches }
}

/// Bivariate d.f.s that are valid distribution functions but not MID.
pub mod fixtures {
    use super::JointDf;

    /// Lower Fréchet bound `max(0, u + v - 1)` on the unit square: the law of
    /// `(U, 1 - U)`. Its positivity set `{u + v > 1}` is a triangle.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct Countermonotone;

    impl JointDf for Countermonotone {
        fn df(&self, x: &[f64]) -> f64 {
            let u = x[0].clamp(0.0, 1.0);
            let v = x[1].clamp(0.0, 1.0);
            (u + v - 1.0).max(0.0)
        }
    }

    /// Equal atoms at `(0, 1)` and `(1, 0)`: the average of two shifted
    /// point-mass product d.f.s. Its positivity set is L-shaped.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct TwoAtom;

    impl JointDf for TwoAtom {
        fn df(&self, x: &[f64]) -> f64 {
            let a = if x[0] >= 0.0 && x[1] >= 1.0 { 0.5 } else { 0.0 };
            let b = if x[0] >= 1.0 && x[1] >= 0.0 { 0.5 } else { 0.0 };
            a + b
        }
    }

    /// Standard check grid for both fixtures.
    pub fn grid() -> Vec<Vec<f64>> {
        let axis = crate::mixing::linspace(-0.25, 1.5, 8);
        vec![axis.clone(), axis]
    }
}

/// Log-spaced axis `{0.25, 0.5, …, 16}` covering the Fréchet bulk.
pub fn frechet_axis() -> Vec<f64> {
    (0..7).map(|i| 0.25 * 2f64.powi(i)).collect()
}
