//! Empirical transforms, distances and positive-definiteness witnesses shared
//! by every convergence check in the crate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{require, Result};

/// Symmetric CF comparison grid used throughout: 61 points on `[-5, 5]`.
pub fn cf_grid() -> Vec<f64> {
    crate::mixing::linspace(-5.0, 5.0, 61)
}

/// A seeded Monte-Carlo sample of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    seed: u64,
    spec: String,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>, seed: u64, spec: impl Into<String>) -> Result<Self> {
        require(!values.is_empty(), || "empirical sample must be non-empty".into())?;
        require(values.iter().all(|v| v.is_finite()), || "empirical sample contains non-finite values".into())?;
        Ok(Self { values, seed, spec: spec.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        empirical_cf(&self.values, t)
    }

    pub fn df(&self, x: f64) -> f64 {
        empirical_df(&self.values, x)
    }
}

/// `(1/n) Σ exp(i t x_j)`.
pub fn empirical_cf(sample: &[f64], t: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &x in sample {
        let (s, c) = (t * x).sin_cos();
        re += c;
        im += s;
    }
    let n = sample.len() as f64;
    Complex64::new(re / n, im / n)
}

/// Fraction of sample points `≤ x`.
pub fn empirical_df(sample: &[f64], x: f64) -> f64 {
    sample.iter().filter(|&&v| v <= x).count() as f64 / sample.len() as f64
}

/// Fraction of sample vectors lying component-wise below `x`.
/// `points` is row-major with `x.len()` columns.
pub fn empirical_joint_df(points: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    let n = points.len() / d;
    let hits = points
        .chunks_exact(d)
        .filter(|p| p.iter().zip(x).all(|(a, b)| a <= b))
        .count();
    hits as f64 / n as f64
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        // Evaluate once per distinct value so ties form a single jump.
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        // Compare the left limit F(x-) with the empirical value before the jump,
        // so that atoms of the target d.f. are handled exactly.
        let f = cdf(x);
        let f_left = cdf(x.next_down());
        d = d.max((j as f64 / n - f).abs()).max((f_left - i as f64 / n).abs());
        i = j;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleKs {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TwoSampleKs {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    TwoSampleKs { statistic: d, p_value: kolmogorov_sf(lambda) }
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        let y = -PI * PI / (8.0 * x * x);
        let cdf: f64 = (1..=20)
            .map(|k| (y * ((2 * k - 1) as f64).powi(2)).exp())
            .sum::<f64>()
            * (2.0 * PI).sqrt()
            / x;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let sf: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum::<f64>()
            * 2.0;
        sf.clamp(0.0, 1.0)
    }
}

/// `max_t |empirical_cf(t) - cf(t)|` over the grid.
pub fn cf_sup_distance<F: Fn(f64) -> Complex64>(sample: &[f64], cf: F, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&t| (empirical_cf(sample, t) - cf(t)).norm())
        .fold(0.0, f64::max)
}

/// Result of the Bochner grid check.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `max |f(-u) - conj f(u)|` over the differences `u = t_i - t_j`.
    pub hermitian_defect: f64,
    pub pass: bool,
}

/// Maximum number of grid points accepted by [`psd_toeplitz_check`].
pub const MAX_TOEPLITZ_POINTS: usize = 64;

/// Smallest eigenvalue of the Hermitian matrix `[f(t_i - t_j)]`.
///
/// Passes iff the matrix is Hermitian to within `tol` and its smallest
/// eigenvalue is at least `-tol · max(1, λ_max)`.
pub fn psd_toeplitz_check<F: Fn(f64) -> Complex64>(f: F, t_points: &[f64], tol: f64) -> Result<ToeplitzReport> {
    let m = t_points.len();
    require((1..=MAX_TOEPLITZ_POINTS).contains(&m), || {
        format!("Toeplitz check takes 1..={MAX_TOEPLITZ_POINTS} points, got {m}")
    })?;
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    let mut defect = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = f(t_points[i] - t_points[j]);
        }
    }
    for i in 0..m {
        for j in 0..i {
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
        defect = defect.max(a[(i, i)].im.abs());
    }
    // Real symmetric embedding [[Re, -Im], [Im, Re]] carries every eigenvalue twice.
    let mut r = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let h = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            r[(i, j)] = h.re;
            r[(i + m, j + m)] = h.re;
            r[(i, j + m)] = -h.im;
            r[(i + m, j)] = h.im;
        }
    }
    let eig = SymmetricEigen::new(r).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = defect <= tol && min >= -tol * max.abs().max(1.0);
    Ok(ToeplitzReport { min_eigenvalue: min, max_eigenvalue: max, hermitian_defect: defect, pass })
}

/// Number of local maxima of a Gaussian kernel density estimate evaluated on
/// `points` equispaced locations between the 1% and 99% sample quantiles.
/// Uses Silverman's bandwidth and ignores maxima below 5% of the peak.
pub fn kde_mode_count(sample: &[f64], points: usize) -> usize {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n < 2 || points < 3 {
        return usize::from(n > 0);
    }
    let q = |p: f64| xs[((n - 1) as f64 * p).round() as usize];
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let iqr = q(0.75) - q(0.25);
    let spread = sd.min(iqr / 1.34);
    let h = 0.9 * spread * (n as f64).powf(-0.2);
    let (lo, hi) = (q(0.01), q(0.99));
    let grid = crate::mixing::linspace(lo, hi, points);
    let dens: Vec<f64> = grid
        .iter()
        .map(|&g| {
            // Only points within 6h contribute measurably.
            let start = xs.partition_point(|&x| x < g - 6.0 * h);
            let end = xs.partition_point(|&x| x <= g + 6.0 * h);
            xs[start..end].iter().map(|&x| (-0.5 * ((g - x) / h).powi(2)).exp()).sum()
        })
        .collect();
    // Wiggles in sparse tails are not modes: require 5% of the peak height.
    let floor = 0.05 * dens.iter().copied().fold(0.0, f64::max);
    (1..points - 1)
        .filter(|&i| dens[i] >= floor && dens[i] > dens[i - 1] && dens[i] >= dens[i + 1])
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    fn normal_cdf(x: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn cf_at_zero_is_exactly_one() {
        let xs = vec![0.3, -2.0, 17.5];
        assert_eq!(empirical_cf(&xs, 0.0), Complex64::new(1.0, 0.0));
        let zeros = vec![0.0; 10];
        for t in [-3.0, 0.5, 9.0] {
            assert_eq!(empirical_cf(&zeros, t), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn gaussian_empirical_cf() {
        let xs = SeedStream::new(3).sample(100_000, 1, |r| {
            let z: f64 = StandardNormal.sample(r);
            std::f64::consts::SQRT_2 * z
        });
        assert!((empirical_cf(&xs, 1.0) - Complex64::new((-1.0f64).exp(), 0.0)).norm() < 0.01);
    }

    #[test]
    fn empirical_df_examples() {
        let xs = SeedStream::new(4).sample(100_000, 1, |r| r.random::<f64>());
        assert_eq!(empirical_df(&xs, -1.0), 0.0);
        assert_eq!(empirical_df(&xs, 2.0), 1.0);
        assert!((empirical_df(&xs, 0.5) - 0.5).abs() < 0.005);
        let pts = vec![0.0, 0.0, 1.0, 1.0, 2.0, 0.5];
        assert_eq!(empirical_joint_df(&pts, &[1.0, 1.0]), 2.0 / 3.0);
    }

    #[test]
    fn ks_self_sample_is_small() {
        let n = 100_000;
        let bound = 1.95 / (n as f64).sqrt();
        let mut passes = 0;
        for seed in 0..5 {
            let xs = SeedStream::new(seed).sample(n, 1, |r| StandardNormal.sample(r));
            if ks_distance(&xs, normal_cdf) < bound {
                passes += 1;
            }
        }
        assert_eq!(passes, 5);
    }

    #[test]
    fn ks_degenerate_and_mismatch() {
        let zeros = vec![0.0; 50];
        assert_eq!(ks_distance(&zeros, |x| if x >= 0.0 { 1.0 } else { 0.0 }), 0.0);
        // Midpoint quantiles of U(0, 1) sit exactly half a step from the d.f.
        let mid: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
        assert!((ks_distance(&mid, |x| x.clamp(0.0, 1.0)) - 0.01).abs() < 1e-15);
        let xs = SeedStream::new(9).sample(10_000, 1, |r| Exp1.sample(r));
        assert!(ks_distance(&xs, normal_cdf) > 0.2);
    }

    #[test]
    fn cf_distance_behaviour() {
        let xs = SeedStream::new(10).sample(50_000, 1, |r| StandardNormal.sample(r));
        assert_eq!(cf_sup_distance(&xs, |_| Complex64::new(1.0, 0.0), &[0.0]), 0.0);
        let own = cf_sup_distance(&xs, |t| Complex64::new((-t * t / 2.0).exp(), 0.0), &cf_grid());
        assert!(own < 3.0 / (50_000f64).sqrt() + 0.005, "{own}");
        let wrong = cf_sup_distance(&xs, |t| Complex64::new((-t.abs()).exp(), 0.0), &cf_grid());
        assert!(wrong > 0.1, "{wrong}");
    }

    #[test]
    fn cf_distance_decays_with_n() {
        let cf = |t: f64| Complex64::new((-t * t / 2.0).exp(), 0.0);
        let d: Vec<f64> = [1_000usize, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let xs = SeedStream::new(77).sample(n, 1, |r| StandardNormal.sample(r));
                cf_sup_distance(&xs, cf, &cf_grid())
            })
            .collect();
        for (k, &n) in [1_000f64, 10_000., 100_000.].iter().enumerate() {
            assert!(d[k] < 4.0 / n.sqrt(), "{d:?}");
        }
        assert!(d[2] < d[0]);
    }

    #[test]
    fn two_sample_ks() {
        let a = SeedStream::new(1).sample(20_000, 1, |r| StandardNormal.sample(r));
        let b = SeedStream::new(2).sample(20_000, 1, |r| StandardNormal.sample(r));
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| x + 0.1).collect();
        assert!(ks_two_sample(&a, &c).p_value < 0.01);
    }

    #[test]
    fn kolmogorov_sf_known_values() {
        // Tabulated: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        // Oracle values from the two series evaluated independently.
        assert!((kolmogorov_sf(1.0) - 0.26999967167735456).abs() < 1e-12);
        assert!((kolmogorov_sf(1.18) - 0.12345380942976569).abs() < 1e-12);
        assert!((kolmogorov_sf(0.5) - 0.9639452436648751).abs() < 1e-12);
    }

    #[test]
    fn toeplitz_examples() {
        let pts = crate::mixing::linspace(-3.0, 3.0, 13);
        let cauchy = psd_toeplitz_check(|t| Complex64::new((-t.abs()).exp(), 0.0), &pts, 1e-8).unwrap();
        assert!(cauchy.pass);
        let one = psd_toeplitz_check(|_| Complex64::new(1.0, 0.0), &pts, 1e-8).unwrap();
        assert!(one.pass);
        assert!((one.max_eigenvalue - 13.0).abs() < 1e-10);
        assert!(one.min_eigenvalue.abs() < 1e-10);
        let bad = psd_toeplitz_check(|t| Complex64::new(1.0 + t * t, 0.0), &[-1.0, 0.0, 1.0], 1e-8).unwrap();
        assert!(!bad.pass);
        let non_herm = psd_toeplitz_check(|t| Complex64::new(1.0, t.abs()), &[-1.0, 0.0, 1.0], 1e-8).unwrap();
        assert!(non_herm.hermitian_defect > 1.0 && !non_herm.pass);
        assert!(psd_toeplitz_check(|_| Complex64::new(1.0, 0.0), &[0.0; 65], 1e-8).is_err());
    }

    #[test]
    fn kde_unimodal_and_bimodal() {
        let uni = SeedStream::new(5).sample(5_000, 1, |r| StandardNormal.sample(r));
        assert_eq!(kde_mode_count(&uni, 200), 1);
        let bi = SeedStream::new(6).sample(5_000, 1, |r| {
            let z: f64 = StandardNormal.sample(r);
            if r.random::<bool>() { z - 4.0 } else { z + 4.0 }
        });
        assert_eq!(kde_mode_count(&bi, 200), 2);
    }

    #[test]
    fn empirical_sample_validates() {
        assert!(EmpiricalSample::new(vec![], 0, "x").is_err());
        assert!(EmpiricalSample::new(vec![f64::NAN], 0, "x").is_err());
        let s = EmpiricalSample::new(vec![1.0, 2.0], 4, "spec").unwrap();
        assert_eq!(s.df(1.5), 0.5);
        assert_eq!(s.seed(), 4);
    }
}
