//! Stable processes run on a random clock.
//!
//! If `X` has stationary independent increments with CF `exp(-sψ)` and the
//! directing subordinator `T` has Laplace transform `φ^t` at time `t`, then
//! `X(T(t))` has CF `φ(ψ)^t`. Only directing laws whose convolution powers
//! stay in a closed-form family are supported (gamma, exponential as gamma
//! with unit shape, degenerate).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{require, Result};
use crate::id_laws::{mixture_cf, StableExponent, StableSampler};
use crate::mixing::{Mixing, MixingLaw};

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatedSpec {
    base: StableExponent,
    sampler: StableSampler,
    directing: MixingLaw,
    times: Vec<f64>,
}

impl SubordinatedSpec {
    pub fn new(base: StableExponent, directing: MixingLaw, times: Vec<f64>) -> Result<Self> {
        require(!times.is_empty(), || "time grid is empty".into())?;
        require(times[0] > 0.0, || "time grid must be positive".into())?;
        require(times.windows(2).all(|w| w[1] > w[0]), || "time grid must be strictly increasing".into())?;
        let sampler = base.sampler()?;
        Ok(Self { base, sampler, directing, times })
    }

    pub fn base(&self) -> &StableExponent {
        &self.base
    }

    pub fn directing(&self) -> &MixingLaw {
        &self.directing
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `h(t)^{time}` with `h = φ(ψ)`, evaluated as the mixture CF of the
    /// time-`time` directing law so that no branch of the power is lost.
    pub fn cf(&self, time: f64, t: f64) -> Result<Complex64> {
        mixture_cf(&self.directing.convolution_power(time)?, &self.base, t)
    }

    /// Values `X(T(t_i))` along the time grid.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let inv_alpha = 1.0 / self.base.alpha();
        let mut prev = 0.0;
        let mut x = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let dt_law = self.directing.convolution_power(t - prev).expect("positive increment");
                prev = t;
                let clock = dt_law.sample(rng);
                x += clock.powf(inv_alpha) * self.sampler.sample(rng);
                x
            })
            .collect()
    }
}

pub fn subordinated_cf(spec: &SubordinatedSpec, time: f64, t: f64) -> Result<Complex64> {
    spec.cf(time, t)
}

pub fn sample_subordinated_path<R: Rng + ?Sized>(spec: &SubordinatedSpec, rng: &mut R) -> Vec<f64> {
    spec.sample_path(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::id_laws::sample_mixture_id;
    use crate::rng::SeedStream;
    use crate::stats::{cf_grid, cf_sup_distance, ks_distance, ks_two_sample};

    fn gauss() -> StableExponent {
        StableExponent::new(1.0, 2.0, 0.0).unwrap()
    }

    #[test]
    fn cf_examples() {
        let g1 = MixingLaw::gamma(1.0, 1.0).unwrap();
        let spec = SubordinatedSpec::new(gauss(), g1, vec![1.0, 2.0]).unwrap();
        for t in [-2.0, 0.3, 4.0] {
            let h = mixture_cf(&g1, &gauss(), t).unwrap();
            assert!((spec.cf(1.0, t).unwrap() - h).norm() < 1e-15);
        }
        assert!((spec.cf(2.0, 1.0).unwrap() - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        for time in [0.1, 1.0, 7.5] {
            assert_eq!(spec.cf(time, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn cf_power_keeps_branch_for_skewed_base() {
        // ν·time·arg(1 + ψ) exceeds π here; the directing-law route stays on the right branch.
        let base = StableExponent::new(3.0, 0.9, 1.2).unwrap();
        let spec = SubordinatedSpec::new(base, MixingLaw::gamma(3.0, 1.0).unwrap(), vec![1.0]).unwrap();
        let t = 4.0;
        let z = Complex64::new(1.0, 0.0) + crate::id_laws::Exponent::psi(&base, t);
        let nu_time = 3.0 * 2.5;
        let expected = Complex64::from_polar(z.norm().powf(-nu_time), -nu_time * z.arg());
        assert!((spec.cf(2.5, t).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        let g = MixingLaw::gamma(1.0, 1.0).unwrap();
        assert!(SubordinatedSpec::new(gauss(), g, vec![]).is_err());
        assert!(SubordinatedSpec::new(gauss(), g, vec![0.0, 1.0]).is_err());
        assert!(SubordinatedSpec::new(gauss(), g, vec![1.0, 1.0]).is_err());
        let skewed_cauchy = StableExponent::new(1.0, 1.0, 0.2).unwrap();
        assert!(SubordinatedSpec::new(skewed_cauchy, g, vec![1.0]).is_err());
    }

    #[test]
    fn degenerate_clock_gives_brownian_increments() {
        let spec = SubordinatedSpec::new(gauss(), MixingLaw::degenerate(1.0).unwrap(), vec![0.5, 1.0]).unwrap();
        let n = 100_000;
        let ends: Vec<f64> = SeedStream::new(1).sample(n, 1, |r| spec.sample_path(r)[1]);
        let var = ends.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // Variance 2λ = 2 over [0, 1]; the sample variance has sd ≈ 2·√(2/n).
        assert!((var - 2.0).abs() < 4.0 * 2.0 * (2.0 / n as f64).sqrt(), "{var}");
    }

    #[test]
    fn gamma_clock_endpoint_is_laplace() {
        let spec = SubordinatedSpec::new(gauss(), MixingLaw::gamma(1.0, 1.0).unwrap(), vec![0.25, 1.0]).unwrap();
        let ends: Vec<f64> = SeedStream::new(2).sample(100_000, 1, |r| spec.sample_path(r)[1]);
        let laplace = |x: f64| if x < 0.0 { 0.5 * x.exp() } else { 1.0 - 0.5 * (-x).exp() };
        assert!(ks_distance(&ends, laplace) < 0.01);
    }

    #[test]
    fn disjoint_increments_uncorrelated() {
        let spec = SubordinatedSpec::new(gauss(), MixingLaw::gamma(1.0, 1.0).unwrap(), vec![1.0, 2.0]).unwrap();
        let n = 100_000;
        let paths = SeedStream::new(3).sample(n, 1, |r| spec.sample_path(r));
        let a: Vec<f64> = paths.iter().map(|p| p[0]).collect();
        let b: Vec<f64> = paths.iter().map(|p| p[1] - p[0]).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n as f64;
        let sa = (a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n as f64).sqrt();
        let sb = (b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((cov / (sa * sb)).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn path_marginals_match_cf() {
        let n = 100_000;
        let bound = 3.0 / (n as f64).sqrt() + 0.005;
        for (base, directing) in [
            (gauss(), MixingLaw::gamma(1.0, 1.0).unwrap()),
            (StableExponent::new(1.0, 1.0, 0.0).unwrap(), MixingLaw::exponential(0.5).unwrap()),
            (StableExponent::new(0.5, 1.5, 0.4).unwrap(), MixingLaw::gamma(2.0, 1.0).unwrap()),
            (StableExponent::new(1.0, 0.7, 0.0).unwrap(), MixingLaw::degenerate(1.0).unwrap()),
        ] {
            let spec = SubordinatedSpec::new(base, directing, vec![0.5, 1.0, 2.0]).unwrap();
            let paths = SeedStream::new(4).sample(n, 1, |r| spec.sample_path(r));
            for (i, &time) in spec.times().iter().enumerate() {
                let xs: Vec<f64> = paths.iter().map(|p| p[i]).collect();
                let d = cf_sup_distance(&xs, |t| spec.cf(time, t).unwrap(), &cf_grid());
                assert!(d < bound, "{base:?} {directing:?} time={time}: {d}");
            }
        }
    }

    #[test]
    fn unit_time_marginal_equals_mixture_draws() {
        let g = MixingLaw::gamma(1.0, 1.0).unwrap();
        let spec = SubordinatedSpec::new(gauss(), g, vec![0.3, 1.0]).unwrap();
        let ends: Vec<f64> = SeedStream::new(5).sample(50_000, 1, |r| spec.sample_path(r)[1]);
        let s = gauss().sampler().unwrap();
        let direct = SeedStream::new(6).sample(50_000, 1, |r| sample_mixture_id(&g, &s, r));
        assert!(ks_two_sample(&ends, &direct).p_value > 0.01);
    }

    #[test]
    fn additivity_of_marginals() {
        // X(T(1.5)) vs independent X(T(0.5)) + X(T(1.0)).
        let g = MixingLaw::gamma(1.5, 1.0).unwrap();
        let base = StableExponent::new(1.0, 1.2, 0.0).unwrap();
        let n = 100_000;
        let long = SubordinatedSpec::new(base, g, vec![1.5]).unwrap();
        let a = SubordinatedSpec::new(base, g, vec![0.5]).unwrap();
        let b = SubordinatedSpec::new(base, g, vec![1.0]).unwrap();
        let xs = SeedStream::new(7).sample(n, 1, |r| long.sample_path(r)[0]);
        let ys = SeedStream::new(8).sample(n, 1, |r| a.sample_path(r)[0] + b.sample_path(r)[0]);
        let d = crate::mixing::linspace(-5.0, 5.0, 61)
            .iter()
            .map(|&t| (crate::stats::empirical_cf(&xs, t) - crate::stats::empirical_cf(&ys, t)).norm())
            .fold(0.0, f64::max);
        assert!(d < 2.0 * (3.0 / (n as f64).sqrt()) + 0.005, "{d}");
    }
}
