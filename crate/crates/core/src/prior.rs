//! Hierarchical sparse-source prior: a random number of sources k, i.i.d.
//! uniform positions on the source domain and i.i.d. circular complex
//! Gaussian amplitudes, all mutually independent.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{Source, SourceConfig, SourceDomain};

/// Upper end of the support used by enumeration utilities for Poisson laws.
pub const POISSON_ENUMERATION_MAX: usize = 30;

/// Law of the number of sources.
#[derive(Debug, Clone, PartialEq)]
pub enum CountLaw {
    Poisson { lambda: f64 },
    /// Explicit pmf over `0..pmf.len()`.
    Pmf(Vec<f64>),
}

impl CountLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            CountLaw::Poisson { lambda } if !(lambda.is_finite() && *lambda > 0.0) => {
                Err(Error::InvalidParameter(alloc::format!("Poisson rate must be positive, got {lambda}")))
            }
            CountLaw::Pmf(p) => {
                if p.is_empty() || p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidParameter("source-count pmf must be non-empty and non-negative".into()));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(alloc::format!("source-count pmf sums to {total}, not 1")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match self {
            CountLaw::Poisson { lambda } => {
                let kf = k as f64;
                math::exp(kf * math::ln(*lambda) - lambda - math::ln_gamma(kf + 1.0))
            }
            CountLaw::Pmf(p) => p.get(k).copied().unwrap_or(0.0),
        }
    }

    /// Largest k listed by enumeration utilities.
    pub fn k_max(&self) -> usize {
        match self {
            CountLaw::Poisson { .. } => POISSON_ENUMERATION_MAX,
            CountLaw::Pmf(p) => p.len() - 1,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CountLaw::Poisson { lambda } => *lambda,
            CountLaw::Pmf(p) => p.iter().enumerate().map(|(k, v)| k as f64 * v).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            CountLaw::Poisson { lambda } => {
                let d = Poisson::new(*lambda).expect("validated Poisson rate");
                let k: f64 = d.sample(rng);
                k as usize
            }
            CountLaw::Pmf(p) => {
                let mut target = rng.random::<f64>();
                for (k, v) in p.iter().enumerate() {
                    if target < *v {
                        return k;
                    }
                    target -= v;
                }
                // Round-off: fall back to the last supported count.
                p.iter().rposition(|v| *v > 0.0).unwrap_or(0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub count_law: CountLaw,
    /// Amplitude mean m_α.
    pub amp_mean: Complex64,
    /// Amplitude variance `E|α − m_α|²`.
    pub amp_variance: f64,
    pub domain: SourceDomain,
}

impl PriorSpec {
    pub fn new(count_law: CountLaw, amp_mean: Complex64, amp_variance: f64, domain: SourceDomain) -> Result<Self> {
        let spec = Self {
            count_law,
            amp_mean,
            amp_variance,
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.count_law.validate()?;
        if !(self.amp_variance.is_finite() && self.amp_variance > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "amplitude variance must be positive, got {}",
                self.amp_variance
            )));
        }
        Ok(())
    }

    /// Circular complex Gaussian draw with the amplitude variance, mean zero.
    pub fn amplitude_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let s = math::sqrt(self.amp_variance / 2.0);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }

    /// One prior draw. Draw order: k, then (position, amplitude) per source.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SourceConfig {
        let k = self.count_law.sample(rng);
        let sources: Vec<Source> = (0..k)
            .map(|_| {
                let position = self.domain.sample(rng);
                let amplitude = self.amp_mean + self.amplitude_noise(rng);
                Source::new(amplitude, position)
            })
            .collect();
        SourceConfig::new(sources)
    }

    pub fn k_pmf(&self, k: usize) -> f64 {
        self.count_law.pmf(k)
    }
}

/// Free-function form of [`PriorSpec::sample`].
pub fn sample_prior<R: Rng + ?Sized>(spec: &PriorSpec, rng: &mut R) -> SourceConfig {
    spec.sample(rng)
}

/// Exact prior probability of k sources.
pub fn prior_k_pmf(spec: &PriorSpec, k: usize) -> f64 {
    spec.k_pmf(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(lambda: f64) -> PriorSpec {
        let domain = SourceDomain::new(alloc::vec![Rect::new(0.1, 0.9, 0.6, 0.9)], 0.05, Rect::UNIT).unwrap();
        PriorSpec::new(CountLaw::Poisson { lambda }, Complex64::new(10.0, 10.0), 2.0, domain).unwrap()
    }

    #[test]
    fn poisson_pmf_values() {
        let s = spec(4.0);
        assert!((s.k_pmf(0) - math::exp(-4.0)).abs() < 1e-15);
        // e⁻⁴·4³/3! and e⁻⁴·4⁵/5!
        assert!((s.k_pmf(3) - math::exp(-4.0) * 64.0 / 6.0).abs() < 1e-14);
        assert!((s.k_pmf(3) - 0.195).abs() < 0.0005);
        assert!((s.k_pmf(5) - 0.156).abs() < 0.0005);
        let tail: f64 = 1.0 - (0..=POISSON_ENUMERATION_MAX).map(|k| s.k_pmf(k)).sum::<f64>();
        assert!(tail.abs() < 1e-12);
    }

    #[test]
    fn invalid_laws_rejected() {
        assert!(CountLaw::Poisson { lambda: 0.0 }.validate().is_err());
        assert!(CountLaw::Pmf(alloc::vec![0.5, 0.4]).validate().is_err());
        assert!(CountLaw::Pmf(alloc::vec![0.5, 0.5]).validate().is_ok());
        let mut s = spec(2.0);
        s.amp_variance = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn explicit_pmf_sampling() {
        let law = CountLaw::Pmf(alloc::vec![0.2, 0.0, 0.8]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let twos = (0..n).filter(|_| law.sample(&mut rng) == 2).count();
        let frac = twos as f64 / n as f64;
        assert!((frac - 0.8).abs() < 4.0 * libm::sqrt(0.16 / n as f64));
        assert_eq!(law.pmf(7), 0.0);
    }

    #[test]
    fn poisson_count_frequency() {
        let s = spec(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 1_000_000;
        let twos = (0..n).filter(|_| s.count_law.sample(&mut rng) == 2).count();
        let p = math::exp(-2.0) * 2.0;
        let frac = twos as f64 / n as f64;
        assert!((p - 0.2707).abs() < 1e-4);
        assert!((frac - p).abs() < 3.0 * libm::sqrt(p * (1.0 - p) / n as f64));
    }
}
