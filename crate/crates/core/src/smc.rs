//! Tempered sequential Monte Carlo with a prior-reversible
//! Metropolis–Hastings move.
//!
//! The tempered targets are `μ_j ∝ exp(−β_j Ψ) μ⁰` for a schedule
//! `0 = β_0 < … < β_J = 1`. One temper step resamples (multinomial by
//! default), applies `n_mcmc` Metropolis–Hastings sweeps and reweights by
//! `exp(−(β_{j+1} − β_j)Ψ)`.
//!
//! The move keeps the number of sources fixed, perturbs each position by a
//! Gaussian random walk that stays put when it would leave the source domain,
//! and moves the amplitudes by a preconditioned Crank–Nicolson step around the
//! prior mean. The proposal is reversible with respect to the prior, so the
//! acceptance probability only involves the tempered potential:
//! `min{1, exp(β(Ψ(u) − Ψ(u′)))}`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::math;
use crate::model::{Potential, Source, SourceConfig};
use crate::prior::PriorSpec;
use crate::rng::{SeedKey, Stream};

/// Tolerance on `|Σw − 1|` for a valid ensemble.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Weighted particle approximation `Σ w_n δ_{u_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    particles: Vec<SourceConfig>,
    weights: Vec<f64>,
}

impl Ensemble {
    pub fn new(particles: Vec<SourceConfig>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidParameter("an ensemble needs at least one particle".into()));
        }
        if particles.len() != weights.len() {
            return Err(Error::Dimension {
                expected: particles.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { particles, weights })
    }

    /// Equal weights `1/N`.
    pub fn uniform(particles: Vec<SourceConfig>) -> Result<Self> {
        let n = particles.len();
        Self::new(particles, alloc::vec![1.0 / n as f64; n])
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_unnormalized(particles: Vec<SourceConfig>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::WeightCollapse {
                step: 0,
                reason: format!("total weight {total}"),
            });
        }
        Self::new(particles, weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[SourceConfig] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SourceConfig, f64)> + '_ {
        self.particles.iter().zip(self.weights.iter().copied())
    }

    /// Effective sample size `1/Σw²`.
    pub fn ess(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// `Σ w_n f(u_n)`.
    pub fn expectation(&self, mut f: impl FnMut(&SourceConfig) -> f64) -> f64 {
        self.iter().map(|(u, w)| w * f(u)).sum()
    }

    pub fn into_parts(self) -> (Vec<SourceConfig>, Vec<f64>) {
        (self.particles, self.weights)
    }
}

/// Strictly increasing inverse temperatures from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperSchedule {
    betas: Vec<f64>,
}

impl TemperSchedule {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 || betas[0] != 0.0 || betas[betas.len() - 1] != 1.0 {
            return Err(Error::InvalidParameter("temper schedule must start at 0 and end at 1".into()));
        }
        if betas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("temper schedule must be strictly increasing".into()));
        }
        Ok(Self { betas })
    }

    /// `β_j = j/J`.
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("temper schedule needs at least one step".into()));
        }
        let mut betas: Vec<f64> = (0..=steps).map(|j| j as f64 / steps as f64).collect();
        betas[steps] = 1.0;
        Self::new(betas)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Number of temper steps J.
    pub fn steps(&self) -> usize {
        self.betas.len() - 1
    }
}

/// Which tempered target the move kernel of step `j → j+1` leaves invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelTemperature {
    /// `μ_j`: resample–move at the current temperature, then reweight.
    #[default]
    Current,
    /// `μ_{j+1}`: move already at the temperature of the upcoming reweight.
    Next,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResamplingScheme {
    #[default]
    Multinomial,
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Position random-walk step γ_x ≥ 0.
    pub gamma_x: f64,
    /// Crank–Nicolson amplitude step γ_α ∈ [0, 1].
    pub gamma_alpha: f64,
    /// Kernel applications per particle and temper step.
    pub n_mcmc: usize,
    pub temperature: KernelTemperature,
}

impl KernelParams {
    pub fn new(gamma_x: f64, gamma_alpha: f64, n_mcmc: usize) -> Result<Self> {
        let k = Self {
            gamma_x,
            gamma_alpha,
            n_mcmc,
            temperature: KernelTemperature::default(),
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_x.is_finite() && self.gamma_x >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_x must be >= 0, got {}", self.gamma_x)));
        }
        if !(0.0..=1.0).contains(&self.gamma_alpha) {
            return Err(Error::InvalidParameter(format!("gamma_alpha must lie in [0, 1], got {}", self.gamma_alpha)));
        }
        if self.n_mcmc == 0 {
            return Err(Error::InvalidParameter("n_mcmc must be positive".into()));
        }
        Ok(())
    }
}

/// Draws `u′ ~ q(u, ·)`. Draw order per source: position step (2 normals),
/// then the amplitude innovation (2 normals).
pub fn propose<R: Rng + ?Sized>(u: &SourceConfig, prior: &PriorSpec, kernel: &KernelParams, rng: &mut R) -> SourceConfig {
    let contraction = math::sqrt(1.0 - kernel.gamma_alpha * kernel.gamma_alpha);
    let m = prior.amp_mean;
    let sources = u
        .sources()
        .iter()
        .map(|s| {
            let ex: f64 = rng.sample(StandardNormal);
            let ey: f64 = rng.sample(StandardNormal);
            let moved = s.position + Point2::new(kernel.gamma_x * ex, kernel.gamma_x * ey);
            let position = if prior.domain.contains(moved) { moved } else { s.position };
            let xi = prior.amplitude_noise(rng);
            let amplitude = (s.amplitude - m) * contraction + m + xi * kernel.gamma_alpha;
            Source::new(amplitude, position)
        })
        .collect();
    SourceConfig::new(sources)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhOutcome {
    pub config: SourceConfig,
    /// `Ψ` of the returned state, when it was evaluated (always for `β > 0`).
    pub potential: Option<f64>,
    pub accepted: bool,
}

/// One Metropolis–Hastings step targeting `exp(−βΨ)μ⁰`.
///
/// `current` is `Ψ(u)` when already known. At `β = 0` the proposal is
/// accepted without evaluating the potential.
pub fn mh_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    u: &SourceConfig,
    current: Option<f64>,
    beta: f64,
    prior: &PriorSpec,
    kernel: &KernelParams,
    potential: &P,
    rng: &mut R,
) -> MhOutcome {
    if u.is_empty() {
        // Nothing to move; the kernel is the identity on k = 0.
        let _: f64 = rng.random();
        return MhOutcome {
            config: u.clone(),
            potential: current,
            accepted: true,
        };
    }
    let proposal = propose(u, prior, kernel, rng);
    let a: f64 = rng.random();
    if beta == 0.0 {
        return MhOutcome {
            config: proposal,
            potential: None,
            accepted: true,
        };
    }
    let psi_u = current.unwrap_or_else(|| potential.potential(u));
    let psi_p = potential.potential(&proposal);
    let log_ratio = beta * (psi_u - psi_p);
    // NaN (both infinite) rejects.
    if log_ratio >= 0.0 || a <= math::exp(log_ratio) {
        MhOutcome {
            config: proposal,
            potential: Some(psi_p),
            accepted: true,
        }
    } else {
        MhOutcome {
            config: u.clone(),
            potential: Some(psi_u),
            accepted: false,
        }
    }
}

/// Inverse-CDF lookup into cumulative weights.
fn lookup(cumulative: &[f64], target: f64) -> usize {
    let i = cumulative.partition_point(|c| *c <= target);
    // Guard round-off at the top end and skip zero-weight tail entries.
    i.min(cumulative.len() - 1)
}

/// Ancestor indices of a resampling step.
pub fn resample_indices<R: Rng + ?Sized>(weights: &[f64], scheme: ResamplingScheme, rng: &mut R) -> Result<Vec<usize>> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::WeightCollapse {
            step: 0,
            reason: format!("cannot resample from total weight {total}"),
        });
    }
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for w in weights {
        acc += w / total;
        cumulative.push(acc);
    }
    let last_positive = weights.iter().rposition(|w| *w > 0.0).unwrap_or(n - 1);
    let top = cumulative[last_positive];
    let pick = |u: f64| lookup(&cumulative, u * top).min(last_positive);
    Ok(match scheme {
        ResamplingScheme::Multinomial => (0..n).map(|_| pick(rng.random::<f64>())).collect(),
        ResamplingScheme::Systematic => {
            let offset: f64 = rng.random();
            (0..n).map(|i| pick((i as f64 + offset) / n as f64)).collect()
        }
    })
}

/// Draws N particles i.i.d. from the weighted empirical measure; the result
/// has equal weights.
pub fn resample<R: Rng + ?Sized>(ensemble: &Ensemble, scheme: ResamplingScheme, rng: &mut R) -> Result<Ensemble> {
    if ensemble.len() == 1 {
        return Ensemble::uniform(ensemble.particles.clone());
    }
    let idx = resample_indices(&ensemble.weights, scheme, rng)?;
    Ensemble::uniform(idx.into_iter().map(|i| ensemble.particles[i].clone()).collect())
}

/// Result of an incremental reweighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reweighting {
    /// `ln Σ_n w_n exp(−Δβ Ψ_n)`.
    pub log_normalizer: f64,
}

/// `w_n ← w_n exp(−Δβ Ψ_n) / Σ`, in log space.
pub fn reweight_in_place(weights: &mut [f64], potentials: &[f64], delta_beta: f64) -> Result<Reweighting> {
    let log_w: Vec<f64> = weights
        .iter()
        .zip(potentials)
        .map(|(w, psi)| {
            if *w == 0.0 {
                f64::NEG_INFINITY
            } else {
                math::ln(*w) - delta_beta * psi
            }
        })
        .collect();
    if log_w.iter().any(|v| v.is_nan()) {
        return Err(Error::WeightCollapse {
            step: 0,
            reason: "potential evaluated to NaN".into(),
        });
    }
    let log_norm = math::log_sum_exp(&log_w);
    if !log_norm.is_finite() {
        return Err(Error::WeightCollapse {
            step: 0,
            reason: format!("total unnormalized weight underflowed (log = {log_norm}); use a smaller temper increment"),
        });
    }
    let mut total = 0.0;
    for (w, lw) in weights.iter_mut().zip(&log_w) {
        *w = math::exp(lw - log_norm);
        total += *w;
    }
    // Final renormalization removes the last rounding of exp.
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(Reweighting { log_normalizer: log_norm })
}

/// Reweights an ensemble from `beta_from` to `beta_to`.
pub fn reweight<P: Potential + ?Sized>(ensemble: &Ensemble, potential: &P, beta_from: f64, beta_to: f64) -> Result<Ensemble> {
    if !(beta_to > beta_from) {
        return Err(Error::InvalidParameter(format!("beta_to ({beta_to}) must exceed beta_from ({beta_from})")));
    }
    let psi: Vec<f64> = ensemble.particles.iter().map(|u| potential.potential(u)).collect();
    let mut weights = ensemble.weights.clone();
    reweight_in_place(&mut weights, &psi, beta_to - beta_from)?;
    Ok(Ensemble {
        particles: ensemble.particles.clone(),
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcSettings {
    pub n_particles: usize,
    pub schedule: TemperSchedule,
    pub kernel: KernelParams,
    pub resampling: ResamplingScheme,
}

/// Per temper-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub beta_from: f64,
    pub beta_to: f64,
    /// Inverse temperature targeted by the move kernel.
    pub kernel_beta: f64,
    /// ESS of the incoming weights, before resampling.
    pub ess_before: f64,
    /// ESS after the reweighting of this step.
    pub ess_after: f64,
    pub acceptance_rate: f64,
    pub log_normalizer_increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmcRun {
    pub ensemble: Ensemble,
    /// `Ψ` of every final particle.
    pub potentials: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl SmcRun {
    /// Estimate of `ln E_{μ⁰}[exp(−Ψ)]`.
    pub fn log_evidence(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.log_normalizer_increment).sum()
    }
}

struct Walker {
    config: SourceConfig,
    potential: Option<f64>,
}

fn sweep_one<P: Potential + ?Sized>(
    walker: &mut Walker,
    beta: f64,
    prior: &PriorSpec,
    kernel: &KernelParams,
    potential: &P,
    key: SeedKey,
    index: usize,
) -> usize {
    let mut rng = key.stream(Stream::Kernel, index as u64);
    let mut accepted = 0;
    for _ in 0..kernel.n_mcmc {
        let out = mh_step(&walker.config, walker.potential, beta, prior, kernel, potential, &mut rng);
        accepted += usize::from(out.accepted);
        walker.config = out.config;
        walker.potential = out.potential;
    }
    if walker.potential.is_none() {
        walker.potential = Some(potential.potential(&walker.config));
    }
    accepted
}

#[cfg(feature = "parallel")]
fn sweep<P: Potential + ?Sized>(walkers: &mut [Walker], beta: f64, prior: &PriorSpec, kernel: &KernelParams, potential: &P, key: SeedKey) -> usize {
    use rayon::prelude::*;
    walkers
        .par_iter_mut()
        .enumerate()
        .with_min_len(64)
        .map(|(n, w)| sweep_one(w, beta, prior, kernel, potential, key, n))
        .sum()
}

#[cfg(not(feature = "parallel"))]
fn sweep<P: Potential + ?Sized>(walkers: &mut [Walker], beta: f64, prior: &PriorSpec, kernel: &KernelParams, potential: &P, key: SeedKey) -> usize {
    walkers
        .iter_mut()
        .enumerate()
        .map(|(n, w)| sweep_one(w, beta, prior, kernel, potential, key, n))
        .sum()
}

#[cfg(feature = "parallel")]
fn init<P: Potential + ?Sized>(prior: &PriorSpec, potential: &P, n: usize, seed: SeedKey) -> Vec<Walker> {
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| init_one(prior, potential, seed, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn init<P: Potential + ?Sized>(prior: &PriorSpec, potential: &P, n: usize, seed: SeedKey) -> Vec<Walker> {
    (0..n).map(|i| init_one(prior, potential, seed, i)).collect()
}

fn init_one<P: Potential + ?Sized>(prior: &PriorSpec, potential: &P, seed: SeedKey, i: usize) -> Walker {
    let config = prior.sample(&mut seed.stream(Stream::PriorInit, i as u64));
    let psi = potential.potential(&config);
    Walker {
        config,
        potential: Some(psi),
    }
}

/// Runs the tempered SMC sampler; all randomness derives from `seed`.
///
/// Per temper step `j`: resample from the current weights, apply the move
/// kernel `n_mcmc` times to every particle, reweight by the temperature
/// increment. The returned ensemble approximates `exp(−Ψ)μ⁰` normalized.
pub fn run_smc<P: Potential + ?Sized>(prior: &PriorSpec, potential: &P, settings: &SmcSettings, seed: SeedKey) -> Result<SmcRun> {
    prior.validate()?;
    settings.kernel.validate()?;
    let n = settings.n_particles;
    if n == 0 {
        return Err(Error::InvalidParameter("SMC needs at least one particle".into()));
    }
    let mut walkers = init(prior, potential, n, seed);
    let mut weights = alloc::vec![1.0 / n as f64; n];
    let betas = settings.schedule.betas();
    let mut diagnostics = Vec::with_capacity(settings.schedule.steps());
    for j in 0..settings.schedule.steps() {
        let (beta_from, beta_to) = (betas[j], betas[j + 1]);
        let ess_before = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let step_err = |e: Error| match e {
            Error::WeightCollapse { reason, .. } => Error::WeightCollapse { step: j, reason },
            other => other,
        };
        let ancestors = resample_indices(&weights, settings.resampling, &mut seed.stream(Stream::Resample, j as u64)).map_err(step_err)?;
        walkers = ancestors
            .into_iter()
            .map(|a| Walker {
                config: walkers[a].config.clone(),
                potential: walkers[a].potential,
            })
            .collect();
        weights.iter_mut().for_each(|w| *w = 1.0 / n as f64);

        let kernel_beta = match settings.kernel.temperature {
            KernelTemperature::Current => beta_from,
            KernelTemperature::Next => beta_to,
        };
        let accepted = sweep(
            &mut walkers,
            kernel_beta,
            prior,
            &settings.kernel,
            potential,
            seed.child(Stream::Kernel, j as u64),
        );
        let psi: Vec<f64> = walkers.iter().map(|w| w.potential.unwrap_or(f64::INFINITY)).collect();
        let rw = reweight_in_place(&mut weights, &psi, beta_to - beta_from).map_err(step_err)?;
        diagnostics.push(StepDiagnostics {
            step: j,
            beta_from,
            beta_to,
            kernel_beta,
            ess_before,
            ess_after: 1.0 / weights.iter().map(|w| w * w).sum::<f64>(),
            acceptance_rate: accepted as f64 / (n * settings.kernel.n_mcmc) as f64,
            log_normalizer_increment: rw.log_normalizer,
        });
    }
    let potentials = walkers.iter().map(|w| w.potential.unwrap_or(f64::INFINITY)).collect();
    let ensemble = Ensemble {
        particles: walkers.into_iter().map(|w| w.config).collect(),
        weights,
    };
    Ok(SmcRun {
        ensemble,
        potentials,
        diagnostics,
    })
}

/// Mean of a complex amplitude functional; convenience for tests and reports.
pub fn mean_amplitude(ensemble: &Ensemble) -> Option<Complex64> {
    let mut total = Complex64::default();
    let mut mass = 0.0;
    for (u, w) in ensemble.iter() {
        if let Some(s) = u.sources().first() {
            total += s.amplitude * w;
            mass += w;
        }
    }
    (mass > 0.0).then(|| total / mass)
}
