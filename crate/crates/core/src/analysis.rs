//! Posterior summaries of a weighted particle ensemble.
//!
//! Heat maps of the probability that a source sits near a point (`P_emp`
//! and its conditional variants), MAP indices, the posterior source-count
//! pmf, the scalar test functionals, the Hellinger distance between two
//! discretization levels and log-log rate fits.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::helmholtz::{AssembledSystem, NeumannData, ObservationCache};
use crate::math;
use crate::model::{Potential, Source, SourceConfig, SourceDomain};
use crate::smc::Ensemble;

/// Default heat-map resolution per axis.
pub const DEFAULT_GRID_RESOLUTION: usize = 200;

/// Particles per accumulation block. Fixed so that floating-point summation
/// order, and hence every output bit, does not depend on the thread count.
const BLOCK: usize = 2048;

/// Smooth cut-off approximating the indicator of the ball `B_ε(0)`.
pub fn cutoff(x: Point2, eps: f64) -> f64 {
    cutoff_radial(x.norm(), eps)
}

#[inline]
fn cutoff_radial(r: f64, eps: f64) -> f64 {
    if r <= eps {
        1.0
    } else if r <= 1.5 * eps {
        0.5 + 0.5 * math::cos(2.0 / eps * PI * (r - eps))
    } else {
        0.0
    }
}

/// Tensor grid of `nx × ny` points spanning `bounds`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bounds: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(bounds: Rect, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || !bounds.is_valid() {
            return Err(Error::InvalidParameter("a heat-map grid needs a valid rectangle and at least 2 points per axis".into()));
        }
        Ok(Self { bounds, nx, ny })
    }

    /// `DEFAULT_GRID_RESOLUTION` points per axis.
    pub fn square(bounds: Rect) -> Self {
        Self {
            bounds,
            nx: DEFAULT_GRID_RESOLUTION,
            ny: DEFAULT_GRID_RESOLUTION,
        }
    }

    pub fn dx(&self) -> f64 {
        self.bounds.width() / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.bounds.height() / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        if ix + 1 == self.nx {
            self.bounds.x1
        } else {
            self.bounds.x0 + ix as f64 * self.dx()
        }
    }

    pub fn y(&self, iy: usize) -> f64 {
        if iy + 1 == self.ny {
            self.bounds.y1
        } else {
            self.bounds.y0 + iy as f64 * self.dy()
        }
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point2 {
        Point2::new(self.x(ix), self.y(iy))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index range of grid coordinates within `[lo, hi]` along one axis.
    fn span(lo: f64, hi: f64, origin: f64, step: f64, n: usize) -> Option<(usize, usize)> {
        let a = math::floor((lo - origin) / step);
        let b = math::floor((hi - origin) / step) + 1.0;
        let a = if a < 0.0 { 0 } else { a as usize };
        let b = if b < 0.0 { return None } else { (b as usize).min(n - 1) };
        (a <= b).then_some((a, b))
    }

    /// Grid-index box that covers the closed disc of radius `r` around `p`
    /// (possibly with a one-cell margin).
    fn cover(&self, p: Point2, r: f64) -> Option<[usize; 4]> {
        let (x0, x1) = Self::span(p.x - r, p.x + r, self.bounds.x0, self.dx(), self.nx)?;
        let (y0, y1) = Self::span(p.y - r, p.y + r, self.bounds.y0, self.dy(), self.ny)?;
        Some([x0, x1, y0, y1])
    }
}

/// Real values on a [`GridSpec`], row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl HeatGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: alloc::vec![0.0; spec.len()],
        }
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// `(point, value)` for every grid node in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Point2, f64)> + '_ {
        (0..self.spec.ny).flat_map(move |iy| (0..self.spec.nx).map(move |ix| (self.spec.point(ix, iy), self.value(ix, iy))))
    }

    /// Largest value and its location; the first in storage order on ties.
    pub fn max(&self) -> (Point2, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in self.values.iter().enumerate() {
            if *v > best.1 {
                best = (i, *v);
            }
        }
        let (ix, iy) = (best.0 % self.spec.nx, best.0 / self.spec.nx);
        (self.spec.point(ix, iy), best.1)
    }

    /// Local maxima sorted by decreasing value.
    ///
    /// A node is a candidate when it is positive and no smaller than any of
    /// its 8 neighbours. Candidates are accepted greedily by value (storage
    /// order on ties) unless they lie within `min_separation` of an already
    /// accepted maximum, which collapses plateaus to a single peak.
    pub fn local_maxima(&self, min_separation: f64) -> Vec<(Point2, f64)> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let mut candidates = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let v = self.value(ix, iy);
                if v <= 0.0 {
                    continue;
                }
                let mut is_max = true;
                'nb: for jy in iy.saturating_sub(1)..=(iy + 1).min(ny - 1) {
                    for jx in ix.saturating_sub(1)..=(ix + 1).min(nx - 1) {
                        if self.value(jx, jy) > v {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    candidates.push((iy * nx + ix, v));
                }
            }
        }
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut peaks: Vec<(Point2, f64)> = Vec::new();
        for (i, v) in candidates {
            let p = self.spec.point(i % nx, i / nx);
            if peaks.iter().all(|(q, _)| q.dist(p) > min_separation) {
                peaks.push((p, v));
            }
        }
        peaks
    }
}

/// `Σ_n w_n max_{ℓ: keep(x_ℓ)} K_ε(x − x_ℓ)` over the particles selected by
/// `select`, divided by `norm`.
fn accumulate<S, K>(ensemble: &Ensemble, spec: GridSpec, eps: f64, select: &S, keep: &K, norm: f64) -> HeatGrid
where
    S: Fn(&SourceConfig) -> bool + Sync,
    K: Fn(&Source) -> bool + Sync,
{
    let block = |range: core::ops::Range<usize>| -> Vec<f64> {
        let mut acc = alloc::vec![0.0; spec.len()];
        let parts = &ensemble.particles()[range.clone()];
        let weights = &ensemble.weights()[range];
        let mut kept: Vec<Point2> = Vec::new();
        let mut boxes: Vec<[usize; 4]> = Vec::new();
        for (u, w) in parts.iter().zip(weights) {
            if *w == 0.0 || !select(u) {
                continue;
            }
            kept.clear();
            boxes.clear();
            for s in u.sources() {
                if keep(s) {
                    if let Some(b) = spec.cover(s.position, 1.5 * eps) {
                        kept.push(s.position);
                        boxes.push(b);
                    }
                }
            }
            for (l, b) in boxes.iter().enumerate() {
                for iy in b[2]..=b[3] {
                    for ix in b[0]..=b[1] {
                        // Each node is handled by the first box covering it.
                        if boxes[..l].iter().any(|c| ix >= c[0] && ix <= c[1] && iy >= c[2] && iy <= c[3]) {
                            continue;
                        }
                        let p = spec.point(ix, iy);
                        let k = kept.iter().map(|x| cutoff(p - *x, eps)).fold(0.0, f64::max);
                        if k > 0.0 {
                            acc[iy * spec.nx + ix] += w * k;
                        }
                    }
                }
            }
        }
        acc
    };
    let n = ensemble.len();
    let ranges: Vec<core::ops::Range<usize>> = (0..n.div_ceil(BLOCK)).map(|b| b * BLOCK..((b + 1) * BLOCK).min(n)).collect();
    #[cfg(feature = "parallel")]
    let partial: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(block).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Vec<f64>> = ranges.into_iter().map(block).collect();
    let mut grid = HeatGrid::zeros(spec);
    for p in &partial {
        for (g, v) in grid.values.iter_mut().zip(p) {
            *g += v;
        }
    }
    for g in grid.values.iter_mut() {
        *g = (*g / norm).clamp(0.0, 1.0);
    }
    grid
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("eps must be positive, got {eps}")))
    }
}

/// `P_emp(x) = Σ_n w_n max_ℓ K_ε(x − x_ℓ⁽ⁿ⁾)`; particles without sources
/// contribute 0.
pub fn p_emp(ensemble: &Ensemble, spec: GridSpec, eps: f64) -> Result<HeatGrid> {
    check_eps(eps)?;
    Ok(accumulate(ensemble, spec, eps, &|_| true, &|_| true, 1.0))
}

/// `P_emp(x | k)`: the map restricted to particles with exactly `k` sources
/// and renormalized.
pub fn p_emp_given_k(ensemble: &Ensemble, k: usize, spec: GridSpec, eps: f64) -> Result<HeatGrid> {
    check_eps(eps)?;
    let mass: f64 = ensemble.iter().filter(|(u, _)| u.len() == k).map(|(_, w)| w).sum();
    if mass <= 0.0 {
        return Err(Error::EmptyConditioning);
    }
    Ok(accumulate(ensemble, spec, eps, &|u: &SourceConfig| u.len() == k, &|_| true, mass))
}

/// `P_emp(x | Q, k)`: among particles with exactly `k` sources at least one
/// of which lies in `q`, the renormalized map of the sources outside `q`.
pub fn p_emp_conditional(ensemble: &Ensemble, q: Rect, k: usize, spec: GridSpec, eps: f64) -> Result<HeatGrid> {
    check_eps(eps)?;
    let select = |u: &SourceConfig| u.len() == k && u.sources().iter().any(|s| q.contains(s.position));
    let mass: f64 = ensemble.iter().filter(|(u, _)| select(u)).map(|(_, w)| w).sum();
    if mass <= 0.0 {
        return Err(Error::EmptyConditioning);
    }
    Ok(accumulate(ensemble, spec, eps, &select, &|s: &Source| !q.contains(s.position), mass))
}

/// Empirical MAP indices, globally and per source count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapIndices {
    pub global: usize,
    pub per_k: BTreeMap<usize, usize>,
}

/// Largest weight wins; the lowest index wins ties.
pub fn map_indices(ensemble: &Ensemble) -> MapIndices {
    let mut global = 0;
    let mut per_k: BTreeMap<usize, usize> = BTreeMap::new();
    let w = ensemble.weights();
    for (n, u) in ensemble.particles().iter().enumerate() {
        if w[n] > w[global] {
            global = n;
        }
        per_k
            .entry(u.len())
            .and_modify(|best| {
                if w[n] > w[*best] {
                    *best = n;
                }
            })
            .or_insert(n);
    }
    MapIndices { global, per_k }
}

/// `P(k) = Σ_{n: k⁽ⁿ⁾ = k} w_n`, indexed by `k` up to the largest count seen.
pub fn posterior_k_pmf(ensemble: &Ensemble) -> Vec<f64> {
    let k_max = ensemble.particles().iter().map(SourceConfig::len).max().unwrap_or(0);
    let mut pmf = alloc::vec![0.0; k_max + 1];
    for (u, w) in ensemble.iter() {
        pmf[u.len()] += w;
    }
    pmf
}

/// The scalar test functionals, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Functional {
    /// `‖u‖_ℓ¹`.
    L1Norm,
    /// Indicator of exactly two sources.
    TwoSources,
    /// `|y_u(z_pred)|`.
    PressureAmplitude,
    /// Posterior variance of `|y_u(z_pred)|`.
    PressureVariance,
    /// `10 log₁₀ max(1, |Re(y_u(z_pred) e^{−iζt})|)`.
    Decibel,
}

impl Functional {
    pub const ALL: [Functional; 5] = [
        Functional::L1Norm,
        Functional::TwoSources,
        Functional::PressureAmplitude,
        Functional::PressureVariance,
        Functional::Decibel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Functional::L1Norm => "f1",
            Functional::TwoSources => "f2",
            Functional::PressureAmplitude => "f3",
            Functional::PressureVariance => "f4",
            Functional::Decibel => "f5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Point evaluation of the discrete pressure at a prediction point.
#[derive(Debug, Clone)]
pub struct Prediction {
    cache: ObservationCache,
    zeta: f64,
    time: f64,
}

impl Prediction {
    /// The prediction point must satisfy the same clearance rules as a
    /// measurement point.
    pub fn new(system: &AssembledSystem, point: Point2, domain: &SourceDomain, g: Option<NeumannData<'_>>, time: f64) -> Result<Self> {
        let cache = ObservationCache::build(system, &[point], domain, g)?;
        Ok(Self {
            cache,
            zeta: system.params().zeta,
            time,
        })
    }

    pub fn point(&self) -> Point2 {
        self.cache.points()[0]
    }

    /// `y_{u,h}(z_pred)`.
    pub fn pressure(&self, u: &SourceConfig) -> Result<Complex64> {
        let mut out = [Complex64::default()];
        self.cache.observe_into(u, &mut out)?;
        Ok(out[0])
    }

    /// Per-configuration values of every functional except the variance,
    /// which is only defined over an ensemble (reported as `NaN` here).
    pub fn values(&self, u: &SourceConfig) -> Result<[f64; 5]> {
        let y = self.pressure(u)?;
        let phase = Complex64::from_polar(1.0, -self.zeta * self.time);
        Ok([
            u.l1_norm(),
            if u.len() == 2 { 1.0 } else { 0.0 },
            y.norm(),
            f64::NAN,
            10.0 * math::log10((y * phase).re.abs().max(1.0)),
        ])
    }
}

/// Posterior expectations of all functionals, indexed like [`Functional::ALL`].
/// The variance entry is `E[f₃²] − E[f₃]²`, clipped at 0.
pub fn posterior_functionals(ensemble: &Ensemble, prediction: &Prediction) -> Result<[f64; 5]> {
    let mut mean = [0.0; 5];
    let mut second = 0.0;
    for (u, w) in ensemble.iter() {
        let v = prediction.values(u)?;
        for i in [0, 1, 2, 4] {
            mean[i] += w * v[i];
        }
        second += w * v[2] * v[2];
    }
    mean[3] = (second - mean[2] * mean[2]).max(0.0);
    Ok(mean)
}

/// Hellinger distance estimate and its two halves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HellingerEstimate {
    pub distance: f64,
    /// `E_μ[(1 − √(dμ_h/dμ))²]` from the reference ensemble.
    pub forward: f64,
    /// `E_{μ_h}[(1 − √(dμ/dμ_h))²]` from the coarse ensemble.
    pub reverse: f64,
}

/// `E_w[(1 − √(ρ/Ẑ))²]` with `ln ρ_n = log_ratio[n]` and `Ẑ = Σ w_n ρ_n`.
fn hellinger_half(weights: &[f64], log_ratio: &[f64]) -> Result<f64> {
    let mut log_terms = Vec::with_capacity(weights.len());
    for (w, lr) in weights.iter().zip(log_ratio) {
        if *w == 0.0 {
            continue;
        }
        if lr.is_nan() {
            return Err(Error::InvalidParameter("potential difference is undefined".into()));
        }
        log_terms.push(math::ln(*w) + lr);
    }
    let log_z = math::log_sum_exp(&log_terms);
    if !log_z.is_finite() {
        return Err(Error::InvalidParameter("density ratio normalizer is not finite".into()));
    }
    Ok(weights
        .iter()
        .zip(log_ratio)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, lr)| {
            let d = 1.0 - math::exp(0.5 * (lr - log_z));
            w * d * d
        })
        .sum())
}

/// Hellinger estimate from precomputed potentials.
///
/// `h_on_h[n]`, `ref_on_h[n]` are `Ψ_h` and `Ψ_ref` of coarse particle `n`;
/// `h_on_ref`, `ref_on_ref` likewise for the reference ensemble.
pub fn hellinger_from_potentials(
    h_weights: &[f64],
    h_on_h: &[f64],
    ref_on_h: &[f64],
    ref_weights: &[f64],
    h_on_ref: &[f64],
    ref_on_ref: &[f64],
) -> Result<HellingerEstimate> {
    let check = |a: usize, b: usize| {
        if a == b {
            Ok(())
        } else {
            Err(Error::Dimension { expected: a, got: b })
        }
    };
    check(h_weights.len(), h_on_h.len())?;
    check(h_weights.len(), ref_on_h.len())?;
    check(ref_weights.len(), h_on_ref.len())?;
    check(ref_weights.len(), ref_on_ref.len())?;
    // dμ_h/dμ ∝ exp(Ψ_ref − Ψ_h) on the reference ensemble, and the reverse.
    let fwd: Vec<f64> = ref_on_ref.iter().zip(h_on_ref).map(|(r, h)| r - h).collect();
    let rev: Vec<f64> = h_on_h.iter().zip(ref_on_h).map(|(h, r)| h - r).collect();
    let forward = hellinger_half(ref_weights, &fwd)?;
    let reverse = hellinger_half(h_weights, &rev)?;
    Ok(HellingerEstimate {
        distance: math::sqrt(0.25 * (forward + reverse)),
        forward,
        reverse,
    })
}

/// Hellinger distance between the posteriors on two discretization levels,
/// each represented by its own ensemble and potential.
pub fn hellinger_estimate<P, Q>(ensemble_h: &Ensemble, ensemble_ref: &Ensemble, psi_h: &P, psi_ref: &Q) -> Result<HellingerEstimate>
where
    P: Potential + ?Sized,
    Q: Potential + ?Sized,
{
    let eval = |e: &Ensemble, p: &dyn Fn(&SourceConfig) -> f64| e.particles().iter().map(p).collect::<Vec<f64>>();
    let ph = |u: &SourceConfig| psi_h.potential(u);
    let pr = |u: &SourceConfig| psi_ref.potential(u);
    hellinger_from_potentials(
        ensemble_h.weights(),
        &eval(ensemble_h, &ph),
        &eval(ensemble_h, &pr),
        ensemble_ref.weights(),
        &eval(ensemble_ref, &ph),
        &eval(ensemble_ref, &pr),
    )
}

/// Reference model of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// Abscissa is the sample size `N`; slope of `ln e` against `ln N`
    /// (expected −1).
    SampleSize,
    /// Abscissa is the mesh size `h`; slope of `ln e` against
    /// `ln(|ln h| h²)` (expected 1).
    MeshLogSquare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    pub abscissae: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    /// Intercept `c` of `ln e ≈ c + slope · regressor`.
    pub intercept: f64,
    /// Slope of `ln e` against `ln h` (mesh model only).
    pub log_h_slope: Option<f64>,
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits a log-log convergence rate; needs at least 3 points with positive
/// abscissae and errors.
pub fn fit_rate(points: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for (i, (a, e)) in points.iter().enumerate() {
        if !(*e > 0.0 && e.is_finite() && *a > 0.0 && a.is_finite()) {
            return Err(Error::NonPositive(i));
        }
        if model == RateModel::MeshLogSquare && !(*a < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("mesh size {a} must be below 1")));
        }
    }
    let ln_e: Vec<f64> = points.iter().map(|(_, e)| math::ln(*e)).collect();
    let ln_a: Vec<f64> = points.iter().map(|(a, _)| math::ln(*a)).collect();
    let (slope, intercept, log_h_slope) = match model {
        RateModel::SampleSize => {
            let (s, c) = least_squares(&ln_a, &ln_e);
            (s, c, None)
        }
        RateModel::MeshLogSquare => {
            let reg: Vec<f64> = ln_a.iter().map(|l| math::ln(-l) + 2.0 * l).collect();
            let (s, c) = least_squares(&reg, &ln_e);
            (s, c, Some(least_squares(&ln_a, &ln_e).0))
        }
    };
    Ok(RateFit {
        model,
        abscissae: points.iter().map(|p| p.0).collect(),
        errors: points.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        log_h_slope,
    })
}
