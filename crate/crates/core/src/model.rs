//! Source configurations, source/measurement geometry, the circular complex
//! Gaussian noise model and the data-misfit potential.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::helmholtz::ObservationCache;
use crate::math;

/// One point source: complex amplitude at a planar position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub amplitude: Complex64,
    pub position: Point2,
}

impl Source {
    pub const fn new(amplitude: Complex64, position: Point2) -> Self {
        Self { amplitude, position }
    }
}

/// Finite list of point sources `τ(u) = Σ α_ℓ δ_{x_ℓ}`; may be empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceConfig {
    sources: Vec<Source>,
}

impl SourceConfig {
    pub fn new(sources: Vec<Source>) -> Self {
        Self { sources }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn sources_mut(&mut self) -> &mut [Source] {
        &mut self.sources
    }

    /// Number of sources k.
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// `Σ (|α_ℓ| + ‖x_ℓ‖)`.
    pub fn l1_norm(&self) -> f64 {
        self.sources.iter().map(|s| s.amplitude.norm() + s.position.norm()).sum()
    }

    /// Concatenation of two source lists.
    pub fn concat(&self, other: &SourceConfig) -> SourceConfig {
        let mut sources = self.sources.clone();
        sources.extend_from_slice(&other.sources);
        SourceConfig { sources }
    }
}

impl From<Vec<Source>> for SourceConfig {
    fn from(sources: Vec<Source>) -> Self {
        Self::new(sources)
    }
}

/// Source domain `D_κ`: a union of closed rectangles at distance greater
/// than κ from the boundary of the enclosing domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDomain {
    rects: Vec<Rect>,
    kappa: f64,
    enclosing: Rect,
    total_area: f64,
}

impl SourceDomain {
    pub fn new(rects: Vec<Rect>, kappa: f64, enclosing: Rect) -> Result<Self> {
        if rects.is_empty() {
            return Err(Error::InvalidParameter("source domain needs at least one rectangle".into()));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("kappa must be positive, got {kappa}")));
        }
        for (i, r) in rects.iter().enumerate() {
            if !r.is_valid() {
                return Err(Error::InvalidParameter(alloc::format!("source rectangle {i} is degenerate")));
            }
            if !r.is_inside(&enclosing) || r.gap_to_boundary_of(&enclosing) <= kappa {
                return Err(Error::InvalidParameter(alloc::format!(
                    "source rectangle {i} must keep a distance greater than kappa = {kappa} from the boundary"
                )));
            }
        }
        let total_area = rects.iter().map(Rect::area).sum();
        Ok(Self {
            rects,
            kappa,
            enclosing,
            total_area,
        })
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn enclosing(&self) -> Rect {
        self.enclosing
    }

    /// Sum of the rectangle areas (rectangles are assumed to overlap only on
    /// edges).
    pub fn area(&self) -> f64 {
        self.total_area
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.rects.iter().any(|r| r.contains(p))
    }

    pub fn dist(&self, p: Point2) -> f64 {
        self.rects.iter().map(|r| r.dist(p)).fold(f64::INFINITY, f64::min)
    }

    /// Membership in `M_κ = {z : dist(z, D_κ) > κ, dist(z, Γ) > κ}`.
    pub fn check_measurement_point(&self, index: usize, z: Point2) -> Result<()> {
        let fail = |reason: String| Err(Error::MeasurementDomain { index, point: z, reason });
        if !self.enclosing.contains(z) {
            return fail("point lies outside the domain".into());
        }
        let to_sources = self.dist(z);
        if to_sources <= self.kappa {
            return fail(alloc::format!(
                "distance {to_sources} to the source domain is not greater than kappa = {}",
                self.kappa
            ));
        }
        let to_boundary = self.enclosing.dist_to_boundary(z);
        if to_boundary <= self.kappa {
            return fail(alloc::format!(
                "distance {to_boundary} to the boundary is not greater than kappa = {}",
                self.kappa
            ));
        }
        Ok(())
    }

    pub fn check_config(&self, u: &SourceConfig) -> Result<()> {
        match u.sources().iter().find(|s| !self.contains(s.position)) {
            Some(s) => Err(Error::OutsideSourceDomain(s.position)),
            None => Ok(()),
        }
    }

    /// Uniform draw: area-weighted rectangle choice, then uniform within.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let mut target = rng.random::<f64>() * self.total_area;
        let mut chosen = self.rects[self.rects.len() - 1];
        for r in &self.rects {
            if target < r.area() {
                chosen = *r;
                break;
            }
            target -= r.area();
        }
        let x = chosen.x0 + rng.random::<f64>() * chosen.width();
        let y = chosen.y0 + rng.random::<f64>() * chosen.height();
        Point2::new(x, y)
    }
}

/// Circular complex Gaussian noise `N(0, Γ, 0)` with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    variances: Vec<f64>,
}

impl NoiseModel {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::InvalidParameter("noise model needs at least one variance".into()));
        }
        if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!("noise variances must be positive, got {v}")));
        }
        Ok(Self { variances })
    }

    /// `m` independent components with a common variance.
    pub fn iid(m: usize, variance: f64) -> Result<Self> {
        Self::new(alloc::vec![variance; m])
    }

    /// Like [`NoiseModel::new`] but also takes the relation coefficient; only
    /// circular noise (relation zero) is supported.
    pub fn with_relation(variances: Vec<f64>, relation: f64) -> Result<Self> {
        if relation != 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "only circular noise is supported (relation must be 0, got {relation})"
            )));
        }
        Self::new(variances)
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    /// `‖z‖²_Σ = 2 Σ_j |z_j|²/Γ_jj`.
    pub fn sigma_norm_sq(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.variances.len() {
            return Err(Error::Dimension {
                expected: self.variances.len(),
                got: z.len(),
            });
        }
        Ok(self.sigma_norm_sq_unchecked(z))
    }

    #[inline]
    fn sigma_norm_sq_unchecked(&self, z: &[Complex64]) -> f64 {
        2.0 * z.iter().zip(&self.variances).map(|(v, g)| v.norm_sqr() / g).sum::<f64>()
    }

    /// One draw `η_j = √(Γ_jj/2)·(ξ_re + iξ_im)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        self.variances
            .iter()
            .map(|g| {
                let s = math::sqrt(g / 2.0);
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect()
    }
}

/// A potential `u ↦ Ψ(u)` for a fixed data vector.
pub trait Potential: Sync {
    fn potential(&self, u: &SourceConfig) -> f64;
}

impl<P: Potential + ?Sized> Potential for &P {
    fn potential(&self, u: &SourceConfig) -> f64 {
        (**self).potential(u)
    }
}

/// `Ψ ≡ 0`; the sampler then targets the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn potential(&self, _: &SourceConfig) -> f64 {
        0.0
    }
}

/// Data-misfit potential `Ψ_h(u, y) = ½‖y − G_h(u)‖²_Σ`.
#[derive(Debug, Clone, Copy)]
pub struct Misfit<'a> {
    cache: &'a ObservationCache,
    noise: &'a NoiseModel,
    data: &'a [Complex64],
}

impl<'a> Misfit<'a> {
    pub fn new(cache: &'a ObservationCache, noise: &'a NoiseModel, data: &'a [Complex64]) -> Result<Self> {
        for got in [noise.len(), data.len()] {
            if got != cache.len() {
                return Err(Error::Dimension {
                    expected: cache.len(),
                    got,
                });
            }
        }
        Ok(Self { cache, noise, data })
    }

    pub fn cache(&self) -> &ObservationCache {
        self.cache
    }

    pub fn data(&self) -> &[Complex64] {
        self.data
    }

    /// Fallible evaluation; errors when a source leaves the mesh domain.
    pub fn try_potential(&self, u: &SourceConfig) -> Result<f64> {
        const STACK: usize = 16;
        let m = self.data.len();
        if m <= STACK {
            let mut buf = [Complex64::default(); STACK];
            self.misfit_into(u, &mut buf[..m])
        } else {
            let mut buf = alloc::vec![Complex64::default(); m];
            self.misfit_into(u, &mut buf)
        }
    }

    fn misfit_into(&self, u: &SourceConfig, buf: &mut [Complex64]) -> Result<f64> {
        self.cache.observe_into(u, buf)?;
        for (b, y) in buf.iter_mut().zip(self.data) {
            *b = y - *b;
        }
        Ok(0.5 * self.noise.sigma_norm_sq_unchecked(buf))
    }
}

impl Potential for Misfit<'_> {
    /// Positions outside the mesh domain evaluate to `+∞`.
    fn potential(&self, u: &SourceConfig) -> f64 {
        self.try_potential(u).unwrap_or(f64::INFINITY)
    }
}

/// `Ψ_h(u, y)` for one configuration.
pub fn potential(cache: &ObservationCache, noise: &NoiseModel, u: &SourceConfig, y: &[Complex64]) -> Result<f64> {
    Misfit::new(cache, noise, y)?.try_potential(u)
}

/// Synthetic data `G_h(u_exact)`, plus one noise draw when `rng` is given.
pub fn synth_data<R: Rng + ?Sized>(
    cache: &ObservationCache,
    noise: &NoiseModel,
    u_exact: &SourceConfig,
    rng: Option<&mut R>,
) -> Result<Vec<Complex64>> {
    if noise.len() != cache.len() {
        return Err(Error::Dimension {
            expected: cache.len(),
            got: noise.len(),
        });
    }
    let mut y = cache.observe(u_exact)?;
    if let Some(rng) = rng {
        for (v, e) in y.iter_mut().zip(noise.sample(rng)) {
            *v += e;
        }
    }
    Ok(y)
}
