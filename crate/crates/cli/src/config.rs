//! Experiment configuration (TOML) and its cross-validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use srcid::geom::{Point2, Rect};
use srcid::helmholtz::HelmholtzParams;
use srcid::mesh::{BoundaryTag, Face, StructuredTriMesh, Tagging};
use srcid::model::{NoiseModel, Source, SourceConfig, SourceDomain};
use srcid::prior::{CountLaw, PriorSpec};
use srcid::smc::{KernelParams, KernelTemperature, ResamplingScheme, SmcSettings, TemperSchedule};
use srcid::Complex64;

use crate::error::CliError;

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

fn complex(c: ComplexPair) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn point(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

fn rect(r: [f64; 4]) -> Rect {
    Rect::new(r[0], r[1], r[2], r[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    pub sources: SourcesSection,
    pub truth: TruthSection,
    pub measurements: MeasurementsSection,
    pub prior: PriorSection,
    pub smc: SmcSection,
    pub mesh: MeshSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub separation: SeparationSection,
    #[serde(default)]
    pub mse: MseSection,
    #[serde(default)]
    pub hellinger: HellingerSection,
    #[serde(default)]
    pub experiment2: Experiment2Section,
    #[serde(default)]
    pub data: Option<DataSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// `[x0, x1, y0, y1]`.
    pub bounds: [f64; 4],
    /// Faces with Neumann data; all others carry the impedance condition.
    #[serde(default)]
    pub neumann_faces: Vec<String>,
    /// Constant Neumann datum g on the Neumann faces.
    #[serde(default)]
    pub neumann_value: ComplexPair,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            bounds: [0.0, 1.0, 0.0, 1.0],
            neumann_faces: Vec::new(),
            neumann_value: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub zeta: f64,
    pub c: f64,
    pub rho: f64,
    pub alpha_zeta: f64,
    pub beta_zeta: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let p = HelmholtzParams::reference();
        Self {
            zeta: p.zeta,
            c: p.c,
            rho: p.rho,
            alpha_zeta: p.alpha_zeta,
            beta_zeta: p.beta_zeta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesSection {
    pub kappa: f64,
    /// Rectangles `[x0, x1, y0, y1]` whose union is the source domain.
    pub rects: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub position: [f64; 2],
    pub amplitude: ComplexPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    pub sources: Vec<SourceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementsSection {
    pub points: Vec<[f64; 2]>,
    /// One variance per point, or a single value for all.
    pub noise_variances: Vec<f64>,
    #[serde(default)]
    pub relation: f64,
    pub prediction_point: [f64; 2],
    #[serde(default = "one")]
    pub prediction_time: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    /// Poisson mean of the source count (exclusive with `count_pmf`).
    #[serde(default)]
    pub poisson: Option<f64>,
    /// Explicit source-count pmf, index = k.
    #[serde(default)]
    pub count_pmf: Option<Vec<f64>>,
    pub amplitude_mean: ComplexPair,
    pub amplitude_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelTemperatureName {
    Current,
    Next,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplingName {
    Multinomial,
    Systematic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcSection {
    pub particles: usize,
    pub betas: Vec<f64>,
    pub n_mcmc: usize,
    pub gamma_x: f64,
    pub gamma_alpha: f64,
    #[serde(default = "default_temperature")]
    pub kernel_temperature: KernelTemperatureName,
    #[serde(default = "default_resampling")]
    pub resampling: ResamplingName,
}

fn default_temperature() -> KernelTemperatureName {
    KernelTemperatureName::Current
}

fn default_resampling() -> ResamplingName {
    ResamplingName::Multinomial
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// Subdivisions per axis; `h = diag/n_div`.
    pub n_div: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "out".into()
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSection {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Quadrants `[x0, x1, y0, y1]` for conditional maps.
    #[serde(default)]
    pub conditional: Vec<[f64; 4]>,
    #[serde(default = "default_conditional_k")]
    pub conditional_k: usize,
    /// Source counts for `P_emp(· | k)` maps.
    #[serde(default)]
    pub per_k: Vec<usize>,
    /// Number of local maxima to report.
    #[serde(default = "default_peaks")]
    pub peaks: usize,
    /// Minimum distance between reported maxima; defaults to 2·eps.
    #[serde(default)]
    pub peak_separation: Option<f64>,
}

fn default_eps() -> f64 {
    0.04
}

fn default_grid() -> usize {
    srcid::analysis::DEFAULT_GRID_RESOLUTION
}

fn default_conditional_k() -> usize {
    2
}

fn default_peaks() -> usize {
    5
}

impl Default for SeparationSection {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            grid: default_grid(),
            conditional: Vec::new(),
            conditional_k: default_conditional_k(),
            per_k: Vec::new(),
            peaks: default_peaks(),
            peak_separation: None,
        }
    }
}

impl SeparationSection {
    pub fn peak_separation(&self) -> f64 {
        self.peak_separation.unwrap_or(2.0 * self.eps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MseSection {
    #[serde(default = "default_mse_n_div")]
    pub n_div: usize,
    #[serde(default = "default_mse_reference")]
    pub reference_particles: usize,
    #[serde(default = "default_mse_particles")]
    pub particles: Vec<usize>,
    #[serde(default = "default_mse_reps")]
    pub repetitions: usize,
}

fn default_mse_n_div() -> usize {
    32
}

fn default_mse_reference() -> usize {
    200_000
}

fn default_mse_particles() -> Vec<usize> {
    (1..=6).map(|k| 100 << k).collect()
}

fn default_mse_reps() -> usize {
    20
}

impl Default for MseSection {
    fn default() -> Self {
        Self {
            n_div: default_mse_n_div(),
            reference_particles: default_mse_reference(),
            particles: default_mse_particles(),
            repetitions: default_mse_reps(),
        }
    }
}

/// Mesh study shared by the `hellinger` and `eh` drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HellingerSection {
    #[serde(default = "default_ref_n_div")]
    pub reference_n_div: usize,
    #[serde(default = "default_n_divs")]
    pub n_divs: Vec<usize>,
    #[serde(default = "default_study_particles")]
    pub particles: usize,
    #[serde(default = "default_study_reps")]
    pub repetitions: usize,
}

fn default_ref_n_div() -> usize {
    64
}

fn default_n_divs() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

fn default_study_particles() -> usize {
    50_000
}

fn default_study_reps() -> usize {
    10
}

impl Default for HellingerSection {
    fn default() -> Self {
        Self {
            reference_n_div: default_ref_n_div(),
            n_divs: default_n_divs(),
            particles: default_study_particles(),
            repetitions: default_study_reps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment2Section {
    /// Independent repetitions, each with a fresh noise draw.
    #[serde(default = "one_usize")]
    pub repetitions: usize,
}

fn one_usize() -> usize {
    1
}

impl Default for Experiment2Section {
    fn default() -> Self {
        Self { repetitions: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Measured data `[re, im]` per measurement point; replaces synthetic data.
    pub observed: Vec<ComplexPair>,
}

fn parse_face(name: &str) -> Option<Face> {
    match name {
        "bottom" => Some(Face::Bottom),
        "right" => Some(Face::Right),
        "top" => Some(Face::Top),
        "left" => Some(Face::Left),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let config = Self::from_toml(&text)?;
        config.check()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn bounds(&self) -> Rect {
        rect(self.domain.bounds)
    }

    pub fn tagging(&self) -> Result<Tagging, String> {
        let mut t = Tagging::ALL_IMPEDANCE;
        for name in &self.domain.neumann_faces {
            let face = parse_face(name).ok_or_else(|| format!("domain.neumann_faces: unknown face `{name}` (bottom, right, top, left)"))?;
            t = t.with(face, BoundaryTag::Neumann);
        }
        Ok(t)
    }

    pub fn neumann_value(&self) -> Option<Complex64> {
        let g = complex(self.domain.neumann_value);
        (!self.domain.neumann_faces.is_empty() && g != Complex64::default()).then_some(g)
    }

    pub fn helmholtz(&self) -> Result<HelmholtzParams, String> {
        let p = &self.physics;
        HelmholtzParams::new(p.zeta, p.c, p.rho, p.alpha_zeta, p.beta_zeta).map_err(|e| format!("physics: {e}"))
    }

    pub fn source_domain(&self) -> Result<SourceDomain, String> {
        SourceDomain::new(self.sources.rects.iter().copied().map(rect).collect(), self.sources.kappa, self.bounds())
            .map_err(|e| format!("sources: {e}"))
    }

    pub fn truth(&self) -> SourceConfig {
        SourceConfig::new(self.truth.sources.iter().map(|s| Source::new(complex(s.amplitude), point(s.position))).collect())
    }

    pub fn measurement_points(&self) -> Vec<Point2> {
        self.measurements.points.iter().copied().map(point).collect()
    }

    pub fn prediction_point(&self) -> Point2 {
        point(self.measurements.prediction_point)
    }

    pub fn noise(&self) -> Result<NoiseModel, String> {
        let m = self.measurements.points.len();
        let v = &self.measurements.noise_variances;
        let variances = match v.len() {
            1 => vec![v[0]; m],
            n if n == m => v.clone(),
            n => return Err(format!("measurements.noise_variances: expected 1 or {m} values, got {n}")),
        };
        NoiseModel::with_relation(variances, self.measurements.relation).map_err(|e| format!("measurements: {e}"))
    }

    pub fn count_law(&self) -> Result<CountLaw, String> {
        let law = match (&self.prior.poisson, &self.prior.count_pmf) {
            (Some(lambda), None) => CountLaw::Poisson { lambda: *lambda },
            (None, Some(pmf)) => CountLaw::Pmf(pmf.clone()),
            _ => return Err("prior: set exactly one of `poisson` and `count_pmf`".into()),
        };
        law.validate().map_err(|e| format!("prior: {e}"))?;
        Ok(law)
    }

    pub fn prior_spec(&self) -> Result<PriorSpec, String> {
        PriorSpec::new(
            self.count_law()?,
            complex(self.prior.amplitude_mean),
            self.prior.amplitude_variance,
            self.source_domain()?,
        )
        .map_err(|e| format!("prior: {e}"))
    }

    pub fn smc_settings(&self, particles: usize) -> Result<SmcSettings, String> {
        let s = &self.smc;
        let schedule = TemperSchedule::new(s.betas.clone()).map_err(|e| format!("smc.betas: {e}"))?;
        let mut kernel = KernelParams::new(s.gamma_x, s.gamma_alpha, s.n_mcmc).map_err(|e| format!("smc: {e}"))?;
        kernel.temperature = match s.kernel_temperature {
            KernelTemperatureName::Current => KernelTemperature::Current,
            KernelTemperatureName::Next => KernelTemperature::Next,
        };
        if particles == 0 {
            return Err("smc: particle count must be positive".into());
        }
        Ok(SmcSettings {
            n_particles: particles,
            schedule,
            kernel,
            resampling: match s.resampling {
                ResamplingName::Multinomial => ResamplingScheme::Multinomial,
                ResamplingName::Systematic => ResamplingScheme::Systematic,
            },
        })
    }

    pub fn observed(&self) -> Option<Vec<Complex64>> {
        self.data.as_ref().map(|d| d.observed.iter().copied().map(complex).collect())
    }

    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut push = |r: Result<(), String>| {
            if let Err(e) = r {
                v.push(e);
            }
        };
        if !self.bounds().is_valid() {
            push(Err("domain.bounds: need x0 < x1 and y0 < y1".into()));
        }
        push(self.tagging().map(|_| ()));
        push(self.helmholtz().map(|_| ()));
        push(self.noise().map(|_| ()));
        push(self.prior_spec().map(|_| ()));
        push(self.smc_settings(self.smc.particles).map(|_| ()));
        if self.mesh.n_div == 0 {
            push(Err("mesh.n_div must be positive".into()));
        }
        match self.source_domain() {
            Err(e) => push(Err(e)),
            Ok(domain) => {
                for (i, z) in self.measurement_points().into_iter().enumerate() {
                    push(domain.check_measurement_point(i, z).map_err(|e| format!("measurements.points[{i}]: {e}")));
                }
                push(
                    domain
                        .check_measurement_point(0, self.prediction_point())
                        .map_err(|e| format!("measurements.prediction_point: {e}")),
                );
                for (i, s) in self.truth().sources().iter().enumerate() {
                    if !domain.contains(s.position) {
                        push(Err(format!(
                            "truth.sources[{i}]: position ({}, {}) lies outside the source domain",
                            s.position.x, s.position.y
                        )));
                    }
                }
            }
        }
        if self.measurements.points.is_empty() {
            push(Err("measurements.points must not be empty".into()));
        }
        if let Some(obs) = self.observed() {
            if obs.len() != self.measurements.points.len() {
                push(Err(format!(
                    "data.observed: expected {} values, got {}",
                    self.measurements.points.len(),
                    obs.len()
                )));
            }
        }
        let sep = &self.separation;
        if !(sep.eps > 0.0) {
            push(Err("separation.eps must be positive".into()));
        }
        if sep.grid < 2 {
            push(Err("separation.grid must be at least 2".into()));
        }
        for (i, q) in sep.conditional.iter().enumerate() {
            let r = rect(*q);
            let b = self.bounds();
            if !r.is_valid() || r.x0 < b.x0 || r.x1 > b.x1 || r.y0 < b.y0 || r.y1 > b.y1 {
                push(Err(format!("separation.conditional[{i}]: must be a valid rectangle inside the domain")));
            }
        }
        let mse = &self.mse;
        if mse.n_div == 0 || mse.particles.is_empty() || mse.particles.contains(&0) || mse.repetitions == 0 {
            push(Err("mse: n_div, particles and repetitions must be positive and non-empty".into()));
        }
        if mse.reference_particles < mse.particles.iter().copied().max().unwrap_or(0) {
            push(Err("mse.reference_particles must be at least the largest study particle count".into()));
        }
        let h = &self.hellinger;
        if h.n_divs.is_empty() || h.n_divs.contains(&0) || h.particles == 0 || h.repetitions == 0 {
            push(Err("hellinger: n_divs, particles and repetitions must be positive and non-empty".into()));
        }
        if let Some(bad) = h.n_divs.iter().find(|n| **n >= h.reference_n_div) {
            push(Err(format!(
                "hellinger: reference mesh (n_div = {}) must be strictly finer than every study mesh (got n_div = {bad})",
                h.reference_n_div
            )));
        }
        if self.experiment2.repetitions == 0 {
            push(Err("experiment2.repetitions must be positive".into()));
        }
        v
    }

    pub fn check(&self) -> Result<(), CliError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(v))
        }
    }

    /// Mesh for `n_div` subdivisions of the configured domain.
    pub fn mesh(&self, n_div: usize) -> Result<StructuredTriMesh, CliError> {
        let tagging = self.tagging().map_err(|e| CliError::Invalid(vec![e]))?;
        Ok(StructuredTriMesh::build(self.bounds(), n_div, tagging)?)
    }
}
