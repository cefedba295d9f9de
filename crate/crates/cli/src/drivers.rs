//! The experiment drivers.
//!
//! Each driver computes a typed result first and renders it to files
//! separately, so tests can inspect numbers without parsing CSV.

use std::sync::Arc;

use srcid::analysis::{self, Functional, GridSpec, HeatGrid, MapIndices, Prediction, RateFit, RateModel};
use srcid::helmholtz::{AssembledSystem, ObservationCache};
use srcid::mesh::StructuredTriMesh;
use srcid::model::{synth_data, Misfit, NoiseModel, SourceConfig};
use srcid::prior::PriorSpec;
use srcid::rng::{SeedKey, Stream};
use srcid::smc::{run_smc, SmcRun};
use srcid::{Complex64, Point2, Rect};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{heatmap_csv, heatmap_json, num, OutputSet, Table};

/// Discretization of the forward problem on one mesh.
pub struct Problem {
    pub mesh: Arc<StructuredTriMesh>,
    pub system: AssembledSystem,
    pub cache: ObservationCache,
    pub prediction: Prediction,
}

impl Problem {
    pub fn build(config: &ExperimentConfig, n_div: usize) -> Result<Self, CliError> {
        let mesh = Arc::new(config.mesh(n_div)?);
        let params = config.helmholtz().map_err(|e| CliError::Invalid(vec![e]))?;
        let system = AssembledSystem::assemble(mesh.clone(), params)?;
        let domain = config.source_domain().map_err(|e| CliError::Invalid(vec![e]))?;
        let g = config.neumann_value();
        let g_fn = move |_: Point2| g.unwrap_or_default();
        let neumann: Option<srcid::helmholtz::NeumannData<'_>> = if g.is_some() { Some(&g_fn) } else { None };
        let cache = ObservationCache::build(&system, &config.measurement_points(), &domain, neumann)?;
        let prediction = Prediction::new(
            &system,
            config.prediction_point(),
            &domain,
            neumann,
            config.measurements.prediction_time,
        )?;
        Ok(Self {
            mesh,
            system,
            cache,
            prediction,
        })
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }
}

/// Validated pieces shared by all drivers.
pub struct Setup {
    pub prior: PriorSpec,
    pub noise: NoiseModel,
    pub truth: SourceConfig,
    pub seed: SeedKey,
}

impl Setup {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self, CliError> {
        config.check()?;
        let invalid = |e: String| CliError::Invalid(vec![e]);
        Ok(Self {
            prior: config.prior_spec().map_err(invalid)?,
            noise: config.noise().map_err(invalid)?,
            truth: config.truth(),
            seed: SeedKey::new(seed),
        })
    }

    /// Observed data from the config, or `G_h(u_exact)` plus noise draw
    /// number `draw` on the given problem.
    pub fn data(&self, config: &ExperimentConfig, problem: &Problem, draw: u64) -> Result<Vec<Complex64>, CliError> {
        if let Some(y) = config.observed() {
            return Ok(y);
        }
        let mut rng = self.seed.stream(Stream::Noise, draw);
        Ok(synth_data(&problem.cache, &self.noise, &self.truth, Some(&mut rng))?)
    }

    pub fn run(&self, config: &ExperimentConfig, problem: &Problem, y: &[Complex64], particles: usize, key: SeedKey) -> Result<SmcRun, CliError> {
        let settings = config.smc_settings(particles).map_err(|e| CliError::Invalid(vec![e]))?;
        let misfit = Misfit::new(&problem.cache, &self.noise, y)?;
        Ok(run_smc(&self.prior, &misfit, &settings, key)?)
    }
}

// ---------------------------------------------------------------- separation

#[derive(Debug, Clone)]
pub struct SeparationResult {
    pub eps: f64,
    pub h: f64,
    pub data: Vec<Complex64>,
    pub run: SmcRun,
    pub pemp: HeatGrid,
    pub per_k: Vec<(usize, Option<HeatGrid>)>,
    pub conditional: Vec<(Rect, Option<HeatGrid>)>,
    pub peaks: Vec<(Point2, f64)>,
    pub k_pmf: Vec<f64>,
    pub prior_pmf: Vec<f64>,
    pub map: MapIndices,
    pub functionals: [f64; 5],
}

fn separation_once(config: &ExperimentConfig, setup: &Setup, problem: &Problem, draw: u64, key: SeedKey) -> Result<SeparationResult, CliError> {
    let sep = &config.separation;
    let y = setup.data(config, problem, draw)?;
    let run = setup.run(config, problem, &y, config.smc.particles, key)?;
    let spec = GridSpec::new(config.bounds(), sep.grid, sep.grid)?;
    let e = &run.ensemble;
    let pemp = analysis::p_emp(e, spec, sep.eps)?;
    let optional = |r: srcid::Result<HeatGrid>| match r {
        Ok(g) => Ok(Some(g)),
        Err(srcid::Error::EmptyConditioning) => Ok(None),
        Err(other) => Err(other),
    };
    let per_k = sep
        .per_k
        .iter()
        .map(|&k| Ok((k, optional(analysis::p_emp_given_k(e, k, spec, sep.eps))?)))
        .collect::<Result<Vec<_>, srcid::Error>>()?;
    let conditional = sep
        .conditional
        .iter()
        .map(|q| {
            let q = Rect::new(q[0], q[1], q[2], q[3]);
            Ok((q, optional(analysis::p_emp_conditional(e, q, sep.conditional_k, spec, sep.eps))?))
        })
        .collect::<Result<Vec<_>, srcid::Error>>()?;
    let mut peaks = pemp.local_maxima(sep.peak_separation());
    peaks.truncate(sep.peaks);
    let k_pmf = analysis::posterior_k_pmf(e);
    let mut prior_pmf: Vec<f64> = (0..k_pmf.len().max(setup.prior.count_law.k_max().min(30) + 1))
        .map(|k| setup.prior.k_pmf(k))
        .collect();
    while prior_pmf.len() > k_pmf.len() && prior_pmf.last().is_some_and(|p| *p < 1e-9) {
        prior_pmf.pop();
    }
    let functionals = analysis::posterior_functionals(e, &problem.prediction)?;
    Ok(SeparationResult {
        eps: sep.eps,
        h: problem.h(),
        data: y,
        map: analysis::map_indices(e),
        run,
        pemp,
        per_k,
        conditional,
        peaks,
        k_pmf,
        prior_pmf,
        functionals,
    })
}

pub fn separation(config: &ExperimentConfig, seed: u64) -> Result<SeparationResult, CliError> {
    let setup = Setup::new(config, seed)?;
    let problem = Problem::build(config, config.mesh.n_div)?;
    separation_once(config, &setup, &problem, 0, setup.seed.child(Stream::Repetition, 0))
}

fn source_rows(t: &mut Table, scope: &str, k: Option<usize>, index: usize, weight: f64, u: &SourceConfig) {
    let k = k.map_or(String::new(), |k| k.to_string());
    if u.is_empty() {
        t.row([scope.to_string(), k.clone(), index.to_string(), num(weight), String::new(), String::new(), String::new(), String::new(), String::new()]);
    }
    for (l, s) in u.sources().iter().enumerate() {
        t.row([
            scope.to_string(),
            k.clone(),
            index.to_string(),
            num(weight),
            (l + 1).to_string(),
            num(s.position.x),
            num(s.position.y),
            num(s.amplitude.re),
            num(s.amplitude.im),
        ]);
    }
}

impl SeparationResult {
    pub fn outputs(&self) -> OutputSet {
        let mut out = OutputSet::default();
        out.push("pemp.csv", heatmap_csv(&self.pemp));
        out.push("pemp.json", heatmap_json(&self.pemp, "p_emp", self.eps));
        for (k, g) in &self.per_k {
            match g {
                Some(g) => {
                    out.push(format!("pemp_k{k}.csv"), heatmap_csv(g));
                    out.push(format!("pemp_k{k}.json"), heatmap_json(g, &format!("p_emp | k = {k}"), self.eps));
                }
                None => out.notes.push(format!("pemp_k{k}: no particle with {k} sources; map skipped")),
            }
        }
        for (i, (q, g)) in self.conditional.iter().enumerate() {
            let label = format!("p_emp | Q = [{}, {}] x [{}, {}]", q.x0, q.x1, q.y0, q.y1);
            match g {
                Some(g) => {
                    out.push(format!("conditional_{i}.csv"), heatmap_csv(g));
                    out.push(format!("conditional_{i}.json"), heatmap_json(g, &label, self.eps));
                }
                None => out.notes.push(format!("conditional_{i}: empty index set for {label}; map skipped")),
            }
        }
        let mut t = Table::new(&["rank", "x", "y", "value"]);
        for (i, (p, v)) in self.peaks.iter().enumerate() {
            t.row([(i + 1).to_string(), num(p.x), num(p.y), num(*v)]);
        }
        out.push("peaks.csv", t.finish());
        let mut t = Table::new(&["k", "prior", "posterior"]);
        for k in 0..self.k_pmf.len().max(self.prior_pmf.len()) {
            t.row([k.to_string(), num(self.prior_pmf.get(k).copied().unwrap_or(0.0)), num(self.k_pmf.get(k).copied().unwrap_or(0.0))]);
        }
        out.push("k_pmf.csv", t.finish());
        let mut t = Table::new(&["scope", "k", "index", "weight", "source", "x", "y", "re", "im"]);
        let e = &self.run.ensemble;
        source_rows(&mut t, "global", None, self.map.global, e.weights()[self.map.global], &e.particles()[self.map.global]);
        for (k, &i) in &self.map.per_k {
            source_rows(&mut t, "given_k", Some(*k), i, e.weights()[i], &e.particles()[i]);
        }
        out.push("map.csv", t.finish());
        let mut t = Table::new(&["functional", "value"]);
        for (f, v) in Functional::ALL.iter().zip(self.functionals) {
            t.row([f.name().to_string(), num(v)]);
        }
        out.push("functionals.csv", t.finish());
        out.push("diagnostics.csv", diagnostics_csv(&self.run));
        let mut t = Table::new(&["point", "re", "im"]);
        for (j, y) in self.data.iter().enumerate() {
            t.row([(j + 1).to_string(), num(y.re), num(y.im)]);
        }
        out.push("data.csv", t.finish());
        out
    }
}

fn diagnostics_csv(run: &SmcRun) -> Vec<u8> {
    let mut t = Table::new(&[
        "step",
        "beta_from",
        "beta_to",
        "kernel_beta",
        "ess_before",
        "ess_after",
        "acceptance_rate",
        "log_normalizer_increment",
    ]);
    for d in &run.diagnostics {
        t.row([
            d.step.to_string(),
            num(d.beta_from),
            num(d.beta_to),
            num(d.kernel_beta),
            num(d.ess_before),
            num(d.ess_after),
            num(d.acceptance_rate),
            num(d.log_normalizer_increment),
        ]);
    }
    t.finish()
}

// ---------------------------------------------------------------------- mse

#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub functional: Functional,
    pub particles: usize,
    pub mse: f64,
    /// Sample variance of the per-run squared errors.
    pub variance: f64,
    pub runs: usize,
}

#[derive(Debug, Clone)]
pub struct MseResult {
    pub reference: [f64; 5],
    pub rows: Vec<MseRow>,
    pub fits: Vec<(Functional, Option<RateFit>)>,
}

fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn mse(config: &ExperimentConfig, seed: u64) -> Result<MseResult, CliError> {
    let setup = Setup::new(config, seed)?;
    let c = &config.mse;
    let problem = Problem::build(config, c.n_div)?;
    let y = setup.data(config, &problem, 0)?;
    let reference_run = setup.run(config, &problem, &y, c.reference_particles, setup.seed.child(Stream::Reference, 0))?;
    let reference = analysis::posterior_functionals(&reference_run.ensemble, &problem.prediction)?;
    drop(reference_run);
    let mut rows = Vec::new();
    for (ni, &n) in c.particles.iter().enumerate() {
        let mut sq: Vec<[f64; 5]> = Vec::with_capacity(c.repetitions);
        for r in 0..c.repetitions {
            let key = setup.seed.child(Stream::Repetition, ni as u64).child(Stream::Repetition, r as u64);
            let run = setup.run(config, &problem, &y, n, key)?;
            let f = analysis::posterior_functionals(&run.ensemble, &problem.prediction)?;
            let mut e = [0.0; 5];
            for i in 0..5 {
                e[i] = (f[i] - reference[i]).powi(2);
            }
            sq.push(e);
        }
        for (i, f) in Functional::ALL.iter().enumerate() {
            let v: Vec<f64> = sq.iter().map(|e| e[i]).collect();
            rows.push(MseRow {
                functional: *f,
                particles: n,
                mse: mean(&v),
                variance: sample_variance(&v),
                runs: v.len(),
            });
        }
    }
    let fits = Functional::ALL
        .iter()
        .map(|f| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.functional == *f).map(|r| (r.particles as f64, r.mse)).collect();
            (*f, analysis::fit_rate(&pts, RateModel::SampleSize).ok())
        })
        .collect();
    Ok(MseResult { reference, rows, fits })
}

fn rates_csv(rows: &[(String, Option<RateFit>)]) -> Vec<u8> {
    let mut t = Table::new(&["quantity", "model", "slope", "intercept", "log_h_slope", "points"]);
    for (name, fit) in rows {
        match fit {
            Some(f) => t.row([
                name.clone(),
                match f.model {
                    RateModel::SampleSize => "1/N".to_string(),
                    RateModel::MeshLogSquare => "|ln h|h^2".to_string(),
                },
                num(f.slope),
                num(f.intercept),
                f.log_h_slope.map_or(String::new(), num),
                f.errors.len().to_string(),
            ]),
            None => t.row([name.clone(), String::new(), String::new(), String::new(), String::new(), "0".to_string()]),
        }
    }
    t.finish()
}

impl MseResult {
    pub fn fit(&self, f: Functional) -> Option<&RateFit> {
        self.fits.iter().find(|(g, _)| *g == f).and_then(|(_, fit)| fit.as_ref())
    }

    pub fn outputs(&self) -> OutputSet {
        let mut out = OutputSet::default();
        let mut t = Table::new(&["functional", "N", "mse", "variance", "runs"]);
        for r in &self.rows {
            t.row([r.functional.name().to_string(), r.particles.to_string(), num(r.mse), num(r.variance), r.runs.to_string()]);
        }
        out.push("mse.csv", t.finish());
        let mut t = Table::new(&["functional", "reference"]);
        for (f, v) in Functional::ALL.iter().zip(self.reference) {
            t.row([f.name().to_string(), num(v)]);
        }
        out.push("mse_reference.csv", t.finish());
        let fits: Vec<(String, Option<RateFit>)> = self.fits.iter().map(|(f, fit)| (format!("mse_{}", f.name()), fit.clone())).collect();
        out.push("mse_rates.csv", rates_csv(&fits));
        for (f, fit) in &self.fits {
            if fit.is_none() {
                out.notes.push(format!("mse_{}: rate not fitted (fewer than 3 positive points)", f.name()));
            }
        }
        out
    }
}

// --------------------------------------------------------------- mesh study

/// One study mesh across all repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyLevel {
    pub n_div: usize,
    pub h: f64,
    pub hellinger: Vec<analysis::HellingerEstimate>,
    /// Posterior expectations of the functionals, per repetition.
    pub expectations: Vec<[f64; 5]>,
}

#[derive(Debug, Clone)]
pub struct MeshStudyResult {
    pub reference_n_div: usize,
    pub reference_h: f64,
    pub reference_expectations: Vec<[f64; 5]>,
    pub levels: Vec<StudyLevel>,
}

/// Reference and study runs of one repetition share their SMC seed.
pub fn mesh_study(config: &ExperimentConfig, seed: u64) -> Result<MeshStudyResult, CliError> {
    let setup = Setup::new(config, seed)?;
    let c = &config.hellinger;
    let reference = Problem::build(config, c.reference_n_div)?;
    let y = setup.data(config, &reference, 0)?;
    let studies = c.n_divs.iter().map(|&n| Problem::build(config, n)).collect::<Result<Vec<_>, _>>()?;
    let mut levels: Vec<StudyLevel> = studies
        .iter()
        .map(|p| StudyLevel {
            n_div: p.mesh.n_div(),
            h: p.h(),
            hellinger: Vec::new(),
            expectations: Vec::new(),
        })
        .collect();
    let mut reference_expectations = Vec::new();
    let psi_ref = Misfit::new(&reference.cache, &setup.noise, &y)?;
    for r in 0..c.repetitions {
        let key = setup.seed.child(Stream::Repetition, r as u64);
        let ref_run = setup.run(config, &reference, &y, c.particles, key)?;
        reference_expectations.push(analysis::posterior_functionals(&ref_run.ensemble, &reference.prediction)?);
        for (problem, level) in studies.iter().zip(levels.iter_mut()) {
            let run = setup.run(config, problem, &y, c.particles, key)?;
            let psi_h = Misfit::new(&problem.cache, &setup.noise, &y)?;
            let ref_on_h: Vec<f64> = run.ensemble.particles().iter().map(|u| srcid::model::Potential::potential(&psi_ref, u)).collect();
            let h_on_ref: Vec<f64> = ref_run.ensemble.particles().iter().map(|u| srcid::model::Potential::potential(&psi_h, u)).collect();
            level.hellinger.push(analysis::hellinger_from_potentials(
                run.ensemble.weights(),
                &run.potentials,
                &ref_on_h,
                ref_run.ensemble.weights(),
                &h_on_ref,
                &ref_run.potentials,
            )?);
            level.expectations.push(analysis::posterior_functionals(&run.ensemble, &problem.prediction)?);
        }
    }
    Ok(MeshStudyResult {
        reference_n_div: c.reference_n_div,
        reference_h: reference.h(),
        reference_expectations,
        levels,
    })
}

impl MeshStudyResult {
    /// Mean Hellinger distance per level.
    pub fn hellinger_means(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .map(|l| (l.h, mean(&l.hellinger.iter().map(|e| e.distance).collect::<Vec<_>>())))
            .collect()
    }

    pub fn hellinger_fit(&self) -> Option<RateFit> {
        analysis::fit_rate(&self.hellinger_means(), RateModel::MeshLogSquare).ok()
    }

    /// `e_h(f) = |mean_r E_ref[f] − mean_r E_h[f]|` per level.
    pub fn e_h(&self, f: Functional) -> Vec<(f64, f64)> {
        let i = Functional::ALL.iter().position(|g| *g == f).expect("known functional");
        let reference = mean(&self.reference_expectations.iter().map(|e| e[i]).collect::<Vec<_>>());
        self.levels
            .iter()
            .map(|l| (l.h, (reference - mean(&l.expectations.iter().map(|e| e[i]).collect::<Vec<_>>())).abs()))
            .collect()
    }

    pub fn e_h_fit(&self, f: Functional) -> Option<RateFit> {
        analysis::fit_rate(&self.e_h(f), RateModel::MeshLogSquare).ok()
    }

    pub fn hellinger_outputs(&self) -> OutputSet {
        let mut out = OutputSet::default();
        let mut t = Table::new(&["n_div", "h", "distance", "variance", "runs"]);
        for l in &self.levels {
            let d: Vec<f64> = l.hellinger.iter().map(|e| e.distance).collect();
            t.row([l.n_div.to_string(), num(l.h), num(mean(&d)), num(sample_variance(&d)), d.len().to_string()]);
        }
        out.push("hellinger.csv", t.finish());
        let mut t = Table::new(&["repetition", "n_div", "h", "distance", "forward", "reverse"]);
        for l in &self.levels {
            for (r, e) in l.hellinger.iter().enumerate() {
                t.row([r.to_string(), l.n_div.to_string(), num(l.h), num(e.distance), num(e.forward), num(e.reverse)]);
            }
        }
        out.push("hellinger_runs.csv", t.finish());
        out.push("hellinger_rates.csv", rates_csv(&[("hellinger".to_string(), self.hellinger_fit())]));
        out
    }

    pub fn eh_outputs(&self) -> OutputSet {
        let mut out = OutputSet::default();
        let mut t = Table::new(&["functional", "n_div", "h", "e_h", "mean_h", "mean_ref", "variance_h", "variance_ref", "runs"]);
        for (i, f) in Functional::ALL.iter().enumerate() {
            let refs: Vec<f64> = self.reference_expectations.iter().map(|e| e[i]).collect();
            for l in &self.levels {
                let vals: Vec<f64> = l.expectations.iter().map(|e| e[i]).collect();
                t.row([
                    f.name().to_string(),
                    l.n_div.to_string(),
                    num(l.h),
                    num((mean(&refs) - mean(&vals)).abs()),
                    num(mean(&vals)),
                    num(mean(&refs)),
                    num(sample_variance(&vals)),
                    num(sample_variance(&refs)),
                    vals.len().to_string(),
                ]);
            }
        }
        out.push("eh.csv", t.finish());
        let fits: Vec<(String, Option<RateFit>)> = Functional::ALL.iter().map(|f| (format!("e_h_{}", f.name()), self.e_h_fit(*f))).collect();
        out.push("eh_rates.csv", rates_csv(&fits));
        out
    }
}

// -------------------------------------------------------------- experiment 2

#[derive(Debug, Clone)]
pub struct Experiment2Result {
    /// Full summaries of the first repetition.
    pub first: SeparationResult,
    /// Posterior source-count pmf per repetition.
    pub k_pmfs: Vec<Vec<f64>>,
    pub prior_pmf: Vec<f64>,
}

/// Index of the largest entry; the lowest index wins ties.
pub fn mode(pmf: &[f64]) -> usize {
    let mut best = 0;
    for (k, p) in pmf.iter().enumerate() {
        if *p > pmf[best] {
            best = k;
        }
    }
    best
}

/// Repetition `r` uses noise draw `r` and its own SMC seed.
pub fn experiment2(config: &ExperimentConfig, seed: u64) -> Result<Experiment2Result, CliError> {
    let setup = Setup::new(config, seed)?;
    let problem = Problem::build(config, config.mesh.n_div)?;
    let mut first = None;
    let mut k_pmfs = Vec::new();
    for r in 0..config.experiment2.repetitions {
        let key = setup.seed.child(Stream::Repetition, r as u64);
        if r == 0 {
            let s = separation_once(config, &setup, &problem, 0, key)?;
            k_pmfs.push(s.k_pmf.clone());
            first = Some(s);
        } else {
            let y = setup.data(config, &problem, r as u64)?;
            let run = setup.run(config, &problem, &y, config.smc.particles, key)?;
            k_pmfs.push(analysis::posterior_k_pmf(&run.ensemble));
        }
    }
    let first = first.expect("at least one repetition");
    let prior_pmf = first.prior_pmf.clone();
    Ok(Experiment2Result { first, k_pmfs, prior_pmf })
}

impl Experiment2Result {
    pub fn outputs(&self) -> OutputSet {
        let mut out = self.first.outputs();
        let k_len = self.k_pmfs.iter().map(Vec::len).max().unwrap_or(0).max(self.prior_pmf.len());
        let mut t = Table::new(&["repetition", "k", "prior", "posterior"]);
        for (r, pmf) in self.k_pmfs.iter().enumerate() {
            for k in 0..k_len {
                t.row([r.to_string(), k.to_string(), num(self.prior_pmf.get(k).copied().unwrap_or(0.0)), num(pmf.get(k).copied().unwrap_or(0.0))]);
            }
        }
        out.push("table3.csv", t.finish());
        let mut t = Table::new(&["repetition", "mode", "mode_probability"]);
        for (r, pmf) in self.k_pmfs.iter().enumerate() {
            let m = mode(pmf);
            t.row([r.to_string(), m.to_string(), num(pmf[m])]);
        }
        out.push("experiment2_summary.csv", t.finish());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_breaks_ties_low() {
        assert_eq!(mode(&[0.1, 0.4, 0.4, 0.1]), 1);
        assert_eq!(mode(&[1.0]), 0);
    }

    #[test]
    fn variance_helpers() {
        assert_eq!(sample_variance(&[1.0]), 0.0);
        assert!((sample_variance(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((mean(&[1.0, 2.0]) - 1.5).abs() < 1e-15);
    }
}
