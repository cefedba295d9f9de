use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srcid::analysis::{self, GridSpec, Prediction};
use srcid::helmholtz::{AssembledSystem, HelmholtzParams, ObservationCache};
use srcid::mesh::StructuredTriMesh;
use srcid::model::{synth_data, Misfit, NoiseModel, Potential, Source, SourceConfig, SourceDomain};
use srcid::prior::{CountLaw, PriorSpec};
use srcid::rng::SeedKey;
use srcid::smc::{resample, run_smc, Ensemble, KernelParams, ResamplingScheme, SmcSettings, TemperSchedule};
use srcid::{Complex64, Point2, Rect};

const M: Complex64 = Complex64::new(10.0, 10.0);

fn strip() -> SourceDomain {
    SourceDomain::new(vec![Rect::new(0.1, 0.9, 0.6, 0.9)], 0.05, Rect::UNIT).unwrap()
}

fn points() -> Vec<Point2> {
    vec![Point2::new(0.1, 0.5), Point2::new(0.5, 0.5), Point2::new(0.9, 0.5)]
}

fn system(n: usize) -> AssembledSystem {
    AssembledSystem::assemble(Arc::new(StructuredTriMesh::unit_square(n).unwrap()), HelmholtzParams::reference()).unwrap()
}

#[test]
fn table_three_prior_column() {
    let law = CountLaw::Poisson { lambda: 4.0 };
    for (k, expected) in [(3, 0.195), (4, 0.195), (5, 0.156), (6, 0.104), (7, 0.060)] {
        assert!((law.pmf(k) - expected).abs() <= 0.001, "k = {k}: {}", law.pmf(k));
    }
}

#[test]
fn functionals_on_simple_configurations() {
    let s = system(16);
    let pred = Prediction::new(&s, Point2::new(0.5, 0.25), &strip(), None, 1.0).unwrap();
    let empty = pred.values(&SourceConfig::empty()).unwrap();
    assert_eq!([empty[0], empty[1], empty[2], empty[4]], [0.0, 0.0, 0.0, 0.0]);
    let exact = SourceConfig::new(vec![Source::new(M, Point2::new(0.25, 0.75)), Source::new(M, Point2::new(0.75, 0.75))]);
    let v = pred.values(&exact).unwrap();
    // |10+10i| = 10√2 twice, plus ‖(0.25, 0.75)‖ and ‖(0.75, 0.75)‖.
    let by_hand = 2.0 * 10.0 * 2f64.sqrt() + 0.625f64.sqrt() + 1.125f64.sqrt();
    assert!((v[0] - by_hand).abs() < 1e-12);
    assert_eq!(v[1], 1.0);
    let y = s.evaluate(&s.solve_sources(&exact, None).unwrap(), Point2::new(0.5, 0.25)).unwrap();
    assert!((v[2] - y.norm()).abs() < 1e-9 * y.norm());
    let db = 10.0 * (y * Complex64::from_polar(1.0, -30.0)).re.abs().max(1.0).log10();
    assert!((v[4] - db).abs() < 1e-9);
    // Prediction points must keep clear of the source domain.
    assert!(Prediction::new(&s, Point2::new(0.5, 0.58), &strip(), None, 1.0).is_err());
}

#[test]
fn posterior_variance_functional() {
    let s = system(16);
    let pred = Prediction::new(&s, Point2::new(0.5, 0.25), &strip(), None, 1.0).unwrap();
    let a = SourceConfig::new(vec![Source::new(M, Point2::new(0.25, 0.75))]);
    let b = SourceConfig::new(vec![Source::new(M * 2.0, Point2::new(0.25, 0.75))]);
    let e = Ensemble::new(vec![a.clone(), b.clone()], vec![0.5, 0.5]).unwrap();
    let f = analysis::posterior_functionals(&e, &pred).unwrap();
    let (ga, gb) = (pred.values(&a).unwrap()[2], pred.values(&b).unwrap()[2]);
    let var = 0.25 * (ga - gb) * (ga - gb);
    assert!((f[3] - var).abs() < 1e-9 * var);
    assert!((f[2] - 0.5 * (ga + gb)).abs() < 1e-12);
}

#[test]
fn k_pmf_of_zero_potential_pipeline_matches_prior() {
    let p = PriorSpec::new(CountLaw::Poisson { lambda: 2.0 }, M, 2.0, strip()).unwrap();
    let settings = SmcSettings {
        n_particles: 50_000,
        schedule: TemperSchedule::new(vec![0.0, 0.5, 1.0]).unwrap(),
        kernel: KernelParams::new(0.1, 0.4, 1).unwrap(),
        resampling: ResamplingScheme::Multinomial,
    };
    let run = run_smc(&p, &srcid::model::ZeroPotential, &settings, SeedKey::new(4)).unwrap();
    let pmf = analysis::posterior_k_pmf(&run.ensemble);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for k in 0..5 {
        let q = p.k_pmf(k);
        // Two resampling rounds at most triple the multinomial variance.
        let se = (3.0 * q * (1.0 - q) / 50_000.0).sqrt();
        assert!((pmf[k] - q).abs() < 4.0 * se, "k={k}: {} vs {q}", pmf[k]);
    }
}

#[test]
fn resampling_preserves_k_pmf_in_expectation() {
    let p = PriorSpec::new(CountLaw::Poisson { lambda: 2.0 }, M, 2.0, strip()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let parts: Vec<SourceConfig> = (0..50).map(|_| p.sample(&mut rng)).collect();
    let raw: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
    let e = Ensemble::from_unnormalized(parts, &raw).unwrap();
    let before = analysis::posterior_k_pmf(&e);
    let mut after = vec![0.0; before.len()];
    let reps = 4000;
    for _ in 0..reps {
        let r = resample(&e, ResamplingScheme::Multinomial, &mut rng).unwrap();
        for (k, v) in analysis::posterior_k_pmf(&r).iter().enumerate() {
            after[k] += v / reps as f64;
        }
    }
    for k in 0..before.len() {
        let se = (before[k] * (1.0 - before[k]) / (50.0 * reps as f64)).sqrt();
        assert!((after[k] - before[k]).abs() < 4.0 * se + 1e-12, "k={k}");
    }
}

/// One-source posterior on two meshes, as a tensor quadrature over position
/// and amplitude. Returns particles and the prior quadrature weights.
fn quadrature_nodes(nx: usize, ny: usize, na: usize, variance: f64) -> (Vec<SourceConfig>, Vec<f64>) {
    let mut parts = Vec::new();
    let mut weights = Vec::new();
    let sd = (variance / 2.0).sqrt();
    let t: Vec<f64> = (0..na).map(|i| -5.0 + 10.0 * (i as f64 + 0.5) / na as f64).collect();
    let dt = 10.0 / na as f64;
    for i in 0..nx {
        for j in 0..ny {
            let x = Point2::new(0.1 + 0.8 * (i as f64 + 0.5) / nx as f64, 0.6 + 0.3 * (j as f64 + 0.5) / ny as f64);
            for a in &t {
                for b in &t {
                    let density = (-(a * a + b * b) / 2.0).exp() / (2.0 * std::f64::consts::PI) * dt * dt;
                    parts.push(SourceConfig::new(vec![Source::new(M + Complex64::new(sd * a, sd * b), x)]));
                    weights.push(density / (nx * ny) as f64);
                }
            }
        }
    }
    (parts, weights)
}

#[test]
fn hellinger_estimator_agrees_with_quadrature() {
    let domain = strip();
    let (coarse, fine) = (system(4), system(16));
    let cache_h = ObservationCache::build(&coarse, &points(), &domain, None).unwrap();
    let cache_ref = ObservationCache::build(&fine, &points(), &domain, None).unwrap();
    let noise = NoiseModel::iid(3, 2.0).unwrap();
    let truth = SourceConfig::new(vec![Source::new(M, Point2::new(0.4, 0.75))]);
    let y = synth_data(&cache_ref, &noise, &truth, Some(&mut ChaCha8Rng::seed_from_u64(3))).unwrap();
    let psi_h = Misfit::new(&cache_h, &noise, &y).unwrap();
    let psi_ref = Misfit::new(&cache_ref, &noise, &y).unwrap();

    // Direct integration: d² = 1 − ∫√(π_h π) dμ⁰ / √(Z_h Z).
    let (nodes, prior_w) = quadrature_nodes(48, 18, 30, 2.0);
    let (mut zh, mut zr, mut bc) = (0.0, 0.0, 0.0);
    let mut ph = Vec::with_capacity(nodes.len());
    let mut pr = Vec::with_capacity(nodes.len());
    for (u, w) in nodes.iter().zip(&prior_w) {
        let (a, b) = (psi_h.potential(u), psi_ref.potential(u));
        zh += w * (-a).exp();
        zr += w * (-b).exp();
        bc += w * (-(a + b) / 2.0).exp();
        ph.push(a);
        pr.push(b);
    }
    let direct = (1.0 - bc / (zh * zr).sqrt()).max(0.0).sqrt();
    assert!(direct > 0.05, "toy problem too easy: {direct}");

    // The estimator on exact quadrature "ensembles" reproduces it to round-off.
    let post = |psi: &[f64]| -> Vec<f64> {
        let raw: Vec<f64> = psi.iter().zip(&prior_w).map(|(p, w)| w * (-p).exp()).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|r| r / s).collect()
    };
    let q = analysis::hellinger_from_potentials(&post(&ph), &ph, &pr, &post(&pr), &ph, &pr).unwrap();
    assert!((q.distance - direct).abs() < 1e-9, "{} vs {direct}", q.distance);

    // And on SMC ensembles within 5 %.
    let prior = PriorSpec::new(CountLaw::Pmf(vec![0.0, 1.0]), M, 2.0, domain).unwrap();
    let settings = SmcSettings {
        n_particles: 40_000,
        schedule: TemperSchedule::new(vec![0.0, 0.1, 0.4, 1.0]).unwrap(),
        kernel: KernelParams::new(0.1, 0.4, 10).unwrap(),
        resampling: ResamplingScheme::Multinomial,
    };
    let mut estimates = Vec::new();
    for rep in 0..4 {
        let eh = run_smc(&prior, &psi_h, &settings, SeedKey::new(100 + rep)).unwrap().ensemble;
        let er = run_smc(&prior, &psi_ref, &settings, SeedKey::new(200 + rep)).unwrap().ensemble;
        estimates.push(analysis::hellinger_estimate(&eh, &er, &psi_h, &psi_ref).unwrap().distance);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    assert!((mean - direct).abs() < 0.05 * direct, "SMC {mean} ({estimates:?}) vs quadrature {direct}");

    let same = analysis::hellinger_estimate(&Ensemble::uniform(nodes[..100].to_vec()).unwrap(), &Ensemble::uniform(nodes[..50].to_vec()).unwrap(), &psi_ref, &psi_ref).unwrap();
    assert!(same.distance < 1e-12);
}

fn random_ensemble(seed: u64) -> Ensemble {
    let p = PriorSpec::new(CountLaw::Poisson { lambda: 2.0 }, M, 2.0, strip()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<SourceConfig> = (0..30).map(|_| p.sample(&mut rng)).collect();
    let raw: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
    Ensemble::from_unnormalized(parts, &raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn p_emp_is_monotone_in_eps(seed in 0u64..1000, e1 in 0.01f64..0.1, extra in 0.0f64..0.1) {
        let e = random_ensemble(seed);
        let spec = GridSpec::new(Rect::UNIT, 41, 41).unwrap();
        let a = analysis::p_emp(&e, spec, e1).unwrap();
        let b = analysis::p_emp(&e, spec, e1 + extra).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(*x <= *y + 1e-12);
            prop_assert!((0.0..=1.0).contains(x));
        }
    }

    #[test]
    fn map_per_k_matches_filtered_scan(seed in 0u64..1000) {
        let e = random_ensemble(seed);
        let m = analysis::map_indices(&e);
        for (k, idx) in &m.per_k {
            let mut best: Option<usize> = None;
            for (n, u) in e.particles().iter().enumerate() {
                if u.len() == *k && best.is_none_or(|b| e.weights()[n] > e.weights()[b]) {
                    best = Some(n);
                }
            }
            prop_assert_eq!(Some(*idx), best);
        }
    }

    #[test]
    fn hellinger_is_non_negative_and_symmetric(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 20;
        let w1: Vec<f64> = { let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect(); let s: f64 = r.iter().sum(); r.iter().map(|v| v / s).collect() };
        let w2: Vec<f64> = { let r: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect(); let s: f64 = r.iter().sum(); r.iter().map(|v| v / s).collect() };
        let p: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.random_range(0.0..5.0)).collect()).collect();
        let a = analysis::hellinger_from_potentials(&w1, &p[0], &p[1], &w2, &p[2], &p[3]).unwrap();
        let b = analysis::hellinger_from_potentials(&w2, &p[3], &p[2], &w1, &p[1], &p[0]).unwrap();
        prop_assert!(a.distance >= 0.0);
        prop_assert!((a.distance - b.distance).abs() < 1e-14);
    }
}
