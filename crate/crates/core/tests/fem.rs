mod support;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srcid::helmholtz::{AssembledSystem, HelmholtzParams, ObservationCache};
use srcid::mesh::{BoundaryTag, Face, StructuredTriMesh, Tagging};
use srcid::model::{Source, SourceConfig, SourceDomain};
use srcid::{Complex64, Point2, Rect};

use support::mms;

fn system(n: usize) -> AssembledSystem {
    AssembledSystem::assemble(Arc::new(StructuredTriMesh::unit_square(n).unwrap()), HelmholtzParams::reference()).unwrap()
}

fn strip() -> SourceDomain {
    SourceDomain::new(vec![Rect::new(0.1, 0.9, 0.6, 0.9)], 0.05, Rect::UNIT).unwrap()
}

fn measurement_points() -> Vec<Point2> {
    vec![Point2::new(0.1, 0.5), Point2::new(0.5, 0.5), Point2::new(0.9, 0.5)]
}

#[test]
fn manufactured_solution_is_second_order() {
    let (errors, orders) = mms::observed_orders(&[8, 16, 32], HelmholtzParams::reference());
    assert!(errors.windows(2).all(|e| e[1] < e[0]), "{errors:?}");
    assert!(orders.iter().all(|o| *o > 1.8), "orders {orders:?}");
}

#[test]
fn galerkin_matrix_is_complex_symmetric_not_hermitian() {
    let s = system(12);
    assert_eq!(s.matrix().max_asymmetry(), 0.0);
    assert!(s.matrix().max_non_hermitian() > 1.0);
}

#[test]
fn discrete_reciprocity() {
    let domain = strip();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [16, 32] {
        let s = system(n);
        for _ in 0..10 {
            let x = domain.sample(&mut rng);
            let z = Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..0.5));
            let a = s.green_value(x, z).unwrap();
            let b = s.green_value(z, x).unwrap();
            assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn observation_cache_matches_full_solves() {
    let s = system(24);
    let cache = ObservationCache::build(&s, &measurement_points(), &strip(), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..4 {
        let u = SourceConfig::new(
            (0..k)
                .map(|_| Source::new(Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)), strip().sample(&mut rng)))
                .collect(),
        );
        let fast = cache.observe(&u).unwrap();
        let y = s.solve_sources(&u, None).unwrap();
        for (j, z) in measurement_points().iter().enumerate() {
            let slow = s.evaluate(&y, *z).unwrap();
            assert!((fast[j] - slow).norm() <= 1e-9 * slow.norm().max(1.0), "k={k} j={j}");
        }
    }
}

#[test]
fn observation_with_neumann_data_matches_full_solve() {
    let tagging = Tagging::ALL_IMPEDANCE.with(Face::Bottom, BoundaryTag::Neumann);
    let mesh = Arc::new(StructuredTriMesh::build(Rect::UNIT, 20, tagging).unwrap());
    let s = AssembledSystem::assemble(mesh, HelmholtzParams::reference()).unwrap();
    let g = |p: Point2| Complex64::new(p.x, 1.0 - p.x);
    let cache = ObservationCache::build(&s, &measurement_points(), &strip(), Some(&g)).unwrap();
    let u = SourceConfig::new(vec![Source::new(Complex64::new(3.0, -1.0), Point2::new(0.3, 0.8))]);
    let fast = cache.observe(&u).unwrap();
    let y = s.solve_sources(&u, Some(&g)).unwrap();
    for (j, z) in measurement_points().iter().enumerate() {
        let slow = s.evaluate(&y, *z).unwrap();
        assert!((fast[j] - slow).norm() <= 1e-9 * slow.norm().max(1.0));
    }
    assert!(cache.neumann_offset().iter().any(|v| v.norm() > 0.0));
}

#[test]
fn forward_map_is_linear_in_amplitudes() {
    let s = system(16);
    let cache = ObservationCache::build(&s, &measurement_points(), &strip(), None).unwrap();
    let a = SourceConfig::new(vec![Source::new(Complex64::new(1.0, 2.0), Point2::new(0.2, 0.7))]);
    let b = SourceConfig::new(vec![Source::new(Complex64::new(-3.0, 0.5), Point2::new(0.8, 0.85))]);
    let ya = cache.observe(&a).unwrap();
    let yb = cache.observe(&b).unwrap();
    let yab = cache.observe(&a.concat(&b)).unwrap();
    for j in 0..3 {
        assert!((ya[j] + yb[j] - yab[j]).norm() < 1e-12 * yab[j].norm().max(1.0));
    }
    let scaled = SourceConfig::new(vec![Source::new(Complex64::new(1.0, 2.0) * Complex64::new(0.0, 2.0), Point2::new(0.2, 0.7))]);
    let ys = cache.observe(&scaled).unwrap();
    for j in 0..3 {
        assert!((ys[j] - ya[j] * Complex64::new(0.0, 2.0)).norm() < 1e-12 * ys[j].norm().max(1.0));
    }
}

#[test]
fn green_point_values_converge() {
    let pairs = vec![(Point2::new(0.3, 0.75), Point2::new(0.5, 0.5)), (Point2::new(0.7, 0.8), Point2::new(0.1, 0.5))];
    let rows = srcid::helmholtz::pointwise_error_study(Rect::UNIT, Tagging::ALL_IMPEDANCE, HelmholtzParams::reference(), &pairs, &[8, 16, 32], 64).unwrap();
    assert!(rows.windows(2).all(|r| r[1].mean_error < r[0].mean_error));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hat_functions_partition_unity(x in 0.0f64..=1.0, y in 0.0f64..=1.0, n in 1usize..40) {
        let mesh = StructuredTriMesh::unit_square(n).unwrap();
        let hat = mesh.hat_values(Point2::new(x, y)).unwrap();
        let total: f64 = hat.iter().map(|(_, v)| v).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(hat.iter().all(|(_, v)| v >= -1e-12 && v <= 1.0 + 1e-12));
        // Linear functions are reproduced exactly.
        let px: Vec<f64> = mesh.nodes().iter().map(|p| 2.0 * p.x - p.y).collect();
        let lin: f64 = hat.iter().map(|(node, v)| v * px[node]).sum();
        prop_assert!((lin - (2.0 * x - y)).abs() < 1e-12);
    }

    #[test]
    fn observation_is_permutation_invariant(seed in 0u64..1000) {
        let s = system(8);
        let cache = ObservationCache::build(&s, &measurement_points(), &strip(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sources: Vec<Source> = (0..4)
            .map(|_| Source::new(Complex64::new(rng.random(), rng.random()), strip().sample(&mut rng)))
            .collect();
        let a = cache.observe(&SourceConfig::new(sources.clone())).unwrap();
        sources.reverse();
        let b = cache.observe(&SourceConfig::new(sources)).unwrap();
        for j in 0..3 {
            prop_assert!((a[j] - b[j]).norm() < 1e-12 * a[j].norm().max(1.0));
        }
    }
}
