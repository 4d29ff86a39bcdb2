use anchored_core::pipeline::{
    aggregate, anchored_fit, generate_scene, observe, run_iteration, Method, PipelineConfig,
};
use anchored_core::reduction::reduce_anchored_point;
use anchored_core::solver::Formulation;
use nalgebra::Vector2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LINE_METHODS: [Method; 6] =
    [Method::L11, Method::L11Std, Method::L12, Method::L13, Method::L13Std, Method::L14];

#[test]
fn benchmark_rows_cover_every_method_and_iteration() {
    let cfg = PipelineConfig::default();
    let mut results = Vec::new();
    for k in 0..6 {
        let it = run_iteration(2, 3, 1e-12, &Method::ALL, 1, k, &cfg).unwrap();
        assert_eq!(it.results.len(), Method::ALL.len());
        results.extend(it.results.into_iter().map(|(_, r)| r.unwrap()));
    }
    let stats = aggregate(&results);
    assert_eq!(stats.len(), Method::ALL.len());
    assert!(stats.iter().all(|s| s.accuracy.count == 6 && s.time.count == 6));
}

#[test]
fn noiseless_two_point_method_matches_the_truth() {
    let cfg = PipelineConfig::default();
    for k in 0..10 {
        let it = run_iteration(3, 5, 0.0, &[Method::L12], 77, k, &cfg).unwrap();
        let r = it.results[0].1.as_ref().unwrap();
        assert_eq!(r.error_e, r.error_e.min(-12.0));
    }
}

/// Objective of the anchored-point problem on a fine grid of the whole
/// projective line, `[l0 l1](cos a, sin a)`.
fn grid_minimum(problem: &anchored_core::reduction::ReducedPointProblem, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let a = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            let (s, c) = a.sin_cos();
            let y: Vec<f64> = problem
                .reduced_cameras
                .iter()
                .zip(&problem.reduced_data)
                .map(|(cam, d)| {
                    let v = cam * Vector2::new(c, s);
                    let e = d[0] - d[1] * v[0] / v[1];
                    e * e
                })
                .collect();
            y.iter().sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn anchored_fit_beats_a_grid_search() {
    let cfg = PipelineConfig::default();
    for seed in 0..10 {
        let scene = generate_scene(3, 1, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = observe(&scene, 0.05, &mut rng).unwrap();
        let track = &obs.tracks[0];
        let x = anchored_fit(&scene.arrangement, &scene.line, track, Formulation::Reduced, &cfg, &mut rng).unwrap();
        let problem = reduce_anchored_point(&scene.arrangement, &scene.line, track).unwrap();
        let c = scene.line.span().transpose() * x.coords();
        let (s, k) = (c[0], c[1]);
        let found: f64 = problem
            .reduced_cameras
            .iter()
            .zip(&problem.reduced_data)
            .map(|(cam, d)| {
                let v = cam * Vector2::new(s, k);
                let e = d[0] - d[1] * v[0] / v[1];
                e * e
            })
            .sum();
        let grid = grid_minimum(&problem, 100_000);
        assert!(found <= grid * (1.0 + 1e-12) + 1e-300, "seed {seed}: {found:e} > {grid:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn standard_and_reduced_variants_agree(seed in any::<u64>(), m in 2usize..=3) {
        let cfg = PipelineConfig::default();
        let it = run_iteration(m, 3, 1e-12, &[Method::L11, Method::L11Std, Method::L13, Method::L13Std], seed, 0, &cfg)
            .unwrap();
        let pts: Vec<_> = it.results.iter().map(|(_, r)| r.as_ref().unwrap().points.clone()).collect();
        for (a, b) in [(&pts[0], &pts[1]), (&pts[2], &pts[3])] {
            for (y, z) in a.iter().zip(b) {
                prop_assert!((y - z).norm() <= 1e-8 * y.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn noiseless_round_trip(seed in any::<u64>(), m in 2usize..=4) {
        let cfg = PipelineConfig::default();
        let it = run_iteration(m, 5, 0.0, &Method::ALL, seed, 0, &cfg).unwrap();
        let scene = generate_scene(m, 5, it.scene_seed).unwrap();
        for (method, r) in &it.results {
            for (y, x) in r.as_ref().unwrap().points.iter().zip(scene.affine_points()) {
                prop_assert!((y - x).norm() <= 1e-8 * x.norm(), "{method}");
            }
        }
    }

    #[test]
    fn incidence_is_kept_by_line_methods(seed in any::<u64>()) {
        let cfg = PipelineConfig::default();
        let it = run_iteration(3, 5, 1e-3, &LINE_METHODS, seed, 0, &cfg).unwrap();
        for (method, r) in &it.results {
            prop_assert!(r.as_ref().unwrap().incidence_ok, "{method}");
        }
    }
}
