//! The four subcommands. Each returns how many solves failed or disagreed,
//! which `--strict` turns into a nonzero exit.

use std::path::{Path, PathBuf};

use anchored_core::constraints::{multidegree_check, Anchor, MultidegreeStats};
use anchored_core::pipeline::{generate_scene, observe, run_iteration, run_timed, Iteration, MethodResult, Scene};
use anchored_core::random::{self, derive_seed};
use anchored_core::solver::{edd_trial, summarize, EddSummary, EddVariety, Formulation};
use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::histogram::{Histogram, RangePolicy};
use crate::report::{stats_rows, write_csv, ResultRow, RESULT_COLUMNS, STATS_COLUMNS};
use crate::scene_io::SceneFile;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Outcome {
    pub failures: usize,
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Rows of one iteration and the number of failed methods in it.
fn iteration_rows(cfg: &RunConfig, index: u64, outcome: &anchored_core::Result<Iteration>) -> (Vec<ResultRow>, usize) {
    let seed = derive_seed(cfg.seed, index);
    match outcome {
        Ok(it) => {
            let mut failures = 0;
            let rows = it
                .results
                .iter()
                .map(|(method, r)| match r {
                    Ok(r) => ResultRow::success(r, index, seed, cfg.m, cfg.p, cfg.epsilon),
                    Err(e) => {
                        eprintln!("iteration {index}: {method} failed: {e}");
                        failures += 1;
                        ResultRow::failure(*method, index, seed, cfg.m, cfg.p, cfg.epsilon)
                    }
                })
                .collect();
            (rows, failures)
        }
        Err(e) => {
            eprintln!("iteration {index}: scene failed: {e}");
            let rows = cfg
                .methods
                .iter()
                .map(|&m| ResultRow::failure(m, index, seed, cfg.m, cfg.p, cfg.epsilon))
                .collect();
            (rows, cfg.methods.len())
        }
    }
}

/// Runs every configured method on `cfg.iterations` scenes and writes
/// `results.csv`, `stats.csv`, `hist_error.svg` and `hist_time.svg`.
pub fn benchmark(cfg: &RunConfig) -> Result<Outcome> {
    prepare(&cfg.out_dir)?;
    let iterations: Vec<anchored_core::Result<Iteration>> = pool(cfg)?.install(|| {
        (0..cfg.iterations as u64)
            .into_par_iter()
            .map(|k| run_iteration(cfg.m, cfg.p, cfg.epsilon, &cfg.methods, cfg.seed, k, &cfg.pipeline))
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = 0;
    for (k, it) in iterations.iter().enumerate() {
        let (r, f) = iteration_rows(cfg, k as u64, it);
        rows.extend(r);
        failures += f;
    }
    let results: Vec<&MethodResult> = iterations
        .iter()
        .filter_map(|it| it.as_ref().ok())
        .flat_map(|it| it.results.iter().filter_map(|(_, r)| r.as_ref().ok()))
        .collect();
    write_csv(&cfg.out_dir.join("results.csv"), &RESULT_COLUMNS, &rows)?;
    let stats = stats_rows(results.iter().copied());
    write_csv(&cfg.out_dir.join("stats.csv"), &STATS_COLUMNS, &stats)?;
    write_histograms(cfg, &results)?;

    println!(
        "m = {}, p = {}, epsilon = {:e}, {} iterations, seed {}",
        cfg.m, cfg.p, cfg.epsilon, cfg.iterations, cfg.seed
    );
    println!("{:<10} {:<8} {:>12} {:>12} {:>12}", "method", "metric", "median", "mean", "sigma");
    for s in &stats {
        println!(
            "{:<10} {:<8} {:>12.4e} {:>12.4e} {:>12.4e}",
            s.method, s.metric, s.median, s.mean, s.sigma
        );
    }
    if failures > 0 {
        eprintln!("{failures} failed solves");
    }
    println!("wrote {}", cfg.out_dir.display());
    Ok(Outcome { failures })
}

fn write_histograms(cfg: &RunConfig, results: &[&MethodResult]) -> Result<()> {
    let series = |f: fn(&MethodResult) -> f64| -> Vec<(String, Vec<f64>)> {
        cfg.methods
            .iter()
            .map(|&m| {
                let v = results.iter().filter(|r| r.method == m).map(|r| f(r)).collect();
                (m.id().to_string(), v)
            })
            .collect()
    };
    let title = format!("m = {}, p = {}, epsilon = {:e}", cfg.m, cfg.p, cfg.epsilon);
    let error = Histogram::build(
        &format!("Error, {title}"),
        "e = log10(sum |Y - X| / (p epsilon))",
        &series(|r| r.error_e),
        cfg.bins,
        cfg.error_range,
    );
    let time = Histogram::build(
        &format!("Time, {title}"),
        "seconds",
        &series(|r| r.time_seconds),
        cfg.bins,
        RangePolicy::Auto,
    );
    for (name, h) in [("hist_error.svg", error), ("hist_time.svg", time)] {
        let path = cfg.out_dir.join(name);
        std::fs::write(&path, h.to_svg()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Runs the configured methods on one scene, read from `scene_path` or
/// generated as iteration 0 of the benchmark with the same seed.
pub fn triangulate(cfg: &RunConfig, scene_path: Option<&Path>, save_scene: Option<PathBuf>) -> Result<Outcome> {
    let scene = match scene_path {
        Some(path) => SceneFile::load(path)?,
        None => generate_scene(cfg.m, cfg.p, derive_seed(cfg.seed, 0))?,
    };
    if scene.p() < 3 && cfg.methods.contains(&anchored_core::pipeline::Method::L12) {
        bail!("L1.2 needs at least 3 points, the scene has {}", scene.p());
    }
    if let Some(path) = save_scene {
        SceneFile::save(&scene, &path)?;
    }
    prepare(&cfg.out_dir)?;
    let outcome = solve_scene(cfg, &scene);
    let (rows, failures) = iteration_rows_for_scene(cfg, &scene, &outcome);
    write_csv(&cfg.out_dir.join("results.csv"), &RESULT_COLUMNS, &rows)?;

    println!("scene seed {}, m = {}, p = {}, epsilon = {:e}", scene.seed, scene.m(), scene.p(), cfg.epsilon);
    for (i, x) in scene.affine_points().iter().enumerate() {
        println!("  true X{i} = [{:.9}, {:.9}, {:.9}]", x.x, x.y, x.z);
    }
    for (method, r) in outcome.iter().flatten() {
        match r {
            Ok(r) => {
                println!(
                    "{method}: e = {:.3}, residual = {:.3e}, incidence {}, {:.3e} s",
                    r.error_e,
                    r.residual,
                    if r.incidence_ok { "ok" } else { "violated" },
                    r.time_seconds
                );
                for (i, y) in r.points.iter().enumerate() {
                    println!("  Y{i} = [{:.9}, {:.9}, {:.9}]", y.x, y.y, y.z);
                }
                if let Some((p, d)) = r.line.as_ref().and_then(|l| l.affine_chart()) {
                    println!(
                        "  line through [{:.9}, {:.9}, {:.9}] along [{:.9}, {:.9}, {:.9}]",
                        p.x, p.y, p.z, d.x, d.y, d.z
                    );
                }
            }
            Err(e) => println!("{method}: failed: {e}"),
        }
    }
    Ok(Outcome { failures })
}

type SceneOutcome = Vec<(anchored_core::pipeline::Method, anchored_core::Result<MethodResult>)>;

fn solve_scene(cfg: &RunConfig, scene: &Scene) -> anchored_core::Result<SceneOutcome> {
    let mut noise = ChaCha8Rng::seed_from_u64(derive_seed(scene.seed, 1));
    let obs = observe(scene, cfg.epsilon, &mut noise)?;
    Ok(cfg
        .methods
        .iter()
        .map(|&method| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene.seed, 2 + method.index() as u64));
            (method, run_timed(method, scene, &obs, &cfg.pipeline, &mut rng))
        })
        .collect())
}

fn iteration_rows_for_scene(
    cfg: &RunConfig,
    scene: &Scene,
    outcome: &anchored_core::Result<SceneOutcome>,
) -> (Vec<ResultRow>, usize) {
    let (m, p, eps) = (scene.m(), scene.p(), cfg.epsilon);
    match outcome {
        Ok(results) => {
            let failures = results.iter().filter(|(_, r)| r.is_err()).count();
            let rows = results
                .iter()
                .map(|(method, r)| match r {
                    Ok(r) => ResultRow::success(r, 0, scene.seed, m, p, eps),
                    Err(_) => ResultRow::failure(*method, 0, scene.seed, m, p, eps),
                })
                .collect();
            (rows, failures)
        }
        Err(e) => {
            eprintln!("observation failed: {e}");
            let rows = cfg
                .methods
                .iter()
                .map(|&method| ResultRow::failure(method, 0, scene.seed, m, p, eps))
                .collect();
            (rows, cfg.methods.len())
        }
    }
}

pub fn variety_name(v: EddVariety) -> &'static str {
    match v {
        EddVariety::AnchoredPoint => "anchored-point",
        EddVariety::AnchoredLine => "anchored-line",
        EddVariety::PointMultiview => "point-multiview",
    }
}

/// Counts complex critical points on `cfg.iterations` random instances and
/// writes `edd.csv`. Failures are trials whose count is not the modal one
/// or whose paths failed.
pub fn edd(cfg: &RunConfig, variety: EddVariety, formulation: Formulation) -> Result<(EddSummary, Outcome)> {
    if variety == EddVariety::PointMultiview && formulation == Formulation::Standard {
        bail!("the point multiview variety has a single formulation; drop --formulation standard");
    }
    prepare(&cfg.out_dir)?;
    let trials = pool(cfg)?.install(|| {
        (0..cfg.iterations as u64)
            .into_par_iter()
            .map(|k| edd_trial(variety, formulation, cfg.m, derive_seed(cfg.seed, k), &cfg.pipeline.tracker))
            .collect::<anchored_core::Result<Vec<_>>>()
    })?;
    let summary = summarize(variety, formulation, cfg.m, trials);
    let mut w = csv::Writer::from_path(cfg.out_dir.join("edd.csv"))?;
    w.write_record([
        "trial",
        "seed",
        "count",
        "paths",
        "near_singular",
        "at_infinity",
        "spurious",
        "path_failures",
        "duplicates",
        "loops",
    ])?;
    for (k, t) in summary.trials.iter().enumerate() {
        w.write_record(
            [
                k as u64,
                t.seed,
                t.count as u64,
                t.paths as u64,
                t.near_singular as u64,
                t.at_infinity as u64,
                t.spurious as u64,
                t.path_failures as u64,
                t.duplicates as u64,
                t.loops as u64,
            ]
            .map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    let failures = summary
        .trials
        .iter()
        .filter(|t| t.count != summary.modal || t.path_failures > 0)
        .count();
    println!(
        "{} ({:?}), m = {}: modal count {} (agreement {:.2}), closed form {}",
        variety_name(variety),
        formulation,
        cfg.m,
        summary.modal,
        summary.agreement,
        summary.expected
    );
    Ok((summary, Outcome { failures }))
}

/// Slices the anchored variety of a random arrangement and anchor with
/// `pattern`, `cfg.iterations` times, and writes `multidegree.csv`.
pub fn multidegree(cfg: &RunConfig, anchor_kind: AnchorKind, pattern: Option<Vec<usize>>) -> Result<(MultidegreeStats, Outcome)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let arrangement = random::arrangement(cfg.m, &mut rng)?;
    let anchor = match anchor_kind {
        AnchorKind::Line => Anchor::Line(random::line(&mut rng)),
        AnchorKind::Point => Anchor::Point(random::point(&mut rng)),
    };
    let pattern = pattern.unwrap_or_else(|| {
        let mut p = vec![0; cfg.m];
        p[0] = anchor.dimension();
        p
    });
    let stats = multidegree_check(&arrangement, &anchor, &pattern, cfg.iterations, &cfg.pipeline.tracker, &mut rng)?;
    prepare(&cfg.out_dir)?;
    let mut w = csv::Writer::from_path(cfg.out_dir.join("multidegree.csv"))?;
    w.write_record(["slice", "count"])?;
    for (k, c) in stats.counts.iter().enumerate() {
        w.write_record([k.to_string(), c.to_string()])?;
    }
    w.flush()?;
    let failures = stats.counts.iter().filter(|&&c| c != stats.modal).count();
    let shown: Vec<String> = pattern.iter().map(|d| d.to_string()).collect();
    println!(
        "{} anchor, m = {}, pattern ({}): modal count {} (agreement {:.2} over {} slices)",
        match anchor_kind {
            AnchorKind::Line => "line",
            AnchorKind::Point => "point",
        },
        cfg.m,
        shown.join(","),
        stats.modal,
        stats.agreement,
        stats.counts.len()
    );
    Ok((stats, Outcome { failures }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AnchorKind {
    /// Points on a fixed line.
    Line,
    /// Lines through a fixed point.
    Point,
}
