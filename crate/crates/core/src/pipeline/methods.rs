//! The triangulation approaches for points on a line.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Vector2, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::linefit::{LineChart, LineTrackFit};
use super::scene::{NoisyObservation, Scene};
use super::stats::error_metric;
use crate::constraints::{LineTrack, PointTrack};
use crate::error::{Error, Result};
use crate::linalg::right_singular;
use crate::projective::{
    back_project_line, line_from_two_planes, line_from_two_points, CameraArrangement, HomPoint3, SpatialLine,
};
use crate::reduction::{lift_line_homogeneous, reduce_anchored_line, reduce_anchored_point, ReducedLineProblem};
use crate::solver::{
    anchored_line_fit, anchored_line_fit_std, anchored_point_fit, anchored_point_fit_std, gauss_newton_refine,
    point_mv_fit, solve_system, CriticalSystem, Formulation, RationalFit, RefineConfig, SystemKind, TrackerConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Each point triangulated on its own.
    L10,
    /// Line from the image lines of the first two views.
    L11,
    L11Std,
    /// Line through the first two triangulated points.
    L12,
    /// Line fitted through the first triangulated point.
    L13,
    L13Std,
    /// Line fitted to the whole line track.
    L14,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::L10,
        Method::L11,
        Method::L11Std,
        Method::L12,
        Method::L13,
        Method::L13Std,
        Method::L14,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::L10 => "L1.0",
            Method::L11 => "L1.1",
            Method::L11Std => "L1.1-std",
            Method::L12 => "L1.2",
            Method::L13 => "L1.3",
            Method::L13Std => "L1.3-std",
            Method::L14 => "L1.4",
        }
    }

    /// Position in [`Method::ALL`].
    pub fn index(self) -> usize {
        Method::ALL.iter().position(|&m| m == self).expect("listed")
    }

    pub fn formulation(self) -> Formulation {
        match self {
            Method::L11Std | Method::L13Std => Formulation::Standard,
            _ => Formulation::Reduced,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// How single points are triangulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointSolver {
    /// Gauss-Newton from linear starts.
    #[default]
    LocalRefine,
    /// All critical points by homotopy continuation.
    Homotopy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub tracker: TrackerConfig,
    pub refine: RefineConfig,
    /// Multistart count of the line-track fit.
    pub line_starts: usize,
    pub point_solver: PointSolver,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tracker: TrackerConfig::default(),
            refine: RefineConfig::default(),
            line_starts: 16,
            point_solver: PointSolver::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub points: Vec<HomPoint3>,
    pub line: Option<SpatialLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub points: Vec<Vector3<f64>>,
    pub line: Option<SpatialLine>,
    pub error_e: f64,
    pub time_seconds: f64,
    /// Squared reprojection error of each point over all views.
    pub residuals: Vec<f64>,
    pub residual: f64,
    pub max_line_distance: f64,
    pub incidence_ok: bool,
}

/// Linear triangulation from the views in `views`.
fn dlt(arrangement: &CameraArrangement, track: &PointTrack, views: &[usize]) -> Option<Vec<f64>> {
    let mut a = DMatrix::zeros(2 * views.len(), 4);
    for (k, &j) in views.iter().enumerate() {
        let c = arrangement[j].matrix();
        let q = track.views()[j];
        let r0 = c.row(2) * q[0] - c.row(0);
        let r1 = c.row(2) * q[1] - c.row(1);
        let n0 = r0.norm().max(1e-300);
        let n1 = r1.norm().max(1e-300);
        a.row_mut(2 * k).copy_from(&(r0 / n0));
        a.row_mut(2 * k + 1).copy_from(&(r1 / n1));
    }
    let (_, v) = right_singular(&a);
    let x = v.column(3);
    (x[3].abs() > 1e-14 * x.norm()).then(|| vec![x[0] / x[3], x[1] / x[3], x[2] / x[3]])
}

/// The affine point of least reprojection error for one track.
pub fn triangulate_point<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    track: &PointTrack,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<Vector3<f64>> {
    let fit = point_mv_fit(arrangement, track)?;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match cfg.point_solver {
        PointSolver::LocalRefine => {
            let m = arrangement.len();
            let all: Vec<usize> = (0..m).collect();
            starts.extend(dlt(arrangement, track, &all));
            if m > 2 {
                for i in 0..m {
                    for j in i + 1..m {
                        starts.extend(dlt(arrangement, track, &[i, j]));
                    }
                }
            }
        }
        PointSolver::Homotopy => {
            let system = CriticalSystem::from_fit(fit.clone(), SystemKind::PointMultiview);
            let set = solve_system(&system, &cfg.tracker, rng)?;
            starts.extend(set.real_minimizer().map(|(x, _)| x));
        }
    }
    best_polish(&fit, starts, &cfg.refine)
        .map(|(x, _)| Vector3::new(x[0], x[1], x[2]))
        .ok_or(Error::NoRealSolution)
}

/// Polishes every start and keeps the one of least cost.
fn best_polish(fit: &RationalFit, starts: Vec<Vec<f64>>, cfg: &RefineConfig) -> Option<(Vec<f64>, f64)> {
    starts
        .into_iter()
        .map(|x| {
            let r = gauss_newton_refine(fit, x, cfg);
            (r.point, r.cost)
        })
        .filter(|(x, c)| c.is_finite() && x.iter().all(|v| v.is_finite()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Real critical points of `fit` from the polynomial solver.
fn real_critical<R: Rng + ?Sized>(
    fit: &RationalFit,
    kind: SystemKind,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let system = CriticalSystem::from_fit(fit.clone(), kind);
    let set = solve_system(&system, cfg, rng)?;
    Ok(set.real_points().map(|s| s.real_part()).collect())
}

/// Anchored fit of one point track to `line`, in either formulation. The
/// line is parametrized `[l0 l1](t, 1)` for `|t| <= 1` and by `[l1 l0](s, 1)`
/// otherwise.
pub fn anchored_fit<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    track: &PointTrack,
    formulation: Formulation,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<HomPoint3> {
    let reversed = line.reversed();
    let (fit, swapped, kind) = match formulation {
        Formulation::Reduced => {
            let problem = reduce_anchored_point(arrangement, line, track)?;
            let mut flipped = problem.clone();
            for c in &mut flipped.reduced_cameras {
                c.swap_columns(0, 1);
            }
            (
                anchored_point_fit(&problem)?,
                anchored_point_fit(&flipped)?,
                SystemKind::AnchoredPoint,
            )
        }
        Formulation::Standard => (
            anchored_point_fit_std(arrangement, line, track)?,
            anchored_point_fit_std(arrangement, &reversed, track)?,
            SystemKind::AnchoredPointStd,
        ),
    };
    // each chart misses the roots near the other's point at infinity
    let mut candidates: Vec<(bool, f64)> = real_critical(&fit, kind, &cfg.tracker, rng)?
        .into_iter()
        .map(|t| (false, t[0]))
        .collect();
    candidates.extend(
        real_critical(&swapped, kind, &cfg.tracker, rng)?
            .into_iter()
            .map(|s| (true, s[0])),
    );
    let chart = |flip: bool| if flip { &swapped } else { &fit };
    let (flip, t) = candidates
        .into_iter()
        .map(|(flip, t)| {
            // a parameter past 1 moves to the other chart
            if t.abs() > 1.0 {
                (!flip, 1.0 / t)
            } else {
                (flip, t)
            }
        })
        .map(|c| (c, chart(c.0).objective_real(&[c.1])))
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NoRealSolution)?
        .0;
    let (t, _) = best_polish(chart(flip), vec![vec![t]], &cfg.refine).ok_or(Error::NoRealSolution)?;
    let y = if flip { Vector2::new(1.0, t[0]) } else { Vector2::new(t[0], 1.0) };
    HomPoint3::new(line.span() * y)
}

fn anchored_fit_all<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    tracks: &[PointTrack],
    formulation: Formulation,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<Vec<HomPoint3>> {
    tracks
        .iter()
        .map(|t| anchored_fit(arrangement, line, t, formulation, cfg, rng))
        .collect()
}

/// The line of the two back-projected planes of views 1 and 2.
pub fn two_view_line(arrangement: &CameraArrangement, lines: &LineTrack) -> Result<SpatialLine> {
    line_from_two_planes(
        &back_project_line(&arrangement[0], &lines.views()[0]),
        &back_project_line(&arrangement[1], &lines.views()[1]),
    )
}

/// The chart of `problem` with coordinate `k` of `Y` moved last.
fn line_chart(problem: &ReducedLineProblem, k: usize) -> ReducedLineProblem {
    let mut p = problem.clone();
    if k != 2 {
        p.patch_map.swap_columns(k, 2);
        for m in &mut p.image_maps {
            m.swap_columns(k, 2);
        }
        for c in &mut p.reduced_cameras {
            c.swap_columns(k, 2);
        }
    }
    p
}

/// `Y` up to scale making the first two reduced residuals vanish.
fn two_view_direction(problem: &ReducedLineProblem) -> Vector3<f64> {
    let row = |i: usize| {
        let (c, d) = (problem.reduced_cameras[i], problem.reduced_data[i]);
        (c.row(0) * d[1] - c.row(1) * d[0]).transpose()
    };
    row(0).cross(&row(1))
}

fn line_fit(problem: &ReducedLineProblem, lines: &LineTrack, formulation: Formulation) -> Result<RationalFit> {
    match formulation {
        Formulation::Reduced => anchored_line_fit(problem),
        Formulation::Standard => anchored_line_fit_std(problem, lines),
    }
}

/// The line through `anchor` best fitting the line track.
pub fn fit_line_through<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    anchor: &HomPoint3,
    lines: &LineTrack,
    formulation: Formulation,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<SpatialLine> {
    let problem = reduce_anchored_line(arrangement, anchor, lines)?;
    let exact = two_view_direction(&problem);
    if formulation == Formulation::Reduced && problem.len() == 2 {
        return lift_line_homogeneous(&problem, &exact);
    }
    let kind = match formulation {
        Formulation::Reduced => SystemKind::AnchoredLine,
        Formulation::Standard => SystemKind::AnchoredLineStd,
    };
    let fit = line_fit(&problem, lines, formulation)?;
    let mut candidates: Vec<Vector3<f64>> = real_critical(&fit, kind, &cfg.tracker, rng)?
        .into_iter()
        .map(|y| Vector3::new(y[0], y[1], 1.0))
        .collect();
    candidates.push(exact);
    let mut best: Option<(Vector3<f64>, f64)> = None;
    for y in candidates {
        if !y.iter().all(|v| v.is_finite()) || y.norm() == 0.0 {
            continue;
        }
        let k = y.iamax();
        let chart = line_chart(&problem, k);
        let mut z = y;
        z.swap_rows(k, 2);
        let chart_fit = line_fit(&chart, lines, formulation)?;
        let Some((w, v)) = best_polish(&chart_fit, vec![vec![z[0] / z[2], z[1] / z[2]]], &cfg.refine) else {
            continue;
        };
        // back to the coordinates of `problem`
        let mut y = Vector3::new(w[0], w[1], 1.0);
        y.swap_rows(k, 2);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((y, v));
        }
    }
    let (y, _) = best.ok_or(Error::NoRealSolution)?;
    lift_line_homogeneous(&problem, &y)
}

/// The line of least reprojection error for the line track, by multistart
/// Gauss-Newton from the pairwise back-projected lines.
pub fn fit_line_track<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    lines: &LineTrack,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<SpatialLine> {
    let m = arrangement.len();
    let mut starts = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let pi = back_project_line(&arrangement[i], &lines.views()[i]);
            let pj = back_project_line(&arrangement[j], &lines.views()[j]);
            if let Ok(l) = line_from_two_planes(&pi, &pj) {
                if let Ok(c) = LineChart::at(&l) {
                    starts.push((c, [0.0; 4]));
                }
            }
        }
    }
    let Some(first) = starts.first().cloned() else {
        return Err(Error::CoincidentPlanes);
    };
    while starts.len() < cfg.line_starts {
        let q: [f64; 4] = core::array::from_fn(|_| 0.1 * rng.sample::<f64, _>(StandardNormal));
        starts.push((first.0.clone(), q));
    }
    let base = LineTrackFit::new(arrangement, lines, first.0.clone())?;
    let mut best: Option<(SpatialLine, f64)> = None;
    for (chart, q) in starts {
        let fit = base.with_chart(chart);
        let r = gauss_newton_refine(&fit, q.to_vec(), &cfg.refine);
        if !r.cost.is_finite() {
            continue;
        }
        // recentering keeps the chart well conditioned near the optimum
        let Ok(line) = fit.chart.line(&r.point) else {
            continue;
        };
        let Ok(chart) = LineChart::at(&line) else {
            continue;
        };
        let fit = base.with_chart(chart);
        let r = gauss_newton_refine(&fit, vec![0.0; 4], &cfg.refine);
        let Ok(line) = fit.chart.line(&r.point) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| r.cost < b.1) {
            best = Some((line, r.cost));
        }
    }
    best.map(|b| b.0).ok_or(Error::NoRealSolution)
}

/// The best-fit line of affine points: their centroid and principal axis.
pub fn principal_line(points: &[Vector3<f64>]) -> Option<SpatialLine> {
    if points.len() < 2 {
        return None;
    }
    let mean = points.iter().sum::<Vector3<f64>>() / points.len() as f64;
    let scatter: Matrix3<f64> = points.iter().map(|x| (x - mean) * (x - mean).transpose()).sum();
    let eig = scatter.symmetric_eigen();
    let d = eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned();
    SpatialLine::from_span(&mean.push(1.0), &d.push(0.0)).ok()
}

/// Runs one method on noisy data.
pub fn run_method<R: Rng + ?Sized>(
    method: Method,
    arrangement: &CameraArrangement,
    obs: &NoisyObservation,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<Reconstruction> {
    let form = method.formulation();
    let line = match method {
        Method::L10 => {
            let points = obs
                .tracks
                .iter()
                .map(|t| triangulate_point(arrangement, t, cfg, rng).map(|x| HomPoint3::from_affine(&x)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Reconstruction { points, line: None });
        }
        Method::L11 | Method::L11Std => two_view_line(arrangement, &obs.lines)?,
        Method::L12 => {
            if obs.tracks.len() < 3 {
                return Err(Error::InvalidArgument(format!(
                    "L1.2 needs at least 3 points, got {}",
                    obs.tracks.len()
                )));
            }
            let z1 = triangulate_point(arrangement, &obs.tracks[0], cfg, rng)?;
            let z2 = triangulate_point(arrangement, &obs.tracks[1], cfg, rng)?;
            line_from_two_points(&HomPoint3::from_affine(&z1), &HomPoint3::from_affine(&z2))?
        }
        Method::L13 | Method::L13Std => {
            let z = triangulate_point(arrangement, &obs.tracks[0], cfg, rng)?;
            fit_line_through(arrangement, &HomPoint3::from_affine(&z), &obs.lines, form, cfg, rng)?
        }
        Method::L14 => fit_line_track(arrangement, &obs.lines, cfg, rng)?,
    };
    let points = anchored_fit_all(arrangement, &line, &obs.tracks, form, cfg, rng)?;
    Ok(Reconstruction {
        points,
        line: Some(line),
    })
}

/// Squared reprojection error of an affine point over a track.
pub fn reprojection_error(arrangement: &CameraArrangement, track: &PointTrack, x: &Vector3<f64>) -> f64 {
    let xh = x.push(1.0);
    arrangement
        .iter()
        .zip(track.views())
        .map(|(c, q)| {
            let y = c.matrix() * xh;
            (Vector2::new(y[0] / y[2], y[1] / y[2]) - q).norm_squared()
        })
        .sum()
}

/// Scores a reconstruction against the scene it came from. Without a
/// reconstructed line, incidence is measured against the principal line of
/// the points.
pub fn evaluate(
    method: Method,
    scene: &Scene,
    obs: &NoisyObservation,
    rec: Reconstruction,
    time_seconds: f64,
) -> Result<MethodResult> {
    let points = rec
        .points
        .iter()
        .map(|x| x.to_affine().ok_or(Error::PatchInfinity))
        .collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = obs
        .tracks
        .iter()
        .zip(&points)
        .map(|(t, x)| reprojection_error(&scene.arrangement, t, x))
        .collect();
    let reference = rec.line.clone().or_else(|| principal_line(&points));
    let max_line_distance = match &reference {
        Some(l) => points
            .iter()
            .map(|y| l.affine_distance(y).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(MethodResult {
        method,
        error_e: error_metric(&points, &scene.affine_points(), obs.epsilon),
        time_seconds,
        residual: residuals.iter().sum(),
        residuals,
        incidence_ok: max_line_distance <= 1e-9 * scene.scale(),
        max_line_distance,
        points,
        line: rec.line,
    })
}

/// `run_method` followed by `evaluate`, timed on the wall clock.
#[cfg(feature = "std")]
pub fn run_timed<R: Rng + ?Sized>(
    method: Method,
    scene: &Scene,
    obs: &NoisyObservation,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<MethodResult> {
    let start = std::time::Instant::now();
    let rec = run_method(method, &scene.arrangement, obs, cfg, rng)?;
    let elapsed = start.elapsed().as_secs_f64();
    evaluate(method, scene, obs, rec, elapsed)
}

/// One benchmark iteration: its scene seed and every method's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub index: u64,
    pub scene_seed: u64,
    pub results: Vec<(Method, Result<MethodResult>)>,
}

/// Iteration `index` of a run seeded by `master`. The scene, the noise and
/// each method's solver draw from independent derived streams, so results
/// do not depend on which other methods run.
#[cfg(feature = "std")]
pub fn run_iteration(
    m: usize,
    p: usize,
    epsilon: f64,
    methods: &[Method],
    master: u64,
    index: u64,
    cfg: &PipelineConfig,
) -> Result<Iteration> {
    use crate::random::derive_seed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let scene_seed = derive_seed(master, index);
    let scene = super::scene::generate_scene(m, p, scene_seed)?;
    let mut noise = ChaCha8Rng::seed_from_u64(derive_seed(scene_seed, 1));
    let obs = super::scene::observe(&scene, epsilon, &mut noise)?;
    let results = methods
        .iter()
        .map(|&method| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene_seed, 2 + method.index() as u64));
            (method, run_timed(method, &scene, &obs, cfg, &mut rng))
        })
        .collect();
    Ok(Iteration {
        index,
        scene_seed,
        results,
    })
}
