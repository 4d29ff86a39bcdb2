use alloc::format;
use alloc::vec::Vec;

use nalgebra::{SVector, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constraints::{LineTrack, PointTrack};
use crate::error::{Error, Result};
use crate::projective::{project_line, project_point, CameraArrangement, HomPoint3, ImageLine, SpatialLine};
use crate::random;

const MAX_RETRIES: usize = 64;

/// Smallest relative third coordinate accepted for an exact projection.
const PATCH_TOL: f64 = 1e-6;

/// Cameras, a line and `p` points on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub arrangement: CameraArrangement,
    pub line: SpatialLine,
    pub points: Vec<HomPoint3>,
    pub seed: u64,
}

impl Scene {
    pub fn m(&self) -> usize {
        self.arrangement.len()
    }

    pub fn p(&self) -> usize {
        self.points.len()
    }

    pub fn affine_points(&self) -> Vec<Vector3<f64>> {
        self.points
            .iter()
            .map(|x| x.to_affine().expect("scene points are finite"))
            .collect()
    }

    /// Largest norm of an affine scene point, but at least one.
    pub fn scale(&self) -> f64 {
        self.affine_points().iter().map(|x| x.norm()).fold(1.0, f64::max)
    }
}

fn usable(arrangement: &CameraArrangement, line: &SpatialLine, points: &[HomPoint3]) -> bool {
    arrangement.iter().all(|c| {
        if line.point_residual(c.center()) <= 1e-6 {
            return false;
        }
        let seen = points.iter().all(|x| match project_point(c, x) {
            Ok(q) => q.coords()[2].abs() > PATCH_TOL,
            Err(_) => false,
        });
        seen && matches!(project_line(c, line), Ok(l) if l.patch_coords().is_some() && !l.is_at_infinity())
    })
}

/// A random scene: standard-normal cameras, the line through two
/// standard-normal points `A`, `B`, and points `A + s (B - A)` with `s`
/// uniform on `[-0.5, 1.5]`, the segment extended to twice its length.
pub fn generate_scene(m: usize, p: usize, seed: u64) -> Result<Scene> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 cameras, got {m}")));
    }
    if p < 1 {
        return Err(Error::InvalidArgument(format!("need at least 1 point, got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let arrangement = random::arrangement(m, &mut rng)?;
        let a = random::affine_point(&mut rng);
        let b = random::affine_point(&mut rng);
        let Ok(line) = SpatialLine::from_span(&a.push(1.0), &b.push(1.0)) else {
            continue;
        };
        let points: Vec<HomPoint3> = (0..p)
            .map(|_| HomPoint3::from_affine(&(a + (b - a) * rng.random_range(-0.5..1.5))))
            .collect();
        if usable(&arrangement, &line, &points) {
            return Ok(Scene {
                arrangement,
                line,
                points,
                seed,
            });
        }
    }
    Err(Error::DegenerateScene(MAX_RETRIES))
}

/// Noisy image data of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyObservation {
    /// One track per scene point.
    pub tracks: Vec<PointTrack>,
    pub lines: LineTrack,
    pub epsilon: f64,
}

fn direction<const N: usize, R: Rng + ?Sized>(rng: &mut R) -> SVector<f64, N> {
    loop {
        let v = SVector::<f64, N>::from_fn(|_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Exact affine projections, each moved by a uniformly random vector of
/// length `epsilon`. Image lines are perturbed as unit coefficient vectors
/// and renormalized.
pub fn observe<R: Rng + ?Sized>(scene: &Scene, epsilon: f64, rng: &mut R) -> Result<NoisyObservation> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!("noise level must be finite and nonnegative, got {epsilon}")));
    }
    let tracks = scene
        .points
        .iter()
        .map(|x| {
            let views = scene
                .arrangement
                .iter()
                .map(|c| {
                    let q: Vector2<f64> = project_point(c, x)?.to_affine().ok_or(Error::PatchInfinity)?;
                    Ok(q + direction::<2, _>(rng) * epsilon)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PointTrack::new(views))
        })
        .collect::<Result<Vec<_>>>()?;
    let lines = scene
        .arrangement
        .iter()
        .map(|c| {
            let l = project_line(c, &scene.line)?;
            ImageLine::new(l.coords() + direction::<3, _>(rng) * epsilon)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoisyObservation {
        tracks,
        lines: LineTrack::new(lines)?,
        epsilon,
    })
}
