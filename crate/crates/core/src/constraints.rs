//! Membership tests for the point, line and anchored multiview varieties, and
//! Monte-Carlo multidegree checks for the anchored ones.
//!
//! Every residual is formed from unit-normalized factors so that its size is
//! meaningful independently of the homogeneous scale of the inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector2, Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::projective::{
    back_project_line, cross_matrix, fundamental_matrix, project_line, CameraArrangement,
    HomPoint2, HomPoint3, ImageLine, SpatialLine,
};
use crate::solver::{self, CriticalSystem, Polynomial, SolutionKind, TrackerConfig};

/// Default membership tolerance for [`ResidualReport::pass`].
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Affine image measurements of one 3D point across all views.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrack {
    views: Vec<Vector2<f64>>,
}

impl PointTrack {
    pub fn new(views: Vec<Vector2<f64>>) -> Self {
        Self { views }
    }

    pub fn views(&self) -> &[Vector2<f64>] {
        &self.views
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// The view points lifted to the image patch `(x, y, 1)`.
    pub fn homogeneous(&self) -> impl Iterator<Item = HomPoint2> + '_ {
        self.views.iter().map(HomPoint2::from_affine)
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self::new(order.iter().map(|&i| self.views[i]).collect())
    }
}

/// Image lines of one 3D line across all views.
#[derive(Debug, Clone, PartialEq)]
pub struct LineTrack {
    views: Vec<ImageLine>,
}

impl LineTrack {
    /// Rejects tracks containing the line at infinity.
    pub fn new(views: Vec<ImageLine>) -> Result<Self> {
        if views.iter().any(ImageLine::is_at_infinity) {
            return Err(Error::LineAtInfinity);
        }
        Ok(Self { views })
    }

    pub fn views(&self) -> &[ImageLine] {
        &self.views
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            views: order.iter().map(|&i| self.views[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

/// Named constraint residuals with a pass verdict at a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub residuals: Vec<Residual>,
    pub max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn new(residuals: Vec<Residual>) -> Self {
        let max = residuals.iter().map(|r| r.value).fold(0.0, f64::max);
        let mut report = Self {
            residuals,
            max,
            tolerance: MEMBERSHIP_TOL,
            pass: false,
        };
        report.pass = report.max <= report.tolerance;
        report
    }

    /// The same residuals judged at another tolerance.
    pub fn at_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.max <= tolerance;
        self
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

fn check_arity(arrangement: &CameraArrangement, got: usize) -> Result<()> {
    if arrangement.len() != got {
        return Err(Error::ArityMismatch {
            expected: arrangement.len(),
            got,
        });
    }
    Ok(())
}

fn epipolar_residuals(arrangement: &CameraArrangement, track: &PointTrack) -> Result<Vec<Residual>> {
    let points: Vec<HomPoint2> = track.homogeneous().collect();
    let mut out = Vec::with_capacity(arrangement.len() - 1);
    for j in 1..arrangement.len() {
        let f = fundamental_matrix(&arrangement[0], &arrangement[j])?;
        let value = (points[0].coords().transpose() * f * points[j].coords())[0].abs();
        out.push(Residual {
            name: format!("epipolar(1,{})", j + 1),
            value,
        });
    }
    Ok(out)
}

/// Epipolar residuals `x_1^T F^{1j} x_j`, `j = 2..m`.
pub fn point_mv_residuals(
    arrangement: &CameraArrangement,
    track: &PointTrack,
) -> Result<ResidualReport> {
    check_arity(arrangement, track.len())?;
    Ok(ResidualReport::new(epipolar_residuals(arrangement, track)?))
}

/// Epipolar residuals plus the on-image-line residuals `x_i^T (C_i . L)`.
pub fn anchored_point_residuals(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    track: &PointTrack,
) -> Result<ResidualReport> {
    check_arity(arrangement, track.len())?;
    let mut residuals = epipolar_residuals(arrangement, track)?;
    for (i, (camera, x)) in arrangement.iter().zip(track.homogeneous()).enumerate() {
        let l = project_line(camera, line)?;
        residuals.push(Residual {
            name: format!("incidence({})", i + 1),
            value: l.coords().dot(x.coords()).abs(),
        });
    }
    Ok(ResidualReport::new(residuals))
}

fn unit_planes(arrangement: &CameraArrangement, lines: &LineTrack) -> Vec<Vector4<f64>> {
    arrangement
        .iter()
        .zip(lines.views())
        .map(|(c, l)| *back_project_line(c, l).coords())
        .collect()
}

/// Determinantal residuals `det[X, C_1^T l_1, C_a^T l_a, C_i^T l_i]` for the
/// triples `(1,2,i)` and `(1,3,i)`, `i = 3..m`, plus the incidences
/// `l_i^T C_i X`.
pub fn anchored_line_residuals(
    arrangement: &CameraArrangement,
    anchor: &HomPoint3,
    lines: &LineTrack,
) -> Result<ResidualReport> {
    check_arity(arrangement, lines.len())?;
    let planes = unit_planes(arrangement, lines);
    let x = anchor.coords();
    let mut residuals = Vec::new();
    for i in 2..planes.len() {
        for a in [1, 2] {
            let m = Matrix4::from_columns(&[*x, planes[0], planes[a], planes[i]]);
            residuals.push(Residual {
                name: format!("det(1,{},{})", a + 1, i + 1),
                value: m.determinant().abs(),
            });
        }
    }
    for (i, (camera, l)) in arrangement.iter().zip(lines.views()).enumerate() {
        let image = (camera.matrix() * x).normalize();
        residuals.push(Residual {
            name: format!("incidence({})", i + 1),
            value: l.coords().dot(&image).abs(),
        });
    }
    Ok(ResidualReport::new(residuals))
}

/// Rank residuals for membership in the line multiview variety: the smallest
/// singular value of `[C_1^T l_1, C_2^T l_2, C_i^T l_i]`, `i = 3..m`.
/// Two views impose no constraint.
pub fn line_mv_residuals(
    arrangement: &CameraArrangement,
    lines: &LineTrack,
) -> Result<ResidualReport> {
    check_arity(arrangement, lines.len())?;
    let planes = unit_planes(arrangement, lines);
    let mut residuals = Vec::new();
    for i in 2..planes.len() {
        let m = DMatrix::from_columns(&[
            nalgebra::DVector::from_column_slice(planes[0].as_slice()),
            nalgebra::DVector::from_column_slice(planes[1].as_slice()),
            nalgebra::DVector::from_column_slice(planes[i].as_slice()),
        ]);
        let sv = m.singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
        residuals.push(Residual {
            name: format!("rank(1,2,{})", i + 1),
            value: smallest,
        });
    }
    Ok(ResidualReport::new(residuals))
}

/// The fixed incidence object of an anchored variety.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    /// Points on this line: the anchored point multiview variety.
    Line(SpatialLine),
    /// Lines through this point: the anchored line multiview variety.
    Point(HomPoint3),
}

impl Anchor {
    pub fn dimension(&self) -> usize {
        match self {
            Anchor::Line(_) => 1,
            Anchor::Point(_) => 2,
        }
    }
}

/// Intersection counts of an anchored variety with random linear slices.
#[derive(Debug, Clone, PartialEq)]
pub struct MultidegreeStats {
    pub pattern: Vec<usize>,
    pub counts: Vec<usize>,
    pub modal: usize,
    pub agreement: f64,
}

/// Most frequent value (larger value on ties) and its relative frequency.
pub fn modal_count(counts: &[usize]) -> (usize, f64) {
    let mut best = (0, 0);
    for &c in counts {
        let freq = counts.iter().filter(|&&d| d == c).count();
        if freq > best.1 || (freq == best.1 && c > best.0) {
            best = (c, freq);
        }
    }
    let agreement = if counts.is_empty() {
        0.0
    } else {
        best.1 as f64 / counts.len() as f64
    };
    (best.0, agreement)
}

const VALIDITY_TOL: f64 = 1e-8;

/// Slices image factor `i` with `pattern[i]` random hyperplanes and counts the
/// points of the anchored variety in the slice, over `trials` independent
/// slices. The pattern must sum to the variety's dimension.
pub fn multidegree_check<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    anchor: &Anchor,
    pattern: &[usize],
    trials: usize,
    tracker: &TrackerConfig,
    rng: &mut R,
) -> Result<MultidegreeStats> {
    if pattern.len() != arrangement.len() {
        return Err(Error::BadSlicePattern(format!(
            "pattern has {} entries for {} views",
            pattern.len(),
            arrangement.len()
        )));
    }
    let total: usize = pattern.iter().sum();
    if total != anchor.dimension() || pattern.iter().any(|&d| d > 2) {
        return Err(Error::BadSlicePattern(format!(
            "pattern {:?} must have entries at most 2 summing to {}",
            pattern,
            anchor.dimension()
        )));
    }
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let count = match anchor {
            Anchor::Line(line) => slice_anchored_point(arrangement, line, pattern, rng)?,
            Anchor::Point(x) => slice_anchored_line(arrangement, x, pattern, tracker, rng)?,
        };
        counts.push(count);
    }
    let (modal, agreement) = modal_count(&counts);
    Ok(MultidegreeStats {
        pattern: pattern.to_vec(),
        counts,
        modal,
        agreement,
    })
}

fn random_vector3<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.sample(StandardNormal))
}

/// Points `l0 + z l1` of the line whose image in view `i` meets the slice.
fn slice_anchored_point<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    pattern: &[usize],
    rng: &mut R,
) -> Result<usize> {
    let (l0, l1) = (line.span().column(0), line.span().column(1));
    let mut constant = Complex64::new(0.0, 0.0);
    let mut slope = Complex64::new(0.0, 0.0);
    for (camera, &d) in arrangement.iter().zip(pattern) {
        for _ in 0..d {
            let h = random_vector3(rng);
            constant += h.dot(&(camera.matrix() * l0));
            slope += h.dot(&(camera.matrix() * l1));
        }
    }
    let roots = match solver::solve_univariate(&[constant, slope]) {
        Ok(r) => r,
        Err(Error::ZeroPolynomial) => return Ok(0),
        Err(e) => return Err(e),
    };
    Ok(roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.norm()) && z.norm() < 1e8)
        .filter(|z| {
            let x = l0 + l1 * z.re;
            arrangement
                .iter()
                .all(|c| (c.matrix() * x).norm() > VALIDITY_TOL * c.matrix().norm() * x.norm())
        })
        .count())
}

/// Lines through `x`, parameterized by `Y` in a plane complementary to `x`,
/// whose image in view `i` meets the slice.
fn slice_anchored_line<R: Rng + ?Sized>(
    arrangement: &CameraArrangement,
    x: &HomPoint3,
    pattern: &[usize],
    tracker: &TrackerConfig,
    rng: &mut R,
) -> Result<usize> {
    let complement = crate::reduction::complement_basis(x);
    let maps: Vec<Matrix3<f64>> = arrangement
        .iter()
        .map(|c| cross_matrix(&(c.matrix() * x.coords())) * c.matrix() * complement)
        .collect();
    // random affine chart Y = B (y0, y1, 1) of the parameter plane
    let chart = Matrix3::from_fn(|_, _| rng.sample(StandardNormal));
    let mut equations = Vec::new();
    for (map, &d) in maps.iter().zip(pattern) {
        for _ in 0..d {
            let form = (random_vector3(rng).transpose() * map * chart).transpose();
            let coeffs = [form[0], form[1]].map(|c| Complex64::new(c, 0.0));
            equations.push(Polynomial::affine(&coeffs, Complex64::new(form[2], 0.0)));
        }
    }
    let system = CriticalSystem::from_equations(equations);
    let solutions = solver::track_paths(&system, tracker, rng);
    Ok(solutions
        .solutions
        .iter()
        .filter(|s| s.kind == SolutionKind::FiniteNonsingular)
        .filter(|s| s.x.iter().all(|c| c.im.abs() <= 1e-8 * (1.0 + c.norm())))
        .filter(|s| {
            let y = chart * Vector3::new(s.x[0].re, s.x[1].re, 1.0);
            maps.iter()
                .all(|m| (m * y).norm() > VALIDITY_TOL * m.norm() * y.norm())
        })
        .count())
}
