//! Projective geometry kernel: homogeneous points, lines and planes, pinhole
//! cameras, projection and back-projection, joins, meets and fundamental
//! matrices.
//!
//! Every homogeneous quantity is stored in canonical form: unit Euclidean norm
//! with its first significant coordinate positive. Two values therefore
//! represent the same projective object exactly when their stored vectors
//! agree, up to round-off.

use alloc::vec::Vec;
use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Matrix4x2, Vector2, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::linalg::{self, canonicalize, projective_distance, RANK_TOL};

/// Relative size under which a projected vector counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A point of projective 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint3(Vector4<f64>);

/// A point of the projective image plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint2(Vector3<f64>);

/// An image line `l` with incidence `l^T x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageLine(Vector3<f64>);

/// A plane of projective 3-space with incidence `h^T X = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPlane(Vector4<f64>);

macro_rules! homogeneous {
    ($ty:ident, $vec:ident) => {
        impl $ty {
            /// Builds the canonical representative; fails on the zero vector.
            pub fn new(mut coords: $vec<f64>) -> Result<Self> {
                if canonicalize(coords.as_mut_slice()) {
                    Ok(Self(coords))
                } else {
                    Err(Error::ZeroVector)
                }
            }

            /// Canonical unit-norm coordinates.
            pub fn coords(&self) -> &$vec<f64> {
                &self.0
            }

            /// Distance between canonical representatives, modulo sign.
            pub fn distance(&self, other: &Self) -> f64 {
                projective_distance(self.0.as_slice(), other.0.as_slice())
            }

            /// Equality up to scale at tolerance `tol`.
            pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
                self.distance(other) <= tol
            }
        }
    };
}

homogeneous!(HomPoint3, Vector4);
homogeneous!(HomPoint2, Vector3);
homogeneous!(ImageLine, Vector3);
homogeneous!(SpatialPlane, Vector4);

impl HomPoint3 {
    /// The point `(x, y, z, 1)`.
    pub fn from_affine(p: &Vector3<f64>) -> Self {
        Self::new(p.push(1.0)).expect("affine points are nonzero")
    }

    /// Affine coordinates, or `None` for points at infinity.
    pub fn to_affine(&self) -> Option<Vector3<f64>> {
        let w = self.0[3];
        if w.abs() <= DEGENERACY_TOL {
            None
        } else {
            Some(self.0.xyz() / w)
        }
    }
}

impl HomPoint2 {
    /// The image point `(x, y, 1)`.
    pub fn from_affine(p: &Vector2<f64>) -> Self {
        Self::new(p.push(1.0)).expect("affine points are nonzero")
    }

    pub fn to_affine(&self) -> Option<Vector2<f64>> {
        let w = self.0[2];
        if w.abs() <= DEGENERACY_TOL {
            None
        } else {
            Some(self.0.xy() / w)
        }
    }
}

impl ImageLine {
    /// Line coordinates in the patch where the third coefficient is one.
    pub fn patch_coords(&self) -> Option<Vector2<f64>> {
        let c = self.0[2];
        if c.abs() <= DEGENERACY_TOL {
            None
        } else {
            Some(self.0.xy() / c)
        }
    }

    /// The line `(a, b, 1)` of the affine line patch.
    pub fn from_patch(ab: &Vector2<f64>) -> Self {
        Self::new(ab.push(1.0)).expect("patch lines are nonzero")
    }

    /// True for the line at infinity `(0:0:1)`.
    pub fn is_at_infinity(&self) -> bool {
        self.0.xy().norm() <= DEGENERACY_TOL
    }

    pub fn contains(&self, x: &HomPoint2, tol: f64) -> bool {
        self.0.dot(&x.0).abs() <= tol
    }
}

/// A line of projective 3-space.
///
/// Stored as an orthonormal basis of its two-dimensional span together with
/// its Plücker coordinates `(p01, p02, p03, p23, p31, p12)`, the 2x2 minors of
/// `[u v]`, normalized to unit length with the canonical sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialLine {
    span: Matrix4x2<f64>,
    plucker: [f64; 6],
}

impl SpatialLine {
    /// The line spanned by `u` and `v`; fails when they are dependent.
    pub fn from_span(u: &Vector4<f64>, v: &Vector4<f64>) -> Result<Self> {
        let m = DMatrix::from_columns(&[
            nalgebra::DVector::from_column_slice(u.as_slice()),
            nalgebra::DVector::from_column_slice(v.as_slice()),
        ]);
        let basis = linalg::column_space(&m, RANK_TOL);
        if basis.ncols() != 2 {
            return Err(Error::ProportionalPoints);
        }
        let span = Matrix4x2::from_iterator(basis.iter().copied());
        Ok(Self::from_orthonormal(span))
    }

    fn from_orthonormal(span: Matrix4x2<f64>) -> Self {
        let (u, v) = (span.column(0), span.column(1));
        let minor = |i: usize, j: usize| u[i] * v[j] - u[j] * v[i];
        let mut plucker = [
            minor(0, 1),
            minor(0, 2),
            minor(0, 3),
            minor(2, 3),
            minor(3, 1),
            minor(1, 2),
        ];
        canonicalize(&mut plucker);
        Self { span, plucker }
    }

    /// Orthonormal basis `[l0 l1]` of the span.
    pub fn span(&self) -> &Matrix4x2<f64> {
        &self.span
    }

    /// The same line with the two basis columns exchanged.
    pub fn reversed(&self) -> Self {
        let mut span = self.span;
        span.swap_columns(0, 1);
        Self::from_orthonormal(span)
    }

    pub fn plucker(&self) -> &[f64; 6] {
        &self.plucker
    }

    /// `p01 p23 + p02 p31 + p03 p12`, zero for every genuine line.
    pub fn plucker_quadric(&self) -> f64 {
        let p = &self.plucker;
        p[0] * p[3] + p[1] * p[4] + p[2] * p[5]
    }

    /// The point `l0 s + l1 t`.
    pub fn point_at(&self, s: f64, t: f64) -> Result<HomPoint3> {
        HomPoint3::new(self.span.column(0) * s + self.span.column(1) * t)
    }

    /// Distance from the unit representative of `x` to the span.
    pub fn point_residual(&self, x: &HomPoint3) -> f64 {
        let c = x.coords();
        (c - self.span * (self.span.transpose() * c)).norm()
    }

    pub fn contains(&self, x: &HomPoint3, tol: f64) -> bool {
        self.point_residual(x) <= tol
    }

    /// Equality of lines, compared through Plücker coordinates.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        projective_distance(&self.plucker, &other.plucker) <= tol
    }

    /// A finite point and unit direction of the affine part of the line, or
    /// `None` for a line at infinity.
    pub fn affine_chart(&self) -> Option<(Vector3<f64>, Vector3<f64>)> {
        let (b0, b1) = (self.span.column(0), self.span.column(1));
        let (w0, w1) = (b0[3], b1[3]);
        let ww = w0 * w0 + w1 * w1;
        if ww <= DEGENERACY_TOL * DEGENERACY_TOL {
            return None;
        }
        let point = (b0 * w0 + b1 * w1) / ww;
        let dir = (b0 * w1 - b1 * w0).xyz();
        Some((point.xyz(), dir.normalize()))
    }

    /// Euclidean distance from an affine point to the affine part of the line.
    pub fn affine_distance(&self, y: &Vector3<f64>) -> Option<f64> {
        let (p, d) = self.affine_chart()?;
        Some((y - p).cross(&d).norm())
    }
}

/// A pinhole camera: a rank-3 real 3x4 matrix together with its center.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    matrix: Matrix3x4<f64>,
    center: HomPoint3,
}

impl Camera {
    pub fn new(matrix: Matrix3x4<f64>) -> Result<Self> {
        let dm = DMatrix::from_iterator(3, 4, matrix.iter().copied());
        let kernel = linalg::nullspace(&dm, RANK_TOL);
        if kernel.ncols() != 1 || !matrix.iter().all(|x| x.is_finite()) {
            return Err(Error::RankDeficientCamera);
        }
        let center = HomPoint3::new(Vector4::from_iterator(kernel.iter().copied()))?;
        Ok(Self { matrix, center })
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.matrix
    }

    pub fn center(&self) -> &HomPoint3 {
        &self.center
    }
}

/// An ordered list of at least two cameras with pairwise distinct centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraArrangement {
    cameras: Vec<Camera>,
}

impl CameraArrangement {
    /// Minimum projective distance between two centers.
    pub const CENTER_TOL: f64 = 1e-9;

    pub fn new(cameras: Vec<Camera>) -> Result<Self> {
        if cameras.len() < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "an arrangement needs at least 2 cameras, got {}",
                cameras.len()
            )));
        }
        for (i, a) in cameras.iter().enumerate() {
            for b in &cameras[i + 1..] {
                if a.center().approx_eq(b.center(), Self::CENTER_TOL) {
                    return Err(Error::CoincidentCenters);
                }
            }
        }
        Ok(Self { cameras })
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Camera> {
        self.cameras.iter()
    }

    /// The arrangement with its cameras reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Self::new(order.iter().map(|&i| self.cameras[i].clone()).collect())
    }
}

impl core::ops::Index<usize> for CameraArrangement {
    type Output = Camera;
    fn index(&self, i: usize) -> &Camera {
        &self.cameras[i]
    }
}

/// `C X` up to scale.
pub fn project_point(camera: &Camera, x: &HomPoint3) -> Result<HomPoint2> {
    let image = camera.matrix * x.coords();
    if image.norm() < DEGENERACY_TOL * camera.matrix.norm() {
        return Err(Error::CenterProjection);
    }
    HomPoint2::new(image)
}

/// The image line `C u x C v` of the line spanned by `u`, `v`.
pub fn project_line(camera: &Camera, line: &SpatialLine) -> Result<ImageLine> {
    let cu = camera.matrix * line.span.column(0);
    let cv = camera.matrix * line.span.column(1);
    let l = cu.cross(&cv);
    let scale = camera.matrix.norm();
    if l.norm() < DEGENERACY_TOL * scale * scale {
        return Err(Error::LineThroughCenter);
    }
    ImageLine::new(l)
}

/// The viewing ray of an image point: every `X` with `C X` proportional to `x`.
pub fn back_project_point(camera: &Camera, x: &HomPoint2) -> Result<SpatialLine> {
    let constraints = cross_matrix(x.coords()) * camera.matrix;
    let dm = DMatrix::from_iterator(3, 4, constraints.iter().copied());
    let kernel = linalg::nullspace(&dm, RANK_TOL);
    if kernel.ncols() != 2 {
        return Err(Error::RankDeficiency("viewing ray"));
    }
    Ok(SpatialLine::from_orthonormal(Matrix4x2::from_iterator(
        kernel.iter().copied(),
    )))
}

/// The plane `C^T l` through the camera center.
pub fn back_project_line(camera: &Camera, line: &ImageLine) -> SpatialPlane {
    SpatialPlane::new(camera.matrix.transpose() * line.coords())
        .expect("a rank-3 camera maps nonzero lines to nonzero planes")
}

/// The fundamental matrix `F` with `(C_i X)^T F (C_j X) = 0` for every `X`.
///
/// Entry `(a, b)` is the signed 4x4 minor built from the rows of `C_i` other
/// than `a` and the rows of `C_j` other than `b`. The result has unit
/// Frobenius norm and a positive first significant entry.
pub fn fundamental_matrix(ci: &Camera, cj: &Camera) -> Result<Matrix3<f64>> {
    if ci.center().approx_eq(cj.center(), CameraArrangement::CENTER_TOL) {
        return Err(Error::CoincidentCenters);
    }
    let mut f = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let mut m = Matrix4::zeros();
            let mut row = 0;
            for r in (0..3).filter(|&r| r != a) {
                m.set_row(row, &ci.matrix.row(r));
                row += 1;
            }
            for r in (0..3).filter(|&r| r != b) {
                m.set_row(row, &cj.matrix.row(r));
                row += 1;
            }
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            f[(a, b)] = sign * m.determinant();
        }
    }
    let mut entries: Vec<f64> = (0..3)
        .flat_map(|r| (0..3).map(move |c| (r, c)))
        .map(|(r, c)| f[(r, c)])
        .collect();
    if !canonicalize(&mut entries) {
        return Err(Error::CoincidentCenters);
    }
    Ok(Matrix3::from_row_slice(&entries))
}

/// The intersection line of two planes.
pub fn line_from_two_planes(h1: &SpatialPlane, h2: &SpatialPlane) -> Result<SpatialLine> {
    let m = DMatrix::from_row_slice(
        2,
        4,
        &[h1.coords().as_slice(), h2.coords().as_slice()].concat(),
    );
    let kernel = linalg::nullspace(&m, RANK_TOL);
    if kernel.ncols() != 2 {
        return Err(Error::CoincidentPlanes);
    }
    Ok(SpatialLine::from_orthonormal(Matrix4x2::from_iterator(
        kernel.iter().copied(),
    )))
}

/// The line through two distinct points.
pub fn line_from_two_points(z1: &HomPoint3, z2: &HomPoint3) -> Result<SpatialLine> {
    SpatialLine::from_span(z1.coords(), z2.coords())
}

/// The point where a line crosses a plane.
pub fn meet_line_plane(line: &SpatialLine, plane: &SpatialPlane) -> Result<HomPoint3> {
    let (u, v) = (line.span.column(0), line.span.column(1));
    let (hu, hv) = (plane.coords().dot(&u), plane.coords().dot(&v));
    if hu.abs().max(hv.abs()) <= RANK_TOL {
        return Err(Error::LineInPlane);
    }
    HomPoint3::new(u * hv - v * hu)
}

/// The skew matrix `[a]_x` with `[a]_x b = a x b`.
pub fn cross_matrix(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Unit-normalized incidence residual between two projective objects; zero
/// exactly when they are incident.
pub trait Incidence<Rhs> {
    fn incidence(&self, other: &Rhs) -> f64;
}

impl Incidence<SpatialPlane> for HomPoint3 {
    fn incidence(&self, plane: &SpatialPlane) -> f64 {
        self.coords().dot(plane.coords()).abs()
    }
}

impl Incidence<SpatialLine> for HomPoint3 {
    fn incidence(&self, line: &SpatialLine) -> f64 {
        line.point_residual(self)
    }
}

impl Incidence<ImageLine> for HomPoint2 {
    fn incidence(&self, line: &ImageLine) -> f64 {
        self.coords().dot(line.coords()).abs()
    }
}

impl Incidence<SpatialPlane> for SpatialLine {
    fn incidence(&self, plane: &SpatialPlane) -> f64 {
        let h = plane.coords();
        (self.span.transpose() * h).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DVector, Matrix3x4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn identity_camera() -> Camera {
        Camera::new(Matrix3x4::identity()).unwrap()
    }

    fn random_camera(rng: &mut ChaCha8Rng) -> Camera {
        Camera::new(Matrix3x4::from_fn(|_, _| rng.sample(StandardNormal))).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> HomPoint3 {
        HomPoint3::new(Vector4::from_fn(|_, _| rng.sample(StandardNormal))).unwrap()
    }

    fn random_line(rng: &mut ChaCha8Rng) -> SpatialLine {
        line_from_two_points(&random_point(rng), &random_point(rng)).unwrap()
    }

    fn scalar(rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let s: f64 = rng.random_range(-10.0..10.0);
            if s.abs() > 1e-3 {
                return s;
            }
        }
    }

    #[test]
    fn project_point_identity_camera() {
        let x = HomPoint3::new(Vector4::new(1.0, 2.0, 3.0, 1.0)).unwrap();
        let img = project_point(&identity_camera(), &x).unwrap();
        let expected = HomPoint2::new(Vector3::new(1.0, 2.0, 3.0)).unwrap();
        assert!(img.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn projecting_the_center_fails() {
        let x = HomPoint3::new(Vector4::new(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(
            project_point(&identity_camera(), &x),
            Err(Error::CenterProjection)
        );
    }

    #[test]
    fn project_point_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let c = random_camera(&mut rng);
            let x = random_point(&mut rng);
            // independent product, written out entry by entry
            let mut y = [0.0; 3];
            for (r, yr) in y.iter_mut().enumerate() {
                for k in 0..4 {
                    *yr += c.matrix()[(r, k)] * x.coords()[k];
                }
            }
            let expected = HomPoint2::new(Vector3::from(y)).unwrap();
            let img = project_point(&c, &x).unwrap();
            assert!(img.distance(&expected) <= 1e-14);
        }
    }

    #[test]
    fn project_line_identity_camera() {
        let line = SpatialLine::from_span(&Vector4::x(), &Vector4::y()).unwrap();
        let l = project_line(&identity_camera(), &line).unwrap();
        assert!(l.approx_eq(&ImageLine::new(Vector3::z()).unwrap(), 1e-15));
    }

    #[test]
    fn line_through_center_fails() {
        let line = SpatialLine::from_span(&Vector4::w(), &Vector4::x()).unwrap();
        assert_eq!(
            project_line(&identity_camera(), &line),
            Err(Error::LineThroughCenter)
        );
    }

    #[test]
    fn projected_line_contains_projected_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_camera(&mut rng);
        let line = random_line(&mut rng);
        let l = project_line(&c, &line).unwrap();
        for _ in 0..100 {
            let x = line
                .point_at(rng.sample(StandardNormal), rng.sample(StandardNormal))
                .unwrap();
            let img = project_point(&c, &x).unwrap();
            assert!(img.incidence(&l) <= 1e-10);
        }
    }

    #[test]
    fn back_project_point_identity_camera() {
        let ray = back_project_point(&identity_camera(), &HomPoint2::new(Vector3::z()).unwrap())
            .unwrap();
        let expected = SpatialLine::from_span(&Vector4::z(), &Vector4::w()).unwrap();
        assert!(ray.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn back_projected_ray_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let c = random_camera(&mut rng);
            let x = random_point(&mut rng);
            let img = project_point(&c, &x).unwrap();
            let ray = back_project_point(&c, &img).unwrap();
            assert!(ray.contains(&x, 1e-10));
            assert!(ray.contains(c.center(), 1e-10));
            // any other point of the ray images to the same point
            let y = ray.point_at(0.3, -1.7).unwrap();
            assert!(project_point(&c, &y).unwrap().approx_eq(&img, 1e-10));
            // the constraint matrix has a two-dimensional kernel
            let m = cross_matrix(img.coords()) * c.matrix();
            let dm = DMatrix::from_iterator(3, 4, m.iter().copied());
            assert_eq!(linalg::rank(&dm, RANK_TOL), 2);
        }
    }

    #[test]
    fn back_project_line_identity_camera() {
        let plane = back_project_line(&identity_camera(), &ImageLine::new(Vector3::z()).unwrap());
        assert!(plane.approx_eq(&SpatialPlane::new(Vector4::z()).unwrap(), 1e-15));
    }

    #[test]
    fn back_projected_plane_contains_center_and_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let c = random_camera(&mut rng);
            let line = random_line(&mut rng);
            let plane = back_project_line(&c, &project_line(&c, &line).unwrap());
            assert!(c.center().incidence(&plane) <= 1e-12);
            assert!(line.incidence(&plane) <= 1e-10);
        }
    }

    #[test]
    fn fundamental_matrix_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (ci, cj) = (random_camera(&mut rng), random_camera(&mut rng));
            let f = fundamental_matrix(&ci, &cj).unwrap();
            let dm = DMatrix::from_iterator(3, 3, f.iter().copied());
            assert_eq!(linalg::rank(&dm, 1e-9), 2);
            for _ in 0..100 {
                let x = random_point(&mut rng);
                let xi = project_point(&ci, &x).unwrap();
                let xj = project_point(&cj, &x).unwrap();
                assert!((xi.coords().transpose() * f * xj.coords())[0].abs() <= 1e-10);
            }
            let g = fundamental_matrix(&cj, &ci).unwrap();
            let ft: Vec<f64> = f.transpose().iter().copied().collect();
            let gv: Vec<f64> = g.iter().copied().collect();
            assert!(projective_distance(&ft, &gv) <= 1e-12);
        }
    }

    #[test]
    fn fundamental_matrix_rejects_shared_center() {
        let c = identity_camera();
        let scaled = Camera::new(Matrix3x4::identity() * 2.0).unwrap();
        assert_eq!(fundamental_matrix(&c, &scaled), Err(Error::CoincidentCenters));
    }

    #[test]
    fn planes_meet_in_axis() {
        let h1 = SpatialPlane::new(Vector4::x()).unwrap();
        let h2 = SpatialPlane::new(Vector4::y()).unwrap();
        let line = line_from_two_planes(&h1, &h2).unwrap();
        let expected = SpatialLine::from_span(&Vector4::z(), &Vector4::w()).unwrap();
        assert!(line.approx_eq(&expected, 1e-14));
        assert_eq!(line_from_two_planes(&h1, &h1), Err(Error::CoincidentPlanes));
    }

    #[test]
    fn random_planes_meet_in_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let a = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let b = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let line = line_from_two_planes(
                &SpatialPlane::new(a).unwrap(),
                &SpatialPlane::new(b).unwrap(),
            )
            .unwrap();
            for k in 0..2 {
                let u = line.span().column(k);
                assert!(a.normalize().dot(&u).abs() <= 1e-10);
                assert!(b.normalize().dot(&u).abs() <= 1e-10);
            }
            // SVD kernel of the stacked matrix, computed independently
            let m = DMatrix::from_row_slice(2, 4, &[a.as_slice(), b.as_slice()].concat());
            let svd = m.transpose().svd(true, false);
            let u = svd.u.unwrap();
            let complement = DMatrix::identity(4, 4) - &u * u.transpose();
            let span = DMatrix::from_iterator(4, 2, line.span().iter().copied());
            assert!((&complement * &span - &span).norm() <= 1e-10);
        }
    }

    #[test]
    fn join_of_points() {
        let x = HomPoint3::new(Vector4::x()).unwrap();
        let y = HomPoint3::new(Vector4::y()).unwrap();
        let line = line_from_two_points(&x, &y).unwrap();
        assert!(line.contains(&x, 1e-15) && line.contains(&y, 1e-15));
        let x2 = HomPoint3::new(Vector4::x() * -3.0).unwrap();
        assert_eq!(line_from_two_points(&x, &x2), Err(Error::ProportionalPoints));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (a, b) = (random_point(&mut rng), random_point(&mut rng));
            let line = line_from_two_points(&a, &b).unwrap();
            let dm = DMatrix::from_columns(&[
                DVector::from_column_slice(a.coords().as_slice()),
                DVector::from_column_slice(b.coords().as_slice()),
                DVector::from_column_slice(line.span().column(0).as_slice()),
                DVector::from_column_slice(line.span().column(1).as_slice()),
            ]);
            assert_eq!(linalg::rank(&dm, 1e-9), 2);
        }
    }

    #[test]
    fn meet_of_axis_and_plane() {
        let z_axis = SpatialLine::from_span(&Vector4::z(), &Vector4::w()).unwrap();
        let plane = SpatialPlane::new(Vector4::new(0.0, 0.0, 1.0, -2.0)).unwrap();
        let p = meet_line_plane(&z_axis, &plane).unwrap();
        assert!((p.to_affine().unwrap() - Vector3::new(0.0, 0.0, 2.0)).norm() < 1e-14);
        let containing = SpatialPlane::new(Vector4::x()).unwrap();
        assert_eq!(meet_line_plane(&z_axis, &containing), Err(Error::LineInPlane));
    }

    #[test]
    fn meet_matches_linear_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let line = random_line(&mut rng);
            let h = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let p = meet_line_plane(&line, &SpatialPlane::new(h).unwrap()).unwrap();
            // solve h^T (l0 s + l1) = 0 for s directly
            let (l0, l1) = (line.span().column(0), line.span().column(1));
            let s = -h.dot(&l1) / h.dot(&l0);
            let expected = HomPoint3::new(l0 * s + l1).unwrap();
            assert!(p.approx_eq(&expected, 1e-9));
        }
    }

    #[test]
    fn incidence_residuals() {
        let x = HomPoint3::new(Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let plane = SpatialPlane::new(Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(x.incidence(&plane), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trials = 1000;
        let big = (0..trials)
            .filter(|_| {
                let p = random_point(&mut rng);
                let h = SpatialPlane::new(Vector4::from_fn(|_, _| rng.sample(StandardNormal)))
                    .unwrap();
                p.incidence(&h) > 0.1
            })
            .count();
        // a random unit 4-vector pair has |<x, h>| > 0.1 about 84% of the time
        assert!(big as f64 / trials as f64 > 0.75);
    }

    #[test]
    fn plucker_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let a = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let b = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let line = SpatialLine::from_span(&a, &b).unwrap();
            assert!(line.plucker_quadric().abs() <= 1e-12);
            // another spanning pair gives the same line
            let other = SpatialLine::from_span(&(a * 2.0 - b * 0.5), &(a + b * 3.0)).unwrap();
            assert!(line.approx_eq(&other, 1e-12));
        }
    }

    #[test]
    fn operations_are_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let c = random_camera(&mut rng);
            let scaled_c = Camera::new(c.matrix() * scalar(&mut rng)).unwrap();
            let xv = Vector4::from_fn(|_, _| rng.sample(StandardNormal));
            let x = HomPoint3::new(xv).unwrap();
            let sx = HomPoint3::new(xv * scalar(&mut rng)).unwrap();
            assert!(x.distance(&sx) <= 1e-15);
            let a = project_point(&c, &x).unwrap();
            let b = project_point(&scaled_c, &sx).unwrap();
            assert!(a.distance(&b) <= 1e-13);

            let line = random_line(&mut rng);
            let l1 = project_line(&c, &line).unwrap();
            let l2 = project_line(&scaled_c, &line).unwrap();
            assert!(l1.distance(&l2) <= 1e-13);

            let other = random_camera(&mut rng);
            let f1 = fundamental_matrix(&c, &other).unwrap();
            let f2 = fundamental_matrix(&scaled_c, &other).unwrap();
            assert!((f1 - f2).norm() <= 1e-12);
        }
    }

    #[test]
    fn two_plane_reconstruction_reprojects() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (c1, c2) = (random_camera(&mut rng), random_camera(&mut rng));
            let l1 = ImageLine::new(Vector3::from_fn(|_, _| rng.sample(StandardNormal))).unwrap();
            let l2 = ImageLine::new(Vector3::from_fn(|_, _| rng.sample(StandardNormal))).unwrap();
            let line = line_from_two_planes(&back_project_line(&c1, &l1), &back_project_line(&c2, &l2))
                .unwrap();
            assert!(project_line(&c1, &line).unwrap().approx_eq(&l1, 1e-8));
            assert!(project_line(&c2, &line).unwrap().approx_eq(&l2, 1e-8));
        }
    }

    #[test]
    fn affine_distance_to_line() {
        let line = line_from_two_points(
            &HomPoint3::from_affine(&Vector3::new(0.0, 0.0, 1.0)),
            &HomPoint3::from_affine(&Vector3::new(1.0, 0.0, 1.0)),
        )
        .unwrap();
        let d = line.affine_distance(&Vector3::new(5.0, 2.0, 1.0)).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
    }
}
