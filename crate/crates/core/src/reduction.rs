//! Isometric reductions of the anchored fitting problems.
//!
//! Points on a fixed line `L` are parameterized by `[l0 l1] (t, 1)`. In view
//! `j` the image of `L` is an affine line; an orthonormal frame `A_j` of the
//! plane `(C_j . L)^perp` measures the position along it. Image data split
//! into that along-line coordinate and a constant orthogonal offset, so the
//! reduced problem has one scalar per view.
//!
//! Lines through a fixed point `X` are parameterized by `span{X, F_X Y}`.
//! Their images pass through `x_i = C_i X`, so in the line patch `l3 = 1`
//! they lie on an affine line and the same construction applies.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix2, Matrix2x3, Matrix3, Matrix4x2, Matrix4x3, Vector2, Vector3};

use crate::constraints::{LineTrack, PointTrack};
use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};
use crate::projective::{CameraArrangement, HomPoint3, SpatialLine, DEGENERACY_TOL};

/// The skew form `[a]_x` with `[a]_x b = a x b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossMatrix(Matrix3<f64>);

impl CrossMatrix {
    pub fn new(a: &Vector3<f64>) -> Self {
        Self(crate::projective::cross_matrix(a))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

/// An orthonormal basis of the hyperplane orthogonal to `x`.
pub fn complement_basis(x: &HomPoint3) -> Matrix4x3<f64> {
    let row = DMatrix::from_row_slice(1, 4, x.coords().as_slice());
    let kernel = linalg::nullspace(&row, RANK_TOL);
    Matrix4x3::from_iterator(kernel.iter().copied())
}

/// Orthonormal frame `(d, a2)` of the plane orthogonal to a unit 3-vector
/// `n`, with `d` horizontal, together with the constant `kappa = a2 . p`
/// over the affine points `p = (p1, p2, 1)` with `n . p = 0`.
fn patch_frame(n: &Vector3<f64>) -> Option<(Matrix2x3<f64>, f64, f64)> {
    let h = libm::hypot(n[0], n[1]);
    if h <= DEGENERACY_TOL {
        return None;
    }
    let d = Vector3::new(-n[1] / h, n[0] / h, 0.0);
    let a2 = n.cross(&d);
    let foot = Vector3::new(-n[2] * n[0] / (h * h), -n[2] * n[1] / (h * h), 1.0);
    let frame = Matrix2x3::from_rows(&[d.transpose(), a2.transpose()]);
    Some((frame, a2.dot(&foot), h))
}

/// Reduced data `(r, kappa)` and signed offset of an affine measurement `q`
/// relative to the affine line `n . (p, 1) = 0`.
fn split(frame: &Matrix2x3<f64>, kappa: f64, n: &Vector3<f64>, h: f64, q: &Vector2<f64>) -> (Vector2<f64>, f64) {
    let q = Vector3::new(q[0], q[1], 1.0);
    (Vector2::new(frame.row(0).dot(&q.transpose()), kappa), n.dot(&q) / h)
}

/// `kappa * y0 / y1`, the along-line coordinate of a reduced image.
fn along(kappa: f64, y: &Vector2<f64>) -> f64 {
    kappa * y[0] / y[1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPointProblem {
    /// Orthonormal basis `[l0 l1]` of the anchor line.
    pub span_basis: Matrix4x2<f64>,
    pub isometries: Vec<Matrix2x3<f64>>,
    /// `A_j C_j [l0 l1]`.
    pub reduced_cameras: Vec<Matrix2<f64>>,
    /// `(r_j, kappa_j)`: along-line coordinate of the data and of the line.
    pub reduced_data: Vec<Vector2<f64>>,
    /// Signed distances of the data from the image lines.
    pub offsets: Vec<f64>,
}

pub fn reduce_anchored_point(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    track: &PointTrack,
) -> Result<ReducedPointProblem> {
    if arrangement.len() != track.len() {
        return Err(Error::ArityMismatch {
            expected: arrangement.len(),
            got: track.len(),
        });
    }
    let basis = *line.span();
    let mut problem = ReducedPointProblem {
        span_basis: basis,
        isometries: Vec::with_capacity(track.len()),
        reduced_cameras: Vec::with_capacity(track.len()),
        reduced_data: Vec::with_capacity(track.len()),
        offsets: Vec::with_capacity(track.len()),
    };
    for (camera, q) in arrangement.iter().zip(track.views()) {
        if line.contains(camera.center(), 1e-10) {
            return Err(Error::LineThroughCenter);
        }
        let image = camera.matrix() * basis;
        let normal = image.column(0).cross(&image.column(1));
        if normal.norm() <= RANK_TOL * image.norm_squared() {
            return Err(Error::RankDeficiency("camera restricted to the line"));
        }
        let n = normal.normalize();
        let (frame, kappa, h) = patch_frame(&n).ok_or(Error::LineAtInfinity)?;
        let (data, offset) = split(&frame, kappa, &n, h, q);
        problem.reduced_cameras.push(frame * image);
        problem.isometries.push(frame);
        problem.reduced_data.push(data);
        problem.offsets.push(offset);
    }
    Ok(problem)
}

impl ReducedPointProblem {
    pub fn len(&self) -> usize {
        self.reduced_cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced_cameras.is_empty()
    }

    /// Along-line coordinate of the image of `[l0 l1](t, 1)` in view `j`.
    pub fn predicted(&self, j: usize, t: f64) -> f64 {
        along(self.reduced_data[j][1], &(self.reduced_cameras[j] * Vector2::new(t, 1.0)))
    }

    /// `sum_j (r_j - predicted_j(t))^2`.
    pub fn objective(&self, t: f64) -> f64 {
        (0..self.len())
            .map(|j| {
                let e = self.reduced_data[j][0] - self.predicted(j, t);
                e * e
            })
            .sum()
    }

    /// The full reprojection objective: reduced objective plus the offsets.
    pub fn full_objective(&self, t: f64) -> f64 {
        self.objective(t) + self.offsets.iter().map(|o| o * o).sum::<f64>()
    }

    /// Distance of the reduced data from the reduced variety: pulls each
    /// view's datum back to the line and compares directions.
    pub fn membership_residual(&self) -> f64 {
        let pulled: Vec<Vector2<f64>> = self
            .reduced_cameras
            .iter()
            .zip(&self.reduced_data)
            .map(|(c, y)| {
                let adj = Matrix2::new(c[(1, 1)], -c[(0, 1)], -c[(1, 0)], c[(0, 0)]);
                let v = adj * y;
                v / v.norm()
            })
            .collect();
        pulled[1..]
            .iter()
            .map(|v| (pulled[0][0] * v[1] - pulled[0][1] * v[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// The point `[l0 l1](t, 1)`.
pub fn lift_point(problem: &ReducedPointProblem, t: f64) -> Result<HomPoint3> {
    lift_point_homogeneous(problem, &Vector2::new(t, 1.0))
}

/// The point `[l0 l1] y`; fails when `y` has a vanishing patch coordinate.
pub fn lift_point_homogeneous(problem: &ReducedPointProblem, y: &Vector2<f64>) -> Result<HomPoint3> {
    if !y.iter().all(|v| v.is_finite()) || y[1].abs() <= DEGENERACY_TOL * y.norm() {
        return Err(Error::PatchInfinity);
    }
    HomPoint3::new(problem.span_basis * y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLineProblem {
    pub anchor: HomPoint3,
    /// Orthonormal basis `F_X` of the complement of the anchor.
    pub patch_map: Matrix4x3<f64>,
    pub isometries: Vec<Matrix2x3<f64>>,
    /// `[C_i X]_x C_i F_X`: the image line of `span{X, F_X Y}` is `M_i Y`.
    pub image_maps: Vec<Matrix3<f64>>,
    /// `A_i M_i`.
    pub reduced_cameras: Vec<Matrix2x3<f64>>,
    /// `(r_i, kappa_i)` of the data in the line patch.
    pub reduced_data: Vec<Vector2<f64>>,
    pub offsets: Vec<f64>,
}

pub fn reduce_anchored_line(
    arrangement: &CameraArrangement,
    anchor: &HomPoint3,
    track: &LineTrack,
) -> Result<ReducedLineProblem> {
    if arrangement.len() != track.len() {
        return Err(Error::ArityMismatch {
            expected: arrangement.len(),
            got: track.len(),
        });
    }
    let patch_map = complement_basis(anchor);
    let mut problem = ReducedLineProblem {
        anchor: *anchor,
        patch_map,
        isometries: Vec::with_capacity(track.len()),
        image_maps: Vec::with_capacity(track.len()),
        reduced_cameras: Vec::with_capacity(track.len()),
        reduced_data: Vec::with_capacity(track.len()),
        offsets: Vec::with_capacity(track.len()),
    };
    for (camera, line) in arrangement.iter().zip(track.views()) {
        let x = camera.matrix() * anchor.coords();
        if x.norm() <= 1e-10 * camera.matrix().norm() {
            return Err(Error::CenterCoincidence);
        }
        let x = x.normalize();
        let (frame, kappa, h) = patch_frame(&x).ok_or(Error::PatchInfinity)?;
        let u = line.patch_coords().ok_or(Error::PatchInfinity)?;
        let (data, offset) = split(&frame, kappa, &x, h, &u);
        let map = CrossMatrix::new(&x).matrix() * camera.matrix() * patch_map;
        problem.reduced_cameras.push(frame * map);
        problem.image_maps.push(map);
        problem.isometries.push(frame);
        problem.reduced_data.push(data);
        problem.offsets.push(offset);
    }
    Ok(problem)
}

impl ReducedLineProblem {
    pub fn len(&self) -> usize {
        self.reduced_cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced_cameras.is_empty()
    }

    /// Along-line patch coordinate of the image of `span{X, F_X Y}`.
    pub fn predicted(&self, i: usize, y: &Vector3<f64>) -> f64 {
        along(self.reduced_data[i][1], &(self.reduced_cameras[i] * y))
    }

    /// Reduced objective at `Y = (y0, y1, 1)`.
    pub fn objective(&self, y: &Vector2<f64>) -> f64 {
        let y = Vector3::new(y[0], y[1], 1.0);
        (0..self.len())
            .map(|i| {
                let e = self.reduced_data[i][0] - self.predicted(i, &y);
                e * e
            })
            .sum()
    }

    pub fn full_objective(&self, y: &Vector2<f64>) -> f64 {
        self.objective(y) + self.offsets.iter().map(|o| o * o).sum::<f64>()
    }

    /// Rank defect of the lines `{Y : Y in preimage of datum i}`; zero when
    /// the data come from a single line through the anchor.
    pub fn membership_residual(&self) -> f64 {
        if self.len() < 3 {
            return 0.0;
        }
        let rows: Vec<f64> = self
            .reduced_cameras
            .iter()
            .zip(&self.reduced_data)
            .flat_map(|(c, y)| {
                let (s, k) = (y[0], y[1]);
                let row = c.row(0) * k - c.row(1) * s;
                let row = row / row.norm();
                [row[0], row[1], row[2]]
            })
            .collect();
        let m = DMatrix::from_row_slice(self.len(), 3, &rows);
        let sv = m.singular_values();
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The line `span{X, F_X (y0, y1, 1)}`.
pub fn lift_line(problem: &ReducedLineProblem, y: &Vector2<f64>) -> Result<SpatialLine> {
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::PatchInfinity);
    }
    lift_line_homogeneous(problem, &Vector3::new(y[0], y[1], 1.0))
}

/// The line `span{X, F_X y}` for any nonzero `y`.
pub fn lift_line_homogeneous(problem: &ReducedLineProblem, y: &Vector3<f64>) -> Result<SpatialLine> {
    SpatialLine::from_span(problem.anchor.coords(), &(problem.patch_map * y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{project_line, project_point, ImageLine};
    use crate::random;
    use nalgebra::Vector4;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn point_instance(seed: u64, m: usize) -> (CameraArrangement, SpatialLine, HomPoint3, PointTrack) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arr = random::arrangement(m, &mut rng).unwrap();
        let line = random::line(&mut rng);
        let x = line.point_at(0.3, 0.8).unwrap();
        let track = PointTrack::new(
            arr.iter()
                .map(|c| project_point(c, &x).unwrap().to_affine().unwrap())
                .collect(),
        );
        (arr, line, x, track)
    }

    fn line_instance(seed: u64, m: usize) -> (CameraArrangement, HomPoint3, SpatialLine, LineTrack) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arr = random::arrangement(m, &mut rng).unwrap();
        let x = random::point(&mut rng);
        let line = SpatialLine::from_span(x.coords(), random::point(&mut rng).coords()).unwrap();
        let track =
            LineTrack::new(arr.iter().map(|c| project_line(c, &line).unwrap()).collect()).unwrap();
        (arr, x, line, track)
    }

    fn full_point_objective(arr: &CameraArrangement, track: &PointTrack, x: &HomPoint3) -> f64 {
        arr.iter()
            .zip(track.views())
            .map(|(c, q)| (project_point(c, x).unwrap().to_affine().unwrap() - q).norm_squared())
            .sum()
    }

    #[test]
    fn cross_matrix_is_skew_and_annihilates() {
        let a = Vector3::new(0.3, -1.2, 2.0);
        let m = *CrossMatrix::new(&a).matrix();
        assert_eq!(m, -m.transpose());
        assert!((m * a).norm() <= 1e-15);
    }

    #[test]
    fn point_reduction_shapes_and_orthonormality() {
        for m in 2..=5 {
            let (arr, line, _, track) = point_instance(m as u64, m);
            let p = reduce_anchored_point(&arr, &line, &track).unwrap();
            assert_eq!(p.len(), m);
            let gram = p.span_basis.transpose() * p.span_basis;
            assert!((gram - Matrix2::identity()).norm() <= 1e-12);
            for (a, c) in p.isometries.iter().zip(&p.reduced_cameras) {
                assert!((a * a.transpose() - Matrix2::identity()).norm() <= 1e-12);
                assert!(c.determinant().abs() > 1e-8);
            }
        }
    }

    #[test]
    fn isometry_matches_projection() {
        let (arr, line, _, track) = point_instance(40, 3);
        let p = reduce_anchored_point(&arr, &line, &track).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (j, c) in arr.iter().enumerate() {
            let image = c.matrix() * line.span();
            let q = image.svd(true, false).u.unwrap();
            for _ in 0..100 {
                let w = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                let proj = q * (q.transpose() * w);
                assert!(((p.isometries[j] * w).norm() - proj.norm()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_point_round_trip() {
        for seed in 0..50 {
            let (arr, line, x, track) = point_instance(100 + seed, 2 + (seed as usize) % 3);
            let p = reduce_anchored_point(&arr, &line, &track).unwrap();
            assert!(p.membership_residual() <= 1e-10);
            let coords = p.span_basis.transpose() * x.coords();
            let t = coords[0] / coords[1];
            assert!(p.objective(t) <= 1e-20);
            let lifted = lift_point(&p, t).unwrap();
            assert!(lifted.distance(&x) <= 1e-10);
            assert!(line.contains(&lifted, 1e-10));
        }
    }

    #[test]
    fn point_objective_preserved_up_to_offsets() {
        let (arr, line, _, mut track) = point_instance(42, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        track = PointTrack::new(
            track
                .views()
                .iter()
                .map(|q| q + Vector2::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
                .collect(),
        );
        let p = reduce_anchored_point(&arr, &line, &track).unwrap();
        for t in [-2.0, -0.3, 0.1, 0.9, 4.0] {
            let lifted = lift_point(&p, t).unwrap();
            let full = full_point_objective(&arr, &track, &lifted);
            assert!((full - p.full_objective(t)).abs() <= 1e-10 * (1.0 + full), "{t}");
        }
    }

    #[test]
    fn line_through_center_is_rejected() {
        let (arr, _, _, track) = point_instance(44, 2);
        let c = arr[0].center().coords();
        let line = SpatialLine::from_span(c, &Vector4::new(0.1, 0.2, 0.3, 1.0)).unwrap();
        assert_eq!(reduce_anchored_point(&arr, &line, &track), Err(Error::LineThroughCenter));
    }

    #[test]
    fn lift_rejects_infinite_parameter() {
        let (arr, line, _, track) = point_instance(45, 2);
        let p = reduce_anchored_point(&arr, &line, &track).unwrap();
        assert_eq!(lift_point(&p, f64::INFINITY), Err(Error::PatchInfinity));
        assert_eq!(
            lift_point_homogeneous(&p, &Vector2::new(1.0, 0.0)),
            Err(Error::PatchInfinity)
        );
    }

    #[test]
    fn line_reduction_invariants() {
        let (arr, x, _, track) = line_instance(46, 4);
        let p = reduce_anchored_line(&arr, &x, &track).unwrap();
        assert_eq!(p.patch_map.ncols(), 2 + 1);
        let join = nalgebra::Matrix4::from_columns(&[
            *x.coords(),
            p.patch_map.column(0).into(),
            p.patch_map.column(1).into(),
            p.patch_map.column(2).into(),
        ]);
        assert!(join.determinant().abs() > 0.5);
        for (i, (a, c)) in p.isometries.iter().zip(&p.reduced_cameras).enumerate() {
            assert!((a * a.transpose() - Matrix2::identity()).norm() <= 1e-12);
            let xi = (arr[i].matrix() * x.coords()).normalize();
            assert!((a * xi).norm() <= 1e-12);
            assert_eq!(c.rank(1e-10), 2);
        }
    }

    #[test]
    fn noiseless_line_round_trip() {
        for seed in 0..50 {
            let m = 3 + (seed as usize) % 2;
            let (arr, x, line, track) = line_instance(200 + seed, m);
            let p = reduce_anchored_line(&arr, &x, &track).unwrap();
            assert!(p.membership_residual() <= 1e-10);
            // recover Y from a second point of the line
            let other = line.span() * (line.span().transpose() * Vector4::new(0.3, -0.2, 0.9, 0.4));
            let y = p.patch_map.transpose() * other;
            let y = Vector2::new(y[0] / y[2], y[1] / y[2]);
            assert!(p.objective(&y) <= 1e-18);
            let lifted = lift_line(&p, &y).unwrap();
            assert!(lifted.approx_eq(&line, 1e-9));
            assert!(lifted.contains(&x, 1e-10));
        }
    }

    #[test]
    fn line_objective_preserved_up_to_offsets() {
        let (arr, x, _, track) = line_instance(47, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let noisy = LineTrack::new(
            track
                .views()
                .iter()
                .map(|l| {
                    let u = l.patch_coords().unwrap();
                    ImageLine::from_patch(&(u + Vector2::new(rng.random_range(-0.1..0.1), 0.05)))
                })
                .collect(),
        )
        .unwrap();
        let p = reduce_anchored_line(&arr, &x, &noisy).unwrap();
        for y in [Vector2::new(0.2, -0.4), Vector2::new(3.0, 1.0), Vector2::new(-1.0, 0.5)] {
            let lifted = lift_line(&p, &y).unwrap();
            let full: f64 = arr
                .iter()
                .zip(noisy.views())
                .map(|(c, u)| {
                    let l = project_line(c, &lifted).unwrap();
                    (l.patch_coords().unwrap() - u.patch_coords().unwrap()).norm_squared()
                })
                .sum();
            assert!((full - p.full_objective(&y)).abs() <= 1e-10 * (1.0 + full));
        }
    }

    #[test]
    fn anchor_at_center_is_rejected() {
        let (arr, _, _, track) = line_instance(49, 3);
        let x = *arr[1].center();
        assert_eq!(reduce_anchored_line(&arr, &x, &track), Err(Error::CenterCoincidence));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn reductions_are_deterministic(seed in any::<u64>()) {
            let (arr, line, _, track) = point_instance(seed, 3);
            let a = reduce_anchored_point(&arr, &line, &track).unwrap();
            let b = reduce_anchored_point(&arr, &line, &track).unwrap();
            prop_assert_eq!(a, b);
            let (arr, x, _, track) = line_instance(seed, 3);
            let a = reduce_anchored_line(&arr, &x, &track).unwrap();
            let b = reduce_anchored_line(&arr, &x, &track).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn lifted_points_lie_on_the_line(seed in any::<u64>(), t in -1e3f64..1e3) {
            let (arr, line, _, track) = point_instance(seed, 2);
            let p = reduce_anchored_point(&arr, &line, &track).unwrap();
            prop_assert!(line.contains(&lift_point(&p, t).unwrap(), 1e-10));
        }
    }
}
