//! Fitting a line track to the line multiview variety in a local
//! four-parameter chart of affine lines.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3x4, Vector3, Vector4};

use crate::constraints::LineTrack;
use crate::error::{Error, Result};
use crate::projective::{CameraArrangement, SpatialLine};
use crate::solver::LeastSquares;

/// Lines `p + a e1 + b e2 + span(d + c e1 + d' e2)` around the line through
/// `p` with unit direction `d`, where `e1`, `e2` complete `d` to an
/// orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub point: Vector3<f64>,
    pub direction: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

impl LineChart {
    /// The chart centered at the affine part of `line`.
    pub fn at(line: &SpatialLine) -> Result<Self> {
        let (point, direction) = line.affine_chart().ok_or(Error::PatchInfinity)?;
        let helper = if direction.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
        let e1 = direction.cross(&helper).normalize();
        let e2 = direction.cross(&e1);
        Ok(Self {
            point,
            direction,
            e1,
            e2,
        })
    }

    /// Homogeneous point and direction spanning the line at chart
    /// coordinates `q`.
    pub fn span(&self, q: &[f64]) -> (Vector4<f64>, Vector4<f64>) {
        let p = self.point + self.e1 * q[0] + self.e2 * q[1];
        let d = self.direction + self.e1 * q[2] + self.e2 * q[3];
        (p.push(1.0), d.push(0.0))
    }

    pub fn line(&self, q: &[f64]) -> Result<SpatialLine> {
        let (u, v) = self.span(q);
        SpatialLine::from_span(&u, &v)
    }
}

/// Residuals of a line track between unit coefficient vectors, the sign of
/// each prediction matched to its datum. Noise on unit line coefficients is
/// isotropic in this metric.
#[derive(Debug, Clone)]
pub struct LineTrackFit {
    cameras: Vec<Matrix3x4<f64>>,
    data: Vec<Vector3<f64>>,
    pub chart: LineChart,
}

impl LineTrackFit {
    pub fn new(arrangement: &CameraArrangement, track: &LineTrack, chart: LineChart) -> Result<Self> {
        if arrangement.len() != track.len() {
            return Err(Error::ArityMismatch {
                expected: arrangement.len(),
                got: track.len(),
            });
        }
        Ok(Self {
            cameras: arrangement.iter().map(|c| *c.matrix()).collect(),
            data: track.views().iter().map(|l| l.coords().normalize()).collect(),
            chart,
        })
    }

    pub fn with_chart(&self, chart: LineChart) -> Self {
        Self {
            chart,
            ..self.clone()
        }
    }

    pub fn cost(&self, q: &[f64]) -> f64 {
        self.residuals(&q.to_vec()).norm_squared()
    }

    fn image(&self, j: usize, u: &Vector4<f64>, v: &Vector4<f64>) -> (Vector3<f64>, f64) {
        let l = (self.cameras[j] * u).cross(&(self.cameras[j] * v));
        let sign = if l.dot(&self.data[j]) < 0.0 { -1.0 } else { 1.0 };
        (l, sign)
    }
}

impl LeastSquares for LineTrackFit {
    type Point = Vec<f64>;

    fn residuals(&self, q: &Vec<f64>) -> DVector<f64> {
        let (u, v) = self.chart.span(q);
        let mut r = DVector::zeros(3 * self.cameras.len());
        for j in 0..self.cameras.len() {
            let (l, sign) = self.image(j, &u, &v);
            r.fixed_rows_mut::<3>(3 * j).copy_from(&(l * (sign / l.norm()) - self.data[j]));
        }
        r
    }

    fn jacobian(&self, q: &Vec<f64>) -> DMatrix<f64> {
        let (u, v) = self.chart.span(q);
        let (e1, e2) = (self.chart.e1.push(0.0), self.chart.e2.push(0.0));
        let mut jac = DMatrix::zeros(3 * self.cameras.len(), 4);
        for (j, c) in self.cameras.iter().enumerate() {
            let (cu, cv) = (c * u, c * v);
            let (l, sign) = self.image(j, &u, &v);
            let n = l.norm();
            let unit = l / n;
            let dl = [
                (c * e1).cross(&cv),
                (c * e2).cross(&cv),
                cu.cross(&(c * e1)),
                cu.cross(&(c * e2)),
            ];
            for (k, d) in dl.iter().enumerate() {
                let col = (d - unit * unit.dot(d)) * (sign / n);
                jac.fixed_view_mut::<3, 1>(3 * j, k).copy_from(&col);
            }
        }
        jac
    }

    fn retract(&self, q: &Vec<f64>, step: &DVector<f64>) -> Vec<f64> {
        q.iter().zip(step.iter()).map(|(a, b)| a + b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::project_line;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chart_origin_is_the_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let line = random::line(&mut rng);
        let chart = LineChart::at(&line).unwrap();
        assert!(chart.line(&[0.0; 4]).unwrap().approx_eq(&line, 1e-12));
        assert!(chart.e1.dot(&chart.direction).abs() <= 1e-15);
        assert!(chart.e2.dot(&chart.e1).abs() <= 1e-15);
    }

    #[test]
    fn exact_track_has_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let arr = random::arrangement(3, &mut rng).unwrap();
        let line = random::line(&mut rng);
        let track = LineTrack::new(arr.iter().map(|c| project_line(c, &line).unwrap()).collect()).unwrap();
        let fit = LineTrackFit::new(&arr, &track, LineChart::at(&line).unwrap()).unwrap();
        assert!(fit.cost(&[0.0; 4]) <= 1e-24);
        let q: Vec<f64> = (0..4).map(|_| rng.random_range(-0.1..0.1)).collect();
        assert!(fit.cost(&q) > 1e-8);
    }
}
