//! Rational least-squares fits and their critical equations.
//!
//! Every objective here has the form `sum_r (t_r - N_r(x) / D_g(r)(x))^2`
//! with affine numerators and denominators, residuals grouped by shared
//! denominator. Clearing denominators in the gradient gives polynomial
//! critical equations of degree `3G - 1` in the number of groups `G`
//! (`3G - 2` for one variable).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use num_complex::Complex64;

use super::poly::Polynomial;
use crate::constraints::{LineTrack, PointTrack};
use crate::error::{Error, Result};
use crate::projective::{CameraArrangement, SpatialLine};
use crate::reduction::{ReducedLineProblem, ReducedPointProblem};

fn cx(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `coeffs . x + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<Complex64>,
    pub constant: Complex64,
}

impl AffineForm {
    pub fn real(coeffs: &[f64], constant: f64) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| cx(c)).collect(),
            constant: cx(constant),
        }
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>() + self.constant
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a.re * b).sum::<f64>() + self.constant.re
    }

    fn abs_scale(&self, x: &[Complex64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a.norm() * b.norm()).sum::<f64>()
            + self.constant.norm()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::affine(&self.coeffs, self.constant)
    }

    fn is_zero(&self) -> bool {
        self.constant == cx(0.0) && self.coeffs.iter().all(|c| *c == cx(0.0))
    }
}

/// Residuals sharing one denominator: `(target, numerator)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGroup {
    pub denominator: AffineForm,
    pub terms: Vec<(Complex64, AffineForm)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFit {
    nvars: usize,
    groups: Vec<ResidualGroup>,
}

impl RationalFit {
    pub fn new(nvars: usize, groups: Vec<ResidualGroup>) -> Result<Self> {
        for g in &groups {
            if g.denominator.is_zero() {
                return Err(Error::DegenerateDenominator);
            }
            let forms = core::iter::once(&g.denominator).chain(g.terms.iter().map(|(_, n)| n));
            for f in forms {
                if f.coeffs.len() != nvars {
                    return Err(Error::ArityMismatch {
                        expected: nvars,
                        got: f.coeffs.len(),
                    });
                }
            }
        }
        Ok(Self { nvars, groups })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn groups(&self) -> &[ResidualGroup] {
        &self.groups
    }

    pub fn residual_count(&self) -> usize {
        self.groups.iter().map(|g| g.terms.len()).sum()
    }

    pub fn targets(&self) -> Vec<Complex64> {
        self.groups
            .iter()
            .flat_map(|g| g.terms.iter().map(|(t, _)| *t))
            .collect()
    }

    /// The same fit against other data, in [`Self::targets`] order.
    pub fn with_targets(&self, targets: &[Complex64]) -> Self {
        let mut out = self.clone();
        let mut it = targets.iter();
        for g in &mut out.groups {
            for (t, _) in &mut g.terms {
                *t = *it.next().expect("target count");
            }
        }
        out
    }

    pub fn objective(&self, x: &[Complex64]) -> Complex64 {
        let mut sum = cx(0.0);
        for g in &self.groups {
            let d = g.denominator.eval(x);
            for (t, n) in &g.terms {
                let e = t - n.eval(x) / d;
                sum += e * e;
            }
        }
        sum
    }

    pub fn objective_real(&self, x: &[f64]) -> f64 {
        self.residuals_real(x).iter().map(|r| r * r).sum()
    }

    pub fn gradient(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut grad = vec![cx(0.0); self.nvars];
        for g in &self.groups {
            let d = g.denominator.eval(x);
            for (t, n) in &g.terms {
                let nv = n.eval(x);
                let e = t - nv / d;
                for (k, gk) in grad.iter_mut().enumerate() {
                    let dq = (n.coeffs[k] * d - nv * g.denominator.coeffs[k]) / (d * d);
                    *gk -= e * dq * 2.0;
                }
            }
        }
        grad
    }

    /// `N_r / D_r - t_r` at a real point, using real parts of the data.
    pub fn residuals_real(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.residual_count());
        for g in &self.groups {
            let d = g.denominator.eval_real(x);
            for (t, n) in &g.terms {
                out.push(n.eval_real(x) / d - t.re);
            }
        }
        out
    }

    pub fn jacobian_real(&self, x: &[f64]) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.residual_count(), self.nvars);
        let mut row = 0;
        for g in &self.groups {
            let d = g.denominator.eval_real(x);
            for (_, n) in &g.terms {
                let nv = n.eval_real(x);
                for k in 0..self.nvars {
                    jac[(row, k)] = (n.coeffs[k].re * d - nv * g.denominator.coeffs[k].re) / (d * d);
                }
                row += 1;
            }
        }
        jac
    }

    /// Complex symmetric Hessian of the objective.
    pub fn hessian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.nvars;
        let mut h = DMatrix::from_element(n, n, cx(0.0));
        for g in &self.groups {
            let d = g.denominator.eval(x);
            let dc = &g.denominator.coeffs;
            for (t, num) in &g.terms {
                let nv = num.eval(x);
                let e = t - nv / d;
                let q1: Vec<Complex64> = (0..n).map(|k| (num.coeffs[k] * d - nv * dc[k]) / (d * d)).collect();
                for k in 0..n {
                    for l in 0..n {
                        let q2 = -(num.coeffs[k] * dc[l] + num.coeffs[l] * dc[k]) / (d * d)
                            + nv * dc[k] * dc[l] * 2.0 / (d * d * d);
                        h[(k, l)] += (q1[k] * q1[l] - e * q2) * 2.0;
                    }
                }
            }
        }
        h
    }

    /// Newton's method on the gradient from `x`. Returns the final point,
    /// whether the steps shrank to full precision, and the condition number
    /// of the Hessian there.
    ///
    /// Entries of `x` past the fit's variables are taken as reciprocal
    /// denominators and recomputed.
    pub fn newton_critical(&self, x: &[Complex64], iterations: usize) -> (Vec<Complex64>, bool, f64) {
        let extended = x.len() > self.nvars;
        let mut x = x[..self.nvars].to_vec();
        let mut converged = false;
        for _ in 0..iterations {
            let g = DVector::from_vec(self.gradient(&x));
            let Some(step) = self.hessian(&x).lu().solve(&g) else {
                break;
            };
            let sn = step.norm();
            if !sn.is_finite() {
                break;
            }
            for (xi, si) in x.iter_mut().zip(step.iter()) {
                *xi -= si;
            }
            let xn = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if sn <= 1e-12 * (1.0 + xn) {
                converged = true;
                break;
            }
        }
        let sv = self.hessian(&x).singular_values();
        let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if extended {
            x = self.with_reciprocals(&x);
        }
        (x, converged, cond)
    }

    /// Largest `|df/dx_k|` relative to the sum of the magnitudes of its
    /// terms; small exactly at genuine critical points, including those
    /// where the residuals vanish.
    pub fn gradient_residual(&self, x: &[Complex64]) -> f64 {
        let mut grad = vec![cx(0.0); self.nvars];
        let mut scale = vec![0.0; self.nvars];
        let xn = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
        for g in &self.groups {
            let d = g.denominator.eval(x);
            for (t, n) in &g.terms {
                let nv = n.eval(x);
                let e = t - nv / d;
                for k in 0..self.nvars {
                    let dk = (n.coeffs[k] * d - nv * g.denominator.coeffs[k]) / (d * d);
                    grad[k] += e * dk;
                    // the floor is the residual that rounding of `x` alone
                    // can produce, so zero-residual critical points pass
                    let floor = t.norm() + (nv / d).norm() + dk.norm() * (1.0 + xn);
                    scale[k] += (e.norm() + 1e-8 * floor) * dk.norm();
                }
            }
        }
        grad.iter()
            .zip(&scale)
            .map(|(g, s)| if *s > 0.0 { g.norm() / s } else { 0.0 })
            .fold(0.0, f64::max)
    }

    /// Smallest `|D_g(x)|` relative to the size of its terms.
    pub fn min_denominator_ratio(&self, x: &[Complex64]) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                let scale = g.denominator.abs_scale(x);
                if scale == 0.0 {
                    0.0
                } else {
                    g.denominator.eval(x).norm() / scale
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `-(prod_g D_g^3 / 2) grad f`, one polynomial per variable, each scaled
    /// to unit largest coefficient.
    pub fn critical_equations(&self) -> Vec<Polynomial> {
        let n = self.nvars;
        let cubes: Vec<Polynomial> = self
            .groups
            .iter()
            .map(|g| g.denominator.to_polynomial().pow(3))
            .collect();
        let one = Polynomial::constant(n, cx(1.0));
        let mut prefix = vec![one.clone()];
        for c in &cubes {
            let last = prefix.last().unwrap();
            prefix.push(last * c);
        }
        let mut suffix = vec![one; cubes.len() + 1];
        for g in (0..cubes.len()).rev() {
            suffix[g] = &suffix[g + 1] * &cubes[g];
        }
        let others: Vec<Polynomial> = (0..cubes.len())
            .map(|g| &prefix[g] * &suffix[g + 1])
            .collect();

        (0..n)
            .map(|k| {
                let mut eq = Polynomial::zero(n);
                for (g, group) in self.groups.iter().enumerate() {
                    let d = group.denominator.to_polynomial();
                    let dk = group.denominator.coeffs[k];
                    let mut partial = Polynomial::zero(n);
                    for (t, num) in &group.terms {
                        let np = num.to_polynomial();
                        let residual = &d.scale(*t) - &np;
                        let derivative =
                            &d.scale(num.coeffs[k]) - &np.scale(dk);
                        partial = &partial + &(&residual * &derivative);
                    }
                    eq = &eq + &(&partial * &others[g]);
                }
                let scale = eq.max_coefficient();
                if scale > 0.0 {
                    eq.scale(cx(1.0 / scale))
                } else {
                    eq
                }
            })
            .collect()
    }

    /// Critical equations with the reciprocals `w_g = 1 / D_g` as extra
    /// unknowns after the fit's own: `D_g w_g - 1` for each group, then
    /// `sum_r (t_r - N_r w) w (dN_r/dx_k - N_r w dD/dx_k)` for each `k`.
    /// No root has a vanishing denominator, so the system has no finite
    /// excess roots.
    pub fn reciprocal_equations(&self) -> Vec<Polynomial> {
        let n = self.nvars;
        let total = n + self.groups.len();
        let widen = |a: &AffineForm| {
            let mut coeffs = a.coeffs.clone();
            coeffs.resize(total, cx(0.0));
            Polynomial::affine(&coeffs, a.constant)
        };
        let normalize = |p: Polynomial| {
            let scale = p.max_coefficient();
            if scale > 0.0 {
                p.scale(cx(1.0 / scale))
            } else {
                p
            }
        };
        let mut eqs: Vec<Polynomial> = Vec::with_capacity(total);
        let mut gradient = vec![Polynomial::zero(total); n];
        for (g, group) in self.groups.iter().enumerate() {
            let w = Polynomial::var(total, n + g);
            let d = widen(&group.denominator);
            eqs.push(&(&d * &w) - &Polynomial::constant(total, cx(1.0)));
            for (t, num) in &group.terms {
                let nw = &widen(num) * &w;
                let residual = &Polynomial::constant(total, *t) - &nw;
                let weighted = &residual * &w;
                for (k, gk) in gradient.iter_mut().enumerate() {
                    let dq = &Polynomial::constant(total, num.coeffs[k]) - &nw.scale(group.denominator.coeffs[k]);
                    *gk = &*gk + &(&weighted * &dq);
                }
            }
        }
        let mut out: Vec<Polynomial> = gradient.into_iter().map(normalize).collect();
        out.extend(eqs.into_iter().map(normalize));
        out
    }

    /// The same fit in coordinates `z` related by `(x, 1) ~ M (z, 1)`, for a
    /// square `M` of size `nvars + 1`.
    pub fn projective_transform(&self, m: &DMatrix<f64>) -> Result<Self> {
        let n = self.nvars;
        assert_eq!(m.shape(), (n + 1, n + 1), "transform size");
        let map = |a: &AffineForm| {
            let v: Vec<Complex64> = a.coeffs.iter().copied().chain(core::iter::once(a.constant)).collect();
            let w: Vec<Complex64> = (0..=n).map(|j| (0..=n).map(|i| v[i] * m[(i, j)]).sum()).collect();
            AffineForm {
                coeffs: w[..n].to_vec(),
                constant: w[n],
            }
        };
        let groups = self
            .groups
            .iter()
            .map(|g| ResidualGroup {
                denominator: map(&g.denominator),
                terms: g.terms.iter().map(|(t, num)| (*t, map(num))).collect(),
            })
            .collect();
        Self::new(n, groups)
    }

    /// Every coefficient and target, group by group: the denominator, then
    /// each target followed by its numerator.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        let push = |out: &mut Vec<Complex64>, f: &AffineForm| {
            out.extend_from_slice(&f.coeffs);
            out.push(f.constant);
        };
        for g in &self.groups {
            push(&mut out, &g.denominator);
            for (t, n) in &g.terms {
                out.push(*t);
                push(&mut out, n);
            }
        }
        out
    }

    /// The fit of the same shape with [`Self::coefficients`] replaced.
    pub fn with_coefficients(&self, c: &[Complex64]) -> Self {
        let mut out = self.clone();
        let mut it = c.iter().copied();
        let mut next = || it.next().expect("coefficient count");
        let fill = |f: &mut AffineForm, next: &mut dyn FnMut() -> Complex64| {
            for v in f.coeffs.iter_mut() {
                *v = next();
            }
            f.constant = next();
        };
        for g in &mut out.groups {
            fill(&mut g.denominator, &mut next);
            for (t, n) in &mut g.terms {
                *t = next();
                fill(n, &mut next);
            }
        }
        out
    }

    /// `x` followed by `1 / D_g(x)` for every group.
    pub fn with_reciprocals(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = x[..self.nvars].to_vec();
        out.extend(self.groups.iter().map(|g| cx(1.0) / g.denominator.eval(x)));
        out
    }
}

/// Which parameterization a critical system comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    AnchoredPoint,
    AnchoredPointStd,
    AnchoredLine,
    AnchoredLineStd,
    PointMultiview,
    Custom,
}

/// A square polynomial system, with the fit it came from when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSystem {
    pub kind: SystemKind,
    pub equations: Vec<Polynomial>,
    pub fit: Option<RationalFit>,
}

impl CriticalSystem {
    pub fn from_fit(fit: RationalFit, kind: SystemKind) -> Self {
        Self {
            kind,
            equations: fit.critical_equations(),
            fit: Some(fit),
        }
    }

    /// The system of [`RationalFit::reciprocal_equations`]. Its roots carry
    /// the reciprocal denominators after the fit's variables.
    pub fn reciprocal_from_fit(fit: RationalFit, kind: SystemKind) -> Self {
        Self {
            kind,
            equations: fit.reciprocal_equations(),
            fit: Some(fit),
        }
    }

    pub fn from_equations(equations: Vec<Polynomial>) -> Self {
        Self {
            kind: SystemKind::Custom,
            equations,
            fit: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.equations.first().map_or(0, Polynomial::nvars)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.equations.iter().map(Polynomial::degree).collect()
    }

    /// Number of paths of the total-degree homotopy.
    pub fn total_degree(&self) -> usize {
        self.degrees().iter().product()
    }
}

/// Reduced anchored-point fit in `t`: `s_j(t) = kappa_j y0(t) / y1(t)`.
pub fn anchored_point_fit(problem: &ReducedPointProblem) -> Result<RationalFit> {
    let groups = problem
        .reduced_cameras
        .iter()
        .zip(&problem.reduced_data)
        .map(|(c, y)| {
            let k = y[1];
            ResidualGroup {
                denominator: AffineForm::real(&[c[(1, 0)]], c[(1, 1)]),
                terms: vec![(cx(y[0]), AffineForm::real(&[k * c[(0, 0)]], k * c[(0, 1)]))],
            }
        })
        .collect();
    RationalFit::new(1, groups)
}

/// Anchored-point fit in `t` against the raw affine image coordinates.
pub fn anchored_point_fit_std(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    track: &PointTrack,
) -> Result<RationalFit> {
    if arrangement.len() != track.len() {
        return Err(Error::ArityMismatch {
            expected: arrangement.len(),
            got: track.len(),
        });
    }
    let groups = arrangement
        .iter()
        .zip(track.views())
        .map(|(camera, q)| {
            let m = camera.matrix() * line.span();
            let form = |r: usize| AffineForm::real(&[m[(r, 0)]], m[(r, 1)]);
            ResidualGroup {
                denominator: form(2),
                terms: vec![(cx(q[0]), form(0)), (cx(q[1]), form(1))],
            }
        })
        .collect();
    RationalFit::new(1, groups)
}

/// Reduced anchored-line fit in `Y = (y0, y1, 1)`.
pub fn anchored_line_fit(problem: &ReducedLineProblem) -> Result<RationalFit> {
    let groups = problem
        .reduced_cameras
        .iter()
        .zip(&problem.reduced_data)
        .map(|(c, y)| {
            let k = y[1];
            ResidualGroup {
                denominator: AffineForm::real(&[c[(1, 0)], c[(1, 1)]], c[(1, 2)]),
                terms: vec![(
                    cx(y[0]),
                    AffineForm::real(&[k * c[(0, 0)], k * c[(0, 1)]], k * c[(0, 2)]),
                )],
            }
        })
        .collect();
    RationalFit::new(2, groups)
}

/// Anchored-line fit in `Y` against the raw line-patch coordinates.
pub fn anchored_line_fit_std(problem: &ReducedLineProblem, track: &LineTrack) -> Result<RationalFit> {
    if problem.len() != track.len() {
        return Err(Error::ArityMismatch {
            expected: problem.len(),
            got: track.len(),
        });
    }
    let groups = problem
        .image_maps
        .iter()
        .zip(track.views())
        .map(|(m, l)| {
            let u: Vector2<f64> = l.patch_coords().ok_or(Error::PatchInfinity)?;
            let form = |r: usize| AffineForm::real(&[m[(r, 0)], m[(r, 1)]], m[(r, 2)]);
            Ok(ResidualGroup {
                denominator: form(2),
                terms: vec![(cx(u[0]), form(0)), (cx(u[1]), form(1))],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RationalFit::new(2, groups)
}

/// Reprojection fit of an affine 3D point against a point track.
pub fn point_mv_fit(arrangement: &CameraArrangement, track: &PointTrack) -> Result<RationalFit> {
    if arrangement.len() != track.len() {
        return Err(Error::ArityMismatch {
            expected: arrangement.len(),
            got: track.len(),
        });
    }
    let groups = arrangement
        .iter()
        .zip(track.views())
        .map(|(camera, q)| {
            let c = camera.matrix();
            let form = |r: usize| AffineForm::real(&[c[(r, 0)], c[(r, 1)], c[(r, 2)]], c[(r, 3)]);
            ResidualGroup {
                denominator: form(2),
                terms: vec![(cx(q[0]), form(0)), (cx(q[1]), form(1))],
            }
        })
        .collect();
    RationalFit::new(3, groups)
}

pub fn build_anchored_point_system(problem: &ReducedPointProblem) -> Result<CriticalSystem> {
    Ok(CriticalSystem::from_fit(anchored_point_fit(problem)?, SystemKind::AnchoredPoint))
}

pub fn build_anchored_point_system_std(
    arrangement: &CameraArrangement,
    line: &SpatialLine,
    track: &PointTrack,
) -> Result<CriticalSystem> {
    Ok(CriticalSystem::from_fit(
        anchored_point_fit_std(arrangement, line, track)?,
        SystemKind::AnchoredPointStd,
    ))
}

pub fn build_anchored_line_system(problem: &ReducedLineProblem) -> Result<CriticalSystem> {
    Ok(CriticalSystem::from_fit(anchored_line_fit(problem)?, SystemKind::AnchoredLine))
}

pub fn build_anchored_line_system_std(
    problem: &ReducedLineProblem,
    track: &LineTrack,
) -> Result<CriticalSystem> {
    Ok(CriticalSystem::from_fit(
        anchored_line_fit_std(problem, track)?,
        SystemKind::AnchoredLineStd,
    ))
}

pub fn build_point_mv_system(
    arrangement: &CameraArrangement,
    track: &PointTrack,
) -> Result<CriticalSystem> {
    Ok(CriticalSystem::from_fit(
        point_mv_fit(arrangement, track)?,
        SystemKind::PointMultiview,
    ))
}

/// `Y` for a point `(y0, y1)` of the line-parameter chart.
pub fn chart_point(y: &[f64]) -> Vector3<f64> {
    Vector3::new(y[0], y[1], 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{project_line, project_point, HomPoint3};
    use crate::random;
    use crate::reduction::{reduce_anchored_line, reduce_anchored_point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_point_instance(seed: u64, m: usize) -> (CameraArrangement, SpatialLine, HomPoint3, PointTrack) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arr = random::arrangement(m, &mut rng).unwrap();
        let line = random::line(&mut rng);
        let x = line.point_at(0.2, 0.9).unwrap();
        let track = PointTrack::new(
            arr.iter()
                .map(|c| {
                    let q = project_point(c, &x).unwrap().to_affine().unwrap();
                    q + Vector2::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01))
                })
                .collect(),
        );
        (arr, line, x, track)
    }

    fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn cubed_denominators(fit: &RationalFit, x: &[Complex64]) -> Complex64 {
        fit.groups()
            .iter()
            .map(|g| {
                let d = g.denominator.eval(x);
                d * d * d
            })
            .product()
    }

    /// Each cleared equation is `-(prod D^3 / 2) df/dx_k` up to one positive
    /// constant, checked at pairs of random complex points.
    fn check_cleared_gradient(fit: &RationalFit, rng: &mut ChaCha8Rng) {
        let eqs = fit.critical_equations();
        let ratio = |x: &[Complex64], k: usize| {
            -fit.gradient(x)[k] * cubed_denominators(fit, x) / 2.0 / eqs[k].eval(x)
        };
        for _ in 0..20 {
            let x1 = random_complex(rng, fit.nvars());
            let x2 = random_complex(rng, fit.nvars());
            for k in 0..fit.nvars() {
                let (r1, r2) = (ratio(&x1, k), ratio(&x2, k));
                assert!((r1 - r2).norm() <= 1e-8 * r1.norm(), "{r1} {r2}");
                assert!(r1.im.abs() <= 1e-8 * r1.norm() && r1.re > 0.0);
            }
        }
    }

    #[test]
    fn cleared_equations_match_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let (arr, line, _, track) = noisy_point_instance(71, 3);
        let reduced = reduce_anchored_point(&arr, &line, &track).unwrap();
        check_cleared_gradient(&anchored_point_fit(&reduced).unwrap(), &mut rng);
        check_cleared_gradient(&anchored_point_fit_std(&arr, &line, &track).unwrap(), &mut rng);
        check_cleared_gradient(&point_mv_fit(&arr, &track).unwrap(), &mut rng);

        let x = random::point(&mut rng);
        let through = SpatialLine::from_span(x.coords(), random::point(&mut rng).coords()).unwrap();
        let lines = LineTrack::new(arr.iter().map(|c| project_line(c, &through).unwrap()).collect()).unwrap();
        let lp = reduce_anchored_line(&arr, &x, &lines).unwrap();
        check_cleared_gradient(&anchored_line_fit(&lp).unwrap(), &mut rng);
        check_cleared_gradient(&anchored_line_fit_std(&lp, &lines).unwrap(), &mut rng);
    }

    #[test]
    fn system_degrees() {
        for m in 2..=4 {
            let (arr, line, _, track) = noisy_point_instance(72 + m as u64, m);
            let reduced = reduce_anchored_point(&arr, &line, &track).unwrap();
            let sys = build_anchored_point_system(&reduced).unwrap();
            assert_eq!(sys.degrees(), vec![3 * m - 2]);
            let pmv = build_point_mv_system(&arr, &track).unwrap();
            assert_eq!(pmv.degrees(), vec![3 * m - 1; 3]);
        }
    }

    #[test]
    fn noiseless_parameter_is_a_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let arr = random::arrangement(3, &mut rng).unwrap();
        let line = random::line(&mut rng);
        let x = line.point_at(0.6, 0.7).unwrap();
        let track = PointTrack::new(
            arr.iter()
                .map(|c| project_point(c, &x).unwrap().to_affine().unwrap())
                .collect(),
        );
        let reduced = reduce_anchored_point(&arr, &line, &track).unwrap();
        let coords = line.span().transpose() * x.coords();
        let t = cx(coords[0] / coords[1]);
        let sys = build_anchored_point_system(&reduced).unwrap();
        assert!(sys.equations[0].eval(&[t]).norm() <= 1e-10);
        assert!(sys.fit.unwrap().gradient(&[t])[0].norm() <= 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let (arr, _, _, track) = noisy_point_instance(75, 3);
        let fit = point_mv_fit(&arr, &track).unwrap();
        let h = 1e-6;
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let xc: Vec<Complex64> = x.iter().map(|&v| cx(v)).collect();
            let grad = fit.gradient(&xc);
            let jt_r = fit.jacobian_real(&x).transpose() * nalgebra::DVector::from_vec(fit.residuals_real(&x));
            for k in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (fit.objective_real(&xp) - fit.objective_real(&xm)) / (2.0 * h);
                let tol = 1e-5 * (1.0 + fd.abs());
                assert!((grad[k].re - fd).abs() <= tol, "{} {}", grad[k], fd);
                assert!((2.0 * jt_r[k] - fd).abs() <= tol);
            }
        }
    }

    #[test]
    fn degenerate_denominator_is_rejected() {
        let g = ResidualGroup {
            denominator: AffineForm::real(&[0.0], 0.0),
            terms: vec![(cx(1.0), AffineForm::real(&[1.0], 0.0))],
        };
        assert_eq!(RationalFit::new(1, vec![g]), Err(Error::DegenerateDenominator));
    }
}
