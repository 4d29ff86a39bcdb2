use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::system::RationalFit;

/// A nonlinear least-squares problem over a manifold with a retraction.
pub trait LeastSquares {
    type Point: Clone;

    fn residuals(&self, p: &Self::Point) -> DVector<f64>;
    fn jacobian(&self, p: &Self::Point) -> DMatrix<f64>;
    /// The point reached from `p` by the tangent step `step`.
    fn retract(&self, p: &Self::Point, step: &DVector<f64>) -> Self::Point;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineConfig {
    pub max_iterations: usize,
    /// Stop once a step is this small.
    pub step_tol: f64,
    pub max_damping: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            step_tol: 1e-14,
            max_damping: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refined<P> {
    pub point: P,
    /// `||r||^2` at `point`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Least-squares step `argmin ||J d + r||^2 + damping ||D d||^2` with `D` the
/// column norms of `J`.
fn damped_step(jac: &DMatrix<f64>, r: &DVector<f64>, damping: f64) -> Option<DVector<f64>> {
    let (m, n) = jac.shape();
    let (a, b) = if damping > 0.0 {
        let mut a = DMatrix::zeros(m + n, n);
        a.rows_mut(0, m).copy_from(jac);
        let mut b = DVector::zeros(m + n);
        b.rows_mut(0, m).copy_from(&(-r));
        for k in 0..n {
            let scale = jac.column(k).norm().max(1e-300);
            a[(m + k, k)] = libm::sqrt(damping) * scale;
        }
        (a, b)
    } else {
        (jac.clone(), -r)
    };
    let svd = a.svd(true, true);
    let eps = svd.singular_values.max() * 1e-14;
    svd.solve(&b, eps).ok()
}

/// Levenberg-Marquardt flavored Gauss-Newton: undamped steps while they
/// decrease the cost, damping raised tenfold on each rejection.
pub fn gauss_newton_refine<P: LeastSquares>(
    problem: &P,
    start: P::Point,
    cfg: &RefineConfig,
) -> Refined<P::Point> {
    let mut point = start;
    let mut r = problem.residuals(&point);
    let mut cost = r.norm_squared();
    let mut damping = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations && cost.is_finite() {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = problem.jacobian(&point);
        let Some(step) = damped_step(&jac, &r, damping) else {
            break;
        };
        let candidate = problem.retract(&point, &step);
        let r_new = problem.residuals(&candidate);
        let cost_new = r_new.norm_squared();
        let small = step.norm() <= cfg.step_tol;
        if cost_new.is_finite() && cost_new <= cost {
            let stalled = damping == 0.0 && cost - cost_new <= 1e-14 * cost;
            point = candidate;
            r = r_new;
            cost = cost_new;
            damping = if damping > 1e-9 { damping / 10.0 } else { 0.0 };
            if small || stalled {
                converged = true;
                break;
            }
        } else {
            if small {
                converged = true;
                break;
            }
            damping = if damping == 0.0 { 1e-6 } else { damping * 10.0 };
            if damping > cfg.max_damping {
                converged = true;
                break;
            }
        }
    }
    Refined {
        point,
        cost,
        iterations,
        converged,
    }
}

/// Real least squares in the fit's variables.
impl LeastSquares for RationalFit {
    type Point = Vec<f64>;

    fn residuals(&self, p: &Vec<f64>) -> DVector<f64> {
        DVector::from_vec(self.residuals_real(p))
    }

    fn jacobian(&self, p: &Vec<f64>) -> DMatrix<f64> {
        self.jacobian_real(p)
    }

    fn retract(&self, p: &Vec<f64>, step: &DVector<f64>) -> Vec<f64> {
        p.iter().zip(step.iter()).map(|(a, b)| a + b).collect()
    }
}
