//! Monodromy completion of a partial critical-point set: known solutions are
//! carried around random loops through the space of cameras and data, and the
//! permutation the loop induces reveals solutions the first solve missed.

use alloc::vec::Vec;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::homotopy::TrackerConfig;
use super::system::RationalFit;

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyConfig {
    /// Stop after this many consecutive loops that find nothing new.
    pub stall_loops: usize,
    pub max_loops: usize,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        Self {
            stall_loops: 5,
            max_loops: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyResult {
    pub solutions: Vec<Vec<Complex64>>,
    pub loops: usize,
    /// Segments abandoned because the step size collapsed.
    pub failures: usize,
}

fn norm(x: &[Complex64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

fn norm_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>())
}

fn lerp(a: &[Complex64], b: &[Complex64], s: f64) -> Vec<Complex64> {
    a.iter().zip(b).map(|(p, q)| p + (q - p) * s).collect()
}

/// `dx/ds` along `grad(x; a + s (b - a)) = 0`, differentiating in `s` by
/// central differences.
fn tangent(fit: &RationalFit, a: &[Complex64], b: &[Complex64], x: &[Complex64], s: f64) -> Option<Vec<Complex64>> {
    const DS: f64 = 1e-6;
    let at = |u: f64| fit.with_coefficients(&lerp(a, b, u));
    let gp = at(s + DS).gradient(x);
    let gm = at(s - DS).gradient(x);
    let hs = DVector::from_iterator(x.len(), gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * DS)));
    let v = at(s).hessian(x).lu().solve(&(-hs))?;
    v.iter().all(|z| z.is_finite()).then(|| v.iter().copied().collect())
}

/// Newton on the gradient of `fit` from `x`, rejecting a large first step.
fn correct(fit: &RationalFit, x: &[Complex64], max_first: f64, iters: usize, tol: f64) -> Option<Vec<Complex64>> {
    let mut x = x.to_vec();
    for i in 0..iters {
        let g = DVector::from_vec(fit.gradient(&x));
        let step = fit.hessian(&x).lu().solve(&g)?;
        let sn = step.norm();
        let xn = norm(&x);
        if !sn.is_finite() || (i == 0 && sn > max_first * (1.0 + xn)) {
            return None;
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
        if sn <= tol * (1.0 + xn) {
            return Some(x);
        }
    }
    None
}

/// Carries a critical point `x` of `fit` with coefficients `a` to the
/// coefficients `b` along the straight segment.
pub fn track_segment(
    fit: &RationalFit,
    a: &[Complex64],
    b: &[Complex64],
    x: &[Complex64],
    cfg: &TrackerConfig,
) -> Option<Vec<Complex64>> {
    let add = |x: &[Complex64], v: &[Complex64], f: f64| -> Vec<Complex64> {
        x.iter().zip(v).map(|(p, q)| p + q * f).collect()
    };
    let mut x = x.to_vec();
    let mut s = 0.0;
    let mut h = cfg.initial_step;
    let mut steps = 0;
    while s < 1.0 {
        steps += 1;
        if steps > cfg.max_steps {
            return None;
        }
        let dh = h.min(1.0 - s);
        let predicted = (|| {
            let k1 = tangent(fit, a, b, &x, s)?;
            let k2 = tangent(fit, a, b, &add(&x, &k1, dh / 2.0), s + dh / 2.0)?;
            let k3 = tangent(fit, a, b, &add(&x, &k2, dh / 2.0), s + dh / 2.0)?;
            let k4 = tangent(fit, a, b, &add(&x, &k3, dh), s + dh)?;
            let inc: Vec<Complex64> = (0..x.len())
                .map(|i| (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) / 6.0)
                .collect();
            Some(add(&x, &inc, dh))
        })();
        let target = fit.with_coefficients(&lerp(a, b, s + dh));
        match predicted.and_then(|y| correct(&target, &y, cfg.max_correction, 5, 1e-9)) {
            Some(y) => {
                x = y;
                s += dh;
                h = (h * 2.0).min(cfg.max_step);
            }
            None => {
                h /= 2.0;
                if h < cfg.min_step {
                    return None;
                }
            }
        }
    }
    let (y, converged, cond) = fit.with_coefficients(b).newton_critical(&x, 20);
    (converged && cond <= cfg.singular_condition && norm_diff(&y, &x) <= 1e-6 * (1.0 + norm(&x))).then_some(y)
}

fn random_point<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale)
        .collect()
}

/// Extends `known` critical points of `fit` by monodromy loops through two
/// random complex fits of the same shape.
///
/// Each loop moves every known solution along `fit -> P -> Q -> fit`,
/// varying cameras and data together; endpoints that are new nonsingular
/// critical points with all denominators nonzero are added. Stops after
/// [`MonodromyConfig::stall_loops`] fruitless loops.
pub fn monodromy_complete<R: Rng + ?Sized>(
    fit: &RationalFit,
    known: Vec<Vec<Complex64>>,
    cfg: &TrackerConfig,
    mcfg: &MonodromyConfig,
    rng: &mut R,
) -> MonodromyResult {
    let base = fit.coefficients();
    let scale = libm::sqrt(base.iter().map(|t| t.norm_sqr()).sum::<f64>() / base.len().max(1) as f64);
    let mut solutions = known;
    let mut loops = 0;
    let mut failures = 0;
    let mut stall = 0;
    if solutions.is_empty() {
        return MonodromyResult { solutions, loops, failures };
    }
    while stall < mcfg.stall_loops && loops < mcfg.max_loops {
        loops += 1;
        let p = random_point(base.len(), scale, rng);
        let q = random_point(base.len(), scale, rng);
        let mut added = false;
        for i in 0..solutions.len() {
            let end = track_segment(fit, &base, &p, &solutions[i], cfg)
                .and_then(|y| track_segment(fit, &p, &q, &y, cfg))
                .and_then(|y| track_segment(fit, &q, &base, &y, cfg));
            let Some(y) = end else {
                failures += 1;
                continue;
            };
            if fit.min_denominator_ratio(&y) <= 1e-8 {
                continue;
            }
            let yn = norm(&y);
            if !solutions.iter().any(|z| norm_diff(z, &y) <= cfg.dedup_radius * (1.0 + yn)) {
                solutions.push(y);
                added = true;
            }
        }
        stall = if added { 0 } else { stall + 1 };
    }
    MonodromyResult { solutions, loops, failures }
}
