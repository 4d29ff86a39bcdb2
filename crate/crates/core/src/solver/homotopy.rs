//! Total-degree homotopy continuation.
//!
//! The target system is homogenized and tracked on a random complex affine
//! chart `a . X = 1` of projective space, so paths heading to infinity stay
//! bounded. The start system is `x_i^{d_i} - x_0^{d_i}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::poly::Polynomial;
use super::system::{CriticalSystem, RationalFit};
use super::univariate::solve_univariate;
use crate::error::Result;

/// Largest supported number of homogeneous variables.
const MAXN: usize = 8;

/// Capacity of the stack power table: variables times (degree + 1).
const POWER_TABLE: usize = 256;

type Vecn = [Complex64; MAXN];
type Matn = [[Complex64; MAXN]; MAXN];

/// Newton step size, relative to the point, that counts as converged.
const CONVERGED_STEP: f64 = 1e-10;

/// Roots of the cleared equations whose relative rational gradient exceeds
/// this are spurious.
const GRADIENT_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub newton_tol: f64,
    pub max_corrector_iters: usize,
    pub infinity_threshold: f64,
    pub dedup_radius: f64,
    /// Endpoints with a larger condition estimate are near-singular.
    pub singular_condition: f64,
    /// Step cap per path.
    pub max_steps: usize,
    /// Largest first Newton correction accepted, relative to `1 + |x|`.
    pub max_correction: f64,
    /// Fixed homotopy phase; drawn from the generator when `None`.
    pub gamma: Option<Complex64>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            max_step: 0.1,
            min_step: 1e-7,
            newton_tol: 1e-11,
            max_corrector_iters: 3,
            infinity_threshold: 1e8,
            dedup_radius: 1e-8,
            singular_condition: 1e10,
            max_steps: 20_000,
            max_correction: 0.1,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    /// The adaptive step fell below the minimum.
    MinStep,
    /// The per-path step budget ran out.
    StepBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    FiniteNonsingular,
    NearSingular,
    AtInfinity,
    /// A root of the cleared equations where a fit denominator vanishes.
    Spurious,
    PathFailure(FailureReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Affine coordinates; for points at infinity, the last tracked chart
    /// point dehomogenized as far as possible.
    pub x: Vec<Complex64>,
    pub kind: SolutionKind,
    pub objective: Option<Complex64>,
    pub condition: f64,
    /// Largest relative backward error over the equations.
    pub residual: f64,
    /// Accepted and rejected predictor steps on the path.
    pub steps: usize,
    /// Homotopy time the path reached.
    pub end_tau: f64,
}

impl CriticalPoint {
    pub fn is_real(&self, tol: f64) -> bool {
        let norm = self.x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let scale = 1.0 + libm::sqrt(norm);
        self.x.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.x.iter().map(|z| z.re).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointSet {
    pub solutions: Vec<CriticalPoint>,
    pub paths: usize,
    /// Finite nonsingular endpoints merged into an earlier one.
    pub duplicates: usize,
}

/// Imaginary-part tolerance for calling a critical point real.
pub const REAL_TOL: f64 = 1e-8;

impl CriticalPointSet {
    pub fn count(&self, kind: SolutionKind) -> usize {
        self.solutions.iter().filter(|s| s.kind == kind).count()
    }

    pub fn path_failures(&self) -> usize {
        self.solutions
            .iter()
            .filter(|s| matches!(s.kind, SolutionKind::PathFailure(_)))
            .count()
    }

    pub fn finite_nonsingular(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.solutions
            .iter()
            .filter(|s| s.kind == SolutionKind::FiniteNonsingular)
    }

    /// Real finite critical points (singular ones included).
    pub fn real_points(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.solutions
            .iter()
            .filter(|s| {
                matches!(s.kind, SolutionKind::FiniteNonsingular | SolutionKind::NearSingular)
            })
            .filter(|s| s.is_real(REAL_TOL))
    }

    /// The real critical point of least objective value.
    pub fn real_minimizer(&self) -> Option<(Vec<f64>, f64)> {
        self.real_points()
            .filter_map(|s| Some((s.real_part(), s.objective?.re)))
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// A polynomial flattened for fast evaluation against a power table.
#[derive(Debug, Clone)]
struct Flat {
    coeffs: Vec<Complex64>,
    exps: Vec<u16>,
    nvars: usize,
}

impl Flat {
    fn new(p: &Polynomial) -> Self {
        Self {
            coeffs: p.terms().iter().map(|(_, c)| *c).collect(),
            exps: p.terms().iter().flat_map(|(e, _)| e.iter().copied()).collect(),
            nvars: p.nvars(),
        }
    }

    fn eval(&self, pw: &[Complex64], width: usize) -> Complex64 {
        let mut sum = ZERO;
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[k * self.nvars..(k + 1) * self.nvars];
            let mut t = *c;
            for (v, &d) in e.iter().enumerate() {
                if d > 0 {
                    t *= pw[v * width + d as usize];
                }
            }
            sum += t;
        }
        sum
    }

    fn eval_abs(&self, pw: &[Complex64], width: usize) -> f64 {
        let mut sum = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[k * self.nvars..(k + 1) * self.nvars];
            let mut t = c.norm();
            for (v, &d) in e.iter().enumerate() {
                if d > 0 {
                    t *= pw[v * width + d as usize].norm();
                }
            }
            sum += t;
        }
        sum
    }
}

/// Solves `a x = b` in place by partial pivoting; `false` if singular.
fn solve_small(n: usize, a: &mut Matn, b: &mut Vecn) -> bool {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].norm() > a[piv][col].norm() {
                piv = r;
            }
        }
        if a[piv][col].norm() == 0.0 || !a[piv][col].norm().is_finite() {
            return false;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = Complex64::new(1.0, 0.0) / a[col][col];
        for r in col + 1..n {
            let f = a[r][col] * inv;
            if f != ZERO {
                let pivot_row = a[col];
                for (dst, v) in a[r][col..n].iter_mut().zip(&pivot_row[col..n]) {
                    *dst -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col][c] * b[c];
        }
        b[col] = s / a[col][col];
    }
    true
}

fn norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// One tracked homotopy; paths are independent and may be run in any order
/// or in parallel with [`Tracker::track`].
#[derive(Debug, Clone)]
pub struct Tracker<'a> {
    system: &'a CriticalSystem,
    cfg: TrackerConfig,
    /// Affine variable count; the chart has `n + 1` coordinates.
    n: usize,
    degrees: Vec<usize>,
    f: Vec<Flat>,
    df: Vec<Flat>,
    width: usize,
    gamma: Complex64,
    chart: Vec<Complex64>,
}

/// Rescales a homogeneous polynomial to unit root-mean-square modulus over
/// a fixed set of points on the unit torus, where the start system has
/// modulus of order one. Coefficient normalization alone can leave the
/// target orders of magnitude smaller than the start system there.
fn balance(p: &Polynomial) -> Polynomial {
    const SAMPLES: usize = 32;
    let nv = p.nvars();
    let mut sum = 0.0;
    for k in 0..SAMPLES {
        let x: Vec<Complex64> = (0..nv)
            .map(|v| {
                let phase = TAU * libm::fmod((k * nv + v + 1) as f64 * 0.618_033_988_749_894_9, 1.0);
                Complex64::new(libm::cos(phase), libm::sin(phase))
            })
            .collect();
        sum += p.eval(&x).norm_sqr();
    }
    let rms = libm::sqrt(sum / SAMPLES as f64);
    if rms > 0.0 && rms.is_finite() {
        p.scale(Complex64::new(1.0 / rms, 0.0))
    } else {
        p.clone()
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let angle: f64 = rng.random_range(0.0..TAU);
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

impl<'a> Tracker<'a> {
    pub fn new<R: Rng + ?Sized>(system: &'a CriticalSystem, cfg: &TrackerConfig, rng: &mut R) -> Self {
        let n = system.nvars();
        assert!(n < MAXN, "at most {} variables", MAXN - 1);
        assert_eq!(system.equations.len(), n, "square system");
        let hom: Vec<Polynomial> = system.equations.iter().map(|p| balance(&p.homogenize())).collect();
        let degrees = system.degrees();
        let df = hom
            .iter()
            .flat_map(|p| (0..=n).map(move |v| Flat::new(&p.partial(v))))
            .collect();
        let gamma = cfg.gamma.unwrap_or_else(|| random_unit(rng));
        let width = degrees.iter().copied().max().unwrap_or(0) + 1;
        assert!(width * (n + 1) <= POWER_TABLE, "degree too large");
        let scale = 1.0 / libm::sqrt((n + 1) as f64);
        let chart = (0..=n).map(|_| random_unit(rng) * scale).collect();
        Self {
            system,
            cfg: cfg.clone(),
            n,
            width,
            degrees,
            f: hom.iter().map(Flat::new).collect(),
            df,
            gamma,
            chart,
        }
    }

    pub fn path_count(&self) -> usize {
        if self.degrees.contains(&0) {
            0
        } else {
            self.degrees.iter().product()
        }
    }

    fn powers(&self, x: &[Complex64], pw: &mut [Complex64]) {
        for (v, &xv) in x.iter().enumerate() {
            let mut acc = Complex64::new(1.0, 0.0);
            for k in 0..self.width {
                pw[v * self.width + k] = acc;
                acc *= xv;
            }
        }
    }

    /// `H`, `dH/dX` and `dH/dtau` at chart point `x`.
    fn eval(&self, x: &[Complex64], tau: f64, h: &mut Vecn, jac: &mut Matn, ht: &mut Vecn) {
        let n = self.n;
        let big = n + 1;
        let mut table = [ZERO; POWER_TABLE];
        let pw = &mut table[..self.width * big];
        self.powers(x, pw);
        let w = self.width;
        let s = self.gamma * (1.0 - tau);
        for i in 0..n {
            let d = self.degrees[i];
            let fi = self.f[i].eval(pw, w);
            let gi = pw[(i + 1) * w + d] - pw[d];
            h[i] = s * gi + fi * tau;
            ht[i] = fi - self.gamma * gi;
            let df = d as f64;
            for v in 0..big {
                let dg = if v == 0 {
                    -pw[d - 1] * df
                } else if v == i + 1 {
                    pw[v * w + d - 1] * df
                } else {
                    ZERO
                };
                jac[i][v] = s * dg + self.df[i * big + v].eval(pw, w) * tau;
            }
        }
        h[n] = self.chart.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>() - 1.0;
        ht[n] = ZERO;
        jac[n][..big].copy_from_slice(&self.chart);
    }

    fn start_point(&self, index: usize) -> Vecn {
        let mut x = [ZERO; MAXN];
        x[0] = Complex64::new(1.0, 0.0);
        let mut rest = index;
        for i in 0..self.n {
            let d = self.degrees[i];
            let k = rest % d;
            rest /= d;
            let angle = TAU * k as f64 / d as f64;
            x[i + 1] = Complex64::new(libm::cos(angle), libm::sin(angle));
        }
        let s: Complex64 = self.chart.iter().zip(&x).map(|(a, b)| a * b).sum();
        for v in x.iter_mut().take(self.n + 1) {
            *v /= s;
        }
        x
    }

    /// Tracks path `index` (in `0..path_count()`) and classifies its
    /// endpoint. Duplicates are not merged here.
    pub fn track(&self, index: usize) -> CriticalPoint {
        let big = self.n + 1;
        let mut x = self.start_point(index);
        let mut tau = 0.0;
        let mut step = self.cfg.initial_step;
        let mut successes = 0;
        let mut h = [ZERO; MAXN];
        let mut ht = [ZERO; MAXN];
        let mut jac = [[ZERO; MAXN]; MAXN];
        let mut failure = None;
        let mut steps = 0;
        for _ in 0..self.cfg.max_steps {
            steps += 1;
            if tau >= 1.0 {
                break;
            }
            step = step.min(1.0 - tau);
            let mut predicted = x;
            if let Some(v) = self.predict(&x, tau, step, &mut h, &mut jac, &mut ht) {
                for i in 0..big {
                    predicted[i] += v[i];
                }
            }
            let next = if 1.0 - (tau + step) <= 1e-14 { 1.0 } else { tau + step };
            match self.correct(&mut predicted, next) {
                true => {
                    x = predicted;
                    tau = next;
                    successes += 1;
                    if successes >= 2 {
                        step = (step * 2.0).min(self.cfg.max_step);
                        successes = 0;
                    }
                }
                false => {
                    successes = 0;
                    step /= 2.0;
                    if step < self.cfg.min_step {
                        failure = Some(FailureReason::MinStep);
                        break;
                    }
                }
            }
        }
        if tau < 1.0 && failure.is_none() {
            failure = Some(FailureReason::StepBudget);
        }
        let mut end = match failure {
            None => self.finalize(&x[..big]),
            Some(reason) => self.classify_failure(&x[..big], tau, reason),
        };
        end.steps = steps;
        end.end_tau = tau;
        end
    }

    /// `dx/dtau` along the path through `x`.
    fn tangent(&self, x: &[Complex64], tau: f64, h: &mut Vecn, jac: &mut Matn, ht: &mut Vecn) -> Option<Vecn> {
        let big = self.n + 1;
        self.eval(&x[..big], tau, h, jac, ht);
        let mut v = [ZERO; MAXN];
        for i in 0..big {
            v[i] = -ht[i];
        }
        solve_small(big, jac, &mut v).then_some(v)
    }

    /// Classical fourth-order Runge-Kutta increment over `step`.
    fn predict(&self, x: &Vecn, tau: f64, step: f64, h: &mut Vecn, jac: &mut Matn, ht: &mut Vecn) -> Option<Vecn> {
        let big = self.n + 1;
        let shifted = |k: &Vecn, a: f64| {
            let mut y = *x;
            for i in 0..big {
                y[i] += k[i] * a;
            }
            y
        };
        let k1 = self.tangent(x, tau, h, jac, ht)?;
        let k2 = self.tangent(&shifted(&k1, step / 2.0), tau + step / 2.0, h, jac, ht)?;
        let k3 = self.tangent(&shifted(&k2, step / 2.0), tau + step / 2.0, h, jac, ht)?;
        let k4 = self.tangent(&shifted(&k3, step), tau + step, h, jac, ht)?;
        let mut d = [ZERO; MAXN];
        for i in 0..big {
            d[i] = (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0);
        }
        Some(d)
    }

    /// Newton corrector at fixed `tau`; `true` on convergence.
    fn correct(&self, x: &mut Vecn, tau: f64) -> bool {
        let big = self.n + 1;
        let mut h = [ZERO; MAXN];
        let mut ht = [ZERO; MAXN];
        let mut jac = [[ZERO; MAXN]; MAXN];
        let mut last = f64::INFINITY;
        for _ in 0..self.cfg.max_corrector_iters {
            self.eval(&x[..big], tau, &mut h, &mut jac, &mut ht);
            let mut d = [ZERO; MAXN];
            for i in 0..big {
                d[i] = -h[i];
            }
            if !solve_small(big, &mut jac, &mut d) {
                return false;
            }
            let dn = norm(&d[..big]);
            let xn = norm(&x[..big]);
            if !dn.is_finite() || dn > 0.5 * last || dn > self.cfg.max_correction * (1.0 + xn) {
                return false;
            }
            for i in 0..big {
                x[i] += d[i];
            }
            if dn <= self.cfg.newton_tol * (1.0 + xn) {
                return true;
            }
            last = dn;
        }
        false
    }

    /// Affine Newton refinement on the target system. Returns the iterate
    /// of least residual, its residual and condition estimate, and whether
    /// the Newton steps shrank to full precision.
    fn refine(&self, mut x: Vec<Complex64>) -> (Vec<Complex64>, f64, f64, bool) {
        let n = self.n;
        let mut best = (x.clone(), f64::INFINITY);
        let mut converged = false;
        for _ in 0..8 {
            let (res, _, step) = self.newton_data(&x);
            if res < best.1 {
                best = (x.clone(), res);
            }
            let Some(step) = step else { break };
            let sn = norm(&step[..n]);
            if !sn.is_finite() {
                break;
            }
            for i in 0..n {
                x[i] += step[i];
            }
            if sn <= CONVERGED_STEP * (1.0 + norm(&x)) {
                converged = true;
                let (res, _, _) = self.newton_data(&x);
                if res < best.1 {
                    best = (x.clone(), res);
                }
                break;
            }
        }
        let (res, cond, _) = self.newton_data(&best.0);
        (best.0, res, cond, converged)
    }

    /// Relative residual, condition estimate and Newton step at affine `x`.
    fn newton_data(&self, x: &[Complex64]) -> (f64, f64, Option<Vecn>) {
        let n = self.n;
        let big = n + 1;
        let w = self.width;
        let mut chart = [ZERO; MAXN];
        chart[0] = Complex64::new(1.0, 0.0);
        chart[1..big].copy_from_slice(x);
        let mut pw = vec![ZERO; w * big];
        self.powers(&chart[..big], &mut pw);
        let mut res: f64 = 0.0;
        let mut jac = [[ZERO; MAXN]; MAXN];
        let mut rhs = [ZERO; MAXN];
        let mut scaled = DMatrix::from_element(n, n, ZERO);
        for i in 0..n {
            let fi = self.f[i].eval(&pw, w);
            let scale = self.f[i].eval_abs(&pw, w).max(f64::MIN_POSITIVE);
            res = res.max(fi.norm() / scale);
            rhs[i] = -fi;
            for v in 0..n {
                jac[i][v] = self.df[i * big + v + 1].eval(&pw, w);
                scaled[(i, v)] = jac[i][v] / scale;
            }
        }
        let sv = scaled.singular_values();
        let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let cond = if smin > 0.0 { smax / smin * (1.0 + norm(x)) } else { f64::INFINITY };
        let step = solve_small(n, &mut jac, &mut rhs).then_some(rhs);
        (res, cond, step)
    }

    fn point(&self, x: Vec<Complex64>, kind: SolutionKind, residual: f64, condition: f64) -> CriticalPoint {
        let objective = match kind {
            SolutionKind::FiniteNonsingular | SolutionKind::NearSingular => {
                self.system.fit.as_ref().map(|f| f.objective(&x))
            }
            _ => None,
        };
        CriticalPoint {
            x,
            kind,
            objective,
            condition,
            residual,
            steps: 0,
            end_tau: 1.0,
        }
    }

    fn affine(&self, chart: &[Complex64]) -> Option<Vec<Complex64>> {
        let x0 = chart[0];
        if x0.norm() <= norm(chart) / self.cfg.infinity_threshold {
            return None;
        }
        let x: Vec<Complex64> = chart[1..].iter().map(|z| z / x0).collect();
        (norm(&x) <= self.cfg.infinity_threshold).then_some(x)
    }

    fn finalize(&self, chart: &[Complex64]) -> CriticalPoint {
        match self.affine(chart) {
            None => self.point(chart[1..].to_vec(), SolutionKind::AtInfinity, f64::NAN, f64::INFINITY),
            Some(x) => self.classify_affine(x),
        }
    }

    /// Refines an affine point and sorts it into finite, singular or
    /// spurious.
    pub fn classify_affine(&self, x: Vec<Complex64>) -> CriticalPoint {
        let (x, residual, condition, converged) = self.refine(x);
        if norm(&x) > self.cfg.infinity_threshold || !norm(&x).is_finite() {
            return self.point(x, SolutionKind::AtInfinity, residual, condition);
        }
        let Some(fit) = self.system.fit.as_ref() else {
            let kind = if !converged || condition > self.cfg.singular_condition || residual > 1e-10 {
                SolutionKind::NearSingular
            } else {
                SolutionKind::FiniteNonsingular
            };
            return self.point(x, kind, residual, condition);
        };
        if converged && condition <= self.cfg.singular_condition && residual <= 1e-10 && self.genuine(fit, &x) {
            return self.point(x, SolutionKind::FiniteNonsingular, residual, condition);
        }
        // Roots close to the excess loci are ill conditioned in the cleared
        // equations but not in the gradient itself.
        let (y, ok, hess_cond) = fit.newton_critical(&x, 20);
        let moved = norm(&y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        if ok && hess_cond <= self.cfg.singular_condition && moved.is_finite() && self.genuine(fit, &y) {
            let (res, _, _) = self.newton_data(&y);
            return self.point(y, SolutionKind::FiniteNonsingular, res, hess_cond);
        }
        let kind = if !self.genuine(fit, &x) {
            SolutionKind::Spurious
        } else {
            SolutionKind::NearSingular
        };
        self.point(x, kind, residual, condition)
    }

    fn genuine(&self, fit: &RationalFit, x: &[Complex64]) -> bool {
        fit.min_denominator_ratio(x) > 1e-8 && fit.gradient_residual(x) <= GRADIENT_TOL
    }

    fn classify_failure(&self, chart: &[Complex64], tau: f64, reason: FailureReason) -> CriticalPoint {
        if tau > 0.9 {
            if let Some(x) = self.affine(chart) {
                let p = self.classify_affine(x);
                if p.kind == SolutionKind::FiniteNonsingular {
                    return p;
                }
            }
        }
        if tau > 0.999 {
            let x0 = chart[0].norm() / norm(chart);
            let kind = if x0 < 1e-3 {
                SolutionKind::AtInfinity
            } else {
                SolutionKind::NearSingular
            };
            let x = match self.affine(chart) {
                Some(x) => x,
                None => chart[1..].to_vec(),
            };
            return self.point(x, kind, f64::NAN, f64::INFINITY);
        }
        self.point(chart[1..].to_vec(), SolutionKind::PathFailure(reason), f64::NAN, f64::INFINITY)
    }

    /// Merges finite nonsingular endpoints that agree within the dedup
    /// radius.
    pub fn collect(&self, endpoints: Vec<CriticalPoint>) -> CriticalPointSet {
        dedup(endpoints, self.path_count(), self.cfg.dedup_radius)
    }
}

fn dedup(endpoints: Vec<CriticalPoint>, paths: usize, radius: f64) -> CriticalPointSet {
    let mut solutions: Vec<CriticalPoint> = Vec::with_capacity(endpoints.len());
    let mut duplicates = 0;
    for p in endpoints {
        if p.kind == SolutionKind::FiniteNonsingular {
            let close = solutions.iter().any(|q| {
                q.kind == SolutionKind::FiniteNonsingular && {
                    let diff: Vec<Complex64> = p.x.iter().zip(&q.x).map(|(a, b)| a - b).collect();
                    norm(&diff) <= radius * (1.0 + norm(&q.x))
                }
            });
            if close {
                duplicates += 1;
                continue;
            }
        }
        solutions.push(p);
    }
    CriticalPointSet {
        solutions,
        paths,
        duplicates,
    }
}

/// Tracks every path of the total-degree homotopy for `system`.
pub fn track_paths<R: Rng + ?Sized>(
    system: &CriticalSystem,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> CriticalPointSet {
    let tracker = Tracker::new(system, cfg, rng);
    let endpoints = (0..tracker.path_count()).map(|i| tracker.track(i)).collect();
    tracker.collect(endpoints)
}

/// All critical points of `system`: companion-matrix roots for one variable,
/// homotopy continuation otherwise. Roots go through the same refinement and
/// classification either way.
pub fn solve_system<R: Rng + ?Sized>(
    system: &CriticalSystem,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> Result<CriticalPointSet> {
    if system.nvars() != 1 {
        return Ok(track_paths(system, cfg, rng));
    }
    let tracker = Tracker::new(system, cfg, rng);
    let coeffs = system.equations[0].to_univariate()?;
    let roots = solve_univariate(&coeffs)?;
    let paths = roots.len();
    let endpoints = roots
        .into_iter()
        .map(|z| {
            if z.norm() > cfg.infinity_threshold || !z.norm().is_finite() {
                tracker.point(vec![z], SolutionKind::AtInfinity, f64::NAN, f64::INFINITY)
            } else {
                tracker.classify_affine(vec![z])
            }
        })
        .collect();
    Ok(dedup(endpoints, paths, cfg.dedup_radius))
}
