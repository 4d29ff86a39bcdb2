use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which leading coefficients are dropped.
pub const TRIM_TOL: f64 = 1e-14;

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)| / sum |c_k| |z|^k`.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Parlett-Reinsch balancing by powers of two.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Newton iterations from `z`, keeping the iterate of least backward error.
fn polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut best = (backward_error(coeffs, z), z);
    for _ in 0..10 {
        let (p, dp) = horner(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        z -= p / dp;
        let err = backward_error(coeffs, z);
        if err.is_nan() {
            break;
        }
        if err < best.0 {
            best = (err, z);
        }
    }
    best.1
}

/// All complex roots of `sum_k coeffs[k] t^k`, with multiplicity.
///
/// Leading coefficients below [`TRIM_TOL`] relative to the largest are
/// discarded; a nonzero constant has no roots.
pub fn solve_univariate(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::ZeroPolynomial);
    }
    let mut hi = coeffs.len() - 1;
    while coeffs[hi].norm() <= TRIM_TOL * scale {
        hi -= 1;
    }
    let mut lo = 0;
    while coeffs[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let reduced = &coeffs[lo..=hi];
    let n = reduced.len() - 1;
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        roots.push(-reduced[0] / reduced[1]);
        return Ok(roots);
    }
    let lead = reduced[n];
    let mut companion = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 1..n {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -reduced[i] / lead;
    }
    balance(&mut companion);
    let schur = Schur::try_new(companion, f64::EPSILON, 100 * n)
        .ok_or(Error::RankDeficiency("companion eigenvalues did not converge"))?;
    let eig = schur.unpack().1.diagonal();
    roots.extend(eig.iter().map(|&z| polish(reduced, z)));
    Ok(roots)
}
