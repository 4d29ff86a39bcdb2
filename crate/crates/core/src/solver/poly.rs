use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sparse multivariate polynomial with complex coefficients.
///
/// Terms are kept sorted by exponent vector with no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<(Vec<u16>, Complex64)>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        Self::from_terms(nvars, [(vec![0; nvars], c)])
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(nvars, [(e, Complex64::new(1.0, 0.0))])
    }

    /// `sum_i coeffs[i] x_i + constant`.
    pub fn affine(coeffs: &[Complex64], constant: Complex64) -> Self {
        let n = coeffs.len();
        let mut terms: Vec<(Vec<u16>, Complex64)> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (e, c)
            })
            .collect();
        terms.push((vec![0; n], constant));
        Self::from_terms(n, terms)
    }

    /// Sums duplicate exponents and drops zero coefficients.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u16>, Complex64)>,
    {
        let mut map: BTreeMap<Vec<u16>, Complex64> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            *map.entry(e).or_insert_with(zero) += c;
        }
        Self {
            nvars,
            terms: map.into_iter().filter(|(_, c)| *c != zero()).collect(),
        }
    }

    /// Univariate polynomial from coefficients, lowest degree first.
    pub fn univariate(coeffs: &[Complex64]) -> Self {
        Self::from_terms(
            1,
            coeffs.iter().enumerate().map(|(k, &c)| (vec![k as u16], c)),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u16>, Complex64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn powers(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let deg = self.degree();
        x.iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(deg + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=deg {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars, "argument length");
        let pw = self.powers(x);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (v, &k)| acc * pw[v][k as usize])
            })
            .sum()
    }

    /// `sum |c| |x^e|`, the natural scale for a relative residual.
    pub fn eval_abs(&self, x: &[Complex64]) -> f64 {
        let pw = self.powers(x);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(c.norm(), |acc, (v, &k)| acc * pw[v][k as usize].norm())
            })
            .sum()
    }

    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut d = e.clone();
                d[i] -= 1;
                (d, c * f64::from(e[i]))
            }),
        )
    }

    /// The homogenization in `nvars + 1` variables, the new one first.
    pub fn homogenize(&self) -> Self {
        let deg = self.degree() as u16;
        Self::from_terms(
            self.nvars + 1,
            self.terms.iter().map(|(e, c)| {
                let total: u16 = e.iter().sum();
                let mut h = Vec::with_capacity(self.nvars + 1);
                h.push(deg - total);
                h.extend_from_slice(e);
                (h, *c)
            }),
        )
    }

    /// Coefficients of a univariate polynomial, lowest degree first.
    pub fn to_univariate(&self) -> Result<Vec<Complex64>> {
        if self.nvars != 1 {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected 1 variable, got {}",
                self.nvars
            )));
        }
        let mut out = vec![zero(); self.degree() + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = *c;
        }
        Ok(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        Polynomial::from_terms(self.nvars, self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut map: BTreeMap<Vec<u16>, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *map.entry(e).or_insert_with(zero) += ca * cb;
            }
        }
        Polynomial {
            nvars: self.nvars,
            terms: map.into_iter().filter(|(_, c)| *c != zero()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn arithmetic_and_degree() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &x) - &(&y * &Polynomial::constant(2, c(3.0)));
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(&[c(2.0), c(1.0)]), c(1.0));
        assert!((&p - &p).is_zero());
        assert_eq!(p.partial(0), x.scale(c(2.0)));
        assert_eq!((&x + &y).pow(2).terms().len(), 3);
    }

    #[test]
    fn homogenization_is_homogeneous() {
        let p = Polynomial::from_terms(
            2,
            [(vec![2, 1], c(1.0)), (vec![1, 0], c(-2.0)), (vec![0, 0], c(5.0))],
        );
        let h = p.homogenize();
        assert_eq!(h.nvars(), 3);
        assert!(h.terms().iter().all(|(e, _)| e.iter().sum::<u16>() == 3));
        let x = [c(1.0), c(0.7), c(-1.3)];
        assert!((h.eval(&x) - p.eval(&x[1..])).norm() <= 1e-14);
    }

    #[test]
    fn univariate_round_trip() {
        let coeffs = [c(1.0), c(0.0), c(-2.0), c(4.0)];
        let p = Polynomial::univariate(&coeffs);
        assert_eq!(p.to_univariate().unwrap(), coeffs.to_vec());
        assert!(Polynomial::var(2, 0).to_univariate().is_err());
    }

    proptest! {
        #[test]
        fn eval_matches_horner(coeffs in prop::collection::vec(-10.0f64..10.0, 1..12), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let cs: Vec<Complex64> = coeffs.iter().map(|&v| c(v)).collect();
            let p = Polynomial::univariate(&cs);
            let z = Complex64::new(x, y);
            let horner = cs.iter().rev().fold(zero(), |acc, &a| acc * z + a);
            prop_assert!((p.eval(&[z]) - horner).norm() <= 1e-10 * (1.0 + horner.norm()));
        }

        #[test]
        fn product_evaluates_as_product(a in prop::collection::vec(-3.0f64..3.0, 3), b in prop::collection::vec(-3.0f64..3.0, 3), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = Polynomial::affine(&[c(a[0]), c(a[1])], c(a[2]));
            let q = Polynomial::affine(&[c(b[0]), c(b[1])], c(b[2]));
            let pt = [c(x), c(y)];
            let lhs = (&p * &q).eval(&pt);
            prop_assert!((lhs - p.eval(&pt) * q.eval(&pt)).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }
}
