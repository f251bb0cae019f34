//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Just enough arithmetic for matrix potentials with polynomial entries:
//! evaluation, products, and exact integrals over axis-aligned cubes.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Polynomial in `d` variables, stored as exponent-vector → coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub dim: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: i64) -> Self {
        Self::from_terms(dim, [(vec![0; dim], BigRational::from_integer(c.into()))])
    }

    /// Monomial c·x_k^e.
    pub fn monomial(dim: usize, var: usize, exp: u32, c: i64) -> Self {
        assert!(var < dim);
        let mut exps = vec![0; dim];
        exps[var] = exp;
        Self::from_terms(dim, [(exps, BigRational::from_integer(c.into()))])
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), dim);
            if !c.is_zero() {
                let entry = map.entry(e).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        Poly { dim, terms: map }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        Poly::from_terms(
            self.dim,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (e.clone(), c.clone())),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&BigRational::from_integer((-1).into())))
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::from_terms(
            self.dim,
            self.terms.iter().map(|(e, v)| (e.clone(), v * c)),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut out: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.entry(e).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Poly {
            dim: self.dim,
            terms: out,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mono: f64 = e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product();
                c.to_f64().unwrap_or(f64::NAN) * mono
            })
            .sum()
    }

    /// Exact integral over the cube Q(center, side) = Π [cᵢ − s/2, cᵢ + s/2].
    pub fn integrate_cube(&self, center: &[BigRational], side: &BigRational) -> BigRational {
        assert_eq!(center.len(), self.dim);
        let half = side / BigRational::from_integer(2.into());
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut factor = c.clone();
            for (k, (ci, &ei)) in center.iter().zip(e.iter()).enumerate() {
                let _ = k;
                let hi = ci + &half;
                let lo = ci - &half;
                let p = ei + 1;
                let term = (pow_rat(&hi, p) - pow_rat(&lo, p))
                    / BigRational::from_integer(BigInt::from(p));
                factor *= term;
            }
            total += factor;
        }
        total
    }

    /// L∞ norm of the coefficient vector, as f64.
    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

fn pow_rat(x: &BigRational, p: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..p {
        out *= x;
    }
    out
}

pub fn big_rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_integrals() {
        // ∫_{[-1/2,1/2]} x^4 = 1/80, x^6 = 1/448.
        let x4 = Poly::monomial(1, 0, 4, 1);
        let x6 = Poly::monomial(1, 0, 6, 1);
        let c = vec![BigRational::zero()];
        let side = BigRational::one();
        assert_eq!(x4.integrate_cube(&c, &side), big_rat(1, 80));
        assert_eq!(x6.integrate_cube(&c, &side), big_rat(1, 448));
        // Odd power over symmetric cube vanishes.
        let x5 = Poly::monomial(1, 0, 5, 1);
        assert!(x5.integrate_cube(&c, &side).is_zero());
    }

    #[test]
    fn shifted_cube_integral() {
        // ∫_{x-1/2}^{x+1/2} (t)^2 dt = x^2 + 1/12 at x = 3.
        let sq = Poly::monomial(1, 0, 2, 1);
        let v = sq.integrate_cube(&[big_rat(3, 1)], &BigRational::one());
        assert_eq!(v, big_rat(9, 1) + big_rat(1, 12));
    }

    #[test]
    fn product_and_eval() {
        let x = Poly::monomial(2, 0, 1, 1);
        let y = Poly::monomial(2, 1, 1, 1);
        let p = x.mul(&y).add(&Poly::constant(2, 3));
        assert_eq!(p.eval(&[2.0, 5.0]), 13.0);
        assert_eq!(p.degree(), 2);
    }
}
