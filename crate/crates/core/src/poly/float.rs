//! Float-coefficient mirror of [`Polynomial`] for the numeric modules.
//!
//! Exponent vectors are packed into a `u128`, 8 bits per variable, so the
//! mirror supports `n <= 16` and exponents up to 255. Terms are kept sorted by
//! key; exact zeros are dropped.

use super::{Monomial, Polynomial};

pub const MAX_FLOAT_VARS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct FloatPoly {
    n: usize,
    terms: Vec<(u128, f64)>,
}

pub fn pack(exponents: &[u32]) -> u128 {
    assert!(
        exponents.len() <= MAX_FLOAT_VARS,
        "too many variables for the float mirror"
    );
    exponents.iter().enumerate().fold(0u128, |acc, (i, &e)| {
        assert!(e < 256, "exponent too large for the float mirror");
        acc | ((e as u128) << (8 * i))
    })
}

pub fn unpack(key: u128, n: usize) -> Vec<u32> {
    (0..n).map(|i| exponent(key, i)).collect()
}

#[inline]
fn exponent(key: u128, i: usize) -> u32 {
    ((key >> (8 * i)) & 0xff) as u32
}

pub fn key_degree(key: u128, n: usize) -> u32 {
    (0..n).map(|i| exponent(key, i)).sum()
}

impl FloatPoly {
    pub fn zero(n: usize) -> Self {
        assert!(
            n <= MAX_FLOAT_VARS,
            "too many variables for the float mirror"
        );
        FloatPoly {
            n,
            terms: Vec::new(),
        }
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u128, f64)>) -> Self {
        let mut t: Vec<(u128, f64)> = terms.into_iter().collect();
        FloatPoly {
            n,
            terms: normalise(&mut t),
        }
    }

    pub fn from_polynomial(p: &Polynomial) -> Self {
        FloatPoly::from_terms(
            p.n(),
            p.terms().map(|(m, c)| (pack(m.exponents()), c.to_f64())),
        )
    }

    pub fn monomial(n: usize, m: &Monomial, c: f64) -> Self {
        FloatPoly::from_terms(n, [(pack(m.exponents()), c)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(u128, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &FloatPoly) -> FloatPoly {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &FloatPoly) -> FloatPoly {
        self.axpy(-1.0, other)
    }

    /// `self + a * other`, by merging the sorted term lists.
    pub fn axpy(&self, a: f64, other: &FloatPoly) -> FloatPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = j >= other.terms.len()
                || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0);
            let take_right = i >= self.terms.len()
                || (j < other.terms.len() && other.terms[j].0 < self.terms[i].0);
            if take_left {
                out.push(self.terms[i]);
                i += 1;
            } else if take_right {
                out.push((other.terms[j].0, a * other.terms[j].1));
                j += 1;
            } else {
                let v = self.terms[i].1 + a * other.terms[j].1;
                if v != 0.0 {
                    out.push((self.terms[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        FloatPoly {
            n: self.n,
            terms: out,
        }
    }

    pub fn scale(&self, a: f64) -> FloatPoly {
        if a == 0.0 {
            return FloatPoly::zero(self.n);
        }
        FloatPoly {
            n: self.n,
            terms: self.terms.iter().map(|&(k, c)| (k, a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &FloatPoly) -> FloatPoly {
        if self.is_zero() || other.is_zero() {
            return FloatPoly::zero(self.n);
        }
        let mut t = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ka, ca) in &self.terms {
            for &(kb, cb) in &other.terms {
                // Packed keys add without carries while exponents stay < 256.
                t.push((ka + kb, ca * cb));
            }
        }
        FloatPoly {
            n: self.n,
            terms: normalise(&mut t),
        }
    }

    pub fn partial(&self, i: usize) -> FloatPoly {
        assert!(i < self.n, "variable index out of range");
        let unit = 1u128 << (8 * i);
        let terms = self
            .terms
            .iter()
            .filter_map(|&(k, c)| {
                let e = exponent(k, i);
                (e > 0).then(|| (k - unit, c * e as f64))
            })
            .collect();
        FloatPoly { n: self.n, terms }
    }

    pub fn gradient(&self) -> Vec<FloatPoly> {
        (0..self.n).map(|i| self.partial(i)).collect()
    }

    pub fn laplacian(&self) -> FloatPoly {
        (0..self.n).fold(FloatPoly::zero(self.n), |acc, i| {
            acc.add(&self.partial(i).partial(i))
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "point dimension");
        self.terms
            .iter()
            .map(|&(k, c)| {
                let mut v = c;
                for (i, xi) in x.iter().enumerate() {
                    let e = exponent(k, i);
                    if e > 0 {
                        v *= xi.powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    pub fn eval_gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.partial(i).eval(x)).collect()
    }

    /// Coefficient-space inner product.
    pub fn inner(&self, other: &FloatPoly) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ka, kb) = (self.terms[i].0, other.terms[j].0);
            if ka < kb {
                i += 1;
            } else if kb < ka {
                j += 1;
            } else {
                acc += self.terms[i].1 * other.terms[j].1;
                i += 1;
                j += 1;
            }
        }
        acc
    }

    /// Sum of squared coefficients.
    pub fn coefficient_norm_squared(&self) -> f64 {
        self.terms.iter().map(|&(_, c)| c * c).sum()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|&(k, _)| key_degree(k, self.n)).max()
    }

    pub fn homogeneous_component(&self, d: u32) -> FloatPoly {
        FloatPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|&(k, _)| key_degree(k, self.n) == d)
                .collect(),
        }
    }

    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        let k = pack(exponents);
        self.terms
            .binary_search_by_key(&k, |&(key, _)| key)
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }
}

fn normalise(t: &mut [(u128, f64)]) -> Vec<(u128, f64)> {
    t.sort_unstable_by_key(|&(k, _)| k);
    let mut out: Vec<(u128, f64)> = Vec::with_capacity(t.len());
    for &(k, c) in t.iter() {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += c,
            _ => out.push((k, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse, Field};

    #[test]
    fn mirrors_exact_arithmetic() {
        let a = parse("x1^2 - 3*x1*x2 + 1/2", 2, Field::Rational).unwrap();
        let b = parse("x2^3 + x1", 2, Field::Rational).unwrap();
        let fa = FloatPoly::from_polynomial(&a);
        let fb = FloatPoly::from_polynomial(&b);
        assert_eq!(fa.mul(&fb), FloatPoly::from_polynomial(&(&a * &b)));
        assert_eq!(fa.sub(&fb), FloatPoly::from_polynomial(&(&a - &b)));
        assert_eq!(
            fa.partial(0),
            FloatPoly::from_polynomial(&a.partial(0).unwrap())
        );
        assert_eq!(fa.laplacian(), FloatPoly::from_polynomial(&a.laplacian()));
        assert_eq!(fa.eval(&[2.0, 1.0]), -1.5);
        assert_eq!(fa.coefficient(&[1, 1]), -3.0);
        assert_eq!(fa.degree(), Some(2));
        assert_eq!(fa.inner(&fa), fa.coefficient_norm_squared());
        assert_eq!(
            fa.inner(&FloatPoly::from_polynomial(
                &parse("x1*x2 + 2", 2, Field::Rational).unwrap()
            )),
            -2.0
        );
        assert!(fa.sub(&fa).is_zero());
    }

    #[test]
    fn packing_round_trips() {
        let e = vec![3, 0, 255, 7];
        assert_eq!(unpack(pack(&e), 4), e);
        assert_eq!(key_degree(pack(&e), 4), 265);
    }
}
