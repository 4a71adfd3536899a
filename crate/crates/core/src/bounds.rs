//! Exact degree and decay-exponent bounds.
//!
//! All comparisons go through [`QuadraticSurd`], which decides the sign of
//! `A + B√D` by case analysis and squaring rather than floating point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::poly::{exact_isqrt, rational_to_string};
use crate::report::{serialize_display, serialize_rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("discriminant negative for n = {0}: Bernstein range, no admissible window")]
    BernsteinRange(i64),
    #[error("negative discriminant {0}: the cone is unstable")]
    Unstable(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("surd denominator must be nonzero")]
    ZeroDenominator,
}

/// `(a + b√D) / c` with `c > 0`, `D` square-free (or `0` for rationals) and
/// `gcd(a, b, c) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

/// Largest `f` with `f^2 | d`, together with `d / f^2`. Trial division is
/// enough at the sizes this module sees.
fn extract_square(d: &BigInt) -> (BigInt, BigInt) {
    let mut f = BigInt::one();
    let mut rest = d.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let p2 = &p * &p;
        while (&rest % &p2).is_zero() {
            rest /= &p2;
            f *= &p;
        }
        p += 1;
    }
    (f, rest)
}

/// Sign of `x + y√d` for `d >= 0`.
fn sign_plus_sqrt(x: &BigInt, y: &BigInt, d: &BigInt) -> Ordering {
    let sx = x.sign();
    let sy = if d.is_zero() {
        num_bigint::Sign::NoSign
    } else {
        y.sign()
    };
    use num_bigint::Sign::*;
    match (sx, sy) {
        (NoSign, NoSign) => Ordering::Equal,
        (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
        (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
        (Plus, Minus) => (x * x).cmp(&(y * y * d)),
        (Minus, Plus) => (y * y * d).cmp(&(x * x)),
    }
}

impl QuadraticSurd {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self, BoundsError> {
        let (mut a, mut b, mut c, d) = (a.into(), b.into(), c.into(), d.into());
        if c.is_zero() {
            return Err(BoundsError::ZeroDenominator);
        }
        if d.is_negative() {
            return Err(BoundsError::Unstable(d.to_string()));
        }
        let (f, mut d) = extract_square(&d);
        b *= f;
        if d.is_one() {
            a += &b;
            b = BigInt::zero();
        }
        if b.is_zero() || d.is_zero() {
            b = BigInt::zero();
            d = BigInt::zero();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        Ok(QuadraticSurd {
            a: &a / &g,
            b: &b / &g,
            c: &c / &g,
            d,
        })
    }

    pub fn from_rational(q: &BigRational) -> Self {
        QuadraticSurd::new(q.numer().clone(), 0, q.denom().clone(), 0)
            .expect("positive denominator")
    }

    pub fn from_int(v: i64) -> Self {
        QuadraticSurd::new(v, 0, 1, 0).expect("unit denominator")
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.a, &self.b, &self.c, &self.d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let c = self.c.to_f64().unwrap_or(f64::NAN);
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        (a + b * d.sqrt()) / c
    }

    fn common_radicand(&self, other: &Self) -> Option<BigInt> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Some(BigInt::zero()),
            (true, false) => Some(other.d.clone()),
            (false, true) => Some(self.d.clone()),
            (false, false) => (self.d == other.d).then(|| self.d.clone()),
        }
    }

    /// Exact comparison. `None` only when both values are irrational with
    /// different radicands.
    pub fn cmp_surd(&self, other: &Self) -> Option<Ordering> {
        let d = self.common_radicand(other)?;
        let x = &self.a * &other.c - &other.a * &self.c;
        let y = &self.b * &other.c - &other.b * &self.c;
        Some(sign_plus_sqrt(&x, &y, &d))
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        self.cmp_surd(&QuadraticSurd::from_rational(q))
            .expect("rationals share every radicand")
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let d = self.common_radicand(other)?;
        QuadraticSurd::new(
            &self.a * &other.c + &other.a * &self.c,
            &self.b * &other.c + &other.b * &self.c,
            &self.c * &other.c,
            d,
        )
        .ok()
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let d = self.common_radicand(other)?;
        QuadraticSurd::new(
            &self.a * &other.a + &self.b * &other.b * &d,
            &self.a * &other.b + &self.b * &other.a,
            &self.c * &other.c,
            d,
        )
        .ok()
    }

    pub fn neg(&self) -> Self {
        QuadraticSurd {
            a: -&self.a,
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(
                f,
                "{}",
                rational_to_string(&BigRational::new(self.a.clone(), self.c.clone()))
            );
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        let b = self.b.abs();
        let surd = if b.is_one() {
            format!("sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", b, self.d)
        };
        let num = if self.a.is_zero() {
            format!("{}{}", if sign == "-" { "-" } else { "" }, surd)
        } else {
            format!("{} {} {}", self.a, sign, surd)
        };
        if self.c.is_one() {
            write!(f, "{num}")
        } else {
            write!(f, "({num})/{}", self.c)
        }
    }
}

impl Serialize for QuadraticSurd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QuadraticSurd", 2)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("approx", &crate::report::F64(self.to_f64()))?;
        st.end()
    }
}

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

/// `μ± = (n - 1 ± √((n-3)^2 - 4(n-2))) / 2`.
pub fn mu_bounds(n: i64) -> Result<(QuadraticSurd, QuadraticSurd), BoundsError> {
    let disc = (n - 3) * (n - 3) - 4 * (n - 2);
    if disc < 0 {
        return Err(BoundsError::BernsteinRange(n));
    }
    let minus = QuadraticSurd::new(n - 1, -1, 2, disc)?;
    let plus = QuadraticSurd::new(n - 1, 1, 2, disc)?;
    Ok((minus, plus))
}

/// `γ = deg p + deg Q_m / k - 1`.
pub fn gamma_exponent(deg_p: u32, deg_qm: u32, k: u32) -> Result<BigRational, BoundsError> {
    if k == 0 {
        return Err(BoundsError::ZeroK);
    }
    Ok(BigRational::new(int(deg_qm as i64), int(k as i64))
        + BigRational::from_integer(int(deg_p as i64 - 1)))
}

/// `λ = γ^2 - (n-3) γ`.
pub fn gamma_lambda(n: i64, gamma: &BigRational) -> BigRational {
    gamma * gamma - BigRational::from_integer(int(n - 3)) * gamma
}

/// Decay exponents `γ± = (n-3 ± √((n-3)^2 + 4 λ1)) / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaPm {
    pub minus: QuadraticSurd,
    pub plus: QuadraticSurd,
    /// Double root: the Jacobi fields carry a log factor and the cone is not
    /// strictly stable.
    pub log_factor: bool,
    #[serde(serialize_with = "serialize_rational")]
    pub discriminant: BigRational,
}

pub fn gamma_pm(n: i64, lambda1: &BigRational) -> Result<GammaPm, BoundsError> {
    let disc = BigRational::from_integer(int((n - 3) * (n - 3)))
        + BigRational::from_integer(int(4)) * lambda1;
    if disc.is_negative() {
        return Err(BoundsError::Unstable(rational_to_string(&disc)));
    }
    // √(p/q) = √(p q) / q.
    let (p, q) = (disc.numer().clone(), disc.denom().clone());
    let root_radicand = &p * &q;
    let base = &q * int(n - 3);
    let den = &q * int(2);
    let minus = QuadraticSurd::new(base.clone(), -1, den.clone(), root_radicand.clone())?;
    let plus = QuadraticSurd::new(base, 1, den, root_radicand)?;
    Ok(GammaPm {
        minus,
        plus,
        log_factor: disc.is_zero(),
        discriminant: disc,
    })
}

/// Whether `r` can equal `deg Q_m / k` with `deg Q_m` even and `k` odd: in
/// lowest terms the numerator must be even and the denominator odd (or `r = 0`).
pub fn parity_admissible(r: &BigRational) -> bool {
    if r.is_zero() {
        return true;
    }
    !r.is_negative() && r.numer().is_even() && r.denom().is_odd()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AdmissibleTriple {
    pub m: u32,
    pub k: u32,
    pub deg_p: u32,
    #[serde(rename = "deg_Qm")]
    pub deg_qm: u32,
}

impl AdmissibleTriple {
    /// Exact window value `deg p + deg Q_m / k = m / k`.
    pub fn window_value(&self) -> BigRational {
        BigRational::new(int(self.m as i64), int(self.k as i64))
    }
}

/// Every `(deg p, deg Q_m, k)` with `deg p >= 3`, `deg Q_m` even, `k` odd,
/// `k <= k_max`, `4 <= m <= m_max` and `μ- < deg p + deg Q_m / k < μ+`.
/// Sorted by `m`, then `k`, then `deg p`.
pub fn enumerate_admissible(
    n: i64,
    k_max: u32,
    m_max: u32,
) -> Result<Vec<AdmissibleTriple>, BoundsError> {
    let (lo, hi) = mu_bounds(n)?;
    let mut out = Vec::new();
    for k in (1..=k_max).step_by(2) {
        let mut deg_p = 3;
        while k * deg_p <= m_max {
            let mut deg_qm = 0;
            while k * deg_p + deg_qm <= m_max {
                let t = AdmissibleTriple {
                    m: k * deg_p + deg_qm,
                    k,
                    deg_p,
                    deg_qm,
                };
                let x = t.window_value();
                if t.m >= 4
                    && lo.cmp_rational(&x) == Ordering::Less
                    && hi.cmp_rational(&x) == Ordering::Greater
                {
                    out.push(t);
                }
                deg_qm += 2;
            }
            deg_p += 1;
        }
    }
    out.sort();
    Ok(out)
}

/// The three arithmetic steps restricting solutions on `R^8`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct R8Chain {
    pub n: i64,
    pub mu_plus: QuadraticSurd,
    /// `deg p < μ+` and `deg p >= 3`.
    pub forced_deg_p: Vec<u32>,
    /// `λ1` forced by a double root of the decay quadratic.
    #[serde(serialize_with = "serialize_rational")]
    pub non_strictly_stable_lambda1: BigRational,
    pub double_root: QuadraticSurd,
    #[serde(serialize_with = "serialize_rational")]
    pub deg_qm_over_k: BigRational,
    pub parity_contradiction: bool,
    /// Supremum of `γ-` over stable cones in this dimension.
    pub gamma_minus_sup: QuadraticSurd,
    #[serde(serialize_with = "serialize_rational")]
    pub strict_minimizing_degree_bound: BigRational,
    pub minimum_degree: u32,
    pub degree_contradiction: bool,
    #[serde(serialize_with = "serialize_display")]
    pub conclusion: &'static str,
}

pub fn r8_chain() -> R8Chain {
    let n = 8;
    let (_, mu_plus) = mu_bounds(n).expect("n = 8 is above the Bernstein range");
    let forced_deg_p: Vec<u32> = (3..=16)
        .filter(|&d| {
            mu_plus.cmp_rational(&BigRational::from_integer(int(d as i64))) == Ordering::Greater
        })
        .collect();
    let deg_p = forced_deg_p[0];

    let lambda1 = -BigRational::new(int((n - 3) * (n - 3)), int(4));
    let g = gamma_pm(n, &lambda1).expect("zero discriminant");
    assert!(g.log_factor);
    let double_root = g.minus.clone();
    let gamma = double_root.to_rational().expect("double root is rational");
    let ratio = &gamma - BigRational::from_integer(int(deg_p as i64 - 1));
    let parity_contradiction = !parity_admissible(&ratio);

    // γ- = (n-3 - √disc)/2 is largest when disc = 0.
    let gamma_minus_sup = double_root.clone();
    let bound = &gamma + BigRational::one();
    let minimum_degree = 4;
    let degree_contradiction = bound < BigRational::from_integer(int(minimum_degree as i64));
    R8Chain {
        n,
        mu_plus,
        forced_deg_p,
        non_strictly_stable_lambda1: lambda1,
        double_root,
        deg_qm_over_k: ratio,
        parity_contradiction,
        gamma_minus_sup,
        strict_minimizing_degree_bound: bound,
        minimum_degree,
        degree_contradiction,
        conclusion: "deg p = 3; the cone is strictly stable and not strictly minimizing",
    }
}

/// Exact integer square root, if `v` is a perfect square.
pub fn perfect_square_root(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    exact_isqrt(&int(v)).and_then(|r| r.to_i64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(int(a), int(b))
    }

    fn naive(n: i64, k_max: u32, m_max: u32) -> Vec<AdmissibleTriple> {
        let mut out = Vec::new();
        for k in 1..=k_max {
            for deg_p in 3..=m_max {
                for deg_qm in 0..=m_max {
                    let m = k * deg_p + deg_qm;
                    if k % 2 == 0 || deg_qm % 2 == 1 || m > m_max || m < 4 {
                        continue;
                    }
                    // μ± are the roots of x^2 - (n-1)x + 2(n-2); x = m/k.
                    let (m, k2) = (m as i64, k as i64);
                    if m * m - (n - 1) * m * k2 + 2 * (n - 2) * k2 * k2 < 0 {
                        out.push(AdmissibleTriple {
                            m: m as u32,
                            k,
                            deg_p,
                            deg_qm,
                        });
                    }
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn mu_examples() {
        let (lo, hi) = mu_bounds(8).unwrap();
        assert_eq!(lo, QuadraticSurd::from_int(3));
        assert_eq!(hi, QuadraticSurd::from_int(4));
        let (lo, hi) = mu_bounds(9).unwrap();
        assert_eq!(lo, QuadraticSurd::new(4, -1, 1, 2).unwrap());
        assert_eq!(hi.to_string(), "4 + sqrt(2)");
        assert_eq!(mu_bounds(7), Err(BoundsError::BernsteinRange(7)));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_exponent(3, 0, 1).unwrap(), rat(2, 1));
        assert_eq!(gamma_exponent(3, 2, 3).unwrap(), rat(8, 3));
        assert_eq!(gamma_lambda(8, &rat(5, 2)), rat(-25, 4));
        let g = gamma_pm(8, &rat(-6, 1)).unwrap();
        assert_eq!(
            (g.plus, g.minus),
            (QuadraticSurd::from_int(3), QuadraticSurd::from_int(2))
        );
        assert_eq!(
            gamma_pm(14, &rat(-24, 1)).unwrap().minus,
            QuadraticSurd::from_int(3)
        );
        let g = gamma_pm(10, &rat(0, 1)).unwrap();
        assert_eq!(
            (g.plus, g.minus),
            (QuadraticSurd::from_int(7), QuadraticSurd::from_int(0))
        );
        assert!(gamma_pm(8, &rat(-25, 4)).unwrap().log_factor);
        assert!(matches!(
            gamma_pm(8, &rat(-7, 1)),
            Err(BoundsError::Unstable(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let v = enumerate_admissible(8, 5, 20).unwrap();
        assert_eq!(
            v[0],
            AdmissibleTriple {
                m: 11,
                k: 3,
                deg_p: 3,
                deg_qm: 2
            }
        );
        assert!(v.iter().all(|t| t.k != 1));
        assert!(enumerate_admissible(8, 5, 10).unwrap().is_empty());
        assert!(enumerate_admissible(6, 5, 10).is_err());
    }

    #[test]
    fn enumerate_matches_naive_loop() {
        for n in 8..=12 {
            let v = enumerate_admissible(n, 9, 40).unwrap();
            assert_eq!(v, naive(n, 9, 40), "n = {n}");
            let (lo, hi) = mu_bounds(n).unwrap();
            for t in &v {
                let x = t.m as f64 / t.k as f64;
                assert!(lo.to_f64() < x + 1e-12 && x < hi.to_f64() + 1e-12);
            }
        }
    }

    #[test]
    fn vieta_on_mu() {
        for n in 8..=64 {
            let (lo, hi) = mu_bounds(n).unwrap();
            assert_eq!(lo.checked_add(&hi).unwrap(), QuadraticSurd::from_int(n - 1));
            assert_eq!(
                lo.checked_mul(&hi).unwrap(),
                QuadraticSurd::from_int(2 * (n - 2))
            );
        }
    }

    #[test]
    fn r8_steps() {
        let c = r8_chain();
        assert_eq!(c.forced_deg_p, vec![3]);
        assert_eq!(c.deg_qm_over_k, rat(1, 2));
        assert!(c.parity_contradiction);
        assert_eq!(c.strict_minimizing_degree_bound, rat(7, 2));
        assert!(c.degree_contradiction);
    }

    #[test]
    fn surd_canonical_form() {
        let s = QuadraticSurd::new(6, 4, -2, 12).unwrap();
        assert_eq!(s.parts(), (&int(-3), &int(-4), &int(1), &int(3)));
        assert!(QuadraticSurd::new(1, 1, 1, 9).unwrap().is_rational());
        assert_eq!(
            QuadraticSurd::new(1, 1, 1, 9).unwrap(),
            QuadraticSurd::from_int(4)
        );
        assert_eq!(
            QuadraticSurd::new(1, 1, 0, 2),
            Err(BoundsError::ZeroDenominator)
        );
        assert!(parity_admissible(&rat(2, 3)));
        assert!(!parity_admissible(&rat(1, 1)));
        assert!(!parity_admissible(&rat(1, 2)));
    }

    proptest! {
        #[test]
        fn surd_comparison_agrees_with_floats(
            a1 in -50i64..50, b1 in -50i64..50, c1 in 1i64..20,
            a2 in -50i64..50, b2 in -50i64..50, c2 in 1i64..20,
            d in 2i64..40,
        ) {
            let x = QuadraticSurd::new(a1, b1, c1, d).unwrap();
            let y = QuadraticSurd::new(a2, b2, c2, d).unwrap();
            let (fx, fy) = (x.to_f64(), y.to_f64());
            let exact = x.cmp_surd(&y).unwrap();
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(exact, fx.partial_cmp(&fy).unwrap());
            }
            if exact == Ordering::Equal {
                prop_assert_eq!(&x, &y);
            }
        }

        #[test]
        fn gamma_roots_solve_defining_quadratic(n in 4i64..40, num in -400i64..400, den in 1i64..12) {
            let lambda1 = rat(num, den);
            if let Ok(g) = gamma_pm(n, &lambda1) {
                for r in [&g.minus, &g.plus] {
                    let lin = QuadraticSurd::from_int(-(n - 3));
                    let v = r.checked_mul(r).unwrap()
                        .checked_add(&lin.checked_mul(r).unwrap()).unwrap()
                        .checked_add(&QuadraticSurd::from_rational(&-lambda1.clone())).unwrap();
                    prop_assert_eq!(v, QuadraticSurd::from_int(0));
                }
            }
        }
    }
}
