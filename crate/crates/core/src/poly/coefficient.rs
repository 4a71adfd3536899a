use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PolyError;

/// The coefficient field of a polynomial session: `Q` or `Q(sqrt(d))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    /// `Q(sqrt(d))` with `d > 1` square-free.
    Quadratic(u64),
}

impl Field {
    pub fn quadratic(d: u64) -> Result<Field, PolyError> {
        if d < 2 || !is_square_free(d) {
            return Err(PolyError::InvalidRadicand(d));
        }
        Ok(Field::Quadratic(d))
    }

    pub fn radicand(self) -> Option<u64> {
        match self {
            Field::Rational => None,
            Field::Quadratic(d) => Some(d),
        }
    }

    /// The smallest field containing both, if one exists in this crate's model.
    pub fn join(self, other: Field) -> Result<Field, PolyError> {
        match (self, other) {
            (a, b) if a == b => Ok(a),
            (Field::Rational, q) | (q, Field::Rational) => Ok(q),
            (a, b) => Err(PolyError::FieldMismatch(a, b)),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "q"),
            Field::Quadratic(d) => write!(f, "qsqrt:{d}"),
        }
    }
}

pub fn is_square_free(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// A field element `a + b*sqrt(d)`.
///
/// Rational elements always carry `b = 0`. Equality ignores the field tag when
/// `b = 0`, so a quadratic element with vanishing surd part equals the
/// corresponding rational.
#[derive(Clone, Debug)]
pub struct Coefficient {
    rational: BigRational,
    surd: BigRational,
    field: Field,
}

impl Coefficient {
    pub fn zero(field: Field) -> Self {
        Coefficient {
            rational: BigRational::zero(),
            surd: BigRational::zero(),
            field,
        }
    }

    pub fn one(field: Field) -> Self {
        Coefficient::from_rational(BigRational::one(), field)
    }

    pub fn from_rational(r: BigRational, field: Field) -> Self {
        Coefficient {
            rational: r,
            surd: BigRational::zero(),
            field,
        }
    }

    pub fn from_int(v: i64, field: Field) -> Self {
        Coefficient::from_rational(BigRational::from_integer(BigInt::from(v)), field)
    }

    pub fn from_frac(num: i64, den: i64, field: Field) -> Self {
        Coefficient::from_rational(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            field,
        )
    }

    /// `a + b*sqrt(d)`; fails when `b != 0` over the rationals.
    pub fn new(a: BigRational, b: BigRational, field: Field) -> Result<Self, PolyError> {
        if field == Field::Rational && !b.is_zero() {
            return Err(PolyError::SurdInRationalField);
        }
        Ok(Coefficient {
            rational: a,
            surd: b,
            field,
        })
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_radicand(field: Field) -> Result<Self, PolyError> {
        match field {
            Field::Rational => Err(PolyError::SurdInRationalField),
            Field::Quadratic(_) => Ok(Coefficient {
                rational: BigRational::zero(),
                surd: BigRational::one(),
                field,
            }),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    /// The rational value, when the surd part vanishes.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.surd.is_zero().then_some(&self.rational)
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rational.is_one() && self.surd.is_zero()
    }

    pub fn with_field(mut self, field: Field) -> Self {
        debug_assert!(field != Field::Rational || self.surd.is_zero());
        self.field = field;
        self
    }

    fn joined(&self, other: &Coefficient) -> Field {
        self.field
            .join(other.field)
            .expect("coefficients from different quadratic fields")
    }

    fn d(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.field.radicand().unwrap_or(0)))
    }

    /// Exact sign of `a + b*sqrt(d)`.
    pub fn signum(&self) -> Ordering {
        let sa = sign_of(&self.rational);
        let sb = sign_of(&self.surd);
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (a, b) if a == b => a,
            (a, _) => {
                // opposite signs: compare a^2 against b^2 d
                let lhs = &self.rational * &self.rational;
                let rhs = &self.surd * &self.surd * self.d();
                match lhs.cmp(&rhs) {
                    Ordering::Greater => a,
                    Ordering::Less => a.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Coefficient> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.rational * &self.rational - &self.surd * &self.surd * self.d();
        Some(Coefficient {
            rational: &self.rational / &norm,
            surd: -(&self.surd / &norm),
            field: self.field,
        })
    }

    pub fn pow(&self, e: u32) -> Coefficient {
        let mut acc = Coefficient::one(self.field);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.surd.is_zero() {
            return a;
        }
        let d = self.field.radicand().unwrap_or(0) as f64;
        a + self.surd.to_f64().unwrap_or(f64::NAN) * d.sqrt()
    }
}

fn sign_of(r: &BigRational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        self.rational == other.rational
            && self.surd == other.surd
            && (self.surd.is_zero() || self.field == other.field)
    }
}

impl Eq for Coefficient {}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        Coefficient {
            rational: &self.rational + &rhs.rational,
            surd: &self.surd + &rhs.surd,
            field: self.joined(rhs),
        }
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &Coefficient) -> Coefficient {
        Coefficient {
            rational: &self.rational - &rhs.rational,
            surd: &self.surd - &rhs.surd,
            field: self.joined(rhs),
        }
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        let field = self.joined(rhs);
        if self.surd.is_zero() && rhs.surd.is_zero() {
            return Coefficient::from_rational(&self.rational * &rhs.rational, field);
        }
        let d = BigRational::from_integer(BigInt::from(field.radicand().unwrap_or(0)));
        Coefficient {
            rational: &self.rational * &rhs.rational + &self.surd * &rhs.surd * d,
            surd: &self.rational * &rhs.surd + &self.surd * &rhs.rational,
            field,
        }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            rational: -&self.rational,
            surd: -&self.surd,
            field: self.field,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Coefficient {
            type Output = Coefficient;
            fn $m(self, rhs: Coefficient) -> Coefficient {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

/// `p/q` text, `p` for integers.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Integer square root when `v` is a perfect square.
pub fn exact_isqrt(v: &BigInt) -> Option<BigInt> {
    if v.sign() == Sign::Minus {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.field.radicand().unwrap_or(0);
        match (self.rational.is_zero(), self.surd.is_zero()) {
            (_, true) => write!(f, "{}", rational_to_string(&self.rational)),
            (true, false) => write!(f, "{}*sqrt({d})", rational_to_string(&self.surd)),
            (false, false) => {
                let sign = if self.surd.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{} {sign} {}*sqrt({d})",
                    rational_to_string(&self.rational),
                    rational_to_string(&self.surd.abs())
                )
            }
        }
    }
}
