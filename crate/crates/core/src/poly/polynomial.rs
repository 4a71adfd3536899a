use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::coefficient::rational_to_string;
use super::{Coefficient, Field, Monomial, PolyError};

/// A sparse polynomial in `n` variables over a fixed [`Field`].
///
/// Terms are kept in graded-lex order with no zero coefficients, so structural
/// equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    field: Field,
    terms: BTreeMap<Monomial, Coefficient>,
}

/// Homogeneous components keyed by degree. Every stored component is nonzero.
pub type GradedDecomposition = BTreeMap<u32, Polynomial>;

impl Polynomial {
    pub fn zero(n: usize, field: Field) -> Self {
        Polynomial {
            n,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Coefficient) -> Self {
        let field = c.field();
        Polynomial::from_terms(n, field, [(Monomial::one(n), c)])
    }

    pub fn one(n: usize, field: Field) -> Self {
        Polynomial::constant(n, Coefficient::one(field))
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(n: usize, field: Field, i: usize) -> Result<Self, PolyError> {
        if i >= n {
            return Err(PolyError::VariableOutOfRange { index: i, n });
        }
        Ok(Polynomial::from_terms(
            n,
            field,
            [(Monomial::var(n, i), Coefficient::one(field))],
        ))
    }

    pub fn monomial(n: usize, c: Coefficient, m: Monomial) -> Self {
        let field = c.field();
        Polynomial::from_terms(n, field, [(m, c)])
    }

    /// Builds a polynomial, merging repeated monomials and dropping zeros.
    pub fn from_terms(
        n: usize,
        field: Field,
        terms: impl IntoIterator<Item = (Monomial, Coefficient)>,
    ) -> Self {
        let mut p = Polynomial::zero(n, field);
        for (m, c) in terms {
            assert_eq!(m.n(), n, "monomial arity");
            p.add_term(m, c.with_field(field));
        }
        p
    }

    /// Integer-coefficient constructor used heavily by tests and fixtures.
    pub fn from_int_terms(n: usize, terms: &[(&[u32], i64)]) -> Self {
        Polynomial::from_terms(
            n,
            Field::Rational,
            terms.iter().map(|(e, c)| {
                (
                    Monomial::new(e.to_vec()),
                    Coefficient::from_int(*c, Field::Rational),
                )
            }),
        )
    }

    /// `|x|^2 = x1^2 + ... + xn^2`.
    pub fn norm_squared(n: usize, field: Field) -> Self {
        Polynomial::from_terms(
            n,
            field,
            (0..n).map(|i| {
                (
                    Monomial::var(n, i).with_exponent(i, 2),
                    Coefficient::one(field),
                )
            }),
        )
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum.with_field(self.field);
                }
            }
            None => {
                self.terms.insert(m, c.with_field(self.field));
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn with_field(&self, field: Field) -> Result<Self, PolyError> {
        let joined = self.field.join(field)?;
        if joined != field {
            return Err(PolyError::FieldMismatch(self.field, field));
        }
        let mut p = self.clone();
        p.field = field;
        for c in p.terms.values_mut() {
            *c = c.clone().with_field(field);
        }
        Ok(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Coefficient {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| Coefficient::zero(self.field))
    }

    /// Total degree; `None` stands for the `-inf` degree of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Coefficient)> {
        self.terms.iter().next_back()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Coefficient {
        self.coefficient(&Monomial::one(self.n))
    }

    /// Degree in the single variable `x_i`.
    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.exponents()[i]).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Degree if homogeneous and nonzero.
    pub fn homogeneous_degree(&self) -> Result<u32, PolyError> {
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        self.degree().ok_or(PolyError::NotHomogeneous)
    }

    pub fn check_compatible(&self, other: &Polynomial) -> Result<Field, PolyError> {
        if self.n != other.n {
            return Err(PolyError::DimensionMismatch(self.n, other.n));
        }
        self.field.join(other.field)
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        let field = self.check_compatible(other)?;
        let mut out = self.clone();
        out.field = field;
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        let field = self.check_compatible(other)?;
        let mut out = Polynomial::zero(self.n, field);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(self.n, self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn scale(&self, c: &Coefficient) -> Polynomial {
        let field = self.field.join(c.field()).expect("field mismatch in scale");
        let mut out = Polynomial::zero(self.n, field);
        if c.is_zero() {
            return out;
        }
        for (m, a) in &self.terms {
            out.terms.insert(m.clone(), (a * c).with_field(field));
        }
        out
    }

    pub fn scale_rational(&self, r: &BigRational) -> Polynomial {
        self.scale(&Coefficient::from_rational(r.clone(), self.field))
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            n: self.n,
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.mul(m), c.clone()))
                .collect(),
        }
    }

    /// Exact `d/dx_i` (zero-based `i`).
    pub fn partial(&self, i: usize) -> Result<Polynomial, PolyError> {
        if i >= self.n {
            return Err(PolyError::VariableOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let mut out = Polynomial::zero(self.n, self.field);
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.derivative(i) {
                out.add_term(rest, c * &Coefficient::from_int(e as i64, self.field));
            }
        }
        Ok(out)
    }

    pub(crate) fn d(&self, i: usize) -> Polynomial {
        self.partial(i).expect("index in range")
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.n).map(|i| self.d(i)).collect()
    }

    pub fn laplacian(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.n, self.field);
        for i in 0..self.n {
            for (m, c) in &self.d(i).d(i).terms {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// `|grad P|^2`.
    pub fn gradient_norm_squared(&self) -> Polynomial {
        self.gradient()
            .iter()
            .fold(Polynomial::zero(self.n, self.field), |acc, g| {
                &acc + &(g * g)
            })
    }

    pub fn homogeneous_component(&self, d: u32) -> Polynomial {
        Polynomial {
            n: self.n,
            field: self.field,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_components(&self) -> GradedDecomposition {
        let mut out: GradedDecomposition = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| Polynomial::zero(self.n, self.field))
                .terms
                .insert(m.clone(), c.clone());
        }
        out
    }

    /// `x . grad P - m P`, which vanishes for homogeneous `P` of degree `m`.
    pub fn euler_defect(&self) -> Result<Polynomial, PolyError> {
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        let m = self.degree().unwrap_or(0);
        let mut radial = Polynomial::zero(self.n, self.field);
        for i in 0..self.n {
            radial = &radial + &self.d(i).mul_monomial(&Monomial::var(self.n, i));
        }
        Ok(&radial - &self.scale(&Coefficient::from_int(m as i64, self.field)))
    }

    fn check_point_len(&self, len: usize) -> Result<(), PolyError> {
        if len != self.n {
            return Err(PolyError::DimensionMismatch(self.n, len));
        }
        Ok(())
    }

    /// Exact value at a rational point.
    pub fn evaluate(&self, point: &[BigRational]) -> Result<Coefficient, PolyError> {
        self.check_point_len(point.len())?;
        let max_e = self.max_exponents();
        let powers: Vec<Vec<BigRational>> = point
            .iter()
            .zip(&max_e)
            .map(|(x, &e)| {
                let mut v = Vec::with_capacity(e as usize + 1);
                v.push(BigRational::one());
                for k in 0..e as usize {
                    let next = &v[k] * x;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Coefficient::zero(self.field);
        for (m, c) in &self.terms {
            let mut r = BigRational::one();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    r *= &powers[i][e as usize];
                }
            }
            acc = &acc + &(c * &Coefficient::from_rational(r, self.field));
        }
        Ok(acc)
    }

    /// Float value with compensated (Neumaier) summation of the term values.
    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_point_len(point.len())?;
        Ok(self.eval_f64_unchecked(point))
    }

    pub(crate) fn eval_f64_unchecked(&self, point: &[f64]) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (m, c) in &self.terms {
            let mut v = c.to_f64();
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    v *= x.powi(e as i32);
                }
            }
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.n];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(m.exponents()) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// `self / divisor` if the division is exact, `None` otherwise.
    pub fn exact_divide(&self, divisor: &Polynomial) -> Result<Option<Polynomial>, PolyError> {
        let field = self.check_compatible(divisor)?;
        let (lm, lc) = divisor.leading_term().ok_or(PolyError::DivisionByZero)?;
        let lc_inv = lc.inv().expect("leading coefficient is nonzero");
        let mut rem = self.clone();
        rem.field = field;
        let mut quot = Polynomial::zero(self.n, field);
        while let Some((m, c)) = rem.leading_term() {
            let Some(shift) = m.div(lm) else {
                return Ok(None);
            };
            let t = c * &lc_inv;
            let step = divisor.mul_monomial(&shift).scale(&t);
            quot.add_term(shift, t);
            rem = &rem - &step;
        }
        Ok(Some(quot))
    }

    /// How many times `factor` divides `self`, capped at `cap`. `None` for the
    /// zero polynomial, which every power divides.
    pub fn multiplicity(&self, factor: &Polynomial, cap: u32) -> Result<Option<u32>, PolyError> {
        if self.is_zero() {
            return Ok(None);
        }
        let mut current = self.clone();
        let mut k = 0;
        while k < cap {
            match current.exact_divide(factor)? {
                Some(q) => {
                    current = q;
                    k += 1;
                }
                None => break,
            }
        }
        Ok(Some(k))
    }

    /// Scales to integer coefficients with unit content and positive leading
    /// coefficient. Rational field only; other fields are returned monic.
    pub fn primitive(&self) -> Polynomial {
        let Some((_, lc)) = self.leading_term() else {
            return self.clone();
        };
        if self.field != Field::Rational || self.terms.values().any(|c| c.as_rational().is_none()) {
            return self.scale(&lc.inv().expect("nonzero"));
        }
        use num_integer::Integer;
        let mut lcm = num_bigint::BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.rational_part().denom());
        }
        let mut g = num_bigint::BigInt::zero();
        for c in self.terms.values() {
            let v = c.rational_part() * BigRational::from_integer(lcm.clone());
            g = g.gcd(v.numer());
        }
        let mut factor = BigRational::new(lcm, g);
        if lc.rational_part().is_negative() {
            factor = -factor;
        }
        self.scale_rational(&factor)
    }

    /// Substitutes `x_i -> s * x_i` for every variable.
    pub fn rescale_variables(&self, s: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero(self.n, self.field);
        for (m, c) in &self.terms {
            let f = num_traits::pow(s.clone(), m.degree() as usize);
            out.add_term(m.clone(), c * &Coefficient::from_rational(f, self.field));
        }
        out
    }

    /// Coefficient-wise conversion to f64 `(monomial, value)` pairs.
    pub fn to_f64_terms(&self) -> Vec<(Monomial, f64)> {
        self.terms
            .iter()
            .map(|(m, c)| (m.clone(), c.to_f64()))
            .collect()
    }

    /// Maximum absolute coefficient as a float; zero for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Sum of squared coefficients, as a float.
    pub fn coefficient_norm_squared_f64(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().powi(2)).sum::<f64>()
    }

    pub fn rational_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.as_rational().is_some())
    }

    pub fn to_i64_coefficient(c: &Coefficient) -> Option<i64> {
        c.as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.numer().to_i64())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr for &Polynomial {
            type Output = Polynomial;
            /// Panics on mismatched dimension or field; use the `checked_*`
            /// methods for fallible arithmetic.
            fn $m(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("incompatible polynomials")
            }
        }
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            n: self.n,
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "x{}", i + 1)?;
        if e >= 2 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Canonical text: graded-lex descending, explicit `*`, `^` only for
/// exponents of at least 2, unit coefficients elided except on the constant.
/// Quadratic coefficients `a + b*sqrt(d)` print as two adjacent terms.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let d = self.field.radicand().unwrap_or(0);
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            for (value, surd) in [(c.rational_part(), false), (c.surd_part(), true)] {
                if value.is_zero() {
                    continue;
                }
                let negative = value.is_negative();
                match (first, negative) {
                    (true, true) => write!(f, "-")?,
                    (true, false) => {}
                    (false, true) => write!(f, " - ")?,
                    (false, false) => write!(f, " + ")?,
                }
                first = false;
                let mag = value.abs();
                let unit = mag.is_one();
                let mut pieces: Vec<String> = Vec::new();
                if !unit {
                    pieces.push(rational_to_string(&mag));
                }
                if surd {
                    pieces.push(format!("sqrt({d})"));
                }
                if m.is_one() {
                    if pieces.is_empty() {
                        pieces.push("1".to_string());
                    }
                    write!(f, "{}", pieces.join("*"))?;
                } else {
                    for p in &pieces {
                        write!(f, "{p}*")?;
                    }
                    write_monomial(f, m)?;
                }
            }
        }
        Ok(())
    }
}
