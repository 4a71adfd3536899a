//! Multivariate GCD over `Q` by recursion on the main variable, using the
//! subresultant polynomial remainder sequence on primitive parts.

use super::{Field, Monomial, PolyError, Polynomial};

impl Polynomial {
    /// Greatest common divisor, normalised by [`Polynomial::primitive`]
    /// (integer coefficients, unit content, positive leading coefficient).
    pub fn gcd(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        if self.field() != Field::Rational
            && !(self.rational_coefficients() && other.rational_coefficients())
        {
            return Err(PolyError::GcdNeedsRationalField);
        }
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::GcdOfZeros);
        }
        let a = self
            .with_field(Field::Rational)
            .unwrap_or_else(|_| self.clone());
        let b = other
            .with_field(Field::Rational)
            .unwrap_or_else(|_| other.clone());
        Ok(gcd_rec(&a, &b).primitive())
    }
}

fn main_variable(a: &Polynomial, b: &Polynomial) -> Option<usize> {
    (0..a.n())
        .rev()
        .find(|&i| a.degree_in(i).unwrap_or(0) > 0 || b.degree_in(i).unwrap_or(0) > 0)
}

/// Coefficients of `p` as a polynomial in `x_v`, lowest power first.
fn coefficients_in(p: &Polynomial, v: usize) -> Vec<Polynomial> {
    let deg = p.degree_in(v).unwrap_or(0) as usize;
    let mut out = vec![Polynomial::zero(p.n(), p.field()); deg + 1];
    for (m, c) in p.terms() {
        let e = m.exponents()[v] as usize;
        out[e].add_term(m.with_exponent(v, 0), c.clone());
    }
    out
}

fn var_power(n: usize, v: usize, e: u32) -> Monomial {
    Monomial::one(n).with_exponent(v, e)
}

fn exact_div(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a.exact_divide(b)
        .expect("compatible")
        .expect("division inside the subresultant sequence is exact")
}

fn gcd_rec(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let n = a.n();
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let Some(v) = main_variable(a, b) else {
        return Polynomial::one(n, Field::Rational);
    };
    let (cont_a, pp_a) = content_and_primitive(a, v);
    let (cont_b, pp_b) = content_and_primitive(b, v);
    let cont = gcd_rec(&cont_a, &cont_b);
    let dega = pp_a.degree_in(v).unwrap_or(0);
    let degb = pp_b.degree_in(v).unwrap_or(0);
    if dega == 0 || degb == 0 {
        return cont;
    }
    let g = if dega >= degb {
        subresultant_gcd(pp_a, pp_b, v)
    } else {
        subresultant_gcd(pp_b, pp_a, v)
    };
    &cont * &g
}

/// Content with respect to `x_v` (gcd of the coefficient polynomials) and the
/// corresponding primitive part.
fn content_and_primitive(p: &Polynomial, v: usize) -> (Polynomial, Polynomial) {
    let coeffs = coefficients_in(p, v);
    let mut cont = Polynomial::zero(p.n(), p.field());
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        cont = if cont.is_zero() {
            c.clone()
        } else {
            gcd_rec(&cont, c)
        };
        if cont.is_constant() {
            break;
        }
    }
    let cont = cont.primitive();
    (cont.clone(), exact_div(p, &cont))
}

fn leading_coefficient_in(p: &Polynomial, v: usize) -> Polynomial {
    coefficients_in(p, v)
        .pop()
        .expect("nonzero polynomial has a leading coefficient")
}

/// `lc(b)^(deg a - deg b + 1) * a mod b` in `x_v`.
fn pseudo_remainder(a: &Polynomial, b: &Polynomial, v: usize) -> Polynomial {
    let degb = b.degree_in(v).unwrap_or(0);
    let lcb = leading_coefficient_in(b, v);
    let mut r = a.clone();
    let mut steps = a.degree_in(v).unwrap_or(0) as i64 - degb as i64 + 1;
    while !r.is_zero() && r.degree_in(v).unwrap_or(0) >= degb {
        let degr = r.degree_in(v).unwrap_or(0);
        let lcr = leading_coefficient_in(&r, v);
        r = &(&lcb * &r) - &(&lcr * &b.mul_monomial(&var_power(a.n(), v, degr - degb)));
        steps -= 1;
    }
    if steps > 0 {
        r = &r * &lcb.pow(steps as u32);
    }
    r
}

fn subresultant_gcd(mut a: Polynomial, mut b: Polynomial, v: usize) -> Polynomial {
    let n = a.n();
    let one = Polynomial::one(n, Field::Rational);
    let mut g = one.clone();
    let mut h = one.clone();
    loop {
        let delta = a.degree_in(v).unwrap_or(0) - b.degree_in(v).unwrap_or(0);
        let r = pseudo_remainder(&a, &b, v);
        if r.is_zero() {
            return content_and_primitive(&b, v).1;
        }
        if r.degree_in(v).unwrap_or(0) == 0 {
            return one;
        }
        let divisor = &g * &h.pow(delta);
        a = b;
        b = exact_div(&r, &divisor);
        g = leading_coefficient_in(&a, v);
        h = match delta {
            0 => h,
            1 => g.clone(),
            d => exact_div(&g.pow(d), &h.pow(d - 1)),
        };
    }
}

#[cfg(test)]
mod tests {
    use crate::poly::{parse, Field, PolyError, Polynomial};

    fn p(text: &str, n: usize) -> Polynomial {
        parse(text, n, Field::Rational).unwrap()
    }

    #[test]
    fn common_factor() {
        assert_eq!(
            p("x1^2 - x2^2", 2).gcd(&p("x1 - x2", 2)).unwrap(),
            p("x1 - x2", 2)
        );
        assert_eq!(p("x1", 2).gcd(&p("x2", 2)).unwrap(), p("1", 2));
    }

    #[test]
    fn normalisation() {
        let g = p("-2*x1*x2 + 4*x2", 2)
            .gcd(&p("6*x1*x2^2 - 12*x2^2", 2))
            .unwrap();
        assert_eq!(g, p("x1*x2 - 2*x2", 2));
        assert_eq!(
            p("3/2*x1", 1)
                .gcd(&Polynomial::zero(1, Field::Rational))
                .unwrap(),
            p("x1", 1)
        );
    }

    #[test]
    fn zero_inputs() {
        let z = Polynomial::zero(2, Field::Rational);
        assert_eq!(z.gcd(&z), Err(PolyError::GcdOfZeros));
    }

    #[test]
    fn trivariate() {
        let r = p("x1*x3 - x2^2 + 1", 3);
        let a = &r * &p("x1 + x2*x3", 3);
        let b = &r * &p("x3^2 - x1", 3);
        assert_eq!(a.gcd(&b).unwrap(), r.primitive());
    }
}
