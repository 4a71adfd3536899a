//! Seeded random polynomial generators and named fixtures, shared by unit,
//! property and acceptance tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::poly::{Coefficient, Field, Monomial, Polynomial};

fn random_exponents<R: Rng>(rng: &mut R, n: usize, degree: u32) -> Vec<u32> {
    let mut e = vec![0u32; n];
    for _ in 0..degree {
        e[rng.gen_range(0..n)] += 1;
    }
    e
}

fn random_coefficient<R: Rng>(rng: &mut R, bound: i64) -> Coefficient {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-bound..=bound);
    }
    let den = rng.gen_range(1..=3);
    Coefficient::from_frac(v, den, Field::Rational)
}

/// Up to `terms` random monomials of degree `0..=max_degree`, small rational
/// coefficients.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    n: usize,
    max_degree: u32,
    terms: usize,
) -> Polynomial {
    Polynomial::from_terms(
        n,
        Field::Rational,
        (0..terms).map(|_| {
            let d = rng.gen_range(0..=max_degree);
            (
                Monomial::new(random_exponents(rng, n, d)),
                random_coefficient(rng, 5),
            )
        }),
    )
}

/// Random polynomial with exact degree `degree` (a leading term is forced).
pub fn random_polynomial_of_degree<R: Rng>(
    rng: &mut R,
    n: usize,
    degree: u32,
    terms: usize,
) -> Polynomial {
    let top = Polynomial::monomial(
        n,
        random_coefficient(rng, 5),
        Monomial::new(random_exponents(rng, n, degree)),
    );
    &top + &random_polynomial(rng, n, degree.saturating_sub(1), terms.saturating_sub(1))
}

/// Random nonzero homogeneous polynomial of the given degree.
pub fn random_homogeneous<R: Rng>(rng: &mut R, n: usize, degree: u32, terms: usize) -> Polynomial {
    loop {
        let p = Polynomial::from_terms(
            n,
            Field::Rational,
            (0..terms.max(1)).map(|_| {
                (
                    Monomial::new(random_exponents(rng, n, degree)),
                    random_coefficient(rng, 5),
                )
            }),
        );
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random nonzero linear form with integer coefficients.
pub fn random_linear_form<R: Rng>(rng: &mut R, n: usize) -> Polynomial {
    loop {
        let p = Polynomial::from_terms(
            n,
            Field::Rational,
            (0..n).map(|i| {
                (
                    Monomial::var(n, i),
                    Coefficient::from_int(rng.gen_range(-4..=4), Field::Rational),
                )
            }),
        );
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random rational point with coordinates `p/q`, `|p/q| <= bound`.
pub fn random_rational_point<R: Rng>(rng: &mut R, n: usize, bound: i64) -> Vec<BigRational> {
    (0..n)
        .map(|_| {
            let q = rng.gen_range(1..=32i64);
            let p = rng.gen_range(-bound * q..=bound * q);
            BigRational::new(BigInt::from(p), BigInt::from(q))
        })
        .collect()
}

/// `x1^2 + ... + x_r^2 - x_{r+1}^2 - ... - x_{r+s}^2`.
pub fn signature_quadric(r: usize, s: usize) -> Polynomial {
    let n = r + s;
    Polynomial::from_terms(
        n,
        Field::Rational,
        (0..n).map(|i| {
            let sign = if i < r { 1 } else { -1 };
            (
                Monomial::var(n, i).with_exponent(i, 2),
                Coefficient::from_int(sign, Field::Rational),
            )
        }),
    )
}

/// The quadric whose zero set is the cone over `S^3 x S^3` in `R^8`.
pub fn simons_quadric() -> Polynomial {
    signature_quadric(4, 4)
}

/// Cartan's isoparametric cubic on `R^5`, over `Q(sqrt 3)`.
pub fn cartan_cubic() -> Polynomial {
    let field = Field::quadratic(3).expect("3 is square-free");
    crate::poly::parse(
        "x5^3 + 3/2*x5*x1^2 + 3/2*x5*x2^2 - 3*x5*x3^2 - 3*x5*x4^2 \
         + 3/2*sqrt(3)*x4*x1^2 - 3/2*sqrt(3)*x4*x2^2 + 3*sqrt(3)*x1*x2*x3",
        5,
        field,
    )
    .expect("fixture parses")
}

/// A polynomial `P = p^k Q_m + sum P_i` built with prescribed multiplicities
/// of `p` in each `P_i`, `s <= i < m`.
#[derive(Clone, Debug)]
pub struct SyntheticChain {
    pub p: Polynomial,
    pub k: u32,
    pub qm: Polynomial,
    pub full: Polynomial,
    pub s: u32,
    /// `(degree, multiplicity)` from `m - 1` down to `s`; `None` for a zero
    /// component.
    pub multiplicities: Vec<(u32, Option<u32>)>,
}

/// Random chain with `k` in `{3, 5}`, `deg p = 3`, `deg Q_m` in `{0, 2}` on
/// `R^3`. Components above `s` are zero or `p^e R` with `e >= 2`, `P_s = p R`,
/// and components in degrees `1..s` are arbitrary.
pub fn synthetic_chain<R: Rng>(rng: &mut R) -> SyntheticChain {
    let n = 3;
    let dp = 3u32;
    let p = random_homogeneous(rng, n, dp, 4);
    let k = if rng.gen_bool(0.5) { 3 } else { 5 };
    let dq = 2 * rng.gen_range(0..=1);
    let qm = random_homogeneous(rng, n, dq, 3);
    let m = k * dp + qm.degree().expect("nonzero");
    let s = rng.gen_range(dp..m);
    // Cofactor of the given degree not divisible by p.
    let cofactor = |rng: &mut R, d: u32| loop {
        let r = random_homogeneous(rng, n, d, 3);
        if r.multiplicity(&p, 1).expect("rational").expect("nonzero") == 0 {
            return r;
        }
    };
    let mut full = &p.pow(k) * &qm;
    let mut multiplicities = Vec::new();
    for i in (s + 1..m).rev() {
        let max_e = i / dp;
        if max_e < 2 || rng.gen_bool(0.3) {
            multiplicities.push((i, None));
            continue;
        }
        let e = rng.gen_range(2..=max_e);
        full = &full + &(&p.pow(e) * &cofactor(rng, i - e * dp));
        multiplicities.push((i, Some(e)));
    }
    full = &full + &(&p * &cofactor(rng, s - dp));
    multiplicities.push((s, Some(1)));
    for i in 1..s {
        if rng.gen_bool(0.7) {
            full = &full + &random_homogeneous(rng, n, i, 3);
        }
    }
    SyntheticChain {
        p,
        k,
        qm,
        full,
        s,
        multiplicities,
    }
}
