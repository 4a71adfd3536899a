//! Coefficient spaces for the search: monomial bases, optionally restricted
//! by a symmetry.

use serde::Serialize;
use thiserror::Error;

use crate::poly::{Coefficient, Field, FloatPoly, Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnsatzError {
    #[error("degree 0 is not allowed in a basis (no constant term)")]
    ConstantDegree,
    #[error("bi-radial split needs r, s >= 1")]
    EmptyBlock,
    #[error("the ansatz has an empty basis")]
    EmptyBasis,
    #[error("normalization degrees {0:?} do not occur in the basis")]
    Normalization(Vec<u32>),
    #[error("{0} variables exceed the float mirror")]
    TooManyVariables(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Symmetry {
    Full,
    /// Invariant under `O(r) x O(s)`: polynomials in `u = |x'|^2`, `v = |x''|^2`.
    BiRadial {
        r: usize,
        s: usize,
    },
    /// Even in every variable: monomials with all exponents even.
    Diagonal,
}

/// Which coefficient groups are pinned to the unit sphere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Top degree for the top-equation target, degrees `>= 2` for the full one.
    Auto,
    Degrees(Vec<u32>),
    /// Raw objective, no rescaling.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisElement {
    pub label: String,
    pub degree: u32,
    #[serde(skip)]
    pub exact: Polynomial,
    #[serde(skip)]
    pub float: FloatPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ansatz {
    pub n: usize,
    pub m: u32,
    pub symmetry: Symmetry,
    pub normalization: Normalization,
    pub basis: Vec<BasisElement>,
}

/// All exponent vectors of total degree `d` in `n` variables, in
/// lexicographically decreasing order.
pub fn exponent_vectors(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            go(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, d, &mut Vec::new(), &mut out);
    }
    out
}

fn monomial_label(e: &[u32]) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            if k == 1 {
                format!("x{}", i + 1)
            } else {
                format!("x{}^{}", i + 1, k)
            }
        })
        .collect();
    parts.join("*")
}

fn element(label: String, exact: Polynomial) -> BasisElement {
    BasisElement {
        degree: exact.degree().expect("nonzero basis element"),
        float: FloatPoly::from_polynomial(&exact),
        label,
        exact,
    }
}

fn monomial_element(n: usize, e: Vec<u32>) -> BasisElement {
    let label = monomial_label(&e);
    element(
        label,
        Polynomial::monomial(n, Coefficient::one(Field::Rational), Monomial::new(e)),
    )
}

/// `u = x_1^2 + ... + x_r^2` and `v = x_{r+1}^2 + ... + x_{r+s}^2`.
pub fn bi_radial_invariants(r: usize, s: usize) -> (Polynomial, Polynomial) {
    let n = r + s;
    let block = |range: std::ops::Range<usize>| {
        Polynomial::from_terms(
            n,
            Field::Rational,
            range.map(|i| {
                (
                    Monomial::var(n, i).with_exponent(i, 2),
                    Coefficient::one(Field::Rational),
                )
            }),
        )
    };
    (block(0..r), block(r..n))
}

impl Ansatz {
    fn build(
        n: usize,
        degrees: &[u32],
        symmetry: Symmetry,
        basis: Vec<BasisElement>,
    ) -> Result<Ansatz, AnsatzError> {
        if n > crate::poly::float::MAX_FLOAT_VARS {
            return Err(AnsatzError::TooManyVariables(n));
        }
        if degrees.contains(&0) {
            return Err(AnsatzError::ConstantDegree);
        }
        let m = basis
            .iter()
            .map(|b| b.degree)
            .max()
            .ok_or(AnsatzError::EmptyBasis)?;
        Ok(Ansatz {
            n,
            m,
            symmetry,
            normalization: Normalization::Auto,
            basis,
        })
    }

    /// Every monomial of the listed degrees.
    pub fn full(n: usize, degrees: &[u32]) -> Result<Ansatz, AnsatzError> {
        let basis = sorted(degrees)
            .into_iter()
            .flat_map(|d| exponent_vectors(n, d))
            .map(|e| monomial_element(n, e))
            .collect();
        Ansatz::build(n, degrees, Symmetry::Full, basis)
    }

    /// Monomials with every exponent even.
    pub fn diagonal(n: usize, degrees: &[u32]) -> Result<Ansatz, AnsatzError> {
        let basis = sorted(degrees)
            .into_iter()
            .flat_map(|d| exponent_vectors(n, d))
            .filter(|e| e.iter().all(|k| k % 2 == 0))
            .map(|e| monomial_element(n, e))
            .collect();
        Ansatz::build(n, degrees, Symmetry::Diagonal, basis)
    }

    /// `u^a v^b` with `2(a + b)` in the listed degrees; odd degrees contribute
    /// nothing.
    pub fn bi_radial(r: usize, s: usize, degrees: &[u32]) -> Result<Ansatz, AnsatzError> {
        if r == 0 || s == 0 {
            return Err(AnsatzError::EmptyBlock);
        }
        let n = r + s;
        let (u, v) = bi_radial_invariants(r, s);
        let mut basis = Vec::new();
        for d in sorted(degrees) {
            if d % 2 == 1 {
                continue;
            }
            let h = d / 2;
            for a in (0..=h).rev() {
                let b = h - a;
                let label = match (a, b) {
                    (a, 0) => pow_label("u", a),
                    (0, b) => pow_label("v", b),
                    (a, b) => format!("{}*{}", pow_label("u", a), pow_label("v", b)),
                };
                basis.push(element(label, &u.pow(a) * &v.pow(b)));
            }
        }
        Ansatz::build(n, degrees, Symmetry::BiRadial { r, s }, basis)
    }

    pub fn with_normalization(
        mut self,
        normalization: Normalization,
    ) -> Result<Ansatz, AnsatzError> {
        if let Normalization::Degrees(ds) = &normalization {
            if ds.is_empty() || ds.iter().any(|d| self.basis.iter().all(|b| b.degree != *d)) {
                return Err(AnsatzError::Normalization(ds.clone()));
            }
        }
        self.normalization = normalization;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.basis.iter().map(|b| b.label.clone()).collect()
    }

    /// `Σ c_j b_j` in floating point.
    pub fn assemble(&self, coeffs: &[f64]) -> FloatPoly {
        let mut p = FloatPoly::zero(self.n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                p = p.axpy(*c, &b.float);
            }
        }
        p
    }

    /// `Σ c_j b_j` with exact coefficients.
    pub fn assemble_exact(&self, coeffs: &[Coefficient]) -> Polynomial {
        let mut p = Polynomial::zero(self.n, Field::Rational);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            p = &p + &b.exact.scale(c);
        }
        p
    }

    /// Recovers coefficients of a polynomial lying in the span of the basis,
    /// or `None` if it does not.
    pub fn collect(&self, p: &Polynomial) -> Option<Vec<Coefficient>> {
        // Each basis element owns a witness monomial absent from the others
        // of the same degree: itself (monomial bases) or x_1^{2a} x_{r+1}^{2b}.
        let coeffs: Vec<Coefficient> = self
            .basis
            .iter()
            .map(|b| {
                let witness = self.witness(b);
                let scale = b.exact.coefficient(&witness);
                &p.coefficient(&witness) * &scale.inv().expect("witness occurs")
            })
            .collect();
        (self.assemble_exact(&coeffs) == *p).then_some(coeffs)
    }

    fn witness(&self, b: &BasisElement) -> Monomial {
        match self.symmetry {
            Symmetry::Full | Symmetry::Diagonal => {
                b.exact.terms().next().expect("monomial").0.clone()
            }
            Symmetry::BiRadial { r, .. } => {
                let (a, bb) = parse_uv(&b.label);
                let mut e = vec![0u32; self.n];
                e[0] = 2 * a;
                e[r] += 2 * bb;
                Monomial::new(e)
            }
        }
    }

    /// Basis indices whose degree is pinned by the resolved normalization
    /// for `top` (top-equation) or the full target.
    pub fn normalized_indices(&self, top: bool) -> Vec<usize> {
        let pinned = |d: u32| match &self.normalization {
            Normalization::Auto if top => d == self.m,
            Normalization::Auto => d >= 2,
            Normalization::Degrees(ds) => ds.contains(&d),
            Normalization::None => false,
        };
        (0..self.len())
            .filter(|&j| pinned(self.basis[j].degree))
            .collect()
    }
}

fn pow_label(x: &str, k: u32) -> String {
    if k == 1 {
        x.to_string()
    } else {
        format!("{x}^{k}")
    }
}

fn parse_uv(label: &str) -> (u32, u32) {
    let mut a = 0;
    let mut b = 0;
    for part in label.split('*') {
        let (base, exp) = part.split_once('^').unwrap_or((part, "1"));
        let k: u32 = exp.parse().expect("generated label");
        match base {
            "u" => a = k,
            "v" => b = k,
            _ => unreachable!("bi-radial labels use u and v"),
        }
    }
    (a, b)
}

fn sorted(degrees: &[u32]) -> Vec<u32> {
    let mut d = degrees.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}
