//! Cartan–Münzner identities, the isoparametric catalog and the Diophantine
//! case analysis that rules out isoparametric tangent cones.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{parity_admissible, perfect_square_root, BoundsError, QuadraticSurd};
use crate::poly::{Coefficient, Field, Polynomial};
use crate::report::serialize_display;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("number of principal curvatures must be 1, 2, 3, 4 or 6, got {0}")]
    InvalidDegree(u32),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("link {tag:?} does not occur at (g, l) = ({g}, {l})")]
    TagMismatch {
        tag: ExceptionalLink,
        g: u32,
        l: i64,
    },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartanMunznerReport {
    pub g: u32,
    #[serde(serialize_with = "serialize_display")]
    pub c: Coefficient,
    pub ok: bool,
    /// `Δp - c |x|^{g-2}` (for odd `g`, just `Δp`).
    #[serde(serialize_with = "serialize_display")]
    pub laplacian_defect: Polynomial,
    /// `|grad p|^2 - g^2 |x|^{2g-2}`.
    #[serde(serialize_with = "serialize_display")]
    pub gradient_defect: Polynomial,
}

/// Checks `Δp = c|x|^{g-2}` and `|grad p|^2 = g^2 |x|^{2g-2}`.
///
/// For odd `g` the power `|x|^{g-2}` is not a polynomial, so the first
/// identity is read as `Δp = 0` with `c = 0`.
pub fn cartan_munzner_check(p: &Polynomial) -> Result<CartanMunznerReport, IsoError> {
    if !p.is_homogeneous() {
        return Err(IsoError::NotHomogeneous);
    }
    let g = p.degree().ok_or(IsoError::ZeroPolynomial)?;
    if g == 0 {
        return Err(IsoError::InvalidDegree(0));
    }
    let n = p.n();
    let field = p.field();
    let r2 = Polynomial::norm_squared(n, field);
    let lap = p.laplacian();
    let (c, laplacian_defect) = if g % 2 == 1 {
        (Coefficient::zero(field), lap)
    } else {
        let weight = r2.pow((g - 2) / 2);
        let c = match lap.leading_term() {
            None => Coefficient::zero(field),
            Some((m, v)) => {
                let w = weight.coefficient(m);
                match w.inv() {
                    Some(inv) => v * &inv,
                    None => Coefficient::zero(field),
                }
            }
        };
        let defect = &lap - &weight.scale(&c);
        (c, defect)
    };
    let g2 = Coefficient::from_int((g * g) as i64, field);
    let gradient_defect = &p.gradient_norm_squared() - &r2.pow(g - 1).scale(&g2);
    Ok(CartanMunznerReport {
        g,
        c,
        ok: laplacian_defect.is_zero() && gradient_defect.is_zero(),
        laplacian_defect,
        gradient_defect,
    })
}

/// Links that share `(g, l)` with area-minimizing cases but are not
/// area-minimizing themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExceptionalLink {
    /// `S^1 x S^5`, `(g, l) = (2, 8)`.
    S1xS5,
    /// `(SO(8) x SO(2)) / (SO(6) x Z_2)`, `(g, l) = (4, 16)`.
    SO8xSO2,
}

impl ExceptionalLink {
    pub fn parameters(self) -> (u32, i64) {
        match self {
            ExceptionalLink::S1xS5 => (2, 8),
            ExceptionalLink::SO8xSO2 => (4, 16),
        }
    }

    fn at(g: u32, l: i64) -> Option<ExceptionalLink> {
        [ExceptionalLink::S1xS5, ExceptionalLink::SO8xSO2]
            .into_iter()
            .find(|e| e.parameters() == (g, l))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoparametricCase {
    pub g: u32,
    pub l: i64,
    #[serde(rename = "A2")]
    pub a2: i64,
    pub lambda1: i64,
    pub valid: bool,
    pub area_minimizing: bool,
    pub exceptional: Option<ExceptionalLink>,
    /// Set when `(g, l)` is shared with an exceptional link that the caller
    /// did not tag; `area_minimizing` then assumes the generic link.
    pub caveat: bool,
}

fn check_degree(g: u32) -> Result<(), IsoError> {
    match g {
        1 | 2 | 3 | 4 | 6 => Ok(()),
        _ => Err(IsoError::InvalidDegree(g)),
    }
}

fn valid_dimension(g: u32, l: i64) -> bool {
    match g {
        1 => l >= 2,
        2 => l >= 4,
        3 => matches!(l, 5 | 8 | 14 | 26),
        4 => l >= 6 && l % 2 == 0,
        6 => matches!(l, 8 | 14),
        _ => false,
    }
}

/// `|A|^2 = (g - 1)(l - 2)` for the minimal isoparametric hypersurface.
pub fn second_fundamental_form_squared(g: u32, l: i64) -> i64 {
    (g as i64 - 1) * (l - 2)
}

pub fn catalog(
    g: u32,
    l: i64,
    tag: Option<ExceptionalLink>,
) -> Result<IsoparametricCase, IsoError> {
    check_degree(g)?;
    if let Some(t) = tag {
        if t.parameters() != (g, l) {
            return Err(IsoError::TagMismatch { tag: t, g, l });
        }
    }
    let a2 = second_fundamental_form_squared(g, l);
    let valid = valid_dimension(g, l);
    Ok(IsoparametricCase {
        g,
        l,
        a2,
        lambda1: -a2,
        valid,
        area_minimizing: valid && l >= 4 * g as i64 && tag.is_none(),
        exceptional: tag,
        caveat: tag.is_none() && ExceptionalLink::at(g, l).is_some(),
    })
}

/// `(l - 3 - √((l-3)^2 + 4 λ1)) / 2`, the decay rate a positive Jacobi field
/// must have on a strictly minimizing cone.
pub fn jacobi_rhs(l: i64, lambda1: i64) -> Result<QuadraticSurd, IsoError> {
    let disc = (l - 3) * (l - 3) + 4 * lambda1;
    if disc < 0 {
        return Err(BoundsError::Unstable(disc.to_string()).into());
    }
    Ok(QuadraticSurd::new(l - 3, -1, 2, disc)?)
}

/// All `(d1, d2)` with `d1 * d2 = r`, `d1 <= d2` and `d1 ≡ d2 (mod 2)`,
/// negative pairs included. `r` must be positive.
pub fn same_parity_divisor_pairs(r: i64) -> Vec<(i64, i64)> {
    assert!(r > 0, "divisor pairs of a positive integer");
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= r {
        if r % d == 0 {
            let e = r / d;
            if (e - d) % 2 == 0 {
                out.push((d, e));
                out.push((-e, -d));
            }
        }
        d += 1;
    }
    out.sort();
    out
}

/// Integer solutions `(l, a)`, `a >= 0`, of `(l - shift - a)(l - shift + a) = r`.
pub fn diophantine_solutions(shift: i64, r: i64) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = same_parity_divisor_pairs(r)
        .into_iter()
        .map(|(d1, d2)| (shift + (d1 + d2) / 2, (d2 - d1) / 2))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The quadratic-in-`l` condition `(l-3)^2 - 4(g-1)(l-2) = a^2`, rewritten as
/// `(l - shift - a)(l - shift + a) = rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiophantineEquation {
    pub shift: i64,
    pub rhs: i64,
}

impl DiophantineEquation {
    pub fn for_degree(g: u32) -> Self {
        let g = g as i64;
        DiophantineEquation {
            shift: 2 * g + 1,
            rhs: 4 * g * (g - 1),
        }
    }

    pub fn holds(&self, l: i64, a: i64) -> bool {
        (l - self.shift - a) * (l - self.shift + a) == self.rhs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Excluded,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseSolution {
    pub l: i64,
    /// Integer square root of the discriminant, when it exists.
    pub a: Option<i64>,
    pub lambda1: i64,
    pub discriminant: i64,
    pub valid_dimension: bool,
    pub area_minimizing: bool,
    pub caveat: bool,
    /// `(l-3)^2 + 4 λ1 >= 0`; unstable cones have no Jacobi decay rate.
    pub stable: bool,
    pub jacobi_rhs: Option<QuadraticSurd>,
    /// `deg Q_m / k` forced by the Jacobi-field decay, when rational.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub deg_qm_over_k: Option<BigRational>,
    pub parity_violation: bool,
    pub perfect_square_violation: bool,
}

impl CaseSolution {
    /// True iff at least one contradiction applies to this branch.
    pub fn is_ruled_out(&self) -> bool {
        self.parity_violation
            || self.perfect_square_violation
            || !self.valid_dimension
            || !self.area_minimizing
            || !self.stable
    }
}

fn serialize_opt_rational<S: serde::Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(q) => crate::report::serialize_rational(q, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub g: u32,
    pub equation: Option<DiophantineEquation>,
    pub solutions: Vec<CaseSolution>,
    pub conclusion: Conclusion,
    pub reason: String,
}

fn analyse(g: u32, l: i64) -> CaseSolution {
    let case = catalog(g, l, None).expect("degree checked");
    let disc = (l - 3) * (l - 3) + 4 * case.lambda1;
    let a = perfect_square_root(disc);
    let rhs = jacobi_rhs(l, case.lambda1).ok();
    let ratio = rhs
        .as_ref()
        .and_then(QuadraticSurd::to_rational)
        .map(|r| r - BigRational::from_integer(BigInt::from(g as i64 - 1)));
    let parity_violation = ratio.as_ref().is_some_and(|r| !parity_admissible(r));
    CaseSolution {
        l,
        a,
        lambda1: case.lambda1,
        discriminant: disc,
        valid_dimension: case.valid,
        area_minimizing: case.area_minimizing,
        caveat: case.caveat,
        stable: disc >= 0,
        jacobi_rhs: rhs,
        deg_qm_over_k: ratio,
        parity_violation,
        perfect_square_violation: disc >= 0 && a.is_none(),
    }
}

pub fn exclusion_case(g: u32) -> Result<CaseReport, IsoError> {
    check_degree(g)?;
    let threshold = 4 * g as i64;
    let report = match g {
        1 => CaseReport {
            g,
            equation: None,
            solutions: vec![],
            conclusion: Conclusion::Excluded,
            reason: "a linear tangent-cone factor is ruled out by the structure theorem, which needs deg p >= 2".into(),
        },
        2 | 4 => {
            let eq = DiophantineEquation::for_degree(g);
            let solutions = diophantine_solutions(eq.shift, eq.rhs)
                .into_iter()
                .filter(|&(l, _)| l >= threshold)
                .map(|(l, a)| {
                    let s = analyse(g, l);
                    debug_assert_eq!(s.a, Some(a));
                    s
                })
                .collect();
            CaseReport {
                g,
                equation: Some(eq),
                solutions,
                conclusion: Conclusion::Excluded,
                reason: "every area-minimizing solution of the perfect-square condition violates dimension parity or the parity of deg Q_m / k".into(),
            }
        }
        3 => CaseReport {
            g,
            equation: None,
            solutions: [5, 8, 14, 26]
                .into_iter()
                .filter(|&l| l >= threshold)
                .map(|l| analyse(g, l))
                .collect(),
            conclusion: Conclusion::Excluded,
            reason: "l = 14 forces an odd deg Q_m / k; l = 26 has a non-square discriminant".into(),
        },
        _ => {
            let solutions: Vec<CaseSolution> = [8, 14].into_iter().map(|l| analyse(g, l)).collect();
            debug_assert!(solutions.iter().all(|s| !s.area_minimizing));
            CaseReport {
                g,
                equation: None,
                solutions,
                conclusion: Conclusion::NotApplicable,
                reason: "no cone with six principal curvatures is area-minimizing".into(),
            }
        }
    };
    Ok(report)
}

/// The quadric `x1^2 + ... + x_r^2 - ... - x_{r+s}^2`, convenience re-export.
pub fn quadric(r: usize, s: usize) -> Polynomial {
    crate::fixtures::signature_quadric(r, s)
}

/// The same quadric over a quadratic field, for mixed-field sessions.
pub fn quadric_in(r: usize, s: usize, field: Field) -> Polynomial {
    quadric(r, s)
        .with_field(field)
        .expect("rational coefficients embed")
}
