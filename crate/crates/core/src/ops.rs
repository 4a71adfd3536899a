//! The minimal-surface operator algebra on exact polynomials.
//!
//! `L(P) = |grad P|^2 ΔP - Σ_ij P_i P_j P_ij` is the cubic part of the minimal
//! surface operator, so `MSE(P) = ΔP + L(P)`. Expanding `P = P_m + ... + P_1`
//! and collecting by degree gives the graded system `E_0, ..., E_{3m-4}`.

use serde::Serialize;
use thiserror::Error;

use crate::poly::{Coefficient, PolyError, Polynomial};
use crate::report::serialize_display;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpsError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("degree {0} is below 2: the graded system is degenerate")]
    Degenerate(u32),
    #[error("the zero polynomial has no graded system")]
    ZeroPolynomial,
    #[error("polynomial solutions are normalized to have no constant term")]
    ConstantTerm,
    #[error("|grad P| = {0:e} at the point, below tolerance {1:e}")]
    CriticalPoint(f64, f64),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `Σ_ij P_i P_j P_ij`, summing each off-diagonal pair once and doubling.
fn hessian_quadratic_form(p: &Polynomial) -> Polynomial {
    let n = p.n();
    let grad = p.gradient();
    let mut out = Polynomial::zero(n, p.field());
    let two = Coefficient::from_int(2, p.field());
    for i in 0..n {
        if grad[i].is_zero() {
            continue;
        }
        for j in i..n {
            let pij = grad[i].d(j);
            if pij.is_zero() || grad[j].is_zero() {
                continue;
            }
            let term = &(&grad[i] * &grad[j]) * &pij;
            out = if i == j {
                &out + &term
            } else {
                &out + &term.scale(&two)
            };
        }
    }
    out
}

/// `L(P) = |grad P|^2 ΔP - Σ_ij P_i P_j P_ij`.
pub fn l_operator(p: &Polynomial) -> Polynomial {
    let lap = p.laplacian();
    let first = if lap.is_zero() {
        lap
    } else {
        &p.gradient_norm_squared() * &lap
    };
    &first - &hessian_quadratic_form(p)
}

/// `(1 + |grad P|^2) ΔP - Σ_ij P_i P_j P_ij`.
pub fn mse_residual(p: &Polynomial) -> Polynomial {
    &p.laplacian() + &l_operator(p)
}

/// The infinity-Laplacian `Σ_ij P_i P_j P_ij`.
pub fn inf_laplacian(p: &Polynomial) -> Polynomial {
    hessian_quadratic_form(p)
}

/// The same quantity as `1/2 <grad P, grad |grad P|^2>`.
pub fn inf_laplacian_gradient_form(p: &Polynomial) -> Polynomial {
    let g2 = p.gradient_norm_squared();
    let mut out = Polynomial::zero(p.n(), p.field());
    for (pi, gi) in p.gradient().iter().zip(g2.gradient()) {
        out = &out + &(pi * &gi);
    }
    out.scale(&Coefficient::from_frac(1, 2, p.field()))
}

/// Computes both forms and fails if they disagree.
pub fn inf_laplacian_checked(p: &Polynomial) -> Result<Polynomial, OpsError> {
    let a = inf_laplacian(p);
    if a != inf_laplacian_gradient_form(p) {
        return Err(OpsError::Invariant(
            "the two infinity-Laplacian formulas differ".into(),
        ));
    }
    Ok(a)
}

/// Linearization of `L` at `Pm` in the direction `Q`:
/// `|grad Pm|^2 ΔQ + 2 ΔPm <grad Pm, grad Q> - Σ_ij (Pm_i Pm_j Q_ij + 2 Pm_j Pm_ij Q_i)`.
pub fn dl(pm: &Polynomial, q: &Polynomial) -> Polynomial {
    let n = pm.n();
    let field = pm.field();
    let two = Coefficient::from_int(2, field);
    let gp = pm.gradient();
    let gq = q.gradient();
    let mut out = &pm.gradient_norm_squared() * &q.laplacian();
    let lap_p = pm.laplacian();
    if !lap_p.is_zero() {
        let mut dot = Polynomial::zero(n, field);
        for (a, b) in gp.iter().zip(&gq) {
            dot = &dot + &(a * b);
        }
        out = &out + &(&lap_p * &dot).scale(&two);
    }
    for i in 0..n {
        for j in 0..n {
            if !gp[i].is_zero() && !gp[j].is_zero() {
                let qij = gq[i].d(j);
                if !qij.is_zero() {
                    out = &out - &(&(&gp[i] * &gp[j]) * &qij);
                }
            }
            let pij = gp[i].d(j);
            if !pij.is_zero() && !gp[j].is_zero() && !gq[i].is_zero() {
                out = &out - &(&(&gp[j] * &pij) * &gq[i]).scale(&two);
            }
        }
    }
    out
}

/// Degree-indexed equations `E_d`, `d = 0..=3m-4`. Entries may be zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedSystem {
    pub m: u32,
    pub equations: Vec<GradedEquation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedEquation {
    pub degree: u32,
    #[serde(serialize_with = "serialize_display")]
    pub equation: Polynomial,
}

impl GradedSystem {
    /// Nonzero equations only.
    pub fn surviving(&self) -> impl Iterator<Item = &GradedEquation> {
        self.equations.iter().filter(|e| !e.equation.is_zero())
    }

    pub fn equation(&self, degree: u32) -> Option<&Polynomial> {
        self.equations
            .iter()
            .find(|e| e.degree == degree)
            .map(|e| &e.equation)
    }

    /// `Σ_d E_d`.
    pub fn reassemble(&self, n: usize, field: crate::poly::Field) -> Polynomial {
        self.equations
            .iter()
            .fold(Polynomial::zero(n, field), |acc, e| &acc + &e.equation)
    }

    /// True iff every equation vanishes, i.e. `P` solves the MSE.
    pub fn is_solution(&self) -> bool {
        self.surviving().next().is_none()
    }
}

pub fn graded_mse_system(p: &Polynomial) -> Result<GradedSystem, OpsError> {
    let m = p.degree().ok_or(OpsError::ZeroPolynomial)?;
    if m < 2 {
        return Err(OpsError::Degenerate(m));
    }
    if !p.constant_term().is_zero() {
        return Err(OpsError::ConstantTerm);
    }
    let r = mse_residual(p);
    let top = 3 * m - 4;
    let equations = (0..=top)
        .map(|d| GradedEquation {
            degree: d,
            equation: r.homogeneous_component(d),
        })
        .collect();
    Ok(GradedSystem { m, equations })
}

/// `λ` with `L(P) = λ |x|^{2(m-2)} P`, if such a constant exists.
pub fn eigen_relation(p: &Polynomial) -> Result<Option<Coefficient>, OpsError> {
    if !p.is_homogeneous() {
        return Err(OpsError::NotHomogeneous);
    }
    let m = p.degree().ok_or(OpsError::ZeroPolynomial)?;
    if m < 2 {
        return Err(OpsError::Degenerate(m));
    }
    let lp = l_operator(p);
    if lp.is_zero() {
        return Ok(Some(Coefficient::zero(p.field())));
    }
    let weight = Polynomial::norm_squared(p.n(), p.field()).pow(m - 2);
    let Some(q) = lp.exact_divide(&(&weight * p))? else {
        return Ok(None);
    };
    Ok(q.is_constant().then(|| q.constant_term()))
}

pub const DEFAULT_GRADIENT_TOLERANCE: f64 = 1e-9;

/// Mean curvature of the level set `{P = P(x)}` at `x`: `L(P)(x) / |grad P(x)|^3`.
///
/// Holds the symbolic `L(P)` and gradient so repeated evaluation is cheap.
#[derive(Clone, Debug)]
pub struct CurvatureProbe {
    l: Polynomial,
    grad: Vec<Polynomial>,
    pub tolerance: f64,
}

impl CurvatureProbe {
    pub fn new(p: &Polynomial) -> Self {
        CurvatureProbe {
            l: l_operator(p),
            grad: p.gradient(),
            tolerance: DEFAULT_GRADIENT_TOLERANCE,
        }
    }

    pub fn at(&self, x: &[f64]) -> Result<f64, OpsError> {
        let mut g2 = 0.0;
        for g in &self.grad {
            let v = g.evaluate_f64(x)?;
            g2 += v * v;
        }
        let norm = g2.sqrt();
        if norm <= self.tolerance {
            return Err(OpsError::CriticalPoint(norm, self.tolerance));
        }
        Ok(self.l.evaluate_f64(x)? / (norm * norm * norm))
    }
}

pub fn mean_curvature_at(p: &Polynomial, x: &[f64]) -> Result<f64, OpsError> {
    CurvatureProbe::new(p).at(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, simons_quadric};
    use crate::poly::{parse, Field};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(text: &str, n: usize) -> Polynomial {
        parse(text, n, Field::Rational).unwrap()
    }

    /// Independent oracle: the double sum over all ordered (i, j), no symmetry.
    fn l_naive(p: &Polynomial) -> Polynomial {
        let g = p.gradient();
        let mut s = Polynomial::zero(p.n(), p.field());
        for i in 0..p.n() {
            for j in 0..p.n() {
                s = &s + &(&(&g[i] * &g[j]) * &g[i].d(j));
            }
        }
        &(&p.gradient_norm_squared() * &p.laplacian()) - &s
    }

    #[test]
    fn l_examples() {
        assert!(l_operator(&p("3*x1 - x2 + 7", 2)).is_zero());
        assert!(l_operator(&p("x1^3", 3)).is_zero());
        let q = simons_quadric();
        assert_eq!(
            l_operator(&q),
            q.scale(&Coefficient::from_int(-8, Field::Rational))
        );
    }

    #[test]
    fn residual_examples() {
        assert!(mse_residual(&p("2*x1 + x2", 2)).is_zero());
        assert_eq!(mse_residual(&p("x1*x2", 2)), p("-2*x1*x2", 2));
        assert_eq!(mse_residual(&p("x1^2", 1)), p("2", 1));
    }

    #[test]
    fn graded_examples() {
        let sys = graded_mse_system(&p("x1^2", 1)).unwrap();
        let surv: Vec<_> = sys.surviving().collect();
        assert_eq!(surv.len(), 1);
        assert_eq!(surv[0].degree, 0);
        assert_eq!(surv[0].equation, p("2", 1));

        let q = simons_quadric();
        let sys = graded_mse_system(&q).unwrap();
        assert_eq!(sys.equations.len(), 3);
        let degs: Vec<u32> = sys.surviving().map(|e| e.degree).collect();
        assert_eq!(degs, vec![2]);

        let pm = p("x1^3 + x2^3 + x1*x2*x3", 3);
        let sys = graded_mse_system(&pm).unwrap();
        let degs: Vec<u32> = sys.surviving().map(|e| e.degree).collect();
        assert_eq!(degs, vec![1, 5]);
        assert_eq!(sys.equation(5).unwrap(), &l_operator(&pm));

        let sys = graded_mse_system(&p("x1^3 + x2", 2)).unwrap();
        // E_1 = ΔP_3 + |grad P_1|^2 ΔP_3.
        assert_eq!(sys.equation(1).unwrap(), &p("12*x1", 2));
        assert!(sys.equation(5).unwrap().is_zero());
        assert!(!sys.is_solution());

        assert_eq!(
            graded_mse_system(&p("x1 + x2", 2)),
            Err(OpsError::Degenerate(1))
        );
        assert_eq!(
            graded_mse_system(&p("x1^2 + 1", 2)),
            Err(OpsError::ConstantTerm)
        );
    }

    #[test]
    fn inf_laplacian_examples() {
        assert!(inf_laplacian(&p("x1 - 4*x2", 2)).is_zero());
        assert_eq!(
            inf_laplacian_checked(&p("x1^2", 2)).unwrap(),
            p("8*x1^2", 2)
        );
        let r2 = Polynomial::norm_squared(5, Field::Rational);
        assert_eq!(
            inf_laplacian_checked(&r2).unwrap(),
            r2.scale(&Coefficient::from_int(8, Field::Rational))
        );
    }

    #[test]
    fn dl_examples() {
        let x3 = p("x1^3", 2);
        assert!(dl(&x3, &Polynomial::zero(2, Field::Rational)).is_zero());
        assert!(dl(&x3, &p("3*x1^2", 2)).is_zero());
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(
            eigen_relation(&simons_quadric()).unwrap(),
            Some(Coefficient::from_int(-8, Field::Rational))
        );
        assert_eq!(
            eigen_relation(&p("x1^3", 3)).unwrap(),
            Some(Coefficient::zero(Field::Rational))
        );
        assert_eq!(eigen_relation(&p("x1^2*x2", 3)).unwrap(), None);
        assert_eq!(
            eigen_relation(&p("x1^2 + x2", 2)),
            Err(OpsError::NotHomogeneous)
        );
    }

    #[test]
    fn mean_curvature_examples() {
        assert_eq!(
            mean_curvature_at(&p("x1^3", 3), &[1.0, 0.0, 0.0]).unwrap(),
            0.0
        );
        let h = mean_curvature_at(&p("x1^2 + x2^2", 2), &[1.0, 0.0]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = [s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0];
        assert!(mean_curvature_at(&simons_quadric(), &x).unwrap().abs() < 1e-12);
        assert!(matches!(
            mean_curvature_at(&p("x1^2", 1), &[0.0]),
            Err(OpsError::CriticalPoint(..))
        ));
    }

    #[test]
    fn no_homogeneous_fixture_is_harmonic_and_infinity_harmonic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=4);
            let m = rng.gen_range(2..=4);
            let h = fixtures::random_homogeneous(&mut rng, n, m, 4);
            assert!(
                !(h.laplacian().is_zero() && inf_laplacian(&h).is_zero()),
                "{h}"
            );
        }
        // Harmonic but not infinity-harmonic.
        let h = p("x1^2 - x2^2", 2);
        assert!(h.laplacian().is_zero() && !inf_laplacian(&h).is_zero());
    }

    use rand::Rng;

    fn poly_strategy(max_n: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
        (any::<u64>(), 1..=max_n, 0..=max_deg, 1usize..6).prop_map(|(seed, n, d, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            fixtures::random_polynomial(&mut rng, n, d, t)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn l_matches_naive_double_sum(p in poly_strategy(3, 4)) {
            prop_assert_eq!(l_operator(&p), l_naive(&p));
        }

        #[test]
        fn residual_is_laplacian_plus_l(p in poly_strategy(3, 4)) {
            prop_assert_eq!(mse_residual(&p), &p.laplacian() + &l_operator(&p));
        }

        #[test]
        fn l_degree_bound(p in poly_strategy(3, 4)) {
            if let (Some(d), Some(dl)) = (p.degree(), l_operator(&p).degree()) {
                prop_assert!(d >= 2 && dl <= 3 * d - 4);
            }
        }

        #[test]
        fn l_of_homogeneous_is_homogeneous(seed in any::<u64>(), m in 2u32..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = fixtures::random_homogeneous(&mut rng, 3, m, 4);
            let lh = l_operator(&h);
            if !lh.is_zero() {
                prop_assert_eq!(lh.homogeneous_degree(), Ok(3 * m - 4));
            }
        }

        #[test]
        fn l_scaling_covariance(p in poly_strategy(3, 4), num in 1i64..6, den in 1i64..6) {
            let s = num_rational::BigRational::new(num.into(), den.into());
            let q = p.rescale_variables(&s);
            let s4 = Coefficient::from_rational(num_traits::pow(s.clone(), 4), Field::Rational);
            prop_assert_eq!(l_operator(&q), l_operator(&p).rescale_variables(&s).scale(&s4));
        }

        #[test]
        fn l_translation_invariant(p in poly_strategy(3, 4), c in -9i64..9) {
            let shifted = &p + &Polynomial::constant(p.n(), Coefficient::from_int(c, Field::Rational));
            prop_assert_eq!(l_operator(&shifted), l_operator(&p));
        }

        #[test]
        fn derivative_linearization(p in poly_strategy(3, 4)) {
            let l = l_operator(&p);
            for i in 0..p.n() {
                prop_assert_eq!(l.d(i), dl(&p, &p.d(i)));
            }
        }

        #[test]
        fn dl_is_linear(p in poly_strategy(3, 3), q in poly_strategy(3, 3), a in -4i64..4, b in -4i64..4) {
            if p.n() == q.n() {
                let ca = Coefficient::from_int(a, Field::Rational);
                let cb = Coefficient::from_int(b, Field::Rational);
                let r = fixtures::random_polynomial(&mut ChaCha8Rng::seed_from_u64(a as u64), p.n(), 3, 4);
                let lhs = dl(&p, &(&q.scale(&ca) + &r.scale(&cb)));
                let rhs = &dl(&p, &q).scale(&ca) + &dl(&p, &r).scale(&cb);
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn infinity_laplacian_forms_agree(p in poly_strategy(4, 4)) {
            prop_assert!(inf_laplacian_checked(&p).is_ok());
        }

        #[test]
        fn graded_system_reassembles(p in poly_strategy(3, 4)) {
            let p = &p - &Polynomial::constant(p.n(), p.constant_term());
            if let Ok(sys) = graded_mse_system(&p) {
                prop_assert_eq!(sys.reassemble(p.n(), p.field()), mse_residual(&p));
                prop_assert_eq!(sys.equations.len() as u32, 3 * sys.m - 3);
                let pm = p.homogeneous_component(sys.m);
                prop_assert_eq!(sys.equation(3 * sys.m - 4).unwrap(), &l_operator(&pm));
            }
        }
    }
}
