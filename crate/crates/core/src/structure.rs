//! Checks on a leading term presented as `P_m = p^k Q_m`.
//!
//! Exact facts (product identity, parities, coprimality, divisibility chains)
//! are verified exactly. Sign and zero-locus statements are supported by
//! seeded sampling and reported as evidence.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{
    sample_points, sign_change_witness, Coefficient, FloatPoly, PolyError, Polynomial,
    SamplerConfig, SignChange,
};
use crate::report::{
    rational_vec, serialize_display, serialize_f64, serialize_f64_vec, serialize_opt_f64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("k = {0} must be odd and positive")]
    InvalidK(u32),
    #[error("{0} is not homogeneous")]
    NotHomogeneous(&'static str),
    #[error("{0} is the zero polynomial")]
    ZeroFactor(&'static str),
    #[error("structure checks need rational coefficients")]
    NeedsRationalField,
    #[error("claimed P_m differs from p^k * Q_m")]
    ProductMismatch,
    #[error("the lower-order chain needs k >= 3, got k = {0}")]
    HypothesisUnmet(u32),
    #[error("deg P = {got:?} but the factored leading term has degree {expected}")]
    DegreeMismatch { expected: u32, got: Option<u32> },
    #[error("the top component of P is not p^k * Q_m")]
    LeadingMismatch,
    #[error("a must be nonzero")]
    ZeroShift,
    #[error("degree must be at least 2")]
    DegreeTooLow,
    #[error("Q_m(x) = {0:e} is negative: the cofactor is not nonnegative")]
    NegativeCofactor(f64),
    #[error("Q_m(x) vanishes where p(x) = {0:e} does not; velocity is undefined")]
    Indeterminate(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A leading term `P_m = p^k Q_m` with `k` odd.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredLeading {
    p: Polynomial,
    k: u32,
    qm: Polynomial,
    pm: Polynomial,
}

impl FactoredLeading {
    pub fn new(p: Polynomial, k: u32, qm: Polynomial) -> Result<Self, StructureError> {
        if k == 0 || k.is_multiple_of(2) {
            return Err(StructureError::InvalidK(k));
        }
        p.check_compatible(&qm)?;
        for (name, f) in [("p", &p), ("Q_m", &qm)] {
            if f.is_zero() {
                return Err(StructureError::ZeroFactor(name));
            }
            if !f.is_homogeneous() {
                return Err(StructureError::NotHomogeneous(name));
            }
            if !f.rational_coefficients() {
                return Err(StructureError::NeedsRationalField);
            }
        }
        let pm = &p.pow(k) * &qm;
        Ok(FactoredLeading { p, k, qm, pm })
    }

    /// As [`FactoredLeading::new`], but also checks a caller-supplied product.
    pub fn with_product(
        p: Polynomial,
        k: u32,
        qm: Polynomial,
        pm: &Polynomial,
    ) -> Result<Self, StructureError> {
        let fl = FactoredLeading::new(p, k, qm)?;
        if &fl.pm != pm {
            return Err(StructureError::ProductMismatch);
        }
        Ok(fl)
    }

    pub fn p(&self) -> &Polynomial {
        &self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn qm(&self) -> &Polynomial {
        &self.qm
    }

    pub fn pm(&self) -> &Polynomial {
        &self.pm
    }

    pub fn m(&self) -> u32 {
        self.pm.degree().expect("product of nonzero factors")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonnegativityEvidence {
    pub samples: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub min_value: f64,
    /// An exact rational point where `Q_m < 0`, if one was sampled.
    #[serde(serialize_with = "serialize_opt_point")]
    pub violation: Option<Vec<BigRational>>,
}

fn serialize_opt_point<S: serde::Serializer>(
    v: &Option<Vec<BigRational>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(p) => rational_vec::serialize(p, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSample {
    #[serde(serialize_with = "serialize_f64_vec")]
    pub point: Vec<f64>,
    #[serde(serialize_with = "serialize_f64")]
    pub qm: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub grad_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroLocusEvidence {
    pub starts: usize,
    /// Number of starts that converged to a zero of `Q_m` on the sphere.
    pub located: usize,
    /// Distinct located zeros (up to a cap).
    pub points: Vec<ZeroSample>,
    #[serde(serialize_with = "serialize_opt_f64")]
    pub max_grad_p: Option<f64>,
    #[serde(serialize_with = "serialize_f64")]
    pub threshold: f64,
    /// Every located zero has `|grad p| < threshold` (vacuous if none).
    pub consistent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every exact check passed and no evidence points the other way.
    Consistent,
    /// An exact check failed or an exact counterexample was sampled.
    Violated,
    /// Exact checks passed but the sampled evidence is incomplete or
    /// numerically contradictory.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub k: u32,
    pub deg_p: u32,
    #[serde(rename = "deg_Qm")]
    pub deg_qm: u32,
    pub m: u32,
    #[serde(serialize_with = "serialize_display")]
    pub pm: Polynomial,
    pub product_ok: bool,
    pub parity_ok: bool,
    pub degree_ok: bool,
    pub coprime_ok: bool,
    #[serde(serialize_with = "serialize_display")]
    pub gcd: Polynomial,
    pub irreducibility: &'static str,
    pub sign_change: Option<SignChange>,
    pub nonnegativity_evidence: NonnegativityEvidence,
    pub zero_locus_evidence: ZeroLocusEvidence,
    pub divisibility_chain: Option<LowerOrder>,
    pub verdict: Verdict,
}

impl StructureReport {
    fn compute_verdict(&mut self) {
        let exact_ok = self.product_ok
            && self.parity_ok
            && self.degree_ok
            && self.coprime_ok
            && self.nonnegativity_evidence.violation.is_none()
            && !matches!(self.divisibility_chain, Some(LowerOrder::Violation { .. }));
        self.verdict = if !exact_ok {
            Verdict::Violated
        } else if self.sign_change.is_none() || !self.zero_locus_evidence.consistent {
            Verdict::Inconclusive
        } else {
            Verdict::Consistent
        };
    }

    /// Attaches the lower-order divisibility chain of a full polynomial.
    pub fn with_lower_order(mut self, chain: LowerOrder) -> Self {
        self.divisibility_chain = Some(chain);
        self.compute_verdict();
        self
    }
}

pub const ZERO_LOCUS_STARTS: usize = 1000;
pub const ZERO_LOCUS_THRESHOLD: f64 = 1e-4;
const ZERO_TOLERANCE: f64 = 1e-20;
const MAX_ZERO_POINTS: usize = 32;

fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimises `Q_m` on the unit sphere from one start using damped Newton
/// steps toward `Q_m = 0`, projected to the tangent space.
fn descend_to_zero(q: &FloatPoly, grad: &[FloatPoly], start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut x = start;
    let mut fx = q.eval(&x);
    for _ in 0..400 {
        if fx <= ZERO_TOLERANCE {
            break;
        }
        let g: Vec<f64> = grad.iter().map(|gi| gi.eval(&x)).collect();
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - radial * b).collect();
        let t2: f64 = tangent.iter().map(|v| v * v).sum();
        if t2 == 0.0 {
            break;
        }
        let mut step = fx / t2;
        let mut improved = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&tangent).map(|(a, b)| a - step * b).collect();
            let r = norm(&trial);
            let trial: Vec<f64> = trial.into_iter().map(|v| v / r).collect();
            let ft = q.eval(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

fn zero_locus(fl: &FactoredLeading, seed: u64) -> ZeroLocusEvidence {
    let n = fl.p.n();
    let q = FloatPoly::from_polynomial(&fl.qm);
    let empty = |starts| ZeroLocusEvidence {
        starts,
        located: 0,
        points: vec![],
        max_grad_p: None,
        threshold: ZERO_LOCUS_THRESHOLD,
        consistent: true,
    };
    if fl.qm.is_constant() {
        return empty(0);
    }
    let scale = fl.qm.max_abs_coefficient();
    let qn = q.scale(1.0 / scale);
    let grad = qn.gradient();
    let p = FloatPoly::from_polynomial(&fl.p);
    let pgrad = p.gradient();
    let mut found: Vec<ZeroSample> = (0..ZERO_LOCUS_STARTS)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let (x, fx) = descend_to_zero(&qn, &grad, unit_vector(&mut rng, n));
            (fx <= ZERO_TOLERANCE).then(|| {
                let gp = norm(&pgrad.iter().map(|g| g.eval(&x)).collect::<Vec<_>>());
                ZeroSample {
                    qm: fx * scale,
                    point: x,
                    grad_p: gp,
                }
            })
        })
        .collect();
    let located = found.len();
    let max_grad_p = found.iter().map(|z| z.grad_p).reduce(f64::max);
    let mut points: Vec<ZeroSample> = Vec::new();
    found.sort_by(|a, b| a.point.partial_cmp(&b.point).expect("finite points"));
    for z in found {
        let distinct = points.iter().all(|y| {
            norm(
                &y.point
                    .iter()
                    .zip(&z.point)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            ) > 1e-6
        });
        if distinct && points.len() < MAX_ZERO_POINTS {
            points.push(z);
        }
    }
    ZeroLocusEvidence {
        starts: ZERO_LOCUS_STARTS,
        located,
        points,
        max_grad_p,
        threshold: ZERO_LOCUS_THRESHOLD,
        consistent: max_grad_p.is_none_or(|g| g < ZERO_LOCUS_THRESHOLD),
    }
}

fn nonnegativity(qm: &Polynomial, cfg: SamplerConfig) -> NonnegativityEvidence {
    let mut min_value = f64::INFINITY;
    let mut violation = None;
    let points = sample_points(qm.n(), cfg);
    for x in &points {
        let v = qm.evaluate(x).expect("sample dimension");
        let f = v.to_f64();
        if f < min_value {
            min_value = f;
        }
        if violation.is_none() && v.signum() == std::cmp::Ordering::Less {
            violation = Some(x.clone());
        }
    }
    NonnegativityEvidence {
        samples: points.len(),
        min_value,
        violation,
    }
}

/// Exact constraints plus sampling evidence for a factored leading term.
pub fn check_leading(
    fl: &FactoredLeading,
    cfg: SamplerConfig,
) -> Result<StructureReport, StructureError> {
    let deg_p = fl.p.degree().expect("nonzero");
    let deg_qm = fl.qm.degree().expect("nonzero");
    let gcd = fl.p.gcd(&fl.qm)?;
    let mut report = StructureReport {
        k: fl.k,
        deg_p,
        deg_qm,
        m: fl.m(),
        pm: fl.pm.clone(),
        product_ok: fl.pm == &fl.p.pow(fl.k) * &fl.qm,
        parity_ok: fl.k % 2 == 1 && deg_qm.is_multiple_of(2),
        degree_ok: deg_p >= 3,
        coprime_ok: gcd.is_constant(),
        gcd,
        irreducibility: "caller-asserted",
        sign_change: sign_change_witness(&fl.p, cfg),
        nonnegativity_evidence: nonnegativity(&fl.qm, cfg),
        zero_locus_evidence: zero_locus(fl, cfg.seed),
        divisibility_chain: None,
        verdict: Verdict::Inconclusive,
    };
    report.compute_verdict();
    Ok(report)
}

/// Multiplicity of `p` in one lower homogeneous component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentMultiplicity {
    pub degree: u32,
    /// `None` when the component is zero (divisible by every power).
    pub multiplicity: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerOrder {
    /// `p` divides `P_i` at least twice for `s < i < m`, exactly once at `s`.
    Chain {
        s: u32,
        multiplicities: Vec<ComponentMultiplicity>,
    },
    /// `P = P_m`, or every component in degrees `2..m` vanishes.
    NoLowerOrderTerms,
    /// The chain breaks: `p` does not divide `P_degree`, or no degree has
    /// multiplicity exactly one.
    Violation {
        degree: Option<u32>,
        multiplicities: Vec<ComponentMultiplicity>,
    },
}

pub const MULTIPLICITY_CAP: u32 = 20;

/// Scans `P_{m-1}, ..., P_2` for the divisibility pattern that solutions with
/// `k >= 3` must have.
pub fn check_lower_order(
    p: &Polynomial,
    fl: &FactoredLeading,
) -> Result<LowerOrder, StructureError> {
    if fl.k < 3 {
        return Err(StructureError::HypothesisUnmet(fl.k));
    }
    if !p.rational_coefficients() {
        return Err(StructureError::NeedsRationalField);
    }
    let m = fl.m();
    if p.degree() != Some(m) {
        return Err(StructureError::DegreeMismatch {
            expected: m,
            got: p.degree(),
        });
    }
    if p.homogeneous_component(m) != fl.pm {
        return Err(StructureError::LeadingMismatch);
    }
    let mut multiplicities = Vec::new();
    let mut any_nonzero = false;
    for i in (2..m).rev() {
        let pi = p.homogeneous_component(i);
        let mult = pi.multiplicity(&fl.p, MULTIPLICITY_CAP)?;
        multiplicities.push(ComponentMultiplicity {
            degree: i,
            multiplicity: mult,
        });
        match mult {
            None => {}
            Some(1) => {
                return Ok(LowerOrder::Chain {
                    s: i,
                    multiplicities,
                })
            }
            Some(0) => {
                return Ok(LowerOrder::Violation {
                    degree: Some(i),
                    multiplicities,
                })
            }
            Some(_) => any_nonzero = true,
        }
    }
    Ok(if any_nonzero {
        LowerOrder::Violation {
            degree: None,
            multiplicities,
        }
    } else {
        LowerOrder::NoLowerOrderTerms
    })
}

/// `∂_1( (∂_1 Pm)^2 / (1 + a^2) + Σ_{i>=2} (∂_i Pm)^2 )`, which must vanish if
/// `Pm + a x_1` solves the minimal surface equation.
pub fn nodeg2_defect(pm: &Polynomial, a: &BigRational) -> Result<Polynomial, StructureError> {
    use num_traits::{One, Zero};
    if a.is_zero() {
        return Err(StructureError::ZeroShift);
    }
    if !pm.is_homogeneous() {
        return Err(StructureError::NotHomogeneous("P_m"));
    }
    if pm.degree().is_none_or(|d| d < 2) {
        return Err(StructureError::DegreeTooLow);
    }
    let field = pm.field();
    let w = Coefficient::from_rational((BigRational::one() + a * a).recip(), field);
    let g = pm.gradient();
    let mut h = (&g[0] * &g[0]).scale(&w);
    for gi in &g[1..] {
        h = &h + &(gi * gi);
    }
    Ok(h.partial(0)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Velocity {
    Finite(f64),
    Infinite,
}

pub const VELOCITY_TOLERANCE: f64 = 1e-12;

/// Velocity `u = 1/|grad(p Q_m^{1/k})|` of the foliation `{P_m = t^k}` at `x`.
pub fn velocity_u(fl: &FactoredLeading, x: &[f64]) -> Result<Velocity, StructureError> {
    let q = fl.qm.evaluate_f64(x)?;
    if q < -VELOCITY_TOLERANCE {
        return Err(StructureError::NegativeCofactor(q));
    }
    let pv = fl.p.evaluate_f64(x)?;
    let k = fl.k as f64;
    let grad_p: Vec<f64> =
        fl.p.gradient()
            .iter()
            .map(|g| g.evaluate_f64(x).expect("dimension"))
            .collect();
    let grad_q: Vec<f64> = fl
        .qm
        .gradient()
        .iter()
        .map(|g| g.evaluate_f64(x).expect("dimension"))
        .collect();
    if q <= VELOCITY_TOLERANCE && fl.k > 1 {
        if pv.abs() <= VELOCITY_TOLERANCE {
            return Ok(Velocity::Infinite);
        }
        return Err(StructureError::Indeterminate(pv));
    }
    let a = q.max(0.0).powf(1.0 / k);
    let b = if fl.k == 1 {
        pv
    } else {
        pv / k * q.powf(1.0 / k - 1.0)
    };
    let den = norm(
        &grad_p
            .iter()
            .zip(&grad_q)
            .map(|(gp, gq)| a * gp + b * gq)
            .collect::<Vec<_>>(),
    );
    if den < VELOCITY_TOLERANCE {
        return Ok(Velocity::Infinite);
    }
    Ok(Velocity::Finite(1.0 / den))
}
