//! Translated blow-downs `G = λ P(x/λ) - t λ^{1-m}` and numeric probes of
//! their level sets as `λ -> 0`.
//!
//! Blow-down coefficients are exact for rational `λ`; floats appear only when
//! level sets are sampled.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{Coefficient, FloatPoly, PolyError, Polynomial};
use crate::report::{
    serialize_display, serialize_f64, serialize_f64_vec, serialize_opt_f64, serialize_rational,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlowdownError {
    #[error("λ must be positive")]
    NonPositiveLambda,
    #[error("P must have no constant term")]
    ConstantTerm,
    #[error("P must be nonconstant")]
    Constant,
    #[error("t must be nonzero")]
    ZeroLevel,
    #[error("λ schedule must be positive and strictly decreasing")]
    BadSchedule,
    #[error("no points of {{P_m = t}} found in the sampling ball")]
    EmptyCloud,
    #[error("grad P_m vanishes at sample {0}")]
    CriticalPoint(usize),
    #[error("normal-graph solve failed at sample {index} for λ = {lambda:e}")]
    NormalGraph { index: usize, lambda: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlowdownFrame {
    #[serde(serialize_with = "serialize_rational")]
    pub t: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub lambda: BigRational,
    #[serde(rename = "G", serialize_with = "serialize_display")]
    pub g: Polynomial,
    pub m: u32,
}

fn check_source(p: &Polynomial) -> Result<u32, BlowdownError> {
    if !p.constant_term().is_zero() {
        return Err(BlowdownError::ConstantTerm);
    }
    match p.degree() {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(BlowdownError::Constant),
    }
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational_pow(r: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { r.recip() } else { r.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

/// Componentwise scaling: the degree-`i` part of `P` picks up `λ^{1-i}`.
pub fn blowdown(
    p: &Polynomial,
    t: &BigRational,
    lambda: &BigRational,
) -> Result<BlowdownFrame, BlowdownError> {
    if !lambda.is_positive() {
        return Err(BlowdownError::NonPositiveLambda);
    }
    let m = check_source(p)?;
    let field = p.field();
    let mut g = Polynomial::from_terms(
        p.n(),
        field,
        p.terms().map(|(mono, c)| {
            let s = rational_pow(lambda, 1 - mono.degree() as i64);
            (mono.clone(), c * &Coefficient::from_rational(s, field))
        }),
    );
    let shift = t * rational_pow(lambda, 1 - m as i64);
    g = &g - &Polynomial::constant(p.n(), Coefficient::from_rational(shift, field));
    Ok(BlowdownFrame {
        t: t.clone(),
        lambda: lambda.clone(),
        g,
        m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelSetConfig {
    /// Number of random chords through the ball.
    pub lines: usize,
    /// Uniform segments per chord scanned for sign changes.
    pub segments: usize,
    pub radius: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LevelSetConfig {
    fn default() -> Self {
        LevelSetConfig {
            lines: 400,
            segments: 64,
            radius: 2.0,
            tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelPoint {
    #[serde(serialize_with = "serialize_f64_vec")]
    pub point: Vec<f64>,
    #[serde(serialize_with = "serialize_f64")]
    pub residual: f64,
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = dot(&v, &v).sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn along(b: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    b.iter().zip(dir).map(|(x, d)| x + s * d).collect()
}

/// Points of `{f = t}` found by scanning random chords of the ball for sign
/// changes and bisecting each bracket.
pub fn level_set_sample_float(f: &FloatPoly, t: f64, cfg: &LevelSetConfig) -> Vec<LevelPoint> {
    let n = f.n();
    let mut out: Vec<LevelPoint> = (0..cfg.lines)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let dir = random_unit(&mut rng, n);
            let u: Vec<f64> = random_unit(&mut rng, n)
                .into_iter()
                .map(|x| x * cfg.radius * rng.gen::<f64>())
                .collect();
            let along_u = dot(&u, &dir);
            let b: Vec<f64> = u.iter().zip(&dir).map(|(x, d)| x - along_u * d).collect();
            let half = (cfg.radius * cfg.radius - dot(&b, &b)).max(0.0).sqrt();
            let h = |s: f64| f.eval(&along(&b, &dir, s)) - t;
            let mut found = Vec::new();
            let step = 2.0 * half / cfg.segments as f64;
            let mut lo = -half;
            let mut flo = h(lo);
            for j in 1..=cfg.segments {
                let hi = -half + j as f64 * step;
                let fhi = h(hi);
                if flo == 0.0 {
                    found.push((lo, 0.0));
                } else if flo.signum() != fhi.signum() && fhi != 0.0 {
                    found.push(bisect(&h, lo, hi, flo, cfg.tol));
                }
                lo = hi;
                flo = fhi;
            }
            found.into_iter().map(move |(s, r)| LevelPoint {
                point: along(&b, &dir, s),
                residual: r,
            })
        })
        .collect();
    out.sort_by(|a, b| a.point.partial_cmp(&b.point).expect("finite points"));
    // Chords through the same region (always, for n = 1) find the same roots.
    out.dedup_by(|b, a| {
        a.point
            .iter()
            .zip(&b.point)
            .all(|(x, y)| (x - y).abs() <= 1e-12)
    });
    out
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, tol: f64) -> (f64, f64) {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = h(mid);
        if fm.abs() < tol || mid == lo || mid == hi {
            return (mid, fm.abs());
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, h(mid).abs())
}

pub fn level_set_sample(p: &Polynomial, t: f64, cfg: &LevelSetConfig) -> Vec<LevelPoint> {
    level_set_sample_float(&FloatPoly::from_polynomial(p), t, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceConfig {
    /// Graph points `(x, G(x))` are kept when `|x| <= radius` and `|G| <= radius`.
    pub radius: f64,
    /// Number of heights in `[-radius, radius]` whose level sets of `G` are sampled.
    pub heights: usize,
    pub level: LevelSetConfig,
    /// Cap on the `{P_m = t}` cloud used for nearest-neighbour search.
    pub max_cloud: usize,
    /// Slack allowed when testing the distances for monotonicity.
    pub slack: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            radius: 2.0,
            heights: 9,
            level: LevelSetConfig::default(),
            max_cloud: 10_000,
            slack: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(serialize_with = "serialize_rational")]
    pub lambda: BigRational,
    pub samples: usize,
    #[serde(serialize_with = "serialize_opt_f64")]
    pub sup_distance: Option<f64>,
    /// The same distance restricted to `{G = 0}`.
    #[serde(serialize_with = "serialize_opt_f64")]
    pub zero_level_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub cloud_size: usize,
    pub rows: Vec<ConvergenceRow>,
    pub non_increasing: bool,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,samples,sup_distance,zero_level_distance\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                crate::poly::rational_to_string(&r.lambda),
                r.samples,
                r.sup_distance
                    .map(crate::report::format_f64)
                    .unwrap_or_default(),
                r.zero_level_distance
                    .map(crate::report::format_f64)
                    .unwrap_or_default()
            ));
        }
        s
    }
}

fn check_schedule(lambdas: &[f64]) -> Result<(), BlowdownError> {
    let ok = lambdas.iter().all(|&l| l > 0.0) && lambdas.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(BlowdownError::BadSchedule)
    }
}

/// Sup over sampled graph points of `G` of the distance from `x` to the
/// sampled cloud `{P_m = t}`, for each `λ` in a decreasing schedule.
///
/// The nearest cloud point seeds a projection onto `{P_m = t}`, so the
/// reported distance does not carry the sampling gap of the cloud.
pub fn convergence_report(
    p: &Polynomial,
    t: &BigRational,
    lambdas: &[BigRational],
    cfg: &ConvergenceConfig,
) -> Result<ConvergenceReport, BlowdownError> {
    let m = check_source(p)?;
    check_schedule(&lambdas.iter().map(rat_f64).collect::<Vec<_>>())?;
    if lambdas.iter().any(|l| !l.is_positive()) {
        return Err(BlowdownError::BadSchedule);
    }
    let pm = FloatPoly::from_polynomial(&p.homogeneous_component(m));
    let tf = rat_f64(t);
    let cloud_cfg = LevelSetConfig {
        radius: 2.0 * cfg.radius,
        ..cfg.level
    };
    let mut cloud = level_set_sample_float(&pm, tf, &cloud_cfg);
    if cloud.is_empty() {
        return Err(BlowdownError::EmptyCloud);
    }
    if cloud.len() > cfg.max_cloud {
        let stride = cloud.len().div_ceil(cfg.max_cloud);
        cloud = cloud.into_iter().step_by(stride).collect();
    }
    let grad = pm.gradient();
    let level_tol = 1e-9 * tf.abs().max(1.0);
    // Foot point on {P_m = t} seeded at the nearest cloud point: alternate a
    // tangential move toward x with Newton corrections back to the level set.
    let project = |x: &[f64], y0: &[f64]| -> Option<f64> {
        let mut y = y0.to_vec();
        for _ in 0..40 {
            let g: Vec<f64> = grad.iter().map(|gi| gi.eval(&y)).collect();
            let g2 = dot(&g, &g);
            if g2 == 0.0 {
                return None;
            }
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let normal = dot(&diff, &g) / g2;
            for ((yi, di), gi) in y.iter_mut().zip(&diff).zip(&g) {
                *yi += di - normal * gi;
            }
            for _ in 0..3 {
                let g: Vec<f64> = grad.iter().map(|gi| gi.eval(&y)).collect();
                let g2 = dot(&g, &g);
                if g2 == 0.0 {
                    return None;
                }
                let c = (tf - pm.eval(&y)) / g2;
                for (yi, gi) in y.iter_mut().zip(&g) {
                    *yi += c * gi;
                }
            }
        }
        let ok = y.iter().all(|v| v.is_finite()) && (pm.eval(&y) - tf).abs() < level_tol;
        ok.then(|| {
            let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            d.sqrt()
        })
    };
    let distance = |x: &[f64]| {
        let (best, d2) = cloud
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d: f64 = c.point.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (i, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty cloud");
        let direct = d2.sqrt();
        project(x, &cloud[best].point).map_or(direct, |d| d.min(direct))
    };
    let mut rows = Vec::new();
    for lambda in lambdas {
        let frame = blowdown(p, t, lambda)?;
        let g = FloatPoly::from_polynomial(&frame.g);
        let zero_level: Vec<Vec<f64>> = level_set_sample_float(&g, 0.0, &cfg.level)
            .into_iter()
            .map(|lp| lp.point)
            .collect();
        let zero_level_distance = zero_level
            .par_iter()
            .map(|x| distance(x))
            .reduce_with(f64::max);
        let mut points = Vec::new();
        for h in 0..cfg.heights {
            let c = if cfg.heights == 1 {
                0.0
            } else {
                -cfg.radius + 2.0 * cfg.radius * h as f64 / (cfg.heights - 1) as f64
            };
            points.extend(
                level_set_sample_float(&g, c, &cfg.level)
                    .into_iter()
                    .map(|lp| lp.point),
            );
        }
        let sup = points.par_iter().map(|x| distance(x)).reduce_with(f64::max);
        rows.push(ConvergenceRow {
            lambda: lambda.clone(),
            samples: points.len(),
            sup_distance: sup,
            zero_level_distance,
        });
    }
    let dists: Vec<f64> = rows.iter().filter_map(|r| r.sup_distance).collect();
    let non_increasing = dists.windows(2).all(|w| w[1] <= w[0] + cfg.slack);
    Ok(ConvergenceReport {
        cloud_size: cloud.len(),
        rows,
        non_increasing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityConfig {
    /// Decreasing `λ` values at which the normal-graph parameter is solved.
    pub lambdas: Vec<f64>,
    pub max_newton: usize,
    pub tol: f64,
}

impl Default for VelocityConfig {
    fn default() -> Self {
        VelocityConfig {
            lambdas: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
            max_newton: 50,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityRow {
    #[serde(serialize_with = "serialize_f64_vec")]
    pub point: Vec<f64>,
    /// `-P_{m-1}/|grad P_m|` at the sample.
    #[serde(serialize_with = "serialize_f64")]
    pub predicted: f64,
    /// Difference quotients `φ(λ)/λ`, one per schedule entry.
    #[serde(serialize_with = "serialize_f64_vec")]
    pub quotients: Vec<f64>,
    /// Linear extrapolation to `λ = 0` from the two smallest `λ`.
    #[serde(serialize_with = "serialize_f64")]
    pub estimate: f64,
    /// `|estimate - predicted| / max(1, |predicted|)`.
    #[serde(serialize_with = "serialize_f64")]
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityReport {
    pub rows: Vec<VelocityRow>,
    /// Max over samples of `|φ(λ)/λ - predicted|` for each `λ`.
    #[serde(serialize_with = "serialize_f64_vec")]
    pub raw_errors: Vec<f64>,
    /// Least-squares slope of `log(raw error)` against `log λ`; absent when
    /// the raw errors are at roundoff level.
    #[serde(serialize_with = "serialize_opt_f64")]
    pub order: Option<f64>,
    #[serde(serialize_with = "serialize_f64")]
    pub max_residual: f64,
}

impl VelocityReport {
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.point.len());
        let mut s: String = (1..=n).map(|i| format!("x{i},")).collect();
        s.push_str("predicted,estimate,residual\n");
        for r in &self.rows {
            for x in &r.point {
                s.push_str(&crate::report::format_f64(*x));
                s.push(',');
            }
            s.push_str(&format!(
                "{},{},{}\n",
                crate::report::format_f64(r.predicted),
                crate::report::format_f64(r.estimate),
                crate::report::format_f64(r.residual)
            ));
        }
        s
    }
}

/// `λ^{m-1} G_λ = Σ_i λ^{m-i} P_i - t`, which stays well scaled as `λ -> 0`.
struct ScaledBlowdown {
    m: u32,
    components: Vec<(u32, FloatPoly, Vec<FloatPoly>)>,
    t: f64,
}

impl ScaledBlowdown {
    fn new(p: &Polynomial, m: u32, t: f64) -> Self {
        let components = (1..=m)
            .map(|i| {
                let c = FloatPoly::from_polynomial(&p.homogeneous_component(i));
                let g = c.gradient();
                (i, c, g)
            })
            .filter(|(_, c, _)| !c.is_zero())
            .collect();
        ScaledBlowdown { m, components, t }
    }

    fn value_and_slope(&self, lambda: f64, x: &[f64], nu: &[f64]) -> (f64, f64) {
        let mut v = -self.t;
        let mut d = 0.0;
        for (i, c, g) in &self.components {
            let w = lambda.powi((self.m - i) as i32);
            v += w * c.eval(x);
            d += w * g
                .iter()
                .zip(nu)
                .map(|(gi, ni)| gi.eval(x) * ni)
                .sum::<f64>();
        }
        (v, d)
    }

    /// Solves `G_λ(z + r ν) = 0` for `r` near 0: Newton from 0, with
    /// bisection on `[-σ, σ]` as a fallback.
    fn normal_parameter(
        &self,
        lambda: f64,
        z: &[f64],
        nu: &[f64],
        cfg: &VelocityConfig,
    ) -> Option<f64> {
        let scale = self.t.abs().max(1.0);
        let at = |r: f64| along(z, nu, r);
        let mut r = 0.0;
        for _ in 0..cfg.max_newton {
            let (v, d) = self.value_and_slope(lambda, &at(r), nu);
            if v.abs() < cfg.tol * scale {
                return Some(r);
            }
            if d == 0.0 || !d.is_finite() {
                break;
            }
            r -= v / d;
            if !r.is_finite() {
                break;
            }
        }
        let sigma = 0.5 * (1.0 + dot(z, z).sqrt());
        let f = |r: f64| self.value_and_slope(lambda, &at(r), nu).0;
        let (flo, fhi) = (f(-sigma), f(sigma));
        if flo.signum() == fhi.signum() {
            return None;
        }
        let (r, res) = bisect(&f, -sigma, sigma, flo, cfg.tol * scale);
        (res < cfg.tol * scale).then_some(r)
    }
}

/// Compares difference quotients of the normal-graph parameter of
/// `{G_λ = 0}` over `{P_m = t}` with the predicted velocity
/// `-P_{m-1}/|grad P_m|`.
pub fn velocity_lemma_check(
    p: &Polynomial,
    t: f64,
    points: &[Vec<f64>],
    cfg: &VelocityConfig,
) -> Result<VelocityReport, BlowdownError> {
    let m = check_source(p)?;
    if t == 0.0 {
        return Err(BlowdownError::ZeroLevel);
    }
    check_schedule(&cfg.lambdas)?;
    if cfg.lambdas.len() < 2 {
        return Err(BlowdownError::BadSchedule);
    }
    let scaled = ScaledBlowdown::new(p, m, t);
    let pm_grad = FloatPoly::from_polynomial(&p.homogeneous_component(m)).gradient();
    let prev = FloatPoly::from_polynomial(&p.homogeneous_component(m - 1));
    let mut rows = Vec::with_capacity(points.len());
    for (index, z) in points.iter().enumerate() {
        let g: Vec<f64> = pm_grad.iter().map(|gi| gi.eval(z)).collect();
        let gn = dot(&g, &g).sqrt();
        if gn < 1e-12 {
            return Err(BlowdownError::CriticalPoint(index));
        }
        let nu: Vec<f64> = g.iter().map(|x| x / gn).collect();
        let predicted = -prev.eval(z) / gn;
        let mut quotients = Vec::with_capacity(cfg.lambdas.len());
        for &lambda in &cfg.lambdas {
            let r = scaled
                .normal_parameter(lambda, z, &nu, cfg)
                .ok_or(BlowdownError::NormalGraph { index, lambda })?;
            quotients.push(r / lambda);
        }
        let k = cfg.lambdas.len();
        let (la, lb) = (cfg.lambdas[k - 2], cfg.lambdas[k - 1]);
        let (va, vb) = (quotients[k - 2], quotients[k - 1]);
        let estimate = (la * vb - lb * va) / (la - lb);
        rows.push(VelocityRow {
            point: z.clone(),
            predicted,
            quotients,
            estimate,
            residual: (estimate - predicted).abs() / predicted.abs().max(1.0),
        });
    }
    let raw_errors: Vec<f64> = (0..cfg.lambdas.len())
        .map(|j| {
            rows.iter()
                .map(|r| (r.quotients[j] - r.predicted).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let order = if raw_errors.iter().all(|&e| e > 1e-12) {
        let xs: Vec<f64> = cfg.lambdas.iter().map(|l| l.ln()).collect();
        let ys: Vec<f64> = raw_errors.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(VelocityReport {
        rows,
        raw_errors,
        order,
        max_residual,
    })
}

/// `λ = 2^{-j}` for `j = 0..count`.
pub fn dyadic_schedule(count: usize) -> Vec<BigRational> {
    let half = BigRational::new(1.into(), 2.into());
    (0..count)
        .map(|j| num_traits::pow(half.clone(), j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ops::CurvatureProbe;
    use crate::poly::{parse, Field};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn p(text: &str, n: usize) -> Polynomial {
        parse(text, n, Field::Rational).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn blowdown_examples() {
        let poly = p("x1^3 + x2 - 2*x1*x2", 2);
        assert_eq!(
            blowdown(&poly, &q(3, 2), &q(1, 1)).unwrap().g,
            &poly - &p("3/2", 2)
        );
        assert_eq!(
            blowdown(&p("x1^2", 1), &q(0, 1), &q(1, 2)).unwrap().g,
            p("2*x1^2", 1)
        );
        assert_eq!(
            blowdown(&p("x1^3 + x2", 2), &q(1, 1), &q(1, 2)).unwrap().g,
            p("4*x1^3 - 4 + x2", 2)
        );
        assert_eq!(
            blowdown(&poly, &q(1, 1), &q(0, 1)),
            Err(BlowdownError::NonPositiveLambda)
        );
        assert_eq!(
            blowdown(&p("x1 + 1", 1), &q(1, 1), &q(1, 1)),
            Err(BlowdownError::ConstantTerm)
        );
    }

    #[test]
    fn level_set_examples() {
        let cfg = LevelSetConfig {
            lines: 100,
            ..Default::default()
        };
        let sphere = level_set_sample(&p("x1^2 + x2^2 + x3^2", 3), 1.0, &cfg);
        assert!(sphere.len() > 50);
        for lp in &sphere {
            assert!((dot(&lp.point, &lp.point) - 1.0).abs() < 1e-9);
        }
        let plane = level_set_sample(&p("x1", 2), 0.0, &cfg);
        assert!(!plane.is_empty());
        assert!(plane.iter().all(|lp| lp.point[0].abs() < cfg.tol));
        let simons = fixtures::simons_quadric();
        let pts = level_set_sample(&simons, 1.0, &cfg);
        assert!(!pts.is_empty());
        for lp in &pts {
            let v = simons.evaluate_f64(&lp.point).unwrap();
            assert!((v - 1.0).abs() < cfg.tol);
            assert!((lp.residual - (v - 1.0).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn convergence_examples() {
        let cfg = ConvergenceConfig {
            level: LevelSetConfig {
                lines: 150,
                ..Default::default()
            },
            ..Default::default()
        };
        let hom = p("x1^3 - 3*x1*x2^2", 2);
        let r = convergence_report(&hom, &q(1, 1), &dyadic_schedule(3), &cfg).unwrap();
        assert!(r.non_increasing);
        for row in &r.rows {
            assert!(row.zero_level_distance.unwrap() < 1e-6, "{row:?}");
        }
        let r =
            convergence_report(&p("x1^4 + x2", 2), &q(1, 1), &dyadic_schedule(4), &cfg).unwrap();
        assert!(r.non_increasing, "{r:?}");
        assert!(r
            .to_csv()
            .starts_with("lambda,samples,sup_distance,zero_level_distance\n1,"));
        assert_eq!(
            convergence_report(&p("x1^4 + x2", 2), &q(-1, 1), &dyadic_schedule(2), &cfg),
            Err(BlowdownError::EmptyCloud)
        );
        assert_eq!(
            convergence_report(&hom, &q(1, 1), &[q(1, 2), q(1, 1)], &cfg),
            Err(BlowdownError::BadSchedule)
        );
    }

    #[test]
    fn velocity_examples() {
        let cfg = VelocityConfig::default();
        let hom = p("x1^2 - x2^2", 2);
        let pts = vec![vec![1.0, 0.0], vec![5.0f64.sqrt(), 2.0]];
        let r = velocity_lemma_check(&hom, 1.0, &pts, &cfg).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.estimate.abs() < 1e-9 && row.predicted == 0.0));
        assert_eq!(r.order, None);

        let poly = p("x1^2 + x1", 1);
        let r = velocity_lemma_check(&poly, 1.0, &[vec![1.0], vec![-1.0]], &cfg).unwrap();
        assert!((r.rows[0].predicted + 0.5).abs() < 1e-15);
        assert!((r.rows[1].predicted - 0.5).abs() < 1e-15);
        assert!(r.max_residual < 1e-3, "{r:?}");
        assert!(r.order.unwrap() >= 0.9, "{r:?}");
        assert!(r.to_csv().starts_with("x1,predicted,estimate,residual\n"));
        assert_eq!(
            velocity_lemma_check(&poly, 0.0, &[vec![1.0]], &cfg),
            Err(BlowdownError::ZeroLevel)
        );
    }

    #[test]
    fn simons_level_sets_have_predicted_curvature() {
        let simons = fixtures::simons_quadric();
        let probe = CurvatureProbe::new(&simons);
        let grad = simons.gradient();
        let cfg = LevelSetConfig {
            lines: 50,
            ..Default::default()
        };
        for t in [1.0, -0.5] {
            for lp in level_set_sample(&simons, t, &cfg) {
                let h = probe.at(&lp.point).unwrap();
                let g2: f64 = grad
                    .iter()
                    .map(|g| g.evaluate_f64(&lp.point).unwrap().powi(2))
                    .sum();
                let expect = 8.0 * t.abs() / g2.powf(1.5);
                assert!((h.abs() - expect).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn blowdown_is_exact(seed in any::<u64>(), ln in 1i64..9, ld in 1i64..9, tn in -5i64..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = fixtures::random_polynomial_of_degree(&mut rng, 2, 4, 5);
            let poly = &poly - &Polynomial::constant(2, poly.constant_term());
            prop_assume!(poly.degree().is_some_and(|d| d >= 1));
            let (lambda, t) = (q(ln, ld), q(tn, 3));
            let frame = blowdown(&poly, &t, &lambda).unwrap();
            let x = fixtures::random_rational_point(&mut rng, 2, 3);
            let xs: Vec<BigRational> = x.iter().map(|v| v / &lambda).collect();
            let lhs = frame.g.evaluate(&x).unwrap();
            let m = frame.m as i64;
            let rhs = &(&Coefficient::from_rational(lambda.clone(), Field::Rational) * &poly.evaluate(&xs).unwrap())
                - &Coefficient::from_rational(&t * rational_pow(&lambda, 1 - m), Field::Rational);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn blowdown_semigroup(seed in any::<u64>(), a in 1i64..7, b in 1i64..7, c in 1i64..7, d in 1i64..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = fixtures::random_polynomial_of_degree(&mut rng, 3, 4, 6);
            let poly = &poly - &Polynomial::constant(3, poly.constant_term());
            prop_assume!(poly.degree().is_some_and(|d| d >= 1));
            let zero = BigRational::zero();
            let (l1, l2) = (q(a, b), q(c, d));
            let once = blowdown(&poly, &zero, &l1).unwrap().g;
            let twice = blowdown(&once, &zero, &l2).unwrap().g;
            prop_assert_eq!(twice, blowdown(&poly, &zero, &(&l1 * &l2)).unwrap().g);
        }

        #[test]
        fn linear_powers_have_minimal_level_sets(seed in any::<u64>(), m in 1u32..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = fixtures::random_linear_form(&mut rng, 3);
            let pm = l.pow(m);
            let probe = CurvatureProbe::new(&pm);
            let cfg = LevelSetConfig { lines: 20, seed, ..Default::default() };
            for lp in level_set_sample(&pm, 1.0, &cfg) {
                if let Ok(h) = probe.at(&lp.point) {
                    prop_assert!(h.abs() < 1e-6);
                }
            }
        }
    }
}
