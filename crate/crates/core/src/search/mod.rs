//! Seeded least-squares search over ansatz coefficients.
//!
//! Each restart runs Levenberg-Marquardt on the normalized objective of
//! [`objective`], falling back to gradient steps when the damped normal
//! system cannot be factored. Restarts run in parallel and are reduced by
//! best residual, ties broken by restart index.

pub mod ansatz;
pub mod objective;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use ansatz::{Ansatz, AnsatzError, Normalization, Symmetry};
pub use objective::{gradient_of_residual, residual, Objective, ObjectiveError, Target};

use crate::report::{serialize_f64, serialize_f64_vec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Best residuals at or above this corroborate non-existence.
    pub stall_threshold: f64,
    /// Best residuals below this count as solutions.
    pub solution_threshold: f64,
    pub seed: u64,
    pub trace_every: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 100,
            max_iterations: 200,
            stall_threshold: 1e-3,
            solution_threshold: 1e-10,
            seed: 0x5eed,
            trace_every: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ConvergedToZeroPoly,
    ConvergedToSolution,
    StalledAboveThreshold,
    /// Best residual lies between the solution and stall thresholds.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    BelowThreshold,
    Stationary,
    LineSearchFailed,
    Stagnated,
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub residual: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Norm of the unpinned coefficients once the pinned group has unit
    /// norm. A residual that falls while this grows is escaping to infinity.
    #[serde(serialize_with = "serialize_f64")]
    pub unpinned_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartStatistics {
    pub count: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub min: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub median: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub max: f64,
    pub below_solution_threshold: usize,
    pub below_stall_threshold: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnsatzEcho {
    pub n: usize,
    pub m: u32,
    pub symmetry: Symmetry,
    pub normalization: Normalization,
    /// Basis indices pinned to the unit sphere.
    pub pinned: Vec<usize>,
    pub basis: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub ansatz: AnsatzEcho,
    pub target: Target,
    pub config: SearchConfig,
    pub objective: &'static str,
    #[serde(serialize_with = "serialize_f64")]
    pub best_residual: f64,
    pub best_restart: usize,
    /// Best coefficients, scaled so the pinned group has unit norm.
    #[serde(serialize_with = "serialize_f64_vec")]
    pub coefficients: Vec<f64>,
    pub classification: Classification,
    pub statistics: RestartStatistics,
    pub restarts: Vec<RestartSummary>,
    /// Residual of the best restart every `trace_every` iterations.
    pub trace: Vec<TracePoint>,
}

pub const OBJECTIVE_DESCRIPTION: &str =
    "|R(P(c/s))|^2 with s the 2-norm of the pinned coefficients; R = Delta P + L(P) (full-mse) or L(P_m) (top-equation)";

fn unpinned_norm(obj: &Objective, c: &[f64]) -> f64 {
    let s = obj.scale(c);
    let pinned = obj.pinned();
    let sq: f64 = c
        .iter()
        .enumerate()
        .filter(|(j, _)| !pinned.contains(j))
        .map(|(_, v)| v * v)
        .sum();
    sq.sqrt() / s
}

struct RestartResult {
    coefficients: Vec<f64>,
    residual: f64,
    iterations: usize,
    termination: Termination,
    trace: Vec<TracePoint>,
}

const ZERO_POLY_TOL: f64 = 1e-6;
const STAGNATION_WINDOW: usize = 25;

fn restart_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn gram(columns: &[crate::poly::FloatPoly]) -> DMatrix<f64> {
    let k = columns.len();
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v = columns[i].inner(&columns[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn run_restart(obj: &Objective, cfg: &SearchConfig, index: usize) -> RestartResult {
    let k = obj.ansatz().len();
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, index));
    let mut c: Vec<f64> = loop {
        let c: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if obj.scale(&c) > 1e-3 {
            break obj.normalize(&c);
        }
    };
    let value = |c: &[f64]| obj.residual(c).expect("dimension");
    let mut f = value(&c);
    let mut mu = 1e-3;
    let mut trace = vec![TracePoint {
        iteration: 0,
        residual: f,
    }];
    let mut history = vec![f];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for it in 1..=cfg.max_iterations {
        if f < cfg.solution_threshold * 1e-6 {
            termination = Termination::BelowThreshold;
            break;
        }
        let lin = obj.linearize(&c).expect("dimension");
        let a = gram(&lin.columns);
        let g = DVector::from_iterator(k, lin.columns.iter().map(|col| col.inner(&lin.residual)));
        if g.norm() <= 1e-15 * (1.0 + f.sqrt()) {
            termination = Termination::Stationary;
            break;
        }
        let mut damped = a.clone();
        for i in 0..k {
            damped[(i, i)] += mu * (a[(i, i)] + 1e-12);
        }
        let lm = damped.cholesky().map(|ch| -ch.solve(&g));
        let mut accepted = None;
        let directions: Vec<DVector<f64>> = match lm {
            Some(d) if d.iter().all(|v| v.is_finite()) => vec![d, -g.clone()],
            _ => vec![-g.clone()],
        };
        for dir in &directions {
            let slope = 2.0 * g.dot(dir);
            if slope >= 0.0 {
                continue;
            }
            let mut t = 1.0;
            for halving in 0..=30 {
                let trial: Vec<f64> = c.iter().zip(dir.iter()).map(|(x, d)| x + t * d).collect();
                let ft = value(&trial);
                if ft.is_finite() && ft <= f + 1e-4 * t * slope {
                    accepted = Some((obj.normalize(&trial), ft, halving));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        iterations = it;
        let Some((next, fnext, halvings)) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        mu = if halvings == 0 {
            (mu / 3.0).max(1e-12)
        } else {
            (mu * 4.0).min(1e8)
        };
        c = next;
        f = fnext;
        history.push(f);
        if it % cfg.trace_every.max(1) == 0 {
            trace.push(TracePoint {
                iteration: it,
                residual: f,
            });
        }
        if history.len() > STAGNATION_WINDOW {
            let old = history[history.len() - 1 - STAGNATION_WINDOW];
            if old - f <= 1e-10 * old {
                termination = Termination::Stagnated;
                break;
            }
        }
    }
    if termination == Termination::MaxIterations {
        iterations = cfg.max_iterations;
    }
    // Re-evaluate at the reported coefficients so the record is reproducible.
    let residual = value(&c);
    if trace.last().is_none_or(|t| t.iteration != iterations) {
        trace.push(TracePoint {
            iteration: iterations,
            residual,
        });
    }
    RestartResult {
        coefficients: c,
        residual,
        iterations,
        termination,
        trace,
    }
}

fn classify(obj: &Objective, cfg: &SearchConfig, best: &RestartResult) -> Classification {
    let size = if obj.pinned().is_empty() {
        best.coefficients.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        best.coefficients
            .iter()
            .enumerate()
            .filter(|(j, _)| obj.ansatz().basis[*j].degree >= 2)
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    };
    if best.residual < cfg.solution_threshold && size < ZERO_POLY_TOL {
        Classification::ConvergedToZeroPoly
    } else if best.residual < cfg.solution_threshold {
        Classification::ConvergedToSolution
    } else if best.residual >= cfg.stall_threshold {
        Classification::StalledAboveThreshold
    } else {
        Classification::Inconclusive
    }
}

pub fn search(ansatz: &Ansatz, target: Target, cfg: &SearchConfig) -> SearchOutcome {
    let obj = Objective::new(ansatz, target);
    let results: Vec<RestartResult> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|i| run_restart(&obj, cfg, i))
        .collect();
    let best_restart = results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.residual.total_cmp(&b.residual).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let best = &results[best_restart];
    let mut sorted: Vec<f64> = results.iter().map(|r| r.residual).collect();
    sorted.sort_by(f64::total_cmp);
    let statistics = RestartStatistics {
        count: sorted.len(),
        min: sorted[0],
        median: sorted[sorted.len() / 2],
        max: sorted[sorted.len() - 1],
        below_solution_threshold: sorted
            .iter()
            .filter(|&&v| v < cfg.solution_threshold)
            .count(),
        below_stall_threshold: sorted.iter().filter(|&&v| v < cfg.stall_threshold).count(),
    };
    SearchOutcome {
        ansatz: AnsatzEcho {
            n: ansatz.n,
            m: ansatz.m,
            symmetry: ansatz.symmetry,
            normalization: ansatz.normalization.clone(),
            pinned: obj.pinned().to_vec(),
            basis: ansatz.labels(),
        },
        target,
        config: *cfg,
        objective: OBJECTIVE_DESCRIPTION,
        best_residual: best.residual,
        best_restart,
        coefficients: best.coefficients.clone(),
        classification: classify(&obj, cfg, best),
        statistics,
        restarts: results
            .iter()
            .enumerate()
            .map(|(i, r)| RestartSummary {
                restart: i,
                residual: r.residual,
                iterations: r.iterations,
                termination: r.termination,
                unpinned_norm: unpinned_norm(&obj, &r.coefficients),
            })
            .collect(),
        trace: best.trace.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(restarts: usize) -> SearchConfig {
        SearchConfig {
            restarts,
            ..Default::default()
        }
    }

    #[test]
    fn top_equation_cubic_recovers_a_linear_cube() {
        let ansatz = Ansatz::full(2, &[3]).unwrap();
        let out = search(&ansatz, Target::TopEquation, &quick(8));
        assert_eq!(
            out.classification,
            Classification::ConvergedToSolution,
            "{:?}",
            out.statistics
        );
        assert!(out.best_residual < 1e-10);
        // P = (a x1 + b x2)^3 has coefficients (a^3, 3a^2 b, 3a b^2, b^3).
        let c = &out.coefficients;
        let a = c[0].cbrt();
        let b = c[3].cbrt();
        let cube = [a * a * a, 3.0 * a * a * b, 3.0 * a * b * b, b * b * b];
        for (x, y) in c.iter().zip(cube) {
            assert!((x - y).abs() < 1e-5, "{c:?}");
        }
        let again = residual(&ansatz, c, Target::TopEquation).unwrap();
        assert!((again - out.best_residual).abs() <= 1e-12);
    }

    #[test]
    fn quadratic_full_mse_stalls() {
        let ansatz = Ansatz::full(3, &[1, 2]).unwrap();
        let out = search(&ansatz, Target::FullMse, &quick(10));
        assert_eq!(out.classification, Classification::StalledAboveThreshold);
        assert!(out.restarts.iter().all(|r| r.residual >= 1e-3));
    }

    #[test]
    fn search_is_deterministic() {
        let ansatz = Ansatz::bi_radial(1, 2, &[2, 4]).unwrap();
        let cfg = SearchConfig {
            restarts: 4,
            max_iterations: 30,
            ..Default::default()
        };
        let a = serde_json::to_string(&search(&ansatz, Target::FullMse, &cfg)).unwrap();
        let b = serde_json::to_string(&search(&ansatz, Target::FullMse, &cfg)).unwrap();
        assert_eq!(a, b);
    }
}
