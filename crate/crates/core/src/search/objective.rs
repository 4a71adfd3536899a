//! Scale-invariant least-squares objective over an ansatz and its analytic
//! Jacobian.
//!
//! With `N` the pinned coefficient group and `s = |c_N|`, the objective is
//! `|R(P(c/s))|^2` where `R` is `ΔP + L(P)` or `L(P_m)` and `|.|` is the
//! coefficient 2-norm. It is 0-homogeneous in `c`.

use serde::Serialize;
use thiserror::Error;

use super::ansatz::Ansatz;
use crate::poly::FloatPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `ΔP + L(P) = 0`.
    FullMse,
    /// `L(P_m) = 0` for the top-degree part.
    TopEquation,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("expected {expected} coefficients, got {got}")]
    Dimension { expected: usize, got: usize },
}

struct BasisDerivs {
    degree: u32,
    lap: FloatPoly,
    grad: Vec<FloatPoly>,
    hess: Vec<Vec<FloatPoly>>,
}

/// Derivative data of `P` reused by `L(P)` and every `DL(P, .)` column.
struct PDerivs {
    grad: Vec<FloatPoly>,
    lap: FloatPoly,
    grad2: FloatPoly,
    /// `w_i = Σ_j P_j P_ij`.
    w: Vec<FloatPoly>,
}

impl PDerivs {
    fn new(p: &FloatPoly) -> Self {
        let n = p.n();
        let grad = p.gradient();
        let lap = p.laplacian();
        let grad2 = grad
            .iter()
            .fold(FloatPoly::zero(n), |acc, g| acc.add(&g.mul(g)));
        let w = (0..n)
            .map(|i| {
                (0..n).fold(FloatPoly::zero(n), |acc, j| {
                    acc.add(&grad[j].mul(&grad[i].partial(j)))
                })
            })
            .collect();
        PDerivs {
            grad,
            lap,
            grad2,
            w,
        }
    }

    fn l(&self) -> FloatPoly {
        let mut out = self.grad2.mul(&self.lap);
        for (gi, wi) in self.grad.iter().zip(&self.w) {
            out = out.sub(&gi.mul(wi));
        }
        out
    }

    /// `|∇P|^2 ΔQ + 2 ΔP ∇P·∇Q - Σ_ij P_i P_j Q_ij - 2 Σ_i w_i Q_i`.
    fn dl(&self, q: &BasisDerivs) -> FloatPoly {
        let n = self.grad.len();
        let mut out = self.grad2.mul(&q.lap);
        let mut dot = FloatPoly::zero(n);
        for (gp, gq) in self.grad.iter().zip(&q.grad) {
            dot = dot.add(&gp.mul(gq));
        }
        out = out.axpy(2.0, &self.lap.mul(&dot));
        for i in 0..n {
            let mut hv = FloatPoly::zero(n);
            for j in 0..n {
                hv = hv.add(&self.grad[j].mul(&q.hess[i][j]));
            }
            out = out.sub(&self.grad[i].mul(&hv));
            out = out.axpy(-2.0, &self.w[i].mul(&q.grad[i]));
        }
        out
    }
}

pub struct Objective<'a> {
    ansatz: &'a Ansatz,
    target: Target,
    pinned: Vec<usize>,
    derivs: Vec<BasisDerivs>,
}

/// Residual polynomial and Jacobian columns with respect to raw coefficients.
pub struct Linearization {
    pub residual: FloatPoly,
    pub columns: Vec<FloatPoly>,
}

impl<'a> Objective<'a> {
    pub fn new(ansatz: &'a Ansatz, target: Target) -> Self {
        let derivs = ansatz
            .basis
            .iter()
            .map(|b| {
                let grad = b.float.gradient();
                let hess = grad.iter().map(|g| g.gradient()).collect();
                BasisDerivs {
                    degree: b.degree,
                    lap: b.float.laplacian(),
                    grad,
                    hess,
                }
            })
            .collect();
        Objective {
            ansatz,
            target,
            pinned: ansatz.normalized_indices(target == Target::TopEquation),
            derivs,
        }
    }

    pub fn ansatz(&self) -> &Ansatz {
        self.ansatz
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    fn check(&self, c: &[f64]) -> Result<(), ObjectiveError> {
        if c.len() != self.ansatz.len() {
            return Err(ObjectiveError::Dimension {
                expected: self.ansatz.len(),
                got: c.len(),
            });
        }
        Ok(())
    }

    /// Norm of the pinned group (1 when nothing is pinned).
    pub fn scale(&self, c: &[f64]) -> f64 {
        if self.pinned.is_empty() {
            return 1.0;
        }
        self.pinned.iter().map(|&j| c[j] * c[j]).sum::<f64>().sqrt()
    }

    /// `c / s`, so that the pinned group has unit norm.
    pub fn normalize(&self, c: &[f64]) -> Vec<f64> {
        let s = self.scale(c);
        c.iter().map(|v| v / s).collect()
    }

    fn top_part(&self, c: &[f64]) -> Vec<f64> {
        c.iter()
            .zip(&self.derivs)
            .map(|(v, d)| if d.degree == self.ansatz.m { *v } else { 0.0 })
            .collect()
    }

    fn residual_at_normalized(&self, ct: &[f64]) -> (FloatPoly, PDerivs) {
        match self.target {
            Target::FullMse => {
                let p = self.ansatz.assemble(ct);
                let d = PDerivs::new(&p);
                (d.lap.add(&d.l()), d)
            }
            Target::TopEquation => {
                let d = PDerivs::new(&self.ansatz.assemble(&self.top_part(ct)));
                (d.l(), d)
            }
        }
    }

    pub fn residual_polynomial(&self, c: &[f64]) -> Result<FloatPoly, ObjectiveError> {
        self.check(c)?;
        Ok(self.residual_at_normalized(&self.normalize(c)).0)
    }

    /// The objective value; `+inf` when the pinned group vanishes.
    pub fn residual(&self, c: &[f64]) -> Result<f64, ObjectiveError> {
        self.check(c)?;
        if self.scale(c) == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.residual_polynomial(c)?.coefficient_norm_squared())
    }

    pub fn linearize(&self, c: &[f64]) -> Result<Linearization, ObjectiveError> {
        self.check(c)?;
        let s = self.scale(c);
        let ct: Vec<f64> = c.iter().map(|v| v / s).collect();
        let (residual, d) = self.residual_at_normalized(&ct);
        let n = self.ansatz.n;
        let tilde: Vec<FloatPoly> = self
            .derivs
            .iter()
            .map(|b| match self.target {
                Target::FullMse => b.lap.add(&d.dl(b)),
                Target::TopEquation if b.degree == self.ansatz.m => d.dl(b),
                Target::TopEquation => FloatPoly::zero(n),
            })
            .collect();
        if self.pinned.is_empty() {
            return Ok(Linearization {
                residual,
                columns: tilde,
            });
        }
        let mut v = FloatPoly::zero(n);
        for (cj, col) in ct.iter().zip(&tilde) {
            v = v.axpy(*cj, col);
        }
        let columns = tilde
            .iter()
            .enumerate()
            .map(|(k, col)| {
                let col = if self.pinned.contains(&k) {
                    col.axpy(-ct[k], &v)
                } else {
                    col.clone()
                };
                col.scale(1.0 / s)
            })
            .collect();
        Ok(Linearization { residual, columns })
    }

    /// Gradient of the objective, `2 J^T r`.
    pub fn gradient(&self, c: &[f64]) -> Result<Vec<f64>, ObjectiveError> {
        let lin = self.linearize(c)?;
        Ok(lin
            .columns
            .iter()
            .map(|col| 2.0 * col.inner(&lin.residual))
            .collect())
    }
}

pub fn residual(ansatz: &Ansatz, coeffs: &[f64], target: Target) -> Result<f64, ObjectiveError> {
    Objective::new(ansatz, target).residual(coeffs)
}

pub fn gradient_of_residual(
    ansatz: &Ansatz,
    coeffs: &[f64],
    target: Target,
) -> Result<Vec<f64>, ObjectiveError> {
    Objective::new(ansatz, target).gradient(coeffs)
}
