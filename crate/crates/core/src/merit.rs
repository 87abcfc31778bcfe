//! Mixed logarithmic-barrier / exterior-penalty merit function.
//!
//! Inequalities strictly satisfied at the start point go to the barrier set
//! `G_log`; the others join the equalities in the exterior penalty. With
//! `rho_log`, `rho_ext > 0` and `nu` in `(1, 2]`:
//!
//! ```text
//! Z(x) = f(x) - rho_log * sum_{l in G_log} ln(-g_l(x))
//!        + (1 / rho_ext) * ( sum_{l in G_ext} max(g_l(x), 0)^nu + sum_j |h_j(x)|^nu )
//! ```
//!
//! on `X` with `g_l(x) < 0` for every `l` in `G_log`, and `+inf` elsewhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::Evaluation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeritParams {
    /// 0-based indices of barrier-treated inequalities.
    pub g_log: Vec<usize>,
    /// 0-based indices of penalty-treated inequalities.
    pub g_ext: Vec<usize>,
    pub rho_log: f64,
    pub rho_ext: f64,
    /// Smoothing exponent of the exterior penalty.
    pub nu: f64,
    /// Forcing-function constant: sufficient decrease is `gamma * alpha^2`.
    pub gamma: f64,
    pub beta: f64,
    pub zeta: f64,
}

impl MeritParams {
    /// Checks the partition against `m` inequalities and the parameter ranges.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut seen = vec![false; m];
        for &l in self.g_log.iter().chain(&self.g_ext) {
            if l >= m || seen[l] {
                return Err(Error::Config(format!(
                    "G_log/G_ext is not a partition of 0..{m}"
                )));
            }
            seen[l] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config(format!(
                "G_log/G_ext does not cover 0..{m}"
            )));
        }
        check_params(self.rho_log, self.rho_ext, self.nu, self.gamma, self.beta, self.zeta)
    }
}

pub(crate) fn check_params(
    rho_log: f64,
    rho_ext: f64,
    nu: f64,
    gamma: f64,
    beta: f64,
    zeta: f64,
) -> Result<()> {
    let bad = |what: &str| Err(Error::Config(what.to_string()));
    if !(rho_log > 0.0 && rho_log.is_finite()) {
        return bad("rho_log must be positive");
    }
    if !(rho_ext > 0.0 && rho_ext.is_finite()) {
        return bad("rho_ext must be positive");
    }
    if !(nu > 1.0 && nu <= 2.0) {
        return bad("nu must lie in (1, 2]");
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return bad("gamma must be positive");
    }
    if !(beta > 1.0 && beta.is_finite()) {
        return bad("beta must exceed 1");
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return bad("zeta must lie in (0, 1)");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeritStatus {
    Finite,
    OutsideX,
    LogBoundaryOrViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeritValue {
    pub value: f64,
    pub status: MeritStatus,
}

impl MeritValue {
    pub fn finite(value: f64) -> Self {
        MeritValue {
            value,
            status: MeritStatus::Finite,
        }
    }

    pub fn infinite(status: MeritStatus) -> Self {
        MeritValue {
            value: f64::INFINITY,
            status,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.status == MeritStatus::Finite
    }
}

/// Splits inequality indices by the sign of `g(x0)`: strictly negative values
/// go to `G_log`, everything else to `G_ext`.
pub fn partition_inequalities(g_at_x0: &[f64]) -> (Vec<usize>, Vec<usize>) {
    (0..g_at_x0.len()).partition(|&l| g_at_x0[l] < 0.0)
}

/// Merit value from raw function values. Shared by true evaluations and by
/// the surrogate merit model.
pub fn merit_from_values(f: f64, g: &[f64], h: &[f64], in_x: bool, params: &MeritParams) -> MeritValue {
    if !in_x {
        return MeritValue::infinite(MeritStatus::OutsideX);
    }
    let mut barrier = 0.0;
    for &l in &params.g_log {
        let slack = -g[l];
        if !(slack > 0.0) {
            return MeritValue::infinite(MeritStatus::LogBoundaryOrViolated);
        }
        barrier += slack.ln();
    }
    let mut exterior = 0.0;
    for &l in &params.g_ext {
        exterior += g[l].max(0.0).powf(params.nu);
    }
    for &hj in h {
        exterior += hj.abs().powf(params.nu);
    }
    let value = f - params.rho_log * barrier + exterior / params.rho_ext;
    if value.is_finite() {
        MeritValue::finite(value)
    } else {
        MeritValue::infinite(MeritStatus::LogBoundaryOrViolated)
    }
}

pub fn merit_value(eval: &Evaluation, params: &MeritParams) -> MeritValue {
    merit_from_values(eval.f, &eval.g, &eval.h, eval.in_x, params)
}

/// `sum max(g_i, 0) + sum |h_j|` over all inequalities and equalities.
pub fn violation(g: &[f64], h: &[f64]) -> f64 {
    g.iter().map(|v| v.max(0.0)).sum::<f64>() + h.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn constraint_violation(eval: &Evaluation) -> f64 {
    violation(&eval.g, &eval.h)
}

/// `min |g_l(x)|` over `G_log`; `+inf` when `G_log` is empty.
pub fn g_min(eval: &Evaluation, g_log: &[usize]) -> f64 {
    g_log
        .iter()
        .map(|&l| eval.g[l].abs())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    /// Magnitudes only; signs of equality multipliers are not recovered.
    pub mu: Vec<f64>,
}

/// Lagrange multiplier estimates implied by the merit function at `eval`.
pub fn multiplier_estimates(eval: &Evaluation, params: &MeritParams) -> Result<Multipliers> {
    let mut lambda = vec![0.0; eval.g.len()];
    for &l in &params.g_log {
        let slack = -eval.g[l];
        if !(slack > 0.0) {
            return Err(Error::DomainError(format!(
                "barrier constraint {} has g = {} >= 0",
                l + 1,
                eval.g[l]
            )));
        }
        lambda[l] = params.rho_log / slack;
    }
    let nu = params.nu;
    for &l in &params.g_ext {
        lambda[l] = nu * eval.g[l].max(0.0).powf(nu - 1.0) / params.rho_ext;
    }
    let mu = eval
        .h
        .iter()
        .map(|h| nu * h.abs().powf(nu - 1.0) / params.rho_ext)
        .collect();
    Ok(Multipliers { lambda, mu })
}

/// Value and derivatives of one scalar function at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `n x n`.
    pub hess: Vec<f64>,
}

/// How raw `(f, g, h)` values are combined into the quantity a direct search
/// minimizes. Implemented by [`MeritParams`] (barrier/penalty merit) and
/// [`ExtremeBarrier`].
pub trait MeritFunction: Send + Sync {
    fn from_values(&self, f: f64, g: &[f64], h: &[f64], in_x: bool) -> MeritValue;

    fn of(&self, eval: &Evaluation) -> MeritValue {
        self.from_values(eval.f, &eval.g, &eval.h, eval.in_x)
    }

    /// Chain rule through the merit for smooth component models. `None` where
    /// the merit is infinite.
    fn compose(&self, f: &Jet, g: &[Jet], h: &[Jet]) -> Option<Jet>;
}

impl MeritFunction for MeritParams {
    fn from_values(&self, f: f64, g: &[f64], h: &[f64], in_x: bool) -> MeritValue {
        merit_from_values(f, g, h, in_x, self)
    }

    fn compose(&self, f: &Jet, g: &[Jet], h: &[Jet]) -> Option<Jet> {
        let gv: Vec<f64> = g.iter().map(|j| j.value).collect();
        let hv: Vec<f64> = h.iter().map(|j| j.value).collect();
        let z = merit_from_values(f.value, &gv, &hv, true, self);
        if !z.is_finite() {
            return None;
        }
        let n = f.grad.len();
        let mut out = Jet {
            value: z.value,
            grad: f.grad.clone(),
            hess: f.hess.clone(),
        };
        // Adds  w1 * grad(c)  to the gradient and  w1 * hess(c) + w2 * grad grad^T
        // to the Hessian.
        let mut add = |c: &Jet, w1: f64, w2: f64| {
            for i in 0..n {
                out.grad[i] += w1 * c.grad[i];
                for j in 0..n {
                    out.hess[i * n + j] += w1 * c.hess[i * n + j] + w2 * c.grad[i] * c.grad[j];
                }
            }
        };
        for &l in &self.g_log {
            let s = -g[l].value;
            add(&g[l], self.rho_log / s, self.rho_log / (s * s));
        }
        let nu = self.nu;
        let scale = nu / self.rho_ext;
        for &l in &self.g_ext {
            let v = g[l].value;
            if v > 0.0 {
                add(&g[l], scale * v.powf(nu - 1.0), scale * (nu - 1.0) * v.powf(nu - 2.0));
            }
        }
        for hj in h {
            let v = hj.value;
            if v != 0.0 {
                let a = v.abs();
                add(hj, scale * a.powf(nu - 1.0) * v.signum(), scale * (nu - 1.0) * a.powf(nu - 2.0));
            }
        }
        Some(out)
    }
}

/// `f` on the feasible set, `+inf` elsewhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtremeBarrier;

impl MeritFunction for ExtremeBarrier {
    fn from_values(&self, f: f64, g: &[f64], h: &[f64], in_x: bool) -> MeritValue {
        if !in_x {
            MeritValue::infinite(MeritStatus::OutsideX)
        } else if g.iter().any(|v| !(*v <= 0.0)) || h.iter().any(|v| *v != 0.0) || !f.is_finite() {
            MeritValue::infinite(MeritStatus::LogBoundaryOrViolated)
        } else {
            MeritValue::finite(f)
        }
    }

    fn compose(&self, f: &Jet, g: &[Jet], h: &[Jet]) -> Option<Jet> {
        if g.iter().any(|j| !(j.value <= 0.0)) || !h.is_empty() {
            return None;
        }
        Some(f.clone())
    }
}
