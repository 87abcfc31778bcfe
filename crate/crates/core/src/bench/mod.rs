//! Benchmark harness: per-evaluation traces, the convergence test, and
//! performance and data profiles.
//!
//! For a problem `p`, `f_L` is the best feasible value any solver found and
//! `f_M` the worst of the solvers' final best feasible values. A solver has
//! converged at the first evaluation whose best feasible value `f` satisfies
//! `f_M - f >= (1 - tau) (f_M - f_L)`; `t[p][s]` is that evaluation count.

mod emit;
mod harness;

pub use emit::{
    emit, parse_csv, profile_csv, render_svg, tau_label, ProfileKind, PROFILE_TAUS,
};
pub use harness::{read_jsonl, run_bench, run_study, to_jsonl, write_histories, StudyOutput};

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{TracePoint, FEASIBILITY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunHistory {
    pub problem: String,
    pub solver: String,
    /// Problem dimension.
    pub n: usize,
    pub trace: Vec<TracePoint>,
}

/// Running minimum of `f` over evaluations with `c <= 1e-4`, `+inf` before
/// the first such evaluation.
pub fn best_feasible_curve(history: &RunHistory) -> Vec<(usize, f64)> {
    let mut best = f64::INFINITY;
    history
        .trace
        .iter()
        .map(|p| {
            if p.c <= FEASIBILITY_TOL && p.f < best {
                best = p.f;
            }
            (p.i, best)
        })
        .collect()
}

/// First evaluation index whose curve value passes the convergence test;
/// `None` if it never does.
pub fn convergence_eval_count(curve: &[(usize, f64)], f_m: f64, f_l: f64, tau: f64) -> Result<Option<u64>> {
    if f_m < f_l {
        return Err(Error::InvalidBracket { f_m, f_l });
    }
    let target = (1.0 - tau) * (f_m - f_l);
    Ok(curve
        .iter()
        .find(|(_, f)| f_m - f >= target)
        .map(|(i, _)| *i as u64))
}

/// Which values bound `f_M` from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorstPolicy {
    /// Worst of the solvers' final best feasible values.
    #[default]
    FinalBest,
    /// Worst feasible value seen at any evaluation of any solver.
    PerEvaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileTable {
    pub problems: Vec<String>,
    pub solvers: Vec<String>,
    /// `t[p][s]`; `None` means the solver never converged.
    pub t: Vec<Vec<Option<u64>>>,
    pub n_p: Vec<usize>,
    pub tau: f64,
}

impl ProfileTable {
    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }
}

pub fn build_table(histories: &[RunHistory], tau: f64) -> Result<ProfileTable> {
    build_table_with(histories, tau, WorstPolicy::FinalBest)
}

/// Problems and solvers keep their order of first appearance. Problems where
/// no solver ever reached a feasible point are dropped with a warning.
pub fn build_table_with(histories: &[RunHistory], tau: f64, policy: WorstPolicy) -> Result<ProfileTable> {
    let mut problems: Vec<(String, usize)> = Vec::new();
    let mut solvers: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    for h in histories {
        if !seen.insert((h.problem.as_str(), h.solver.as_str())) {
            return Err(Error::DuplicateRun {
                problem: h.problem.clone(),
                solver: h.solver.clone(),
            });
        }
        if !problems.iter().any(|(p, _)| p == &h.problem) {
            problems.push((h.problem.clone(), h.n));
        }
        if !solvers.contains(&h.solver) {
            solvers.push(h.solver.clone());
        }
    }

    let mut table = ProfileTable {
        problems: Vec::new(),
        solvers: solvers.clone(),
        t: Vec::new(),
        n_p: Vec::new(),
        tau,
    };
    for (problem, n) in &problems {
        let mut curves = Vec::with_capacity(solvers.len());
        for s in &solvers {
            let h = histories
                .iter()
                .find(|h| &h.problem == problem && &h.solver == s)
                .ok_or_else(|| Error::Config(format!("no run of `{s}` on {problem}")))?;
            curves.push((h, best_feasible_curve(h)));
        }
        let finals: Vec<f64> = curves
            .iter()
            .filter_map(|(_, c)| c.last().map(|p| p.1))
            .filter(|f| f.is_finite())
            .collect();
        if finals.is_empty() {
            log::warn!("{problem}: no solver found a feasible point; dropped from the profiles");
            continue;
        }
        let f_l = finals.iter().copied().fold(f64::INFINITY, f64::min);
        let f_m = match policy {
            WorstPolicy::FinalBest => finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            WorstPolicy::PerEvaluation => curves
                .iter()
                .flat_map(|(h, _)| h.trace.iter())
                .filter(|p| p.c <= FEASIBILITY_TOL)
                .map(|p| p.f)
                .fold(f64::NEG_INFINITY, f64::max),
        };
        let row = curves
            .iter()
            .map(|(_, c)| convergence_eval_count(c, f_m, f_l, tau))
            .collect::<Result<Vec<_>>>()?;
        table.problems.push(problem.clone());
        table.n_p.push(*n);
        table.t.push(row);
    }
    Ok(table)
}

/// Right-continuous, nondecreasing step function given by its breakpoints:
/// the value is `points[i].1` on `[points[i].0, points[i+1].0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pub solver: String,
    pub points: Vec<(f64, f64)>,
}

impl StepFunction {
    /// Value at `x`; `0` left of the first breakpoint.
    pub fn eval(&self, x: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(b, _)| *b <= x)
            .last()
            .map_or(0.0, |p| p.1)
    }
}

/// Breakpoints of `x -> |{v in values : v <= x}| / total` from `start` on.
fn counting_steps(mut values: Vec<f64>, total: usize, start: f64) -> Vec<(f64, f64)> {
    values.sort_by(f64::total_cmp);
    let at_start = values.iter().filter(|v| **v <= start).count();
    let mut points = vec![(start, at_start as f64 / total as f64)];
    let mut count = at_start;
    let mut i = at_start;
    while i < values.len() {
        let x = values[i];
        while i < values.len() && values[i] == x {
            i += 1;
            count += 1;
        }
        points.push((x, count as f64 / total as f64));
    }
    points
}

/// `rho_s(alpha)`: share of problems with `t[p][s] <= alpha * min_s' t[p][s']`.
pub fn performance_profile(table: &ProfileTable) -> Result<Vec<StepFunction>> {
    if table.is_empty() || table.solvers.is_empty() {
        return Err(Error::EmptyTable);
    }
    let total = table.problems.len();
    Ok((0..table.solvers.len())
        .map(|s| {
            let ratios: Vec<f64> = table
                .t
                .iter()
                .filter_map(|row| {
                    let best = row.iter().flatten().min()?;
                    row[s].map(|t| t as f64 / *best as f64)
                })
                .collect();
            StepFunction {
                solver: table.solvers[s].clone(),
                points: counting_steps(ratios, total, 1.0),
            }
        })
        .collect())
}

/// `d_s(kappa)`: share of problems with `t[p][s] <= kappa (n_p + 1)`.
pub fn data_profile(table: &ProfileTable) -> Result<Vec<StepFunction>> {
    if table.is_empty() || table.solvers.is_empty() {
        return Err(Error::EmptyTable);
    }
    let total = table.problems.len();
    Ok((0..table.solvers.len())
        .map(|s| {
            let kappas: Vec<f64> = table
                .t
                .iter()
                .zip(&table.n_p)
                .filter_map(|(row, n)| row[s].map(|t| t as f64 / (*n as f64 + 1.0)))
                .collect();
            StepFunction {
                solver: table.solvers[s].clone(),
                points: counting_steps(kappas, total, 0.0),
            }
        })
        .collect())
}
