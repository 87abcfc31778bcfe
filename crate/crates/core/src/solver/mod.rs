//! The direct-search main loop: model-based search, ordered opportunistic
//! poll, step-size control and the barrier/penalty parameter schedule.

mod config;
mod penalty;
mod polling;

pub use config::{BarrierMode, LinearMode, SolverConfig, CONFIG_KEYS};
pub use penalty::{ext_criterion, log_criterion, penalty_update};
pub use polling::{ConformingPoll, DefaultPoll, PollDirections};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merit::{
    constraint_violation, g_min, multiplier_estimates, partition_inequalities, ExtremeBarrier,
    MeritFunction, MeritParams, Multipliers,
};
use crate::problem::{distance, evaluate, nearby_points, EvalCache, Evaluation, Problem, DUPLICATE_TOL};
use crate::simplex_gradient::{order_poll_directions, simplex_gradient, AscentIndicator};
use crate::surrogate::{search_step, SearchOptions};

/// Points with violation at most this are reported as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    SearchSuccess,
    PollSuccess,
    Unsuccessful,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        !matches!(self, Outcome::Unsuccessful)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AlphaMin,
    Budget,
    MaxIter,
}

/// One iteration. `*_next` fields hold the values on exit; `merit_next` is
/// measured with the exit parameters. Parameter fields are absent under the
/// extreme barrier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: u64,
    pub outcome: Outcome,
    pub alpha: f64,
    pub alpha_next: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_log_next: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_ext: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_ext_next: Option<f64>,
    pub merit: f64,
    pub merit_next: f64,
    /// Cumulative evaluations at the end of the iteration.
    pub evals_used: usize,
    pub x: Vec<f64>,
}

/// `(eval_index, f, c)` for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub i: usize,
    pub f: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub problem: String,
    pub config: SolverConfig,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub best_c: f64,
    pub evals: usize,
    pub iterations: u64,
    pub stop_reason: StopReason,
    /// At the final incumbent; absent under the extreme barrier.
    pub multipliers: Option<Multipliers>,
    pub history: Vec<IterationRecord>,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

pub enum Merit {
    Logds(MeritParams),
    Extreme(ExtremeBarrier),
}

impl Merit {
    pub fn function(&self) -> &dyn MeritFunction {
        match self {
            Merit::Logds(p) => p,
            Merit::Extreme(e) => e,
        }
    }

    pub fn params(&self) -> Option<&MeritParams> {
        match self {
            Merit::Logds(p) => Some(p),
            Merit::Extreme(_) => None,
        }
    }
}

pub struct SolverState {
    /// Working copy; linear rows are folded into `g` in penalty mode.
    problem: Problem,
    config: SolverConfig,
    poll: Box<dyn PollDirections>,
    pub incumbent: Evaluation,
    pub incumbent_merit: f64,
    pub alpha: f64,
    pub merit: Merit,
    pub k: u64,
    pub cache: EvalCache,
    pub history: Vec<IterationRecord>,
}

/// Evaluates `x0`, partitions the inequalities there and sets the initial
/// parameters.
pub fn init(problem: &Problem, config: &SolverConfig) -> Result<SolverState> {
    config.validate()?;
    let working = match config.linear_mode {
        LinearMode::Penalty => problem.fold_linear_rows(),
        LinearMode::Conforming => problem.clone(),
    };
    let x0 = working.x0().to_vec();
    if !working.in_x(&x0) {
        return Err(Error::InfeasibleStart(format!("{x0:?}")));
    }
    if config.barrier_mode == BarrierMode::ExtremeBarrier && working.p() > 0 {
        return Err(Error::Config(format!(
            "{} has equality constraints; the extreme barrier needs p = 0",
            working.name()
        )));
    }
    let poll: Box<dyn PollDirections> = match config.linear_mode {
        LinearMode::Penalty => Box::new(DefaultPoll::new(working.n())),
        LinearMode::Conforming => Box::new(ConformingPoll::new(&working, config.eps_active)?),
    };

    let mut cache = EvalCache::new(config.max_evals);
    let first = evaluate(&working, &x0, &mut cache)?;
    let merit = match config.barrier_mode {
        BarrierMode::Logds => {
            let (g_log, g_ext) = partition_inequalities(&first.g);
            Merit::Logds(MeritParams {
                g_log,
                g_ext,
                rho_log: config.rho0_log,
                rho_ext: 1.0 / first.f.abs().max(10.0),
                nu: config.nu,
                gamma: config.gamma,
                beta: config.beta,
                zeta: config.zeta,
            })
        }
        BarrierMode::ExtremeBarrier => {
            if let Some(l) = first.g.iter().position(|v| !(*v <= 0.0)) {
                return Err(Error::InfeasibleStart(format!(
                    "inequality {} is violated at x0 ({})",
                    l + 1,
                    first.g[l]
                )));
            }
            Merit::Extreme(ExtremeBarrier)
        }
    };
    let z0 = merit.function().of(&first);
    if !z0.is_finite() {
        return Err(Error::InvalidProblem(format!(
            "merit at x0 is not finite ({:?})",
            z0.status
        )));
    }
    Ok(SolverState {
        problem: working,
        config: config.clone(),
        poll,
        incumbent: first,
        incumbent_merit: z0.value,
        alpha: config.alpha0,
        merit,
        k: 0,
        cache,
        history: Vec::new(),
    })
}

impl SolverState {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Runs one iteration and appends its record to `history`.
    ///
    /// A `BudgetExhausted` error leaves the incumbent, step size and
    /// parameters untouched; evaluations spent before it stay in the cache.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let alpha = self.alpha;
        let z_before = self.incumbent_merit;
        let threshold = z_before - self.config.gamma * alpha * alpha;
        // Once gamma * alpha^2 drops below one ulp of the merit the threshold
        // rounds to z_before; requiring strict decrease keeps equal-merit
        // cached points from being accepted forever.
        let sufficient = |v: f64| v <= threshold && v < z_before;
        let (rho_log, rho_ext) = self.rhos();
        let x = self.incumbent.x.clone();

        let mut accepted = None;
        if self.config.search_enabled {
            let candidate = search_step(
                &self.problem,
                &self.cache,
                &x,
                alpha,
                self.merit.function(),
                &SearchOptions::default(),
            );
            if let Some(z) = candidate {
                let e = evaluate(&self.problem, &z, &mut self.cache)?;
                let v = self.merit.function().of(&e);
                if e.in_x && v.is_finite() && sufficient(v.value) {
                    accepted = Some((e, v.value, Outcome::SearchSuccess));
                }
            }
        }

        if accepted.is_none() {
            let ascent = self.ascent_indicator();
            let ordered = order_poll_directions(&self.poll.directions(&x), &ascent);
            for d in &ordered.dirs {
                let trial: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
                if !self.problem.in_x(&trial) {
                    continue;
                }
                let e = evaluate(&self.problem, &trial, &mut self.cache)?;
                let v = self.merit.function().of(&e);
                if v.is_finite() && sufficient(v.value) {
                    accepted = Some((e, v.value, Outcome::PollSuccess));
                    break;
                }
            }
        }

        let outcome = match accepted {
            Some((e, v, outcome)) => {
                self.incumbent = e;
                self.incumbent_merit = v;
                self.alpha = self.config.phi * alpha;
                outcome
            }
            None => {
                self.alpha = self.config.theta_alpha * alpha;
                if let Merit::Logds(params) = &mut self.merit {
                    let gmin = g_min(&self.incumbent, &params.g_log);
                    *params = penalty_update(self.alpha, params, gmin);
                    self.incumbent_merit = params.of(&self.incumbent).value;
                }
                Outcome::Unsuccessful
            }
        };

        let (rho_log_next, rho_ext_next) = self.rhos();
        let record = IterationRecord {
            k: self.k,
            outcome,
            alpha,
            alpha_next: self.alpha,
            rho_log,
            rho_log_next,
            rho_ext,
            rho_ext_next,
            merit: z_before,
            merit_next: self.incumbent_merit,
            evals_used: self.cache.len(),
            x: self.incumbent.x.clone(),
        };
        log::trace!(
            "k={} {:?} alpha={:e} merit={} evals={}",
            record.k,
            record.outcome,
            record.alpha,
            record.merit_next,
            record.evals_used
        );
        self.k += 1;
        self.history.push(record.clone());
        Ok(record)
    }

    fn rhos(&self) -> (Option<f64>, Option<f64>) {
        match self.merit.params() {
            Some(p) => (Some(p.rho_log), Some(p.rho_ext)),
            None => (None, None),
        }
    }

    /// Simplex gradient of the current merit from up to `n` nearest cached
    /// points with finite merit within `2 alpha` of the incumbent.
    pub fn ascent_indicator(&self) -> AscentIndicator {
        let n = self.problem.n();
        let center = &self.incumbent.x;
        let merit = self.merit.function();
        let mut points = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for e in nearby_points(&self.cache, center, 2.0 * self.alpha) {
            if points.len() == n {
                break;
            }
            if distance(&e.x, center) <= DUPLICATE_TOL {
                continue;
            }
            let v = merit.of(e);
            if v.is_finite() {
                points.push(e.x.clone());
                values.push(v.value);
            }
        }
        simplex_gradient(center, self.incumbent_merit, &points, &values)
    }

    fn stop_reason(&self) -> Option<StopReason> {
        if self.alpha < self.config.alpha_min {
            Some(StopReason::AlphaMin)
        } else if self.cache.remaining() == 0 {
            Some(StopReason::Budget)
        } else if self.k >= self.config.max_iter {
            Some(StopReason::MaxIter)
        } else {
            None
        }
    }

    pub fn finish(self, stop_reason: StopReason) -> SolveResult {
        let records = self.cache.records();
        // the feasible-only baseline never accepts points with g > 0
        let tol = match self.merit {
            Merit::Logds(_) => FEASIBILITY_TOL,
            Merit::Extreme(_) => 0.0,
        };
        let best = best_point(records, tol);
        let multipliers = self
            .merit
            .params()
            .and_then(|p| multiplier_estimates(&self.incumbent, p).ok());
        SolveResult {
            problem: self.problem.name().to_string(),
            config: self.config,
            best_x: best.x.clone(),
            best_f: best.f,
            best_c: constraint_violation(best),
            evals: records.len(),
            iterations: self.k,
            stop_reason,
            multipliers,
            history: self.history,
            trace: records
                .iter()
                .map(|e| TracePoint {
                    i: e.eval_index,
                    f: e.f,
                    c: constraint_violation(e),
                })
                .collect(),
        }
    }
}

/// Least `f` among points in `X` with violation at most `tol`; least
/// violation when there are none. Earlier points win ties.
pub fn best_point(records: &[Evaluation], tol: f64) -> &Evaluation {
    let feasible = records
        .iter()
        .filter(|e| e.in_x && constraint_violation(e) <= tol)
        .fold(None::<&Evaluation>, |best, e| match best {
            Some(b) if b.f <= e.f => Some(b),
            _ => Some(e),
        });
    feasible.unwrap_or_else(|| {
        records
            .iter()
            .fold(None::<&Evaluation>, |best, e| match best {
                Some(b) if constraint_violation(b) <= constraint_violation(e) => Some(b),
                _ => Some(e),
            })
            .expect("cache holds at least x0")
    })
}

/// Iterates until the step size drops below `alpha_min`, the budget is spent
/// or the iteration cap is reached.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveResult> {
    let mut state = init(problem, config)?;
    let reason = loop {
        if let Some(r) = state.stop_reason() {
            break r;
        }
        match state.step() {
            Ok(_) => {}
            Err(Error::BudgetExhausted { .. }) => break StopReason::Budget,
            Err(e) => return Err(e),
        }
    };
    Ok(state.finish(reason))
}

/// [`solve`] with the extreme-barrier merit.
pub fn extreme_barrier_solve(problem: &Problem, config: &SolverConfig) -> Result<SolveResult> {
    let config = SolverConfig {
        barrier_mode: BarrierMode::ExtremeBarrier,
        ..config.clone()
    };
    solve(problem, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::lookup;

    #[test]
    fn initial_parameters() {
        let s = init(&lookup("TOY-EQ").unwrap(), &SolverConfig::default()).unwrap();
        let p = s.merit.params().unwrap();
        assert_eq!(p.rho_ext, 0.1);
        assert_eq!(p.rho_log, 0.1);
        assert_eq!(s.cache.len(), 1);

        let big = Problem::builder("big", 1)
            .objective(|x| 50.0 + x[0])
            .x0(vec![0.0])
            .build()
            .unwrap();
        let s = init(&big, &SolverConfig::default()).unwrap();
        assert!((s.merit.params().unwrap().rho_ext - 0.02).abs() < 1e-18);
    }

    #[test]
    fn boundary_start_goes_to_penalty() {
        let p = Problem::builder("edge", 1)
            .objective(|x| x[0])
            .ineq(|x| x[0])
            .ineq(|x| x[0] - 1.0)
            .x0(vec![0.0])
            .build()
            .unwrap();
        let s = init(&p, &SolverConfig::default()).unwrap();
        let params = s.merit.params().unwrap();
        assert_eq!(params.g_log, vec![1]);
        assert_eq!(params.g_ext, vec![0]);
        assert!(s.incumbent_merit.is_finite());
    }

    #[test]
    fn budget_of_one() {
        let cfg = SolverConfig {
            max_evals: 1,
            ..SolverConfig::default()
        };
        let p = lookup("TOY-EQ").unwrap();
        let r = solve(&p, &cfg).unwrap();
        assert_eq!(r.stop_reason, StopReason::Budget);
        assert_eq!(r.best_x, p.x0());
        assert_eq!(r.evals, 1);
        let r = extreme_barrier_solve(&lookup("TOY-CIRCLE").unwrap(), &cfg).unwrap();
        assert_eq!(r.best_x, vec![0.0, 0.0]);
    }

    #[test]
    fn extreme_barrier_reports_exactly_feasible() {
        let p = lookup("TOY-CIRCLE").unwrap();
        let r = extreme_barrier_solve(&p, &SolverConfig::default()).unwrap();
        assert!(p.ineq(&r.best_x).iter().all(|g| *g <= 0.0));
        assert!((r.best_f + std::f64::consts::SQRT_2).abs() < 1e-3);
        assert!(r.multipliers.is_none());
        assert!(r.history.iter().all(|h| h.rho_log.is_none()));
    }

    #[test]
    fn extreme_barrier_preconditions() {
        let cfg = SolverConfig::default();
        assert!(matches!(
            extreme_barrier_solve(&lookup("TOY-EQ").unwrap(), &cfg),
            Err(Error::Config(_))
        ));
        let p = Problem::builder("bad", 1)
            .objective(|x| x[0])
            .ineq(|x| 1.0 - x[0])
            .x0(vec![0.0])
            .build()
            .unwrap();
        assert!(matches!(extreme_barrier_solve(&p, &cfg), Err(Error::InfeasibleStart(_))));
    }

    #[test]
    fn unsuccessful_poll_halves_alpha() {
        // x0 is the unconstrained minimizer, so nothing gives decrease
        let p = Problem::builder("bowl", 2)
            .objective(|x| x[0] * x[0] + x[1] * x[1])
            .x0(vec![0.0, 0.0])
            .build()
            .unwrap();
        let cfg = SolverConfig {
            alpha0: 0.1,
            search_enabled: false,
            ..SolverConfig::default()
        };
        let mut s = init(&p, &cfg).unwrap();
        let r = s.step().unwrap();
        assert_eq!(r.outcome, Outcome::Unsuccessful);
        assert_eq!(r.alpha_next, 0.05);
        assert_eq!(r.evals_used, 1 + 6);
    }

    #[test]
    fn opportunistic_poll() {
        let p = Problem::builder("slope", 2)
            .objective(|x| -x[0] - x[1])
            .x0(vec![0.0, 0.0])
            .build()
            .unwrap();
        let cfg = SolverConfig {
            search_enabled: false,
            ..SolverConfig::default()
        };
        let mut s = init(&p, &cfg).unwrap();
        let r = s.step().unwrap();
        // first default direction (1,1)/sqrt2 already decreases
        assert_eq!(r.outcome, Outcome::PollSuccess);
        assert_eq!(r.evals_used, 2);
        assert_eq!(r.rho_log, r.rho_log_next);
        assert_eq!(r.rho_ext, r.rho_ext_next);
        assert_eq!(r.alpha_next, r.alpha);
    }

    #[test]
    fn toy_problems_converge() {
        for (name, fstar) in [("TOY-CIRCLE", -std::f64::consts::SQRT_2), ("TOY-EQ", 0.5)] {
            let r = solve(&lookup(name).unwrap(), &SolverConfig::default()).unwrap();
            assert!(r.best_c <= 1e-4, "{name}: c = {}", r.best_c);
            assert!(
                (r.best_f - fstar).abs() <= 1e-3 * (1.0 + fstar.abs()),
                "{name}: f = {} vs {fstar}",
                r.best_f
            );
            assert!(r.evals <= 2000);
        }
    }

    #[test]
    fn deterministic() {
        let p = lookup("HS21").unwrap();
        let a = serde_json::to_string(&solve(&p, &SolverConfig::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&solve(&p, &SolverConfig::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
