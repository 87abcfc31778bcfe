//! Solver arms addressed by label.

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::solver::{solve, BarrierMode, LinearMode, SolveResult, SolverConfig};

pub trait SolverStrategy: Send + Sync {
    fn label(&self) -> &str;

    /// The configuration this arm runs with, derived from shared settings.
    fn configure(&self, base: &SolverConfig) -> SolverConfig;

    fn solve(&self, problem: &Problem, base: &SolverConfig) -> Result<SolveResult> {
        solve(problem, &self.configure(base))
    }
}

/// Merit-function solver with linear rows folded into the penalty.
pub struct LogdsPenalty;

/// Merit-function solver keeping linear rows hard, polling along the
/// epsilon-tangent cone.
pub struct LogdsConforming;

/// Feasible-only baseline: infeasible points get `+inf`.
pub struct ExtremeBarrierArm;

impl SolverStrategy for LogdsPenalty {
    fn label(&self) -> &str {
        "logds-penalty"
    }

    fn configure(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            linear_mode: LinearMode::Penalty,
            barrier_mode: BarrierMode::Logds,
            ..base.clone()
        }
    }
}

impl SolverStrategy for LogdsConforming {
    fn label(&self) -> &str {
        "logds-conforming"
    }

    fn configure(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            linear_mode: LinearMode::Conforming,
            barrier_mode: BarrierMode::Logds,
            ..base.clone()
        }
    }
}

impl SolverStrategy for ExtremeBarrierArm {
    fn label(&self) -> &str {
        "extreme-barrier"
    }

    fn configure(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            barrier_mode: BarrierMode::ExtremeBarrier,
            ..base.clone()
        }
    }
}

pub struct SolverRegistry {
    arms: Vec<Box<dyn SolverStrategy>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl SolverRegistry {
    pub fn builtin() -> Self {
        let mut r = SolverRegistry { arms: Vec::new() };
        r.register(Box::new(LogdsPenalty));
        r.register(Box::new(LogdsConforming));
        r.register(Box::new(ExtremeBarrierArm));
        r
    }

    /// Adds an arm, replacing any arm with the same label.
    pub fn register(&mut self, arm: Box<dyn SolverStrategy>) {
        self.arms.retain(|a| a.label() != arm.label());
        self.arms.push(arm);
    }

    pub fn get(&self, label: &str) -> Result<&dyn SolverStrategy> {
        self.arms
            .iter()
            .find(|a| a.label() == label)
            .map(|a| a.as_ref())
            .ok_or_else(|| Error::UnknownSolver(label.to_string()))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.arms.iter().map(|a| a.label()).collect()
    }

    /// Resolves a comma-separated label list, keeping its order.
    pub fn parse_list(&self, list: &str) -> Result<Vec<&dyn SolverStrategy>> {
        let mut out: Vec<&dyn SolverStrategy> = Vec::new();
        for label in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let arm = self.get(label)?;
            if out.iter().any(|a| a.label() == label) {
                return Err(Error::Config(format!("solver `{label}` listed twice")));
            }
            out.push(arm);
        }
        if out.is_empty() {
            return Err(Error::Config("no solvers given".into()));
        }
        Ok(out)
    }
}
