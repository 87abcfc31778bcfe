//! Runs solver arms over problem sets.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{build_table, emit, ProfileTable, RunHistory, PROFILE_TAUS};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::solver::{SolverConfig, TracePoint};
use crate::strategy::SolverStrategy;

/// One run per (problem, arm), problem-major. Runs execute in parallel; the
/// output order does not depend on scheduling.
///
/// An arm that cannot start on a problem (infeasible start for the
/// feasible-only baseline, equality constraints it does not support) gets an
/// empty trace, so it counts as unsolved there.
pub fn run_bench(problems: &[Problem], arms: &[&dyn SolverStrategy], base: &SolverConfig) -> Result<Vec<RunHistory>> {
    let pairs: Vec<(&Problem, &dyn SolverStrategy)> = problems
        .iter()
        .flat_map(|p| arms.iter().map(move |a| (p, *a)))
        .collect();
    pairs
        .par_iter()
        .map(|(problem, arm)| {
            let trace = match arm.solve(problem, base) {
                Ok(r) => r.trace,
                Err(e @ (Error::InfeasibleStart(_) | Error::Config(_))) => {
                    log::warn!("{} on {}: {e}; counted as unsolved", arm.label(), problem.name());
                    Vec::new()
                }
                Err(e) => return Err(e),
            };
            Ok(RunHistory {
                problem: problem.name().to_string(),
                solver: arm.label().to_string(),
                n: problem.n(),
                trace,
            })
        })
        .collect()
}

pub fn to_jsonl(trace: &[TracePoint]) -> Result<String> {
    let mut s = String::new();
    for p in trace {
        s.push_str(&serde_json::to_string(p)?);
        s.push('\n');
    }
    Ok(s)
}

pub fn read_jsonl(text: &str) -> Result<Vec<TracePoint>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// `dir/<problem>__<solver>.jsonl`, one `{i, f, c}` object per line.
pub fn write_histories(histories: &[RunHistory], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    histories
        .iter()
        .map(|h| {
            let path = dir.join(format!("{}__{}.jsonl", h.problem, h.solver));
            std::fs::write(&path, to_jsonl(&h.trace)?)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub histories: Vec<RunHistory>,
    /// One table per accuracy level in [`PROFILE_TAUS`].
    pub tables: Vec<ProfileTable>,
    pub files: Vec<PathBuf>,
}

/// Runs every arm on every problem and builds the profile tables. With `out`
/// set, traces go to `out/runs` and profile CSV/SVG files to `out`.
pub fn run_study(
    problems: &[Problem],
    arms: &[&dyn SolverStrategy],
    base: &SolverConfig,
    out: Option<&Path>,
) -> Result<StudyOutput> {
    let histories = run_bench(problems, arms, base)?;
    let tables = PROFILE_TAUS
        .iter()
        .map(|&tau| build_table(&histories, tau))
        .collect::<Result<Vec<_>>>()?;
    let mut files = Vec::new();
    if let Some(dir) = out {
        files.extend(write_histories(&histories, &dir.join("runs"))?);
        for t in &tables {
            files.extend(emit(t, dir)?);
        }
    }
    Ok(StudyOutput {
        histories,
        tables,
        files,
    })
}
