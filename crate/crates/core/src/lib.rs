//! Derivative-free direct search for problems
//!
//! ```text
//! min f(x)  s.t.  g(x) <= 0,  h(x) = 0,  A x <= b,  l <= x <= u
//! ```
//!
//! driven by a merit function that puts a logarithmic barrier on the
//! inequalities strictly satisfied at the start point and an exterior power
//! penalty on the rest, with a benchmarking harness for performance and data
//! profiles.
//!
//! ```
//! use logds::{registry, solver::{solve, SolverConfig}};
//!
//! let problem = registry::lookup("TOY-CIRCLE").unwrap();
//! let result = solve(&problem, &SolverConfig::default()).unwrap();
//! assert!(result.best_c <= 1e-4);
//! ```

pub mod bench;
pub mod directions;
pub mod error;
pub mod expr;
pub mod merit;
pub mod problem;
pub mod problem_file;
pub mod registry;
pub mod simplex_gradient;
pub mod solver;
pub mod strategy;
pub mod surrogate;

pub use error::{Error, Result};
pub use problem::{EvalCache, Evaluation, Problem};
