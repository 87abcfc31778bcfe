//! Poll direction providers.

use crate::directions::{
    conforming_directions, default_directions, eps_active_set, scale_linear_rows, DirectionSet,
};
use crate::error::{Error, Result};
use crate::problem::Problem;

pub trait PollDirections: Send + Sync {
    /// Unordered poll set at `x`.
    fn directions(&self, x: &[f64]) -> DirectionSet;
}

pub struct DefaultPoll {
    set: DirectionSet,
}

impl DefaultPoll {
    pub fn new(n: usize) -> Self {
        DefaultPoll {
            set: default_directions(n),
        }
    }
}

impl PollDirections for DefaultPoll {
    fn directions(&self, _x: &[f64]) -> DirectionSet {
        self.set.clone()
    }
}

/// Generators of the epsilon-tangent cone of the linear rows and finite
/// bounds. Falls back to the default set when the active rows are dependent.
pub struct ConformingPoll {
    n: usize,
    a_bar: Vec<Vec<f64>>,
    b_bar: Vec<f64>,
    eps: f64,
}

impl ConformingPoll {
    pub fn new(problem: &Problem, eps: f64) -> Result<Self> {
        let (a, b) = problem.linear_rows_with_bounds();
        let (a_bar, b_bar) = scale_linear_rows(&a, &b)?;
        Ok(ConformingPoll {
            n: problem.n(),
            a_bar,
            b_bar,
            eps,
        })
    }
}

impl PollDirections for ConformingPoll {
    fn directions(&self, x: &[f64]) -> DirectionSet {
        let active: Vec<Vec<f64>> = eps_active_set(&self.a_bar, &self.b_bar, x, self.eps)
            .into_iter()
            .map(|i| self.a_bar[i].clone())
            .collect();
        match conforming_directions(&active, self.n) {
            Ok(set) => set,
            Err(Error::DegenerateActiveSet) => {
                log::debug!("degenerate active set at {x:?}; polling the default set");
                default_directions(self.n)
            }
            Err(e) => unreachable!("conforming_directions: {e}"),
        }
    }
}
