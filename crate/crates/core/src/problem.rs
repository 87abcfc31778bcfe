//! Constrained problem definitions, point evaluation and the evaluation cache.
//!
//! A [`Problem`] is `min f(x)` subject to `g(x) <= 0`, `h(x) = 0`, linear rows
//! `A x <= b` and simple bounds `lower <= x <= upper`. The set cut out by the
//! linear rows and the bounds is called `X`; it is the only part of the feasible
//! region a direct search treats as a hard constraint.
//!
//! Every point a solver looks at goes through [`evaluate`], which stores the
//! raw `(f, g, h)` values in an [`EvalCache`]. Models and simplex gradients are
//! built from the cache only, so the cache length is the evaluation count.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar callable on `R^n`.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Two points closer than this (Euclidean) are treated as the same point.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct Problem {
    name: String,
    n: usize,
    objective: ScalarFn,
    ineq: Vec<ScalarFn>,
    eq: Vec<ScalarFn>,
    lin_a: Vec<Vec<f64>>,
    lin_b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x0: Vec<f64>,
    /// Trailing entries of `ineq` that were linear rows before folding.
    folded_rows: usize,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m())
            .field("p", &self.p())
            .field("q", &self.q())
            .field("x0", &self.x0)
            .finish()
    }
}

impl Problem {
    pub fn builder(name: impl Into<String>, n: usize) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            n,
            objective: None,
            ineq: Vec::new(),
            eq: Vec::new(),
            lin_a: Vec::new(),
            lin_b: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            x0: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of inequality callables `g`.
    pub fn m(&self) -> usize {
        self.ineq.len()
    }

    /// Number of equality callables `h`.
    pub fn p(&self) -> usize {
        self.eq.len()
    }

    /// Number of general linear rows (bounds excluded).
    pub fn q(&self) -> usize {
        self.lin_b.len()
    }

    /// Inequality count in the usual test-set convention: nonlinear
    /// inequalities plus general linear rows, whether or not they are folded.
    pub fn inequality_count(&self) -> usize {
        self.m() + self.q()
    }

    /// How many of the `g` callables are folded linear rows.
    pub fn folded_rows(&self) -> usize {
        self.folded_rows
    }

    pub fn lin_a(&self) -> &[Vec<f64>] {
        &self.lin_a
    }

    pub fn lin_b(&self) -> &[f64] {
        &self.lin_b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn ineq(&self, x: &[f64]) -> Vec<f64> {
        self.ineq.iter().map(|g| g(x)).collect()
    }

    pub fn eq(&self, x: &[f64]) -> Vec<f64> {
        self.eq.iter().map(|h| h(x)).collect()
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&lo, &up))| lo <= xi && xi <= up)
    }

    pub fn satisfies_linear(&self, x: &[f64]) -> bool {
        self.lin_a
            .iter()
            .zip(&self.lin_b)
            .all(|(row, &b)| dot(row, x) <= b)
    }

    /// Membership of `X`: linear rows and bounds, compared exactly.
    pub fn in_x(&self, x: &[f64]) -> bool {
        x.len() == self.n && self.in_bounds(x) && self.satisfies_linear(x)
    }

    /// Copy of the problem with every general linear row `a x <= b` moved into
    /// the inequality list as `g(x) = a x - b`. Bounds stay hard.
    pub fn fold_linear_rows(&self) -> Problem {
        let mut folded = self.clone();
        for (row, &b) in self.lin_a.iter().zip(&self.lin_b) {
            let row = row.clone();
            folded
                .ineq
                .push(Arc::new(move |x: &[f64]| dot(&row, x) - b));
        }
        folded.folded_rows += self.lin_b.len();
        folded.lin_a.clear();
        folded.lin_b.clear();
        folded
    }

    /// Linear rows followed by one row per finite bound, in `a x <= b` form.
    pub fn linear_rows_with_bounds(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut a = self.lin_a.clone();
        let mut b = self.lin_b.clone();
        for i in 0..self.n {
            if self.upper[i].is_finite() {
                let mut row = vec![0.0; self.n];
                row[i] = 1.0;
                a.push(row);
                b.push(self.upper[i]);
            }
            if self.lower[i].is_finite() {
                let mut row = vec![0.0; self.n];
                row[i] = -1.0;
                a.push(row);
                b.push(-self.lower[i]);
            }
        }
        (a, b)
    }
}

pub struct ProblemBuilder {
    name: String,
    n: usize,
    objective: Option<ScalarFn>,
    ineq: Vec<ScalarFn>,
    eq: Vec<ScalarFn>,
    lin_a: Vec<Vec<f64>>,
    lin_b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x0: Option<Vec<f64>>,
}

impl ProblemBuilder {
    pub fn objective(mut self, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.objective = Some(Arc::new(f));
        self
    }

    /// Adds `g(x) <= 0`.
    pub fn ineq(mut self, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.ineq.push(Arc::new(g));
        self
    }

    /// Adds `h(x) = 0`.
    pub fn eq(mut self, h: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.eq.push(Arc::new(h));
        self
    }

    pub fn ineq_arc(mut self, g: ScalarFn) -> Self {
        self.ineq.push(g);
        self
    }

    pub fn eq_arc(mut self, h: ScalarFn) -> Self {
        self.eq.push(h);
        self
    }

    pub fn objective_arc(mut self, f: ScalarFn) -> Self {
        self.objective = Some(f);
        self
    }

    /// Adds the linear row `a x <= b`.
    pub fn linear(mut self, a: Vec<f64>, b: f64) -> Self {
        self.lin_a.push(a);
        self.lin_b.push(b);
        self
    }

    pub fn bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    /// Same bounds `[lo, up]` on every coordinate.
    pub fn uniform_bounds(self, lo: f64, up: f64) -> Self {
        let n = self.n;
        self.bounds(vec![lo; n], vec![up; n])
    }

    pub fn bound(mut self, i: usize, lo: f64, up: f64) -> Self {
        if i < self.n {
            self.lower[i] = lo;
            self.upper[i] = up;
        }
        self
    }

    pub fn x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn build(self) -> Result<Problem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        let objective = self
            .objective
            .ok_or_else(|| Error::InvalidProblem("missing objective".into()))?;
        let x0 = self
            .x0
            .ok_or_else(|| Error::InvalidProblem("missing start point".into()))?;
        if x0.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidProblem(format!(
                "dimension mismatch: n = {n}, x0 has {}, bounds have {}/{}",
                x0.len(),
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.lin_a.len() != self.lin_b.len() {
            return Err(Error::InvalidProblem(
                "linear row count differs from right-hand side length".into(),
            ));
        }
        if let Some(i) = self.lin_a.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidProblem(format!("linear row {i} has wrong length")));
        }
        if let Some(i) = (0..n).find(|&i| !(self.lower[i] <= self.upper[i])) {
            return Err(Error::InvalidProblem(format!("empty bound interval on x{}", i + 1)));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("start point is not finite".into()));
        }
        let problem = Problem {
            name: self.name,
            n,
            objective,
            ineq: self.ineq,
            eq: self.eq,
            lin_a: self.lin_a,
            lin_b: self.lin_b,
            lower: self.lower,
            upper: self.upper,
            x0,
            folded_rows: 0,
        };
        if !problem.in_x(&problem.x0) {
            return Err(Error::InfeasibleStart(format!(
                "{}: x0 = {:?}",
                problem.name, problem.x0
            )));
        }
        Ok(problem)
    }
}

/// Raw values recorded at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub in_x: bool,
    /// 1-based position in the run's evaluation order.
    pub eval_index: usize,
}

#[derive(Debug, Clone)]
pub struct EvalCache {
    records: Vec<Evaluation>,
    budget: usize,
}

impl EvalCache {
    pub fn new(budget: usize) -> Self {
        EvalCache {
            records: Vec::new(),
            budget,
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.records.len()
    }

    pub fn records(&self) -> &[Evaluation] {
        &self.records
    }

    pub fn get(&self, eval_index: usize) -> Option<&Evaluation> {
        eval_index.checked_sub(1).and_then(|i| self.records.get(i))
    }

    pub fn find(&self, x: &[f64]) -> Option<&Evaluation> {
        self.records
            .iter()
            .find(|r| distance(&r.x, x) <= DUPLICATE_TOL)
    }

    /// See [`evaluate`].
    pub fn evaluate(&mut self, problem: &Problem, x: &[f64]) -> Result<Evaluation> {
        evaluate(problem, x, self)
    }
}

/// Evaluates `problem` at `x`, reusing a cached record when one lies within
/// [`DUPLICATE_TOL`]. Fresh evaluations are appended to the cache.
pub fn evaluate(problem: &Problem, x: &[f64], cache: &mut EvalCache) -> Result<Evaluation> {
    if x.len() != problem.n() {
        return Err(Error::InvalidProblem(format!(
            "point has length {}, expected {}",
            x.len(),
            problem.n()
        )));
    }
    if let Some(hit) = cache.find(x) {
        return Ok(hit.clone());
    }
    if cache.records.len() >= cache.budget {
        return Err(Error::BudgetExhausted {
            budget: cache.budget,
        });
    }
    let f = problem.objective(x);
    let g = problem.ineq(x);
    let h = problem.eq(x);
    let nan = |what: &str| Error::NonFiniteValue {
        what: what.to_string(),
        x: x.to_vec(),
    };
    if f.is_nan() {
        return Err(nan("objective"));
    }
    if let Some(i) = g.iter().position(|v| v.is_nan()) {
        return Err(nan(&format!("inequality {}", i + 1)));
    }
    if let Some(j) = h.iter().position(|v| v.is_nan()) {
        return Err(nan(&format!("equality {}", j + 1)));
    }
    let record = Evaluation {
        x: x.to_vec(),
        f,
        g,
        h,
        in_x: problem.in_x(x),
        eval_index: cache.records.len() + 1,
    };
    cache.records.push(record.clone());
    Ok(record)
}

/// Cached records within `radius` of `center`, nearest first; ties keep
/// evaluation order.
pub fn nearby_points<'a>(cache: &'a EvalCache, center: &[f64], radius: f64) -> Vec<&'a Evaluation> {
    let mut hits: Vec<(f64, &Evaluation)> = cache
        .records
        .iter()
        .map(|r| (distance(&r.x, center), r))
        .filter(|(d, _)| *d <= radius)
        .collect();
    hits.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.eval_index.cmp(&b.1.eval_index))
    });
    hits.into_iter().map(|(_, r)| r).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
