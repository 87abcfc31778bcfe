//! Quadratic surrogate models and the model-based search step.
//!
//! Models of `f`, every `g_l` and every `h_j` are fitted to points already in
//! the evaluation cache near the incumbent and combined through the merit
//! function. The resulting merit model is minimized over a ball of radius
//! proportional to the step size, intersected with `X`. No problem
//! evaluations are spent here.
//!
//! With `q = (n+1)(n+2)/2` sample points the fit is an interpolation; with fewer
//! (but at least `n+1`) it is the minimum Frobenius norm interpolant; with more
//! it is a least-squares regression.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::merit::{Jet, MeritFunction};
use crate::problem::{dot, nearby_points, norm, EvalCache, Problem};

/// Systems with a larger condition estimate are treated as not poised.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Interpolation,
    MinFrobenius,
    Regression,
}

/// `m(x) = c + grad^T s + 0.5 s^T hess s` with `s = x - center`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub c: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub center: Vec<f64>,
    pub kind: ModelKind,
}

impl QuadraticModel {
    pub fn n(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.value_at_step(&s)
    }

    /// Model value at `center + s`.
    pub fn value_at_step(&self, s: &[f64]) -> f64 {
        let n = self.n();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += s[i] * self.hess[(i, j)] * s[j];
            }
        }
        self.c + dot(&self.grad, s) + 0.5 * quad
    }

    pub fn jet_at_step(&self, s: &[f64]) -> Jet {
        let n = self.n();
        let mut grad = self.grad.clone();
        for i in 0..n {
            for j in 0..n {
                grad[i] += self.hess[(i, j)] * s[j];
            }
        }
        Jet {
            value: self.value_at_step(s),
            grad,
            hess: self.hess.iter().copied().collect(),
        }
    }
}

/// Quadratic monomials in scaled coordinates: `0.5 u_i^2` then `u_i u_j`, `i < j`.
fn quad_terms(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        out.push(0.5 * u[i] * u[i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(u[i] * u[j]);
        }
    }
    out
}

/// Factorized fitting system for one sample set, reused across the `f`, `g`
/// and `h` models.
pub struct ModelBasis {
    n: usize,
    center: Vec<f64>,
    scale: f64,
    count: usize,
    kind: ModelKind,
    svd: nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    /// Needed to map KKT multipliers back to quadratic coefficients.
    quad_block: DMatrix<f64>,
}

impl ModelBasis {
    pub fn new(points: &[Vec<f64>], center: &[f64]) -> Result<Self> {
        let n = center.len();
        let count = points.len();
        if count < n + 1 {
            return Err(Error::TooFewPoints {
                needed: n + 1,
                got: count,
            });
        }
        let q = (n + 1) * (n + 2) / 2;
        let nq = q - n - 1;
        let shifted: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().zip(center).map(|(a, b)| a - b).collect())
            .collect();
        let scale = shifted.iter().map(|s| norm(s)).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };

        let mut lin = DMatrix::<f64>::zeros(count, n + 1);
        let mut quad = DMatrix::<f64>::zeros(count, nq);
        for (r, s) in shifted.iter().enumerate() {
            let u: Vec<f64> = s.iter().map(|v| v / scale).collect();
            lin[(r, 0)] = 1.0;
            for i in 0..n {
                lin[(r, i + 1)] = u[i];
            }
            for (k, t) in quad_terms(&u).into_iter().enumerate() {
                quad[(r, k)] = t;
            }
        }

        let (kind, system) = if count < q {
            // [ Q Q^T  L ] [lambda]   [f]
            // [ L^T    0 ] [alpha ] = [0]
            let size = count + n + 1;
            let mut k = DMatrix::<f64>::zeros(size, size);
            k.view_mut((0, 0), (count, count))
                .copy_from(&(&quad * quad.transpose()));
            k.view_mut((0, count), (count, n + 1)).copy_from(&lin);
            k.view_mut((count, 0), (n + 1, count))
                .copy_from(&lin.transpose());
            (ModelKind::MinFrobenius, k)
        } else {
            let mut m = DMatrix::<f64>::zeros(count, q);
            m.view_mut((0, 0), (count, n + 1)).copy_from(&lin);
            m.view_mut((0, n + 1), (count, nq)).copy_from(&quad);
            let kind = if count == q {
                ModelKind::Interpolation
            } else {
                ModelKind::Regression
            };
            (kind, m)
        };

        let svd = system.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(cond <= MAX_CONDITION) {
            return Err(Error::PoisingFailure(cond));
        }
        Ok(ModelBasis {
            n,
            center: center.to_vec(),
            scale,
            count,
            kind,
            svd,
            quad_block: quad,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn fit(&self, values: &[f64]) -> Result<QuadraticModel> {
        let n = self.n;
        let count = self.count;
        let rhs = match self.kind {
            ModelKind::MinFrobenius => {
                let mut r = DVector::<f64>::zeros(count + n + 1);
                r.rows_mut(0, count).copy_from_slice(values);
                r
            }
            _ => DVector::from_column_slice(values),
        };
        let sol = self
            .svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::InvalidProblem(e.to_string()))?;
        let (lin, quad): (Vec<f64>, Vec<f64>) = match self.kind {
            ModelKind::MinFrobenius => {
                let lambda = sol.rows(0, count);
                let quad = self.quad_block.transpose() * lambda;
                (
                    sol.rows(count, n + 1).iter().copied().collect(),
                    quad.iter().copied().collect(),
                )
            }
            _ => (
                sol.rows(0, n + 1).iter().copied().collect(),
                sol.rows(n + 1, sol.len() - n - 1).iter().copied().collect(),
            ),
        };

        let s = self.scale;
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            hess[(i, i)] = quad[i] / (s * s);
        }
        let mut k = n;
        for i in 0..n {
            for j in i + 1..n {
                hess[(i, j)] = quad[k] / (s * s);
                hess[(j, i)] = quad[k] / (s * s);
                k += 1;
            }
        }
        Ok(QuadraticModel {
            c: lin[0],
            grad: lin[1..].iter().map(|g| g / s).collect(),
            hess,
            center: self.center.clone(),
            kind: self.kind,
        })
    }
}

/// Fits one quadratic model to `values` at `points` around `center`.
pub fn build_quadratic_model(points: &[Vec<f64>], values: &[f64], center: &[f64]) -> Result<QuadraticModel> {
    ModelBasis::new(points, center)?.fit(values)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub values_f: Vec<f64>,
    pub values_g: Vec<Vec<f64>>,
    pub values_h: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Sample and trust radius is `radius_factor * alpha`.
    pub radius_factor: f64,
    /// Points allowed beyond `(n+1)(n+2)/2` for regression.
    pub cap_extra: usize,
    pub inner_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            radius_factor: 2.0,
            cap_extra: 10,
            inner_iterations: 50,
        }
    }
}

/// Cached points within `radius_factor * alpha` of `center`, nearest first,
/// at most `(n+1)(n+2)/2 + cap_extra` of them. Records with non-finite values
/// are skipped.
pub fn select_sample_set(cache: &EvalCache, center: &[f64], alpha: f64, opts: &SearchOptions) -> SampleSet {
    let n = center.len();
    let cap = (n + 1) * (n + 2) / 2 + opts.cap_extra;
    let mut set = SampleSet::default();
    for e in nearby_points(cache, center, opts.radius_factor * alpha) {
        if set.len() >= cap {
            break;
        }
        if !e.f.is_finite() || e.g.iter().chain(&e.h).any(|v| !v.is_finite()) {
            continue;
        }
        set.points.push(e.x.clone());
        set.values_f.push(e.f);
        set.values_g.push(e.g.clone());
        set.values_h.push(e.h.clone());
    }
    set
}

/// Merit function evaluated on surrogate values.
pub struct MeritModel<'a> {
    pub f: QuadraticModel,
    pub g: Vec<QuadraticModel>,
    pub h: Vec<QuadraticModel>,
    merit: &'a dyn MeritFunction,
}

/// Combines component models through `merit`.
pub fn assemble_merit_model<'a>(
    f: QuadraticModel,
    g: Vec<QuadraticModel>,
    h: Vec<QuadraticModel>,
    merit: &'a dyn MeritFunction,
) -> MeritModel<'a> {
    MeritModel { f, g, h, merit }
}

impl MeritModel<'_> {
    /// Model merit at `x`; `+inf` where a barrier model is nonnegative.
    pub fn value(&self, x: &[f64]) -> f64 {
        let s: Vec<f64> = x.iter().zip(&self.f.center).map(|(a, b)| a - b).collect();
        self.value_at_step(&s)
    }

    pub fn value_at_step(&self, s: &[f64]) -> f64 {
        let g: Vec<f64> = self.g.iter().map(|m| m.value_at_step(s)).collect();
        let h: Vec<f64> = self.h.iter().map(|m| m.value_at_step(s)).collect();
        self.merit
            .from_values(self.f.value_at_step(s), &g, &h, true)
            .value
    }

    fn jet_at_step(&self, s: &[f64]) -> Option<Jet> {
        let g: Vec<Jet> = self.g.iter().map(|m| m.jet_at_step(s)).collect();
        let h: Vec<Jet> = self.h.iter().map(|m| m.jet_at_step(s)).collect();
        self.merit.compose(&self.f.jet_at_step(s), &g, &h)
    }
}

/// Model-based search: fits the component models around `incumbent`,
/// approximately minimizes the merit model over the ball of radius
/// `radius_factor * alpha` intersected with `X`, and returns the minimizer.
/// Returns `None` when too few points are cached, the sample set is not
/// poised, or the model offers no decrease.
pub fn search_step(
    problem: &Problem,
    cache: &EvalCache,
    incumbent: &[f64],
    alpha: f64,
    merit: &dyn MeritFunction,
    opts: &SearchOptions,
) -> Option<Vec<f64>> {
    let n = incumbent.len();
    let sample = select_sample_set(cache, incumbent, alpha, opts);
    if sample.len() < n + 1 {
        return None;
    }
    let basis = ModelBasis::new(&sample.points, incumbent).ok()?;
    let mf = basis.fit(&sample.values_f).ok()?;
    let column = |values: &[Vec<f64>], k: usize| -> Vec<f64> { values.iter().map(|v| v[k]).collect() };
    let mg = (0..problem.m())
        .map(|l| basis.fit(&column(&sample.values_g, l)))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    let mh = (0..problem.p())
        .map(|j| basis.fit(&column(&sample.values_h, j)))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    let model = assemble_merit_model(mf, mg, mh, merit);
    let region = StepRegion::new(problem, incumbent, opts.radius_factor * alpha);
    let step = minimize_in_region(&model, &region, opts.inner_iterations)?;
    region.to_point(&step)
}

/// `{s : |s| <= radius, x_k + s in X}` in step coordinates.
struct StepRegion<'a> {
    problem: &'a Problem,
    origin: Vec<f64>,
    radius: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Slack `b - A x_k` of each linear row at the origin.
    slack: Vec<f64>,
}

impl<'a> StepRegion<'a> {
    fn new(problem: &'a Problem, origin: &[f64], radius: f64) -> Self {
        let lo = problem.lower().iter().zip(origin).map(|(l, x)| l - x).collect();
        let hi = problem.upper().iter().zip(origin).map(|(u, x)| u - x).collect();
        let slack = problem
            .lin_a()
            .iter()
            .zip(problem.lin_b())
            .map(|(a, b)| b - dot(a, origin))
            .collect();
        StepRegion {
            problem,
            origin: origin.to_vec(),
            radius,
            lo,
            hi,
            slack,
        }
    }

    /// Maps a trial step into the region: clip to the box, pull back radially
    /// into the ball, then shrink toward the origin until every linear row
    /// holds. Each stage keeps the previous ones satisfied by convexity.
    fn project(&self, s: &[f64]) -> Vec<f64> {
        let mut t: Vec<f64> = s
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect();
        let len = norm(&t);
        if len > self.radius {
            let k = self.radius / len;
            t.iter_mut().for_each(|v| *v *= k);
        }
        let mut shrink: f64 = 1.0;
        for (a, &sl) in self.problem.lin_a().iter().zip(&self.slack) {
            let ad = dot(a, &t);
            if ad > sl {
                shrink = shrink.min((sl / ad).max(0.0));
            }
        }
        if shrink < 1.0 {
            t.iter_mut().for_each(|v| *v *= shrink);
        }
        t
    }

    /// `x_k + s`, clamped to the bounds and pulled back until it lies in `X`.
    fn to_point(&self, s: &[f64]) -> Option<Vec<f64>> {
        let mut s = s.to_vec();
        for _ in 0..60 {
            if norm(&s) == 0.0 {
                return None;
            }
            let x: Vec<f64> = self
                .origin
                .iter()
                .zip(&s)
                .zip(self.problem.lower().iter().zip(self.problem.upper()))
                .map(|((o, d), (l, u))| (o + d).clamp(*l, *u))
                .collect();
            if self.problem.in_x(&x) {
                return Some(x);
            }
            s.iter_mut().for_each(|v| *v *= 0.5);
        }
        None
    }
}

/// Damped Newton with projected-gradient fallback on the merit model.
fn minimize_in_region(model: &MeritModel<'_>, region: &StepRegion<'_>, iterations: usize) -> Option<Vec<f64>> {
    let n = region.origin.len();
    let mut s = vec![0.0; n];
    let mut value = model.value_at_step(&s);
    if !value.is_finite() {
        return None;
    }
    for _ in 0..iterations {
        let Some(jet) = model.jet_at_step(&s) else {
            break;
        };
        let gnorm = norm(&jet.grad);
        if !(gnorm > 0.0) || !gnorm.is_finite() {
            break;
        }

        let mut directions = Vec::with_capacity(2);
        let hess = DMatrix::from_row_slice(n, n, &jet.hess);
        if let Some(chol) = hess.cholesky() {
            let newton = chol.solve(&DVector::from_column_slice(&jet.grad));
            directions.push(newton.iter().map(|v| -v).collect::<Vec<f64>>());
        }
        let steepest: Vec<f64> = jet.grad.iter().map(|v| -v * region.radius / gnorm).collect();
        directions.push(steepest);

        let mut accepted = None;
        'dirs: for dir in &directions {
            let mut t = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = s.iter().zip(dir).map(|(a, d)| a + t * d).collect();
                let trial = region.project(&trial);
                let v = model.value_at_step(&trial);
                if v < value {
                    accepted = Some((trial, v));
                    break 'dirs;
                }
                t *= 0.5;
            }
        }
        match accepted {
            Some((trial, v)) => {
                let moved = trial
                    .iter()
                    .zip(&s)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                s = trial;
                value = v;
                if moved <= 1e-15 * region.radius.max(1e-300) {
                    break;
                }
            }
            None => break,
        }
    }
    if norm(&s) > 0.0 {
        Some(s)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merit::{ExtremeBarrier, MeritParams};
    use crate::problem::evaluate;

    fn unconstrained(n: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Problem {
        Problem::builder("u", n)
            .objective(f)
            .uniform_bounds(-10.0, 10.0)
            .x0(vec![0.0; n])
            .build()
            .unwrap()
    }

    fn params(g_log: Vec<usize>, g_ext: Vec<usize>) -> MeritParams {
        MeritParams {
            g_log,
            g_ext,
            rho_log: 0.1,
            rho_ext: 0.1,
            nu: 2.0,
            gamma: 1e-9,
            beta: 1.0 + 1e-9,
            zeta: 1e-2,
        }
    }

    #[test]
    fn interpolates_parabola() {
        let pts = vec![vec![-1.0], vec![0.0], vec![1.0]];
        let m = build_quadratic_model(&pts, &[1.0, 0.0, 1.0], &[0.0]).unwrap();
        assert_eq!(m.kind, ModelKind::Interpolation);
        assert!(m.c.abs() < 1e-12);
        assert!(m.grad[0].abs() < 1e-12);
        assert!((m.hess[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mfn_on_linear_data() {
        let pts = vec![vec![0.0], vec![1.0]];
        let m = build_quadratic_model(&pts, &[0.0, 1.0], &[0.0]).unwrap();
        assert_eq!(m.kind, ModelKind::MinFrobenius);
        assert!(m.c.abs() < 1e-12);
        assert!((m.grad[0] - 1.0).abs() < 1e-12);
        assert!(m.hess[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn constant_data_every_kind() {
        let pts2 = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
            vec![0.5, -0.5],
        ];
        for count in [3, 4, 6, 7] {
            let vals = vec![4.0; count];
            let m = build_quadratic_model(&pts2[..count], &vals, &[0.0, 0.0]).unwrap();
            assert!((m.c - 4.0).abs() < 1e-12, "{count}");
            assert!(norm(&m.grad) < 1e-12);
            assert!(m.hess.norm() < 1e-12);
        }
    }

    #[test]
    fn too_few_and_singular() {
        assert!(matches!(
            build_quadratic_model(&[vec![0.0, 0.0]], &[1.0], &[0.0, 0.0]),
            Err(Error::TooFewPoints { .. })
        ));
        // six collinear points cannot determine a 2-D quadratic
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 0.0]).collect();
        let vals = vec![0.0; 6];
        assert!(matches!(
            build_quadratic_model(&pts, &vals, &[0.0, 0.0]),
            Err(Error::PoisingFailure(_))
        ));
    }

    #[test]
    fn regression_recovers_quadratic() {
        let f = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * (3.0 * x[0] * x[0] + 2.0 * x[0] * x[1]);
        let pts: Vec<Vec<f64>> = (0..9)
            .map(|k| vec![((k * 7) % 9) as f64 / 4.0 - 1.0, (k % 3) as f64 - 1.0])
            .collect();
        let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
        let m = build_quadratic_model(&pts, &vals, &[0.0, 0.0]).unwrap();
        assert_eq!(m.kind, ModelKind::Regression);
        assert!((m.hess[(0, 0)] - 3.0).abs() < 1e-9);
        assert!((m.hess[(0, 1)] - 1.0).abs() < 1e-9);
        assert!(m.hess[(1, 1)].abs() < 1e-9);
    }

    #[test]
    fn sample_set_selection() {
        let p = unconstrained(2, |x| x[0]);
        let mut cache = EvalCache::new(100);
        let opts = SearchOptions::default();
        evaluate(&p, &[0.0, 0.0], &mut cache).unwrap();
        assert_eq!(select_sample_set(&cache, &[0.0, 0.0], 1.0, &opts).len(), 1);
        for x in [[0.5, 0.0], [0.0, 1.5], [3.0, 0.0], [0.0, -2.5]] {
            evaluate(&p, &x, &mut cache).unwrap();
        }
        // radius 2: origin, (0.5,0), (0,1.5)
        assert_eq!(select_sample_set(&cache, &[0.0, 0.0], 1.0, &opts).len(), 3);
        for k in 0..30 {
            evaluate(&p, &[0.01 * k as f64, 0.02], &mut cache).unwrap();
        }
        let s = select_sample_set(&cache, &[0.0, 0.0], 1.0, &opts);
        assert_eq!(s.len(), 6 + 10);
        assert_eq!(s.points[0], vec![0.0, 0.0]);
    }

    #[test]
    fn merit_model_shapes() {
        let zero = |n: usize| QuadraticModel {
            c: 0.0,
            grad: vec![0.0; n],
            hess: DMatrix::zeros(n, n),
            center: vec![0.0; n],
            kind: ModelKind::Interpolation,
        };
        let mut mf = zero(1);
        mf.grad[0] = 1.0;
        let p0 = params(vec![], vec![]);
        let mm = assemble_merit_model(mf.clone(), vec![], vec![], &p0);
        assert_eq!(mm.value(&[0.3]), mf.value(&[0.3]));

        let mut g = zero(1);
        g.c = -1.0;
        let p1 = params(vec![0], vec![]);
        let mm = assemble_merit_model(mf.clone(), vec![g], vec![], &p1);
        assert!((mm.value(&[0.3]) - 0.3).abs() < 1e-15);

        let mut h = zero(1);
        h.grad[0] = 1.0;
        let mm = assemble_merit_model(zero(1), vec![], vec![h], &p0);
        assert!((mm.value(&[0.5]) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn compose_matches_finite_differences() {
        let mk = |c: f64, g: [f64; 2], h: [f64; 3]| QuadraticModel {
            c,
            grad: g.to_vec(),
            hess: DMatrix::from_row_slice(2, 2, &[h[0], h[1], h[1], h[2]]),
            center: vec![0.0, 0.0],
            kind: ModelKind::Interpolation,
        };
        let mf = mk(1.0, [0.3, -0.2], [2.0, 0.1, 1.0]);
        let gl = mk(-1.0, [0.2, 0.1], [0.5, 0.0, 0.3]);
        let ge = mk(0.2, [1.0, -0.4], [0.2, 0.1, 0.0]);
        let h = mk(0.3, [-0.5, 0.7], [0.0, 0.2, 0.4]);
        let p = MeritParams {
            nu: 1.5,
            ..params(vec![0], vec![1])
        };
        let mm = assemble_merit_model(mf, vec![gl, ge], vec![h], &p);
        let s = [0.05, -0.03];
        let jet = mm.jet_at_step(&s).unwrap();
        let e = 1e-6;
        for i in 0..2 {
            let mut a = s;
            let mut b = s;
            a[i] += e;
            b[i] -= e;
            let fd = (mm.value_at_step(&a) - mm.value_at_step(&b)) / (2.0 * e);
            assert!((fd - jet.grad[i]).abs() < 1e-6, "grad {i}");
            let ga = mm.jet_at_step(&a).unwrap().grad;
            let gb = mm.jet_at_step(&b).unwrap().grad;
            for j in 0..2 {
                let fd = (ga[j] - gb[j]) / (2.0 * e);
                assert!((fd - jet.hess[j * 2 + i]).abs() < 1e-5, "hess {i}{j}");
            }
        }
    }

    fn seeded_cache(p: &Problem, center: &[f64], h: f64) -> EvalCache {
        let n = center.len();
        let mut cache = EvalCache::new(100);
        evaluate(p, center, &mut cache).unwrap();
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let mut x = center.to_vec();
                x[i] += sgn * h;
                evaluate(p, &x, &mut cache).unwrap();
            }
            for j in i + 1..n {
                let mut x = center.to_vec();
                x[i] += h;
                x[j] += h;
                evaluate(p, &x, &mut cache).unwrap();
            }
        }
        cache
    }

    #[test]
    fn search_finds_interior_minimizer() {
        // minimizer (0.3, -0.2) lies inside the radius-2 ball around the origin
        let p = unconstrained(2, |x| (x[0] - 0.3).powi(2) + 3.0 * (x[1] + 0.2).powi(2) + x[0] * x[1]);
        let cache = seeded_cache(&p, &[0.0, 0.0], 0.5);
        let merit = params(vec![], vec![]);
        let z = search_step(&p, &cache, &[0.0, 0.0], 1.0, &merit, &SearchOptions::default()).unwrap();
        // closed form: grad = 0 -> [2 1; 1 6] x = [0.6, -1.2]
        let det = 11.0;
        let xs = [(6.0 * 0.6 - 1.0 * -1.2) / det, (2.0 * -1.2 - 0.6) / det];
        assert!((z[0] - xs[0]).abs() < 1e-6 && (z[1] - xs[1]).abs() < 1e-6, "{z:?} vs {xs:?}");
    }

    #[test]
    fn search_skips_without_points() {
        let p = unconstrained(2, |x| x[0]);
        let mut cache = EvalCache::new(10);
        evaluate(&p, &[0.0, 0.0], &mut cache).unwrap();
        evaluate(&p, &[0.1, 0.0], &mut cache).unwrap();
        let merit = params(vec![], vec![]);
        assert!(search_step(&p, &cache, &[0.0, 0.0], 1.0, &merit, &SearchOptions::default()).is_none());
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn search_respects_x() {
        // unconstrained minimizer (5, 5) lies outside both the box and the row
        let p = Problem::builder("box", 2)
            .objective(|x| (x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2))
            .linear(vec![1.0, 2.0], 1.0)
            .uniform_bounds(-1.0, 0.8)
            .x0(vec![0.0, 0.0])
            .build()
            .unwrap();
        let cache = seeded_cache(&p, &[0.0, 0.0], 0.2);
        let merit = params(vec![], vec![]);
        let z = search_step(&p, &cache, &[0.0, 0.0], 5.0, &merit, &SearchOptions::default()).unwrap();
        assert!(p.in_x(&z), "{z:?}");
        assert!(p.objective(&z) < p.objective(&[0.0, 0.0]));

        let eb = ExtremeBarrier;
        let z = search_step(&p, &cache, &[0.0, 0.0], 5.0, &eb, &SearchOptions::default()).unwrap();
        assert!(p.in_x(&z));
    }

    proptest::proptest! {
        #[test]
        fn interpolation_reproduces_random_quadratics(
            n in 1usize..=4,
            coeffs in proptest::collection::vec(-2.0f64..2.0, 15),
            jitter in proptest::collection::vec(-0.3f64..0.3, 60),
        ) {
            let q = (n + 1) * (n + 2) / 2;
            // perturbed canonical poised set: 0, e_i, -e_i, e_i + e_j
            let mut pts = vec![vec![0.0; n]];
            for i in 0..n {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                pts.push(a.clone());
                a[i] = -1.0;
                pts.push(a);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let mut a = vec![0.0; n];
                    a[i] = 1.0;
                    a[j] = 1.0;
                    pts.push(a);
                }
            }
            proptest::prop_assert_eq!(pts.len(), q);
            for (k, p) in pts.iter_mut().enumerate() {
                for (i, v) in p.iter_mut().enumerate() {
                    *v += 0.2 * jitter[(k * 4 + i) % 60];
                }
            }
            let c = coeffs[0];
            let g: Vec<f64> = coeffs[1..=n].to_vec();
            let mut hm = DMatrix::<f64>::zeros(n, n);
            let mut k = 5;
            for i in 0..n {
                for j in i..n {
                    hm[(i, j)] = coeffs[k % 15];
                    hm[(j, i)] = coeffs[k % 15];
                    k += 1;
                }
            }
            let truth = QuadraticModel { c, grad: g.clone(), hess: hm.clone(), center: vec![0.0; n], kind: ModelKind::Interpolation };
            let vals: Vec<f64> = pts.iter().map(|p| truth.value(p)).collect();
            let m = build_quadratic_model(&pts, &vals, &vec![0.0; n]).unwrap();
            proptest::prop_assert_eq!(m.kind, ModelKind::Interpolation);
            let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
            proptest::prop_assert!(rel(m.c, c) < 1e-6);
            for i in 0..n {
                proptest::prop_assert!(rel(m.grad[i], g[i]) < 1e-6);
                for j in 0..n {
                    proptest::prop_assert!(rel(m.hess[(i, j)], hm[(i, j)]) < 1e-6);
                }
            }
            let vmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (p, v) in pts.iter().zip(&vals) {
                proptest::prop_assert!((m.value(p) - v).abs() <= 1e-8 * (1.0 + vmax));
            }
        }

        #[test]
        fn mfn_of_affine_data_is_flat(
            n in 1usize..=4,
            extra in 0usize..4,
            coeffs in proptest::collection::vec(-3.0f64..3.0, 5),
            pts_raw in proptest::collection::vec(-1.0f64..1.0, 40),
        ) {
            let count = (n + 1 + extra).min((n + 1) * (n + 2) / 2 - 1).max(n + 1);
            let pts: Vec<Vec<f64>> = (0..count).map(|k| (0..n).map(|i| pts_raw[(k * n + i) % 40]).collect()).collect();
            let vals: Vec<f64> = pts.iter().map(|p| coeffs[0] + dot(&coeffs[1..=n], p)).collect();
            if let Ok(m) = build_quadratic_model(&pts, &vals, &vec![0.0; n]) {
                proptest::prop_assert_eq!(m.kind, ModelKind::MinFrobenius);
                proptest::prop_assert!(m.hess.norm() <= 1e-8);
            }
        }
    }
}
