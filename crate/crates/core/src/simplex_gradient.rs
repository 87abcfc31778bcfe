//! Simplex gradients and poll ordering.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::directions::{DirectionSet, RANK_TOL};
use crate::problem::{dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentIndicator {
    pub vec: Vec<f64>,
    pub valid: bool,
}

impl AscentIndicator {
    pub fn invalid(n: usize) -> Self {
        AscentIndicator {
            vec: vec![0.0; n],
            valid: false,
        }
    }
}

/// Least-squares `g` with `(y_i - center)^T g ~ merits_i - center_merit`.
///
/// Underdetermined systems get the minimum-norm solution. The result is
/// invalid when no points are given, any value is non-finite, or the
/// displacement matrix has numerical rank zero.
pub fn simplex_gradient(center: &[f64], center_merit: f64, points: &[Vec<f64>], merits: &[f64]) -> AscentIndicator {
    let n = center.len();
    if points.is_empty() || points.len() != merits.len() || !center_merit.is_finite() {
        return AscentIndicator::invalid(n);
    }
    if merits.iter().any(|m| !m.is_finite()) {
        return AscentIndicator::invalid(n);
    }
    let k = points.len();
    // rows are displacements: S^T
    let st = DMatrix::from_fn(k, n, |i, j| points[i][j] - center[j]);
    let delta = DVector::from_iterator(k, merits.iter().map(|m| m - center_merit));

    let svd = st.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return AscentIndicator::invalid(n);
    }
    match svd.solve(&delta, RANK_TOL * smax) {
        Ok(g) if g.iter().all(|v| v.is_finite()) => AscentIndicator {
            vec: g.iter().copied().collect(),
            valid: true,
        },
        _ => AscentIndicator::invalid(n),
    }
}

/// Largest angle with the ascent vector first; stable for ties. Invalid or
/// zero indicators leave the order unchanged.
pub fn order_poll_directions(dirs: &DirectionSet, ascent: &AscentIndicator) -> DirectionSet {
    let a = &ascent.vec;
    let an = norm(a);
    if !ascent.valid || an == 0.0 {
        return dirs.clone();
    }
    let mut keyed: Vec<(f64, &Vec<f64>)> = dirs
        .dirs
        .iter()
        .map(|d| (dot(d, a) / (norm(d) * an), d))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    DirectionSet {
        dirs: keyed.into_iter().map(|(_, d)| d.clone()).collect(),
        provenance: dirs.provenance,
    }
}
