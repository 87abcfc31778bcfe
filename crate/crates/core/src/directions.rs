//! Poll direction sets.
//!
//! The default set is `[1, -1, I, -I]` normalized. When linear rows are kept
//! as hard constraints, directions are instead built from the generators of
//! the epsilon-tangent cone `{d : a_i^T d <= 0, i epsilon-active}` after
//! scaling every row to unit norm.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{dot, norm};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Default,
    Conforming,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub dirs: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// Divides each row and its right-hand side by the row norm.
pub fn scale_linear_rows(a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut a_bar = Vec::with_capacity(a.len());
    let mut b_bar = Vec::with_capacity(b.len());
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let len = norm(row);
        if len == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        a_bar.push(row.iter().map(|v| v / len).collect());
        b_bar.push(bi / len);
    }
    Ok((a_bar, b_bar))
}

/// Indices `i` with `a_i^T x >= b_i - eps`.
pub fn eps_active_set(a_bar: &[Vec<f64>], b_bar: &[f64], x: &[f64], eps: f64) -> Vec<usize> {
    a_bar
        .iter()
        .zip(b_bar)
        .enumerate()
        .filter(|(_, (row, &b))| dot(row, x) >= b - eps)
        .map(|(i, _)| i)
        .collect()
}

/// `{±1/sqrt(n), ±e_i}`, with duplicates removed (they coincide when `n = 1`).
pub fn default_directions(n: usize) -> DirectionSet {
    let s = 1.0 / (n as f64).sqrt();
    let mut dirs = vec![vec![s; n], vec![-s; n]];
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            dirs.push(e);
        }
    }
    DirectionSet {
        dirs: dedup(dirs),
        provenance: Provenance::Default,
    }
}

/// Generators of `{d : W d <= 0}` for linearly independent active rows `W`.
///
/// Returns `±` an orthonormal basis of `null(W)` together with the normalized
/// columns of `-W^T (W W^T)^{-1}`. Each of the latter points strictly into
/// one face of the cone and stays on the others.
pub fn conforming_directions(active: &[Vec<f64>], n: usize) -> Result<DirectionSet> {
    let k = active.len();
    if k == 0 {
        return Ok(default_directions(n));
    }
    if k > n {
        return Err(Error::DegenerateActiveSet);
    }
    let w = DMatrix::from_fn(k, n, |i, j| active[i][j]);

    let sv = w.singular_values();
    let largest = sv.max();
    if !(largest > 0.0) || sv.min() <= RANK_TOL * largest {
        return Err(Error::DegenerateActiveSet);
    }

    let mut dirs = Vec::with_capacity(2 * (n - k) + k);

    // Columns k.. of the full Q in W^T = Q R span null(W).
    let mut wt_square = DMatrix::<f64>::zeros(n, n);
    wt_square.view_mut((0, 0), (n, k)).copy_from(&w.transpose());
    let q = wt_square.qr().q();
    for j in k..n {
        let col: Vec<f64> = q.column(j).iter().copied().collect();
        let neg: Vec<f64> = col.iter().map(|v| -v).collect();
        dirs.push(unit(col));
        dirs.push(unit(neg));
    }

    let gram = &w * w.transpose();
    let gram_inv = gram
        .cholesky()
        .ok_or(Error::DegenerateActiveSet)?
        .inverse();
    let pinv = w.transpose() * gram_inv;
    for i in 0..k {
        let col: DVector<f64> = -pinv.column(i);
        dirs.push(unit(col.iter().copied().collect()));
    }

    Ok(DirectionSet {
        dirs,
        provenance: Provenance::Conforming,
    })
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let len = norm(&v);
    for x in &mut v {
        *x /= len;
    }
    v
}

fn dedup(dirs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(dirs.len());
    for d in dirs {
        if !out
            .iter()
            .any(|o| crate::problem::distance(o, &d) <= 1e-12)
        {
            out.push(d);
        }
    }
    out
}
