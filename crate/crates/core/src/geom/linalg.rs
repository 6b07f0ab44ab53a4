//! Small dense vector helpers. Vectors are plain `Vec<f64>` / `&[f64]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s b` in place.
pub fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

/// Unit vector along `a`, or `None` below `tiny`.
pub fn normalize(a: &[f64], tiny: f64) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > tiny).then(|| scale(a, 1.0 / n))
}

pub fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Removes the components of `v` along the orthonormal `basis` (two passes).
pub fn reject(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(v, -c, b);
        }
    }
}

/// Gram-Schmidt on `vectors`; fails if a residual falls below `rel_tol` of its original norm.
pub fn orthonormalize(vectors: &[Vec<f64>], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let n0 = norm(v);
        let mut w = v.clone();
        reject(&mut w, &out);
        let n = norm(&w);
        if !(n > rel_tol * n0) {
            return Err(Error::Degenerate(format!(
                "vectors nearly dependent (residual ratio {:e})",
                n / n0
            )));
        }
        out.push(scale(&w, 1.0 / n));
    }
    Ok(out)
}

/// Orthonormal basis of the orthogonal complement of `vectors` in `R^dim`.
/// Fails when the inputs are dependent up to condition number ~1e8.
pub fn complement(vectors: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let q = orthonormalize(vectors, 1e-8)?;
    let mut basis = q.clone();
    let mut out = Vec::with_capacity(dim - q.len());
    // complete with coordinate axes, largest residual first
    while basis.len() < dim {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..dim {
            let mut e = unit(dim, i);
            reject(&mut e, &basis);
            let n = norm(&e);
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, e));
            }
        }
        let (n, e) = best.unwrap();
        let e = scale(&e, 1.0 / n);
        basis.push(e.clone());
        out.push(e);
    }
    Ok(out)
}

/// Coordinates of `v` in the orthonormal `basis`.
pub fn coords(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    basis.iter().map(|b| dot(v, b)).collect()
}

/// `sum c_i basis_i`.
pub fn combine(c: &[f64], basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (ci, b) in c.iter().zip(basis) {
        axpy(&mut out, *ci, b);
    }
    out
}

/// Least-squares coefficients `lambda` minimizing `|sum lambda_i a_i - target|`.
pub fn least_squares(a: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    let dim = target.len();
    let m = DMatrix::from_fn(dim, a.len(), |i, j| a[j][i]);
    let gram = m.transpose() * &m;
    let rhs = m.transpose() * DVector::from_column_slice(target);
    gram.cholesky().map(|c| c.solve(&rhs).iter().copied().collect())
}
