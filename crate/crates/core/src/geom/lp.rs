//! Dense simplex for the strict-feasibility margin of a homogeneous cone.
//!
//! Solves `max t` subject to `M y >= t 1` and `|y_j| <= 1`, with `y = p - q`,
//! `0 <= p, q <= 1`. Every right-hand side is zero or one, so the slack basis
//! is feasible from the start and no phase one is needed.

use crate::error::{Error, Result};

/// Above this margin a constraint system has a strictly interior point.
pub const INTERIOR_TOL: f64 = 1e-7;
/// At or below this margin the interior is empty.
pub const EMPTY_TOL: f64 = 1e-10;

const PIVOT_EPS: f64 = 1e-12;

/// Optimal margin and a maximizing `y`.
#[derive(Clone, Debug)]
pub struct MarginSolution {
    pub margin: f64,
    pub point: Vec<f64>,
}

/// Three-way reading of a margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Interior,
    Empty,
    Degenerate,
}

pub fn classify(margin: f64) -> Feasibility {
    if margin > INTERIOR_TOL {
        Feasibility::Interior
    } else if margin <= EMPTY_TOL {
        Feasibility::Empty
    } else {
        Feasibility::Degenerate
    }
}

/// Like [`classify`] but turns the degenerate band into an error.
pub fn is_interior(margin: f64) -> Result<bool> {
    match classify(margin) {
        Feasibility::Interior => Ok(true),
        Feasibility::Empty => Ok(false),
        Feasibility::Degenerate => Err(Error::Degenerate(format!(
            "LP margin {margin:e} inside the degeneracy band"
        ))),
    }
}

/// Optimal `t`; `+inf` when there are no constraints.
pub fn strict_feasibility(rows: &[Vec<f64>]) -> Result<f64> {
    Ok(max_margin(rows)?.margin)
}

/// Solves the margin LP and returns the optimum with its `y`.
pub fn max_margin(rows: &[Vec<f64>]) -> Result<MarginSolution> {
    let Some(first) = rows.first() else {
        return Ok(MarginSolution {
            margin: f64::INFINITY,
            point: Vec::new(),
        });
    };
    let n = first.len();
    if rows.iter().any(|r| r.len() != n || r.iter().any(|x| !x.is_finite())) {
        return Err(Error::Numeric("constraint rows must be finite and of equal length".into()));
    }
    let m = rows.len();
    // columns: p (n), q (n), t (1), slacks (m + 2n), rhs
    let nvar = 2 * n + 1;
    let nrow = m + 2 * n;
    let width = nvar + nrow + 1;
    let mut tab = vec![0.0; (nrow + 1) * width];
    let rhs = width - 1;
    for (i, r) in rows.iter().enumerate() {
        let row = &mut tab[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = -r[j];
            row[n + j] = r[j];
        }
        row[2 * n] = 1.0;
        row[nvar + i] = 1.0;
    }
    for j in 0..2 * n {
        let i = m + j;
        let row = &mut tab[i * width..(i + 1) * width];
        row[j] = 1.0;
        row[nvar + i] = 1.0;
        row[rhs] = 1.0;
    }
    // objective row holds -c; maximize t
    tab[nrow * width + 2 * n] = -1.0;
    let mut basis: Vec<usize> = (nvar..nvar + nrow).collect();

    let cap = 50 * (nrow + nvar) + 100;
    let mut iter = 0;
    loop {
        iter += 1;
        if iter > cap {
            return Err(Error::Numeric(format!("simplex exceeded {cap} pivots")));
        }
        let obj = &tab[nrow * width..];
        // Bland: lowest-index improving column
        let Some(enter) = (0..nvar + nrow).find(|&j| obj[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..nrow {
            let a = tab[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = tab[i * width + rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Err(Error::Numeric("margin LP unbounded".into()));
        };
        pivot(&mut tab, width, nrow + 1, pr, enter);
        basis[pr] = enter;
    }
    let mut x = vec![0.0; nvar];
    for (i, &b) in basis.iter().enumerate() {
        if b < nvar {
            x[b] = tab[i * width + rhs];
        }
    }
    let point = (0..n).map(|j| x[j] - x[n + j]).collect();
    Ok(MarginSolution {
        margin: x[2 * n],
        point,
    })
}

fn pivot(tab: &mut [f64], width: usize, rows: usize, pr: usize, pc: usize) {
    let p = tab[pr * width + pc];
    for v in &mut tab[pr * width..(pr + 1) * width] {
        *v /= p;
    }
    let (before, rest) = tab.split_at_mut(pr * width);
    let (prow, after) = rest.split_at_mut(width);
    let update = |row: &mut [f64]| {
        let f = row[pc];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
        }
    };
    before.chunks_mut(width).for_each(update);
    after.chunks_mut(width).take(rows - pr - 1).for_each(update);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identity_margin_is_one() {
        let m = strict_feasibility(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let sol = max_margin(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((sol.point[0] - 1.0).abs() < 1e-12 && (sol.point[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposing_halfspaces_are_degenerate() {
        let m = strict_feasibility(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(m.abs() < 1e-12);
        assert_eq!(classify(m), Feasibility::Empty);
    }

    #[test]
    fn empty_system_is_unbounded() {
        assert_eq!(strict_feasibility(&[]).unwrap(), f64::INFINITY);
        assert!(strict_feasibility(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify(0.5), Feasibility::Interior);
        assert_eq!(classify(1e-12), Feasibility::Empty);
        assert_eq!(classify(1e-8), Feasibility::Degenerate);
        assert!(is_interior(1e-8).is_err());
    }

    /// Vertex-enumeration oracle: the optimum of the margin LP in 2 or 3
    /// variables is attained where `n + 1` of the constraints `a.y - t = 0`,
    /// `y_j = +-1` are tight.
    fn brute_force(rows: &[Vec<f64>]) -> f64 {
        let n = rows[0].len();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for r in rows {
            let mut a = r.clone();
            a.push(-1.0);
            planes.push((a, 0.0));
        }
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; n + 1];
                a[j] = 1.0;
                planes.push((a, s));
            }
        }
        let dim = n + 1;
        let mut best = f64::NEG_INFINITY;
        let idx: Vec<usize> = (0..planes.len()).collect();
        for combo in combinations(&idx, dim) {
            let a = nalgebra::DMatrix::from_fn(dim, dim, |i, j| planes[combo[i]].0[j]);
            let b = nalgebra::DVector::from_fn(dim, |i, _| planes[combo[i]].1);
            let Some(z) = a.lu().solve(&b) else { continue };
            let (y, t) = (z.rows(0, n), z[n]);
            let ok = y.iter().all(|v| v.abs() <= 1.0 + 1e-9)
                && rows
                    .iter()
                    .all(|r| r.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>() >= t - 1e-9);
            if ok && z.iter().all(|v| v.is_finite()) {
                best = best.max(t);
            }
        }
        best
    }

    fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            for mut rest in combinations(&items[i + 1..], k - 1) {
                rest.insert(0, x);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn matches_vertex_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let n = 2 + trial % 2;
            let m = rng.random_range(1..6);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let lp = strict_feasibility(&rows).unwrap();
            let oracle = brute_force(&rows);
            assert!((lp - oracle).abs() < 1e-9, "trial {trial}: {lp} vs {oracle}");
        }
    }
}
