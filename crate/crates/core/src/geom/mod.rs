//! Floating-point geometry of great-hypersphere arrangements.
//!
//! A great subsphere `S^k` is handled in its own coordinates: a polyhedral
//! cone in `R^{k+1}` given by unit normals `u_i` with `<u_i, x> >= 0`.

pub mod cone;
pub mod linalg;
pub mod lp;
pub mod sampling;

use std::collections::HashMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::combinat::cells_count;
use crate::error::{Error, Result};
use linalg::{complement, coords, dot, normalize, scale};
use lp::{classify, max_margin, Feasibility};

pub use cone::{
    cell_f_vector, cone_meets_subspace, cones_intersect, project_onto_cone, solid_angle_mc,
    FaceLattice,
};
pub use lp::strict_feasibility;
pub use sampling::{random_frame, sample_normal, uniform_direction, KappaFamily};

/// A point of the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; `None` for a (near) zero vector.
    pub fn new(v: Vec<f64>) -> Option<Self> {
        normalize(&v, 1e-300).map(UnitVector)
    }

    pub(crate) fn from_unit(v: Vec<f64>) -> Self {
        debug_assert!((linalg::norm(&v) - 1.0).abs() < 1e-12);
        UnitVector(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Orthonormal basis of the linear span of a great subsphere `S^k` inside `R^{d+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsphereBasis {
    pub columns: Vec<Vec<f64>>,
}

impl SubsphereBasis {
    pub fn dim(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn to_local(&self, v: &[f64]) -> Vec<f64> {
        coords(v, &self.columns)
    }

    pub fn to_ambient(&self, c: &[f64]) -> Vec<f64> {
        linalg::combine(c, &self.columns, self.columns[0].len())
    }
}

/// Basis of `S^d` intersected with the hyperspheres `u_i^perp`.
pub fn intersect_to_subsphere(normals: &[Vec<f64>], d: usize) -> Result<SubsphereBasis> {
    if normals.len() > d {
        return Err(Error::Precondition(format!(
            "{} normals leave nothing of S^{d}",
            normals.len()
        )));
    }
    if normals.iter().any(|u| u.len() != d + 1) {
        return Err(Error::Precondition("normals must live in R^{d+1}".into()));
    }
    Ok(SubsphereBasis {
        columns: complement(normals, d + 1)?,
    })
}

/// Restricts normals to the subsphere: local coordinates, renormalized.
/// Fails when a normal is (nearly) orthogonal to the subspace.
pub fn restrict_normals(normals: &[Vec<f64>], basis: &SubsphereBasis) -> Result<Vec<Vec<f64>>> {
    normals
        .iter()
        .map(|u| {
            normalize(&basis.to_local(u), 1e-8)
                .ok_or_else(|| Error::Degenerate("normal nearly orthogonal to subsphere".into()))
        })
        .collect()
}

/// A cell `{x : <u_i, x> >= 0}` in local coordinates with a strictly interior witness.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalCell {
    pub normals: Vec<Vec<f64>>,
    pub witness: Vec<f64>,
}

impl SphericalCell {
    /// The cell of the arrangement `normals` containing `x`.
    pub fn containing(normals: &[Vec<f64>], x: &[f64]) -> Result<Self> {
        let mut out = Vec::with_capacity(normals.len());
        for u in normals {
            let s = dot(u, x);
            if s.abs() < 1e-9 {
                return Err(Error::Degenerate("point within 1e-9 of a hypersphere".into()));
            }
            out.push(if s > 0.0 { u.clone() } else { scale(u, -1.0) });
        }
        Ok(SphericalCell {
            normals: out,
            witness: x.to_vec(),
        })
    }

    /// Sphere dimension `k` of the ambient `S^k`.
    pub fn dim(&self) -> usize {
        self.witness.len() - 1
    }

    /// `min_i <u_i, x>`, `+inf` without constraints.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .map(|u| dot(u, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.margin(x) >= 0.0
    }
}

/// Cell of an arrangement: sign pattern and interior point.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrangementCell {
    pub signs: Vec<i8>,
    pub witness: Vec<f64>,
}

/// All cells of `m` great hyperspheres in `S^k`.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub k: usize,
    pub normals: Vec<Vec<f64>>,
    pub cells: Vec<ArrangementCell>,
}

impl Arrangement {
    pub fn cell(&self, i: usize) -> SphericalCell {
        let c = &self.cells[i];
        SphericalCell {
            normals: self
                .normals
                .iter()
                .zip(&c.signs)
                .map(|(u, &s)| scale(u, s as f64))
                .collect(),
            witness: c.witness.clone(),
        }
    }

    pub fn sign_vector(&self, x: &[f64]) -> Vec<i8> {
        self.normals
            .iter()
            .map(|u| if dot(u, x) >= 0.0 { 1 } else { -1 })
            .collect()
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let s = self.sign_vector(x);
        self.cells.iter().position(|c| c.signs == s)
    }

    pub fn index_by_signs(&self) -> HashMap<Vec<i8>, usize> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c.signs.clone(), i))
            .collect()
    }
}

fn signed_rows(normals: &[Vec<f64>], signs: &[i8]) -> Vec<Vec<f64>> {
    normals
        .iter()
        .zip(signs)
        .map(|(u, &s)| scale(u, s as f64))
        .collect()
}

/// Enumerates the cells of the arrangement of `normals` (unit vectors in
/// `R^{k+1}`) by inserting one hypersphere at a time.
pub fn build_arrangement(normals: &[Vec<f64>], k: usize) -> Result<Arrangement> {
    if normals.is_empty() {
        return Err(Error::Precondition("need at least one hypersphere".into()));
    }
    if normals.iter().any(|u| u.len() != k + 1) {
        return Err(Error::Precondition(format!("normals must live in R^{}", k + 1)));
    }
    let normals: Vec<Vec<f64>> = normals
        .iter()
        .map(|u| normalize(u, 1e-300).ok_or_else(|| Error::Precondition("zero normal".into())))
        .collect::<Result<_>>()?;
    let mut start = vec![0.0; k + 1];
    start[0] = 1.0;
    let mut cells = vec![ArrangementCell {
        signs: Vec::new(),
        witness: start,
    }];
    for (i, u) in normals.iter().enumerate() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            let rows = signed_rows(&normals[..i], &cell.signs);
            let s = dot(u, &cell.witness);
            let known = if s > 1e-9 {
                Some(1i8)
            } else if s < -1e-9 {
                Some(-1)
            } else {
                None
            };
            let sides: &[i8] = match known {
                Some(1) => &[-1],
                Some(_) => &[1],
                None => &[1, -1],
            };
            if let Some(side) = known {
                let mut signs = cell.signs.clone();
                signs.push(side);
                next.push(ArrangementCell {
                    signs,
                    witness: cell.witness.clone(),
                });
            }
            for &side in sides {
                let mut r = rows.clone();
                r.push(scale(u, side as f64));
                let sol = max_margin(&r)?;
                match classify(sol.margin) {
                    Feasibility::Empty => {}
                    Feasibility::Degenerate => {
                        return Err(Error::Degenerate(format!(
                            "margin {:e} while inserting hypersphere {i}",
                            sol.margin
                        )))
                    }
                    Feasibility::Interior => {
                        let mut signs = cell.signs.clone();
                        signs.push(side);
                        let witness = normalize(&sol.point, 1e-300).expect("interior point");
                        next.push(ArrangementCell { signs, witness });
                    }
                }
            }
        }
        cells = next;
    }
    let expected = cells_count(normals.len() as u32, k as u32)
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX);
    if cells.len() != expected {
        return Err(Error::Degenerate(format!(
            "arrangement has {} cells, expected {expected}",
            cells.len()
        )));
    }
    Ok(Arrangement { k, normals, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::faces_count;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_normals(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<Vec<f64>> {
        (0..m).map(|_| uniform_direction(rng, k + 1)).collect()
    }

    #[test]
    fn subsphere_examples() {
        let b = intersect_to_subsphere(&[vec![0.0, 0.0, 1.0]], 2).unwrap();
        assert_eq!(b.dim(), 1);
        for c in &b.columns {
            assert!(c[2].abs() < 1e-15);
        }
        let b = intersect_to_subsphere(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]], 3).unwrap();
        assert_eq!(b.columns.len(), 2);
        for (i, x) in b.columns.iter().enumerate() {
            assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
            for (j, y) in b.columns.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(x, y) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subsphere_orthogonal_to_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..1000 {
            let d = 2 + t % 4;
            let j = 1 + t % d;
            let normals = random_normals(&mut rng, j, d);
            let b = intersect_to_subsphere(&normals, d).unwrap();
            assert_eq!(b.dim(), d - j);
            for c in &b.columns {
                for u in &normals {
                    assert!(dot(c, u).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn small_arrangements() {
        let a = build_arrangement(&[vec![0.0, 0.0, 1.0]], 2).unwrap();
        assert_eq!(a.cells.len(), 2);
        let e: Vec<Vec<f64>> = (0..3).map(|i| linalg::unit(3, i)).collect();
        let a = build_arrangement(&e, 2).unwrap();
        assert_eq!(a.cells.len(), 8);
        for i in 0..8 {
            assert_eq!(cell_f_vector(&a.cell(i), 1).unwrap(), vec![3, 3]);
        }
        assert!(matches!(
            build_arrangement(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]], 2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn six_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = build_arrangement(&random_normals(&mut rng, 6, 2), 2).unwrap();
        assert_eq!(a.cells.len(), 32);
        let total: usize = (0..32).map(|i| cell_f_vector(&a.cell(i), 0).unwrap()[0]).sum();
        assert_eq!(total, 120);
    }

    #[test]
    fn arrangement_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for k in 1..=4usize {
            for m in 1..=8usize {
                let a = build_arrangement(&random_normals(&mut rng, m, k), k).unwrap();
                let signs: HashSet<_> = a.cells.iter().map(|c| c.signs.clone()).collect();
                assert_eq!(signs.len(), a.cells.len());
                for c in &a.cells {
                    assert_eq!(a.sign_vector(&c.witness), c.signs);
                }
                // each l-face is shared by 2^{k-l} cells
                let mut totals = vec![0usize; k];
                for i in 0..a.cells.len() {
                    let f = cell_f_vector(&a.cell(i), k.saturating_sub(1)).unwrap();
                    for (t, x) in totals.iter_mut().zip(&f) {
                        *t += x;
                    }
                    if m > k {
                        let euler: i64 = f.iter().enumerate().map(|(j, x)| if j % 2 == 0 { *x as i64 } else { -(*x as i64) }).sum();
                        assert_eq!(euler, 1 - (-1i64).pow(k as u32), "k={k} m={m} f={f:?}");
                    }
                }
                if m > k {
                    for (l, t) in totals.iter().enumerate() {
                        let expect = faces_count(m as u32, k as u32, l as u32).unwrap().to_integer();
                        assert_eq!(
                            *t as u64,
                            expect.to_u64().unwrap() << (k - l),
                            "k={k} m={m} l={l}"
                        );
                    }
                }
            }
        }
    }
}
